//! Small benchmark datasets with known structure.

use rand::Rng;

use crate::datamodel::{FeatureMatrix, SeverityLabel};
use crate::rng;

/// Three Gaussian blobs (unit variance) in the plane, centers an
/// equilateral triangle with side `separation`. At separation 10 the
/// classes are separable for all practical purposes.
pub fn gen_blobs(n: usize, separation: f64, seed: u64) -> (FeatureMatrix, Vec<SeverityLabel>) {
    let centers = [
        (0.0, 0.0),
        (separation, 0.0),
        (separation / 2.0, separation * 3f64.sqrt() / 2.0),
    ];
    let mut generator = rng::seeded(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 3;
        let (cx, cy) = centers[class];
        rows.push(vec![
            cx + rng::next_gaussian(&mut generator),
            cy + rng::next_gaussian(&mut generator),
        ]);
        labels.push(SeverityLabel::from_index(class).expect("three blob classes"));
    }
    (FeatureMatrix::from_raw(rows).expect("finite rows"), labels)
}

/// XOR-style checkerboard: two features over the four unit quadrants,
/// label Low on even-parity cells and High on odd ones. Points keep a
/// margin away from the cell borders, so no linear separator exists while
/// axis-aligned splits classify perfectly.
pub fn gen_checkerboard(n: usize, seed: u64) -> (FeatureMatrix, Vec<SeverityLabel>) {
    const GRID: usize = 2;
    const MARGIN: f64 = 0.05;
    let mut generator = rng::seeded(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let cell_x = generator.random_range(0..GRID);
        let cell_y = generator.random_range(0..GRID);
        let dx: f64 = generator.random_range(MARGIN..1.0 - MARGIN);
        let dy: f64 = generator.random_range(MARGIN..1.0 - MARGIN);
        rows.push(vec![cell_x as f64 + dx, cell_y as f64 + dy]);
        labels.push(if (cell_x + cell_y) % 2 == 0 {
            SeverityLabel::Low
        } else {
            SeverityLabel::High
        });
    }
    (FeatureMatrix::from_raw(rows).expect("finite rows"), labels)
}
