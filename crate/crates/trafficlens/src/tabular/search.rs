//! Deterministic k-fold grid search over hyperparameter cells.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{accuracy, Classify, TabularError};
use crate::datamodel::{FeatureMatrix, SeverityLabel};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellScore<P> {
    pub params: P,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome<P> {
    /// Index into `table` of the winning cell: highest mean accuracy,
    /// earliest grid position on ties.
    pub best_index: usize,
    pub table: Vec<CellScore<P>>,
}

impl<P> SearchOutcome<P> {
    pub fn best(&self) -> &CellScore<P> {
        &self.table[self.best_index]
    }
}

/// Cross-validated mean accuracy for every grid cell. Folds are stratified
/// per class and fixed by the seed, so the full score table is reproducible.
pub fn grid_search<P: Clone, M: Classify, F>(
    grid: &[P],
    x: &FeatureMatrix,
    labels: &[SeverityLabel],
    folds: usize,
    seed: u64,
    fit: F,
) -> Result<SearchOutcome<P>, TabularError>
where
    F: Fn(&FeatureMatrix, &[SeverityLabel], &P) -> Result<M, TabularError>,
{
    if grid.is_empty() {
        return Err(TabularError::Config("parameter grid is empty".into()));
    }
    if folds < 2 {
        return Err(TabularError::Config(format!("need at least 2 folds, got {folds}")));
    }
    if labels.len() != x.n_rows() {
        return Err(TabularError::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.n_rows()
        )));
    }
    let fold_assignment = stratified_folds(labels, folds, seed)?;

    let mut table = Vec::with_capacity(grid.len());
    for params in grid {
        let mut fold_accuracies = Vec::with_capacity(folds);
        for fold in 0..folds {
            let train_idx: Vec<usize> =
                (0..labels.len()).filter(|&i| fold_assignment[i] != fold).collect();
            let test_idx: Vec<usize> =
                (0..labels.len()).filter(|&i| fold_assignment[i] == fold).collect();
            let train_y: Vec<SeverityLabel> = train_idx.iter().map(|&i| labels[i]).collect();
            let test_y: Vec<SeverityLabel> = test_idx.iter().map(|&i| labels[i]).collect();

            let model = fit(&x.take_rows(&train_idx), &train_y, params)?;
            let predicted = model.predict(&x.take_rows(&test_idx))?;
            fold_accuracies.push(accuracy(&predicted, &test_y));
        }
        let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds as f64;
        table.push(CellScore { params: params.clone(), fold_accuracies, mean_accuracy });
    }

    let mut best_index = 0;
    for (i, cell) in table.iter().enumerate() {
        if cell.mean_accuracy > table[best_index].mean_accuracy {
            best_index = i;
        }
    }
    Ok(SearchOutcome { best_index, table })
}

/// Deal each class's shuffled members round-robin across folds.
fn stratified_folds(
    labels: &[SeverityLabel],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, TabularError> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); SeverityLabel::COUNT];
    for (i, label) in labels.iter().enumerate() {
        members[label.index()].push(i);
    }
    for (class, pool) in members.iter().enumerate() {
        if !pool.is_empty() && pool.len() < folds {
            return Err(TabularError::Config(format!(
                "{folds} folds exceed the {} members of class {class}",
                pool.len()
            )));
        }
    }
    let mut assignment = vec![0usize; labels.len()];
    for (class, pool) in members.iter().enumerate() {
        let mut shuffled = pool.clone();
        shuffled.shuffle(&mut rng::substream(seed, class as u64));
        for (position, &row) in shuffled.iter().enumerate() {
            assignment[row] = position % folds;
        }
    }
    Ok(assignment)
}
