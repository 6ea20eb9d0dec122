use trafficlens::datasynth::{gen_accidents, gen_checkerboard, AccidentGenSpec};
use trafficlens::tabular::{fit_gbdt, fit_logistic, Classify, GbdtParams, LogisticParams};

fn main() {
    let records = gen_accidents(&AccidentGenSpec::default()).unwrap();
    let mut counts = [0usize; 3];
    for r in &records {
        counts[r.severity.index()] += 1;
    }
    let n = records.len() as f64;
    println!(
        "accident marginals: {:?} -> ({:.4}, {:.4}, {:.4})",
        counts,
        counts[0] as f64 / n,
        counts[1] as f64 / n,
        counts[2] as f64 / n
    );

    let (x, y) = gen_checkerboard(400, 77);
    let params = GbdtParams { rounds: 50, max_depth: 3, ..GbdtParams::default() };
    let gbdt = fit_gbdt(&x, &y, &params).unwrap();
    let preds = gbdt.predict(&x).unwrap();
    let acc = preds.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
    println!("checkerboard gbdt train acc (depth3, 50 rounds): {acc:.4}");

    for rounds in [100, 200] {
        for depth in [3, 4] {
            let params = GbdtParams { rounds, max_depth: depth, ..GbdtParams::default() };
            let gbdt = fit_gbdt(&x, &y, &params).unwrap();
            let preds = gbdt.predict(&x).unwrap();
            let acc =
                preds.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
            println!("  rounds {rounds} depth {depth}: {acc:.4}");
        }
    }
    let lr = fit_logistic(&x, &y, &LogisticParams::default()).unwrap();
    let preds = lr.predict(&x).unwrap();
    let acc = preds.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
    println!("checkerboard logistic train acc: {acc:.4}");
}
