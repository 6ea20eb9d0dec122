use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use trafficlens::datamodel::{ImageClass, ImageSample};
use trafficlens::vision::{grad_check, train, CnnModel, Tensor, TrainConfig};

fn random_image(side: usize, seed: u64) -> Tensor {
    let mut generator = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Tensor::from_data(
        &[1, side, side, 1],
        (0..side * side).map(|_| generator.random::<f64>()).collect(),
    )
    .unwrap()
}

fn main() {
    for seed in 0..10u64 {
        let model = CnnModel::init((8, 8, 1), seed).unwrap();
        let sample = random_image(8, 100 + seed);
        let mut generator = rand_chacha::ChaCha8Rng::seed_from_u64(200 + seed);
        let class: usize = generator.random_range(0..4);
        let mut target = vec![0.0; 4];
        target[class] = 1.0;
        let err = grad_check(&model, &sample, &[target.clone()]).unwrap();
        let probs = model.forward(&sample).unwrap();
        println!(
            "seed {seed}: gradcheck err {err:.3e}, p[target] = {:.6}, max p = {:.6}",
            probs[0][class],
            probs[0].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        );
    }

    // Augmented flat-class training.
    let flat = |value: f64, label| ImageSample::new(32, 32, 1, vec![value; 1024], label).unwrap();
    let mut dataset = Vec::new();
    for _ in 0..10 {
        dataset.push(flat(0.05, ImageClass::Clear));
        dataset.push(flat(0.95, ImageClass::Congested));
    }
    let mut model = CnnModel::init((32, 32, 1), 4).unwrap();
    let cfg = TrainConfig { epochs: 3, augment: true, ..TrainConfig::default() };
    let history = train(&mut model, &dataset, &cfg).unwrap();
    println!("augmented: loss {:?} acc {:?}", history.epoch_loss, history.epoch_accuracy);
    let cfg = TrainConfig { epochs: 6, augment: true, ..TrainConfig::default() };
    let mut model2 = CnnModel::init((32, 32, 1), 4).unwrap();
    let history2 = train(&mut model2, &dataset, &cfg).unwrap();
    println!("augmented 6ep: acc {:?}", history2.epoch_accuracy);
}
