//! Random forest on Gini CART trees: seeded bootstrap resamples and a
//! random sqrt-D feature subset per node.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gbdt::{check_schema, validate_training_input};
use super::tree::{build_gini_tree, GiniTreeParams, TreeNode};
use super::{Classify, TabularError};
use crate::datamodel::{FeatureMatrix, SeverityLabel};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_child_samples: usize,
    /// Draw each tree's training set with replacement. Disabled, every tree
    /// sees the full data.
    pub bootstrap: bool,
    /// Consider only a random sqrt-D subset of features per node.
    pub sqrt_features: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 12,
            min_child_samples: 2,
            bootstrap: true,
            sqrt_features: true,
        }
    }
}

/// Leaf values are class-frequency vectors; prediction averages them over
/// the trees, so rows sum to 1 by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub params: RfParams,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<TreeNode>,
    /// Cumulative Gini impurity decrease per encoded column.
    pub feature_gain: Vec<f64>,
}

/// Train the forest. Deterministic given the seed: tree `t` draws its
/// bootstrap sample and per-node feature subsets from substream `t`.
pub fn fit_random_forest(
    x: &FeatureMatrix,
    labels: &[SeverityLabel],
    params: &RfParams,
    seed: u64,
) -> Result<RfModel, TabularError> {
    validate_training_input(x, labels)?;
    if params.n_trees == 0 {
        return Err(TabularError::Config("forest needs at least one tree".into()));
    }

    let n = x.n_rows();
    let n_features = x.n_cols();
    let label_ids: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    let subset_size = ((n_features as f64).sqrt().floor() as usize).max(1);
    let tree_params =
        GiniTreeParams { max_depth: params.max_depth, min_child_samples: params.min_child_samples };

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut feature_gain = vec![0.0; n_features];
    for t in 0..params.n_trees {
        let mut tree_rng = rng::substream(seed, t as u64);
        let indices: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| tree_rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let all_features: Vec<usize> = (0..n_features).collect();
        let mut pool = || -> Vec<usize> {
            if params.sqrt_features && subset_size < n_features {
                let mut chosen = all_features.clone();
                chosen.shuffle(&mut tree_rng);
                chosen.truncate(subset_size);
                chosen
            } else {
                all_features.clone()
            }
        };
        let tree = build_gini_tree(
            x,
            &label_ids,
            SeverityLabel::COUNT,
            &tree_params,
            &mut pool,
            &mut feature_gain,
            &indices,
        );
        trees.push(tree);
    }

    Ok(RfModel { params: *params, seed, n_features, trees, feature_gain })
}

impl RfModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

impl Classify for RfModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, TabularError> {
        check_schema(self.n_features, x)?;
        let scale = 1.0 / self.trees.len() as f64;
        Ok((0..x.n_rows())
            .map(|i| {
                let mut mean = vec![0.0; SeverityLabel::COUNT];
                for tree in &self.trees {
                    for (m, v) in mean.iter_mut().zip(tree.evaluate(x.row(i))) {
                        *m += v;
                    }
                }
                for m in &mut mean {
                    *m *= scale;
                }
                mean
            })
            .collect())
    }

    fn n_features(&self) -> usize {
        self.n_features
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::SplitSpec;
    use crate::datasynth::gen_blobs;
    use crate::tabular::accuracy;

    #[test]
    fn degenerate_forest_equals_a_single_cart_tree() {
        let (x, y) = gen_blobs(90, 5.0, 17);
        let params = RfParams {
            n_trees: 1,
            bootstrap: false,
            sqrt_features: false,
            ..RfParams::default()
        };
        let forest = fit_random_forest(&x, &y, &params, 123).unwrap();

        let label_ids: Vec<usize> = y.iter().map(|l| l.index()).collect();
        let mut gains = vec![0.0; x.n_cols()];
        let all: Vec<usize> = (0..x.n_rows()).collect();
        let mut pool = || (0..x.n_cols()).collect::<Vec<usize>>();
        let cart = build_gini_tree(
            &x,
            &label_ids,
            SeverityLabel::COUNT,
            &GiniTreeParams { max_depth: params.max_depth, min_child_samples: 2 },
            &mut pool,
            &mut gains,
            &all,
        );
        for i in 0..x.n_rows() {
            assert_eq!(forest.trees[0].evaluate(x.row(i)), cart.evaluate(x.row(i)));
        }
    }

    #[test]
    fn separable_blobs_score_high_on_held_out_data() {
        let (x, y) = gen_blobs(600, 10.0, 4);
        let ids: Vec<usize> = y.iter().map(|l| l.index()).collect();
        let split = SplitSpec::stratified(0.7, 42).split(x.n_rows(), Some(&ids)).unwrap();
        let (train_x, test_x) = (x.take_rows(&split.train), x.take_rows(&split.test));
        let train_y: Vec<_> = split.train.iter().map(|&i| y[i]).collect();
        let test_y: Vec<_> = split.test.iter().map(|&i| y[i]).collect();

        let model = fit_random_forest(&train_x, &train_y, &RfParams::default(), 42).unwrap();
        let acc = accuracy(&model.predict(&test_x).unwrap(), &test_y);
        assert!(acc >= 0.99, "forest test accuracy {acc}");
    }

    #[test]
    fn same_seed_reproduces_the_model_and_different_seeds_differ() {
        let (x, y) = gen_blobs(150, 2.0, 8);
        let a = fit_random_forest(&x, &y, &RfParams::default(), 5).unwrap();
        let b = fit_random_forest(&x, &y, &RfParams::default(), 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());

        let c = fit_random_forest(&x, &y, &RfParams::default(), 6).unwrap();
        assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn prediction_rows_sum_to_one() {
        let (x, y) = gen_blobs(120, 3.0, 19);
        let model = fit_random_forest(&x, &y, &RfParams::default(), 7).unwrap();
        for row in model.predict_proba(&x).unwrap() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_leaf_forest_is_constant() {
        // Depth 0 forces a single leaf holding the class distribution.
        let (x, y) = gen_blobs(60, 3.0, 23);
        let params = RfParams { n_trees: 1, max_depth: 0, bootstrap: false, ..RfParams::default() };
        let model = fit_random_forest(&x, &y, &params, 1).unwrap();
        let probs = model.predict_proba(&x).unwrap();
        for row in &probs {
            assert_eq!(row, &probs[0]);
        }
    }
}
