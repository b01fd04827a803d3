//! CART decision trees and a bootstrap-aggregated random forest.
//!
//! Each tree of a forest is grown from its own ChaCha8 stream, numbered by
//! the tree's position, so a forest is fully determined by its seed and
//! trees can be grown in any order or concurrently.

mod impurity;
mod tree;

pub use impurity::{entropy, gini, information_gain, Counts, Criterion};
pub use tree::{
    best_split, fit_cart, fit_cart_rows, CartTree, FeatureSubsample, Split, TreeNode, TreeParams,
};

use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::error::{Error, Result};
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub params: TreeParams,
    pub seed: u64,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            params: TreeParams {
                feature_subsample: FeatureSubsample::Sqrt,
                ..TreeParams::default()
            },
            seed: 0,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<CartTree>,
    pub seed: u64,
    pub bootstrap: bool,
    pub n_features: usize,
}

/// Per-tree summary for training logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub stream: u64,
    pub depth: usize,
    pub leaves: usize,
}

impl Forest {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean leaf probability over the trees. The per-tree values are summed
    /// in sorted order, which makes the result independent of tree order.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.mean_probability(x))
    }

    fn mean_probability(&self, x: &[f64]) -> f64 {
        let mut probs: Vec<f64> = self.trees.iter().map(|t| t.root.probability(x)).collect();
        probs.sort_by(f64::total_cmp);
        probs.iter().sum::<f64>() / probs.len() as f64
    }

    pub fn predict_proba_matrix(&self, m: &DesignMatrix) -> Result<Vec<f64>> {
        if m.n_cols != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: m.n_cols,
            });
        }
        Ok(par::map_range(m.n_rows, |i| {
            self.mean_probability(m.row(i))
        }))
    }

    pub fn tree_stats(&self) -> Vec<TreeStats> {
        self.trees
            .iter()
            .enumerate()
            .map(|(i, t)| TreeStats {
                stream: t.stream.unwrap_or(i as u64),
                depth: t.root.depth(),
                leaves: t.root.leaves(),
            })
            .collect()
    }

    /// Structural checks for a forest read from disk.
    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvalidInput("forest has no trees".into()));
        }
        for t in &self.trees {
            if t.n_features != self.n_features {
                return Err(Error::InvalidInput(
                    "trees disagree on feature count".into(),
                ));
            }
            t.check_features()?;
        }
        Ok(())
    }
}

/// Trains `n_trees` CART trees. Tree `i` draws its bootstrap sample (`n`
/// rows with replacement) and its per-node feature subsets from stream `i`
/// of `seed`.
pub fn fit_forest(m: &DesignMatrix, config: &ForestConfig) -> Result<Forest> {
    if config.n_trees == 0 {
        return Err(Error::InvalidInput(
            "a forest needs at least one tree".into(),
        ));
    }
    if m.n_rows == 0 {
        return Err(Error::InvalidInput("cannot fit on an empty matrix".into()));
    }
    let trees = par::map_range(config.n_trees, |i| {
        let stream = i as u64;
        let mut rng = rng::stream(config.seed, stream);
        let rows = if config.bootstrap {
            (0..m.n_rows)
                .map(|_| rng::index(&mut rng, m.n_rows))
                .collect()
        } else {
            (0..m.n_rows).collect()
        };
        fit_cart_rows(m, rows, &config.params, &mut rng).map(|mut t| {
            t.stream = Some(stream);
            t
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        trees,
        seed: config.seed,
        bootstrap: config.bootstrap,
        n_features: m.n_cols,
    })
}
