//! Trained classifiers together with the feature columns they expect, and
//! their JSON file format.

use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::error::{Error, Result};
use crate::features::Scaler;
use crate::forest::{CartTree, Forest, TreeNode, TreeParams};
use crate::logreg::{classify, LogisticModel};

/// On-disk layout, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelFile {
    Logreg {
        columns: Vec<String>,
        weights: Vec<f64>,
        bias: f64,
        threshold: f64,
        scaler: Scaler,
    },
    Forest {
        columns: Vec<String>,
        seed: u64,
        #[serde(default = "half")]
        threshold: f64,
        bootstrap: bool,
        params: TreeParams,
        trees: Vec<TreeNode>,
    },
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    /// Logistic regression on standardized inputs; `scaler` maps raw
    /// feature values to the scale the weights were fitted on.
    Logistic {
        columns: Vec<String>,
        model: LogisticModel,
        scaler: Scaler,
    },
    Forest {
        columns: Vec<String>,
        forest: Forest,
        threshold: f64,
    },
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Logistic { .. } => "logreg",
            TrainedModel::Forest { .. } => "forest",
        }
    }

    pub fn columns(&self) -> &[String] {
        match self {
            TrainedModel::Logistic { columns, .. } | TrainedModel::Forest { columns, .. } => {
                columns
            }
        }
    }

    pub fn threshold(&self) -> f64 {
        match self {
            TrainedModel::Logistic { model, .. } => model.threshold,
            TrainedModel::Forest { threshold, .. } => *threshold,
        }
    }

    /// Default probabilities for raw (unscaled) rows of `m`, whose columns
    /// must equal the model's.
    pub fn predict_proba(&self, m: &DesignMatrix) -> Result<Vec<f64>> {
        if m.columns != self.columns() {
            return Err(Error::ColumnMismatch(format!(
                "model expects {} columns {:?}..., data has {} columns",
                self.columns().len(),
                self.columns().iter().take(3).collect::<Vec<_>>(),
                m.n_cols
            )));
        }
        match self {
            TrainedModel::Logistic { model, scaler, .. } => {
                model.predict_proba_matrix(&scaler.apply(m)?)
            }
            TrainedModel::Forest { forest, .. } => forest.predict_proba_matrix(m),
        }
    }

    /// Default probabilities for row-major `x` already aligned to the
    /// model's columns.
    pub fn predict_proba_aligned(&self, x: Vec<f64>) -> Result<Vec<f64>> {
        let n_cols = self.columns().len();
        if n_cols == 0 || !x.len().is_multiple_of(n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: x.len(),
            });
        }
        let n_rows = x.len() / n_cols;
        let m = DesignMatrix::new(self.columns().to_vec(), x, vec![0; n_rows])?;
        self.predict_proba(&m)
    }

    pub fn classify(&self, probabilities: &[f64]) -> Vec<u8> {
        let t = self.threshold();
        probabilities.iter().map(|&p| classify(p, t)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = match self {
            TrainedModel::Logistic {
                columns,
                model,
                scaler,
            } => ModelFile::Logreg {
                columns: columns.clone(),
                weights: model.weights.clone(),
                bias: model.bias,
                threshold: model.threshold,
                scaler: scaler.clone(),
            },
            TrainedModel::Forest {
                columns,
                forest,
                threshold,
            } => ModelFile::Forest {
                columns: columns.clone(),
                seed: forest.seed,
                threshold: *threshold,
                bootstrap: forest.bootstrap,
                params: forest.trees[0].params.clone(),
                trees: forest.trees.iter().map(|t| t.root.clone()).collect(),
            },
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        // deep trees nest well past serde_json's default recursion limit
        let mut de = serde_json::Deserializer::from_str(s);
        de.disable_recursion_limit();
        let de = serde_stacker::Deserializer::new(&mut de);
        let file = ModelFile::deserialize(de)?;
        match file {
            ModelFile::Logreg {
                columns,
                weights,
                bias,
                threshold,
                scaler,
            } => {
                if weights.len() != columns.len()
                    || scaler.means.len() != columns.len()
                    || scaler.stds.len() != columns.len()
                {
                    return Err(Error::InvalidInput(
                        "logreg model arrays disagree with its columns".into(),
                    ));
                }
                if !(threshold > 0.0 && threshold < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "threshold {threshold} is not in (0, 1)"
                    )));
                }
                let mut model = LogisticModel::zeros(columns.len());
                model.weights = weights;
                model.bias = bias;
                model.threshold = threshold;
                Ok(TrainedModel::Logistic {
                    columns,
                    model,
                    scaler,
                })
            }
            ModelFile::Forest {
                columns,
                seed,
                threshold,
                bootstrap,
                params,
                trees,
            } => {
                let n_features = columns.len();
                let forest = Forest {
                    trees: trees
                        .into_iter()
                        .enumerate()
                        .map(|(i, root)| CartTree {
                            root,
                            params: params.clone(),
                            n_features,
                            stream: Some(i as u64),
                        })
                        .collect(),
                    seed,
                    bootstrap,
                    n_features,
                };
                forest.validate()?;
                Ok(TrainedModel::Forest {
                    columns,
                    forest,
                    threshold,
                })
            }
        }
    }
}
