use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::impurity::{gain_unchecked, Counts, Criterion};
use crate::dataset::DesignMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// How many candidate features each node examines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    #[default]
    All,
    /// `ceil(sqrt(n_features))`.
    Sqrt,
    Count(usize),
}

impl FeatureSubsample {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            FeatureSubsample::All => n_features,
            FeatureSubsample::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            FeatureSubsample::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub criterion: Criterion,
    pub feature_subsample: FeatureSubsample,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            criterion: Criterion::Gini,
            feature_subsample: FeatureSubsample::All,
        }
    }
}

/// A node; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        n0: usize,
        n1: usize,
        probability: f64,
    },
}

impl TreeNode {
    pub fn leaf(counts: Counts) -> Self {
        TreeNode::Leaf {
            n0: counts.n0,
            n1: counts.n1,
            probability: counts.n1 as f64 / counts.total() as f64,
        }
    }

    /// Leaf reached by `x`.
    pub fn find_leaf(&self, x: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if x[*feature] <= *threshold {
                left
            } else {
                right
            };
        }
        node
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        match self.find_leaf(x) {
            TreeNode::Leaf { probability, .. } => *probability,
            TreeNode::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    pub fn internal_nodes(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => {
                1 + left.internal_nodes() + right.internal_nodes()
            }
        }
    }

    fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature,
                left,
                right,
                ..
            } => Some(
                (*feature)
                    .max(left.max_feature().unwrap_or(0))
                    .max(right.max_feature().unwrap_or(0)),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartTree {
    pub root: TreeNode,
    pub params: TreeParams,
    pub n_features: usize,
    /// Random stream the tree was grown from, when part of a forest.
    pub stream: Option<u64>,
}

impl CartTree {
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.root.probability(x))
    }

    pub(crate) fn check_features(&self) -> Result<()> {
        match self.root.max_feature() {
            Some(f) if f >= self.n_features => Err(Error::InvalidInput(format!(
                "tree splits on feature {f} but declares {} features",
                self.n_features
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Threshold strictly below `hi` and at least `lo`, so `lo` goes left and
/// `hi` goes right.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo * 0.5 + hi * 0.5;
    if mid >= lo && mid < hi {
        mid
    } else {
        lo
    }
}

/// Best split of `rows` over `features`: candidate thresholds are the
/// midpoints between consecutive distinct values; the highest gain wins,
/// ties going to the lower feature index and then the lower threshold.
/// `None` if no candidate has positive gain.
pub fn best_split(
    m: &DesignMatrix,
    rows: &[usize],
    features: &[usize],
    criterion: Criterion,
) -> Option<Split> {
    best_candidate(m, rows, features, criterion).filter(|b| b.gain > 0.0)
}

/// Like [`best_split`] but also returns a zero-gain winner.
fn best_candidate(
    m: &DesignMatrix,
    rows: &[usize],
    features: &[usize],
    criterion: Criterion,
) -> Option<Split> {
    if rows.len() < 2 {
        return None;
    }
    let mut parent = Counts::default();
    for &r in rows {
        parent.add(m.y[r]);
    }
    let mut best: Option<Split> = None;
    let mut column: Vec<(f64, u8)> = Vec::with_capacity(rows.len());
    for &f in features {
        column.clear();
        column.extend(rows.iter().map(|&r| (m.x[r * m.n_cols + f], m.y[r])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = Counts::default();
        for k in 1..column.len() {
            left.add(column[k - 1].1);
            let (lo, hi) = (column[k - 1].0, column[k].0);
            if lo == hi {
                continue;
            }
            let right = Counts::new(parent.n0 - left.n0, parent.n1 - left.n1);
            let gain = gain_unchecked(parent, left, right, criterion);
            let threshold = midpoint(lo, hi);
            let better = match best {
                None => true,
                Some(b) => {
                    gain > b.gain
                        || (gain == b.gain
                            && (f, threshold.total_cmp(&b.threshold))
                                < (b.feature, std::cmp::Ordering::Equal))
                }
            };
            if better {
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

struct Grower<'a, R> {
    m: &'a DesignMatrix,
    params: &'a TreeParams,
    n_candidates: usize,
    rng: &'a mut R,
}

impl<R: RngCore> Grower<'_, R> {
    /// Positive-gain split if one exists among the candidates, else the
    /// first zero-gain split found. An impure node is only left unsplit when
    /// all of its rows share one feature vector; zero-gain splits are what
    /// let CART separate XOR-like layouts.
    fn choose_split(&mut self, rows: &[usize]) -> Option<Split> {
        let d = self.m.n_cols;
        if self.n_candidates >= d {
            let all: Vec<usize> = (0..d).collect();
            return best_candidate(self.m, rows, &all, self.params.criterion);
        }
        // Draw a feature order; examine it k at a time until some batch
        // yields a positive-gain split.
        let mut order: Vec<usize> = (0..d).collect();
        rng::shuffle(self.rng, &mut order);
        let mut fallback = None;
        for batch in order.chunks(self.n_candidates) {
            let mut batch = batch.to_vec();
            batch.sort_unstable();
            match best_candidate(self.m, rows, &batch, self.params.criterion) {
                Some(s) if s.gain > 0.0 => return Some(s),
                Some(s) if fallback.is_none() => fallback = Some(s),
                _ => {}
            }
        }
        fallback
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> TreeNode {
        let mut counts = Counts::default();
        for &r in &rows {
            counts.add(self.m.y[r]);
        }
        let stop = counts.is_pure()
            || rows.len() < self.params.min_samples_split
            || self.params.max_depth.is_some_and(|md| depth >= md);
        if stop {
            return TreeNode::leaf(counts);
        }
        let Some(split) = self.choose_split(&rows) else {
            return TreeNode::leaf(counts);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.m.x[r * self.m.n_cols + split.feature] <= split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }
}

/// Grows a CART tree on every row of `m`.
pub fn fit_cart<R: RngCore>(
    m: &DesignMatrix,
    params: &TreeParams,
    rng: &mut R,
) -> Result<CartTree> {
    fit_cart_rows(m, (0..m.n_rows).collect(), params, rng)
}

/// Grows a CART tree on `rows` (repeats allowed, as in a bootstrap sample).
pub fn fit_cart_rows<R: RngCore>(
    m: &DesignMatrix,
    rows: Vec<usize>,
    params: &TreeParams,
    rng: &mut R,
) -> Result<CartTree> {
    if rows.is_empty() {
        return Err(Error::InvalidInput(
            "cannot grow a tree on zero rows".into(),
        ));
    }
    if m.n_cols == 0 {
        return Err(Error::NoFeatures);
    }
    let mut grower = Grower {
        m,
        params,
        n_candidates: params.feature_subsample.resolve(m.n_cols),
        rng,
    };
    let root = grower.grow(rows, 0);
    Ok(CartTree {
        root,
        params: params.clone(),
        n_features: m.n_cols,
        stream: None,
    })
}
