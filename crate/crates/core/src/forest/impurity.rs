use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split-quality measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Gini,
    Entropy,
}

/// Class counts of a node: `n0` non-defaults, `n1` defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n0: usize,
    pub n1: usize,
}

impl Counts {
    pub fn new(n0: usize, n1: usize) -> Self {
        Self { n0, n1 }
    }

    pub fn total(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn add(&mut self, label: u8) {
        if label == 1 {
            self.n1 += 1
        } else {
            self.n0 += 1
        }
    }

    pub fn is_pure(&self) -> bool {
        self.n0 == 0 || self.n1 == 0
    }
}

/// `1 - p0^2 - p1^2`.
pub fn gini(n0: usize, n1: usize) -> f64 {
    let n = (n0 + n1) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (n0 as f64 / n, n1 as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(n0: usize, n1: usize) -> f64 {
    let n = (n0 + n1) as f64;
    [n0, n1]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

impl Criterion {
    pub fn impurity(self, c: Counts) -> f64 {
        match self {
            Criterion::Gini => gini(c.n0, c.n1),
            Criterion::Entropy => entropy(c.n0, c.n1),
        }
    }
}

/// Parent impurity minus the size-weighted child impurities.
pub fn information_gain(
    parent: Counts,
    left: Counts,
    right: Counts,
    criterion: Criterion,
) -> Result<f64> {
    if left.n0 + right.n0 != parent.n0 || left.n1 + right.n1 != parent.n1 {
        return Err(Error::InvalidInput(format!(
            "children {left:?} + {right:?} do not partition {parent:?}"
        )));
    }
    if parent.total() == 0 {
        return Ok(0.0);
    }
    Ok(gain_unchecked(parent, left, right, criterion))
}

pub(crate) fn gain_unchecked(
    parent: Counts,
    left: Counts,
    right: Counts,
    criterion: Criterion,
) -> f64 {
    let n = parent.total() as f64;
    let children = left.total() as f64 / n * criterion.impurity(left)
        + right.total() as f64 / n * criterion.impurity(right);
    (criterion.impurity(parent) - children).max(0.0)
}
