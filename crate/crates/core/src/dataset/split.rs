use super::DesignMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Train/test halves of one design matrix. Index lists refer to rows of the
/// source matrix and are ascending within each half.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: DesignMatrix,
    pub test: DesignMatrix,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
}

/// Unstratified seeded split. The test half holds
/// `round(test_fraction * n_rows)` rows, clamped so both halves are non-empty.
pub fn split(matrix: &DesignMatrix, test_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "test fraction {test_fraction} is not in (0, 1)"
        )));
    }
    let n = matrix.n_rows;
    if n < 2 {
        return Err(Error::InvalidInput(format!("cannot split {n} rows")));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream(seed, 0), &mut order);
    let mut test_indices = order[..n_test].to_vec();
    let mut train_indices = order[n_test..].to_vec();
    test_indices.sort_unstable();
    train_indices.sort_unstable();

    Ok(SplitPair {
        train: matrix.select_rows(&train_indices),
        test: matrix.select_rows(&test_indices),
        train_indices,
        test_indices,
        seed,
        test_fraction,
    })
}
