//! Binary logistic regression trained by full-batch gradient descent on
//! binary cross-entropy.

use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::error::{Error, Result};
use crate::par;

/// Probability clip applied inside the loss.
pub const LOSS_EPSILON: f64 = 1e-12;

/// Logistic function, stable for large `|z|`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Default label for a probability: 1 iff `p >= threshold`.
pub fn classify(p: f64, threshold: f64) -> u8 {
    u8::from(p >= threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once successive losses differ by less than this.
    pub tol: f64,
    /// Kept for config uniformity: zero-initialised full-batch descent draws
    /// no random numbers.
    pub seed: u64,
    /// L2 penalty `l2 / 2 * |w|^2` added to the loss (bias unpenalised).
    pub l2: f64,
    pub threshold: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iters: 1000,
            tol: 1e-9,
            seed: 0,
            l2: 0.0,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
    pub l2: f64,
    /// `(iteration, loss)`; iteration 0 is the loss of the zero model.
    pub training_history: Vec<(usize, f64)>,
}

impl LogisticModel {
    pub fn zeros(n_features: usize) -> Self {
        Self {
            weights: vec![0.0; n_features],
            bias: 0.0,
            threshold: 0.5,
            l2: 0.0,
            training_history: Vec::new(),
        }
    }

    fn margin(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// `sigmoid(w . x + b)`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(sigmoid(self.margin(x)))
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(classify(self.predict_proba(x)?, self.threshold))
    }

    /// Probabilities for every row of `m`, in row order.
    pub fn predict_proba_matrix(&self, m: &DesignMatrix) -> Result<Vec<f64>> {
        if m.n_cols != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: m.n_cols,
            });
        }
        Ok(par::map_range(m.n_rows, |i| sigmoid(self.margin(m.row(i)))))
    }
}

fn check_shape(model: &LogisticModel, m: &DesignMatrix) -> Result<()> {
    if m.n_rows == 0 {
        return Err(Error::InvalidInput("empty design matrix".into()));
    }
    if m.n_cols != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            got: m.n_cols,
        });
    }
    Ok(())
}

fn penalty(model: &LogisticModel) -> f64 {
    if model.l2 == 0.0 {
        0.0
    } else {
        0.5 * model.l2 * model.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

fn row_loss(p: f64, y: u8) -> f64 {
    let p = p.clamp(LOSS_EPSILON, 1.0 - LOSS_EPSILON);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Mean binary cross-entropy (plus the L2 term, if any).
pub fn bce_loss(model: &LogisticModel, m: &DesignMatrix) -> Result<f64> {
    check_shape(model, m)?;
    let total = par::chunked_reduce(
        m.n_rows,
        0.0,
        |rows| {
            rows.map(|i| row_loss(sigmoid(model.margin(m.row(i))), m.y[i]))
                .sum::<f64>()
        },
        |a, b| a + b,
    );
    Ok(total / m.n_rows as f64 + penalty(model))
}

/// Gradient of [`bce_loss`]: `(X^T (p - y) / n + l2 w, mean(p - y))`.
pub fn gradient(model: &LogisticModel, m: &DesignMatrix) -> Result<(Vec<f64>, f64)> {
    check_shape(model, m)?;
    let (_, gw, gb) = loss_and_gradient(model, m);
    Ok((gw, gb))
}

fn loss_and_gradient(model: &LogisticModel, m: &DesignMatrix) -> (f64, Vec<f64>, f64) {
    let d = m.n_cols;
    let (loss, mut gw, gb) = par::chunked_reduce(
        m.n_rows,
        (0.0, vec![0.0; d], 0.0),
        |rows| {
            let mut gw = vec![0.0; d];
            let (mut loss, mut gb) = (0.0, 0.0);
            for i in rows {
                let x = m.row(i);
                let p = sigmoid(model.margin(x));
                let err = p - m.y[i] as f64;
                loss += row_loss(p, m.y[i]);
                gb += err;
                for (g, v) in gw.iter_mut().zip(x) {
                    *g += err * v;
                }
            }
            (loss, gw, gb)
        },
        |(la, mut ga, ba), (lb, gb_, bb)| {
            for (a, b) in ga.iter_mut().zip(gb_) {
                *a += b;
            }
            (la + lb, ga, ba + bb)
        },
    );
    let n = m.n_rows as f64;
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g = *g / n + model.l2 * w;
    }
    (loss / n + penalty(model), gw, gb / n)
}

/// Rows sorted by their bit patterns, so the summation order, and with it
/// the fitted model, does not depend on the order rows were supplied in.
fn canonical_order(m: &DesignMatrix) -> DesignMatrix {
    let mut idx: Vec<usize> = (0..m.n_rows).collect();
    idx.sort_by(|&a, &b| {
        m.row(a)
            .iter()
            .map(|v| v.to_bits())
            .cmp(m.row(b).iter().map(|v| v.to_bits()))
            .then(m.y[a].cmp(&m.y[b]))
    });
    m.select_rows(&idx)
}

/// Trains from zero weights until the loss change drops below `tol` or
/// `max_iters` updates have been applied.
pub fn fit(m: &DesignMatrix, config: &LogisticConfig) -> Result<LogisticModel> {
    if m.n_rows == 0 {
        return Err(Error::InvalidInput("cannot fit on an empty matrix".into()));
    }
    if !(config.threshold > 0.0 && config.threshold < 1.0) {
        return Err(Error::InvalidInput(format!(
            "threshold {} is not in (0, 1)",
            config.threshold
        )));
    }
    let positives = m.y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == m.n_rows {
        return Err(Error::SingleClass);
    }
    let data = canonical_order(m);
    let mut model = LogisticModel::zeros(m.n_cols);
    model.threshold = config.threshold;
    model.l2 = config.l2;

    let (mut loss, mut gw, mut gb) = loss_and_gradient(&model, &data);
    let mut history = vec![(0, loss)];
    for t in 1..=config.max_iters {
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= config.learning_rate * g;
        }
        model.bias -= config.learning_rate * gb;
        let next;
        (next, gw, gb) = loss_and_gradient(&model, &data);
        history.push((t, next));
        if (next - loss).abs() < config.tol {
            break;
        }
        loss = next;
    }
    model.training_history = history;
    Ok(model)
}
