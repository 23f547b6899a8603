//! Temperature-scaled sampling priors over datasets.
//!
//! Given subset sizes `n_i`, the base distribution is proportional sampling
//! `q(i) = n_i / sum_n n`. A temperature `tau` flattens or sharpens it:
//!
//! ```text
//! q_tau(i) = q(i)^(1/tau) / sum_n q(n)^(1/tau)
//! ```
//!
//! `tau = 1` reproduces proportional sampling, `tau -> infinity` tends to the
//! uniform distribution (handled exactly for `tau = f64::INFINITY`), and
//! `tau < 1` sharpens toward the largest subset. Entropy is non-decreasing
//! in `tau`, which the property tests pin down.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Temperature-scaled distribution over subsets with the given sizes.
///
/// `tau` must be positive; `infinity` yields the exact uniform distribution.
/// Every size must be nonzero so that all probabilities are strictly
/// positive.
pub fn temperature_distribution<S: Scalar>(sizes: &[usize], tau: f64) -> Result<Vec<S>> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("subset size list is empty".into()));
    }
    if let Some(pos) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::InvalidConfig(format!("subset {pos} has size 0")));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "temperature must be positive or infinite, got {tau}"
        )));
    }

    if tau.is_infinite() {
        let u = S::from_f64_lossy(1.0 / sizes.len() as f64);
        return Ok(vec![u; sizes.len()]);
    }

    let total: f64 = sizes.iter().map(|&n| n as f64).sum();
    let inv_tau = 1.0 / tau;
    let powered: Vec<f64> = sizes
        .iter()
        .map(|&n| (n as f64 / total).powf(inv_tau))
        .collect();
    let norm: f64 = powered.iter().sum();
    Ok(powered
        .into_iter()
        .map(|p| S::from_f64_lossy(p / norm))
        .collect())
}

/// Shannon entropy (nats) of a probability vector.
pub fn shannon_entropy<S: Scalar>(probs: &[S]) -> f64 {
    probs
        .iter()
        .map(|p| p.to_f64_lossy())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Total-variation distance between two distributions of equal length.
pub fn total_variation<S: Scalar>(a: &[S], b: &[S]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!(
            "distribution length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x.to_f64_lossy() - y.to_f64_lossy()).abs())
        .sum::<f64>()
        / 2.0)
}
