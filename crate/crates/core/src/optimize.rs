//! Inner-loop machinery of the Lagrangian DRO algorithm: simplex weight
//! vectors, deterministic mixture gradient descent, the temperature-softmax
//! group reweighting, and the running-average mixture update.

use serde::{Deserialize, Serialize};

use crate::cost::CostFamily;
use crate::error::{Error, Result};

/// Tolerance on `|sum(lambda) - 1|` accepted by [`SimplexWeights::new`].
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A mixture weight vector on the probability simplex: nonnegative entries
/// summing to one (within [`SIMPLEX_TOL`] at construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::contract("simplex vector must be non-empty"));
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::contract("simplex vector has non-finite entries"));
        }
        if let Some(x) = lambda.iter().find(|&&x| x < 0.0) {
            return Err(Error::contract(format!(
                "simplex vector has negative entry {x}"
            )));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::contract(format!(
                "simplex vector sums to {sum}, not 1 (tolerance {SIMPLEX_TOL})"
            )));
        }
        Ok(SimplexWeights(lambda))
    }

    /// The uniform distribution `(1/k, ..., 1/k)`.
    pub fn uniform(k: usize) -> Self {
        SimplexWeights(vec![1.0 / k as f64; k])
    }

    /// All mass on component `idx`.
    pub fn one_hot(k: usize, idx: usize) -> Self {
        let mut v = vec![0.0; k];
        v[idx] = 1.0;
        SimplexWeights(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `max_k |lambda_k - other_k|`.
    pub fn max_abs_diff(&self, other: &SimplexWeights) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Euclidean distance to the uniform distribution (tie-breaking metric).
    pub fn distance_to_uniform(&self) -> f64 {
        let u = 1.0 / self.0.len() as f64;
        self.0.iter().map(|x| (x - u) * (x - u)).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for SimplexWeights {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexWeights::new(v)
    }
}

impl From<SimplexWeights> for Vec<f64> {
    fn from(w: SimplexWeights) -> Vec<f64> {
        w.0
    }
}

/// Per-group calibration coefficients, in the same units as the costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CalibrationVector(Vec<f64>);

impl CalibrationVector {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::contract("calibration vector has non-finite entries"));
        }
        Ok(CalibrationVector(r))
    }

    pub fn zeros(k: usize) -> Self {
        CalibrationVector(vec![0.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for CalibrationVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        CalibrationVector::new(v)
    }
}

impl From<CalibrationVector> for Vec<f64> {
    fn from(r: CalibrationVector) -> Vec<f64> {
        r.0
    }
}

/// Configuration of the deterministic full-batch gradient descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    /// Initial step size (Armijo backtracking halves it per trial).
    pub step_size: f64,
    /// Maximum number of gradient steps.
    pub max_steps: usize,
    /// Enable Armijo backtracking line search (constant 1e-4, halving).
    pub backtracking: bool,
    /// Stop when the mixture gradient norm falls at or below this value.
    pub grad_tol: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            step_size: 0.1,
            max_steps: 200,
            backtracking: true,
            grad_tol: 1e-10,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::contract("step size must be finite and positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::contract("max_steps must be at least 1"));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol >= 0.0) {
            return Err(Error::contract("grad_tol must be finite and nonnegative"));
        }
        Ok(())
    }
}

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-18;

/// Full-batch gradient descent on the `lambda`-mixture cost, starting at `w0`.
///
/// With backtracking enabled the mixture cost sequence is non-increasing.
/// Returns the iterate after at most `cfg.max_steps` steps, stopping early
/// when the gradient norm reaches `cfg.grad_tol` or no Armijo step makes
/// progress.
pub fn descend(
    family: &CostFamily,
    lambda: &SimplexWeights,
    w0: &[f64],
    cfg: &DescentConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut w = w0.to_vec();
    for iter in 0..cfg.max_steps {
        let (f, g) = family.mixture_cost_grad(lambda, &w)?;
        if !f.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence {
                iteration: iter,
                message: "non-finite mixture cost or gradient".into(),
            });
        }
        let g_sq: f64 = g.iter().map(|x| x * x).sum();
        if g_sq.sqrt() <= cfg.grad_tol {
            break;
        }
        if cfg.backtracking {
            let mut step = cfg.step_size;
            let mut accepted = false;
            while step >= MIN_STEP {
                let trial: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
                let (f_trial, _) = family.mixture_cost_grad(lambda, &trial)?;
                if !f_trial.is_finite() {
                    step *= 0.5;
                    continue;
                }
                if f_trial <= f - ARMIJO_C * step * g_sq {
                    w = trial;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break; // no step achieves sufficient decrease
            }
        } else {
            for (wi, gi) in w.iter_mut().zip(&g) {
                *wi -= cfg.step_size * gi;
            }
        }
    }
    let (f, _) = family.mixture_cost_grad(lambda, &w)?;
    if !f.is_finite() || w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence {
            iteration: cfg.max_steps,
            message: "descent produced a non-finite iterate".into(),
        });
    }
    Ok(w)
}

/// Temperature-softmax reweighting over calibrated costs:
/// `delta_k ∝ exp(beta * (c_k - r_k))`, computed with max-subtraction.
///
/// `beta = +inf` returns the uniform distribution over the argmax set of
/// `c_k - r_k` (exact float ties).
pub fn softmax_delta(costs: &[f64], r: &CalibrationVector, beta: f64) -> Result<SimplexWeights> {
    if costs.is_empty() {
        return Err(Error::contract("cost vector must be non-empty"));
    }
    if costs.len() != r.len() {
        return Err(Error::contract(format!(
            "cost vector length {} does not match calibration length {}",
            costs.len(),
            r.len()
        )));
    }
    if costs.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("cost vector has non-finite entries"));
    }
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::contract("temperature beta must be >= 0 or +inf"));
    }
    let adjusted: Vec<f64> = costs
        .iter()
        .zip(r.as_slice())
        .map(|(c, rk)| c - rk)
        .collect();
    let max = adjusted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = if beta.is_infinite() {
        adjusted
            .iter()
            .map(|&a| if a == max { 1.0 } else { 0.0 })
            .collect()
    } else {
        adjusted.iter().map(|&a| (beta * (a - max)).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    SimplexWeights::new(weights.iter().map(|x| x / z).collect())
}

/// Running-average mixture update `(t*lambda + delta) / (t+1)`, renormalized
/// so the result lies on the simplex exactly.
pub fn average_update(
    lambda: &SimplexWeights,
    delta: &SimplexWeights,
    t: usize,
) -> Result<SimplexWeights> {
    if lambda.len() != delta.len() {
        return Err(Error::contract("lambda and delta must have equal length"));
    }
    if t == 0 {
        return Err(Error::contract("iteration counter t must be >= 1"));
    }
    let tf = t as f64;
    let mut v: Vec<f64> = lambda
        .as_slice()
        .iter()
        .zip(delta.as_slice())
        .map(|(l, d)| (tf * l + d) / (tf + 1.0))
        .collect();
    let sum: f64 = v.iter().sum();
    for x in &mut v {
        *x /= sum;
    }
    SimplexWeights::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostFamily;

    const SECH2_1: f64 = 0.41997434161402614;

    #[test]
    fn simplex_rejects_bad_vectors() {
        assert!(SimplexWeights::new(vec![]).is_err());
        assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexWeights::new(vec![f64::NAN, 1.0]).is_err());
        assert!(SimplexWeights::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn softmax_symmetry_and_zero_beta() {
        let r = CalibrationVector::zeros(2);
        let d = softmax_delta(&[0.0, 0.0], &r, 3.7).unwrap();
        assert_eq!(d.as_slice(), &[0.5, 0.5]);

        let r3 = CalibrationVector::zeros(3);
        let d = softmax_delta(&[5.0, -2.0, 0.3], &r3, 0.0).unwrap();
        for &x in d.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_ln3_ratio() {
        let r = CalibrationVector::zeros(2);
        let d = softmax_delta(&[1.0, 0.0], &r, 3f64.ln()).unwrap();
        assert!((d.as_slice()[0] - 0.75).abs() < 1e-12);
        assert!((d.as_slice()[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn softmax_hardmax_ties() {
        let r = CalibrationVector::zeros(3);
        let d = softmax_delta(&[1.0, 0.0, 1.0], &r, f64::INFINITY).unwrap();
        assert_eq!(d.as_slice(), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn softmax_shift_invariance() {
        let costs = [0.9, -0.3, 0.4];
        let r1 = CalibrationVector::new(vec![0.1, 0.2, -0.5]).unwrap();
        let r2 = CalibrationVector::new(vec![0.1 + 7.0, 0.2 + 7.0, -0.5 + 7.0]).unwrap();
        let d1 = softmax_delta(&costs, &r1, 2.5).unwrap();
        let d2 = softmax_delta(&costs, &r2, 2.5).unwrap();
        assert!(d1.max_abs_diff(&d2) <= 1e-12);
    }

    #[test]
    fn softmax_rejects_non_finite() {
        let r = CalibrationVector::zeros(2);
        assert!(softmax_delta(&[f64::NAN, 0.0], &r, 1.0).is_err());
        assert!(softmax_delta(&[1.0, 0.0], &r, -1.0).is_err());
    }

    #[test]
    fn average_update_examples() {
        let l = SimplexWeights::new(vec![0.3, 0.7]).unwrap();
        let fixed = average_update(&l, &l, 9).unwrap();
        assert!(l.max_abs_diff(&fixed) <= 1e-15);

        let a = SimplexWeights::one_hot(2, 0);
        let b = SimplexWeights::one_hot(2, 1);
        let avg = average_update(&a, &b, 1).unwrap();
        assert_eq!(avg.as_slice(), &[0.5, 0.5]);

        let l = SimplexWeights::new(vec![0.6, 0.4]).unwrap();
        let d = SimplexWeights::new(vec![0.2, 0.8]).unwrap();
        let out = average_update(&l, &d, 4).unwrap();
        assert!((out.as_slice()[0] - 0.52).abs() < 1e-12);
        assert!((out.as_slice()[1] - 0.48).abs() < 1e-12);
    }

    #[test]
    fn average_update_rejects_t_zero() {
        let l = SimplexWeights::uniform(2);
        assert!(average_update(&l, &l, 0).is_err());
    }

    #[test]
    fn descend_fixed_point_at_zero_gradient() {
        let family = CostFamily::counterexample(0.05, None).unwrap();
        let lambda = SimplexWeights::uniform(2);
        let w = descend(&family, &lambda, &[0.0], &DescentConfig::default()).unwrap();
        assert_eq!(w, vec![0.0]);
    }

    #[test]
    fn descend_counterexample_mixture_minimum() {
        // Landscape-scan oracle: the right minimum of the (1/2,1/2) mixture
        // sits at w = 2.012380958929663, not at the DRO point w* = 0.
        let family = CostFamily::counterexample(0.05, None).unwrap();
        let lambda = SimplexWeights::uniform(2);
        let cfg = DescentConfig {
            max_steps: 2000,
            grad_tol: 1e-12,
            ..DescentConfig::default()
        };
        let w = descend(&family, &lambda, &[0.1], &cfg).unwrap();
        assert!((w[0] - 2.012380958929663).abs() < 1e-6, "w = {}", w[0]);
    }

    #[test]
    fn descend_monotone_with_backtracking() {
        let family = CostFamily::counterexample(0.05, None).unwrap();
        let lambda = SimplexWeights::new(vec![0.3, 0.7]).unwrap();
        let cfg = DescentConfig {
            step_size: 1.7, // deliberately too large; backtracking must tame it
            ..DescentConfig::default()
        };
        let mut w = vec![-2.5];
        let (mut prev, _) = family.mixture_cost_grad(&lambda, &w).unwrap();
        let one_step = DescentConfig { max_steps: 1, ..cfg.clone() };
        for _ in 0..50 {
            w = descend(&family, &lambda, &w, &one_step).unwrap();
            let (f, _) = family.mixture_cost_grad(&lambda, &w).unwrap();
            assert!(f <= prev + 1e-12);
            prev = f;
        }
    }

    #[test]
    fn counterexample_half_mixture_gradient_is_exactly_zero() {
        let family = CostFamily::counterexample(0.05, None).unwrap();
        let lambda = SimplexWeights::uniform(2);
        let (c, g) = family.mixture_cost_grad(&lambda, &[0.0]).unwrap();
        assert_eq!(g[0], 0.0);
        assert!((c - 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn quarter_mixture_gradient_matches_closed_form() {
        let family = CostFamily::counterexample(0.05, None).unwrap();
        let lambda = SimplexWeights::new(vec![0.25, 0.75]).unwrap();
        let (_, g) = family.mixture_cost_grad(&lambda, &[0.0]).unwrap();
        assert!((g[0] - (-0.5 * SECH2_1)).abs() < 1e-12);
    }
}
