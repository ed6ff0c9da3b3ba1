//! The outer Lagrangian DRO loop, per-group calibration baseline estimation,
//! and the baseline-gated recommendation pipeline.
//!
//! The outer loop follows the saddle-point iteration literally: starting from
//! `t = K` and uniform weights, it alternates descent on the current mixture,
//! softmax reweighting of the calibrated group costs, and a running-average
//! update of the mixture, stopping when `max_k |lambda_k - delta_k| < t*eps`
//! (checked after the counter increment) or after `max_outer` iterations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{CostFamily, GroupedDataset, LossKind};
use crate::error::{Error, Result};
use crate::optimize::{
    average_update, descend, softmax_delta, CalibrationVector, DescentConfig, SimplexWeights,
};
use crate::serde_util::beta_serde;

/// Configuration of the outer Lagrangian loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroConfig {
    /// Softmax temperature; `+inf` selects the hardmax update.
    #[serde(with = "beta_serde")]
    pub beta: f64,
    /// Stopping threshold of the literal rule `max_k|lambda_k - delta_k| < t*eps`.
    pub epsilon: f64,
    /// Outer iteration cap; the stopping rule may never fire in oscillatory
    /// nonconvex cases.
    pub max_outer: usize,
    pub inner: DescentConfig,
    /// Recorded for provenance; the loop itself is deterministic.
    pub seed: u64,
    /// Use the unscaled stop test `max_k|lambda_k - delta_k| < eps` instead
    /// of the literal `t`-scaled one.
    pub unscaled_stop: bool,
}

impl Default for DroConfig {
    fn default() -> Self {
        DroConfig {
            beta: 5.0,
            epsilon: 1e-9,
            max_outer: 500,
            inner: DescentConfig::default(),
            seed: 0,
            unscaled_stop: false,
        }
    }
}

impl DroConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::contract("beta must be >= 0 or +inf"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::contract("epsilon must be positive"));
        }
        if self.max_outer == 0 {
            return Err(Error::contract("max_outer must be >= 1"));
        }
        self.inner.validate()
    }
}

/// One outer iteration of the trajectory. `lambda` is the mixture used by
/// the descent step of this iteration; `delta` the reweighting computed from
/// its costs; `mixture_cost` is `sum_k lambda_k c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
    pub costs: Vec<f64>,
    pub mixture_cost: f64,
}

/// Output of [`lagrangian_dro`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroSolution {
    pub w_final: Vec<f64>,
    pub lambda_final: SimplexWeights,
    /// Per-group costs at `w_final`.
    pub costs_final: Vec<f64>,
    pub trajectory: Vec<IterationRecord>,
    /// True when the lambda stopping rule fired, false when the iteration
    /// cap exited the loop.
    pub converged: bool,
    pub outer_iterations: usize,
}

impl DroSolution {
    /// The calibrated DRO objective `max_k (c_k - r_k)` at the final iterate.
    pub fn calibrated_objective(&self, r: &CalibrationVector) -> f64 {
        self.costs_final
            .iter()
            .zip(r.as_slice())
            .map(|(c, rk)| c - rk)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs the Lagrangian DRO loop on `family` with calibration `r`, starting
/// from `w0` and warm-starting the inner descent across outer iterations.
pub fn lagrangian_dro(
    family: &CostFamily,
    r: &CalibrationVector,
    cfg: &DroConfig,
    w0: &[f64],
) -> Result<DroSolution> {
    cfg.validate()?;
    let k = family.group_count();
    if r.len() != k {
        return Err(Error::contract(format!(
            "calibration vector length {} does not match group count {k}",
            r.len()
        )));
    }
    if w0.len() != family.dim() {
        return Err(Error::contract("initial parameter dimension mismatch"));
    }
    if w0.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("initial parameters must be finite"));
    }

    let mut t = k;
    let mut lambda = SimplexWeights::uniform(k);
    let mut w = w0.to_vec();
    let mut trajectory = Vec::new();
    let converged;
    loop {
        w = descend(family, &lambda, &w, &cfg.inner)?;
        let costs = family.all_costs(&w)?;
        let delta = softmax_delta(&costs, r, cfg.beta)?;
        let mixture_cost: f64 = lambda
            .as_slice()
            .iter()
            .zip(&costs)
            .map(|(l, c)| l * c)
            .sum();
        trajectory.push(IterationRecord {
            t,
            lambda: lambda.as_slice().to_vec(),
            delta: delta.as_slice().to_vec(),
            costs: costs.clone(),
            mixture_cost,
        });
        let updated = average_update(&lambda, &delta, t)?;
        lambda = updated;
        t += 1;
        let diff = lambda.max_abs_diff(&delta);
        let threshold = if cfg.unscaled_stop {
            cfg.epsilon
        } else {
            t as f64 * cfg.epsilon
        };
        if diff < threshold {
            converged = true;
            break;
        }
        if t - k >= cfg.max_outer {
            converged = false;
            break;
        }
    }
    let costs_final = family.all_costs(&w)?;
    let outer_iterations = trajectory.len();
    Ok(DroSolution {
        w_final: w,
        lambda_final: lambda,
        costs_final,
        trajectory,
        converged,
        outer_iterations,
    })
}

/// Optional small-sample calibration adjustment: `r_k -> r_k - c_adj / sqrt(n_k)`.
pub fn sample_size_adjusted(
    r: &CalibrationVector,
    group_sizes: &[usize],
    c_adj: f64,
) -> Result<CalibrationVector> {
    if r.len() != group_sizes.len() {
        return Err(Error::contract("group size list length mismatch"));
    }
    if !c_adj.is_finite() {
        return Err(Error::contract("adjustment constant must be finite"));
    }
    CalibrationVector::new(
        r.as_slice()
            .iter()
            .zip(group_sizes)
            .map(|(rk, &n)| rk - c_adj / (n as f64).sqrt())
            .collect(),
    )
}

/// Configuration of per-group baseline estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub loss: LossKind,
    pub mu: f64,
    /// Candidate weights for the pooled other-group regularizer.
    pub alpha_grid: Vec<f64>,
    /// Training fraction of the per-group split, in (0, 1).
    pub split_ratio: f64,
    pub seed: u64,
    pub inner: DescentConfig,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            loss: LossKind::Logistic,
            mu: 1e-2,
            alpha_grid: vec![0.0, 0.01, 0.03, 0.1, 0.3, 1.0],
            split_ratio: 0.7,
            seed: 0,
            inner: DescentConfig {
                max_steps: 500,
                grad_tol: 1e-9,
                ..DescentConfig::default()
            },
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() {
            return Err(Error::contract("alpha grid must be non-empty"));
        }
        if self
            .alpha_grid
            .iter()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(Error::contract("alpha values must be finite and >= 0"));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::contract("split ratio must lie in (0, 1)"));
        }
        self.inner.validate()
    }
}

/// One evaluated candidate of the alpha grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCandidate {
    pub alpha: f64,
    pub validation_cost: f64,
}

/// Per-group calibration baseline: the best validation cost reachable when
/// training for this group in isolation, with pooled other-group data as an
/// optional regularizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub group: usize,
    /// Best validation cost over the alpha grid.
    pub r_star: f64,
    /// Selected regularizer weight (first argmin on ties).
    pub alpha_star: f64,
    pub alpha_grid: Vec<AlphaCandidate>,
    /// Parameters of the selected isolated model.
    pub w_star: Vec<f64>,
}

/// Deterministic per-group train/validation split. Shuffles example indices
/// with a stream derived from `(seed, k)` and takes the first
/// `ceil(ratio * n)` as training data (validation kept nonempty).
fn split_group(
    group: &[crate::cost::Example],
    ratio: f64,
    seed: u64,
    k: usize,
) -> (Vec<crate::cost::Example>, Vec<crate::cost::Example>) {
    let mut idx: Vec<usize> = (0..group.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    idx.shuffle(&mut rng);
    let n_train = ((ratio * group.len() as f64).ceil() as usize)
        .max(1)
        .min(group.len() - 1);
    let train = idx[..n_train].iter().map(|&i| group[i].clone()).collect();
    let val = idx[n_train..].iter().map(|&i| group[i].clone()).collect();
    (train, val)
}

fn mean_group_cost(
    examples: Vec<crate::cost::Example>,
    template: &GroupedDataset,
    loss: LossKind,
    mu: f64,
    w: &[f64],
) -> Result<f64> {
    let data = GroupedDataset::new(vec![examples], template.dim(), template.task())?;
    CostFamily::dataset(data, loss, mu)?.group_cost(0, w)
}

/// Estimates the calibration baseline `r*` for group `k`: for each alpha in
/// the grid, trains on the mixture {group-k training split, weight 1; pooled
/// other-group training splits, weight alpha} and scores the result on group
/// k's validation split. Deterministic given the seed.
pub fn estimate_baseline(
    data: &GroupedDataset,
    k: usize,
    cfg: &BaselineConfig,
) -> Result<BaselineReport> {
    cfg.validate()?;
    if k >= data.group_count() {
        return Err(Error::contract(format!("group index {k} out of range")));
    }
    if data.group(k).len() < 4 {
        return Err(Error::contract(format!(
            "group {k} has {} examples; at least 4 are needed for a validation split",
            data.group(k).len()
        )));
    }
    let (train_k, val_k) = split_group(data.group(k), cfg.split_ratio, cfg.seed, k);
    let mut others: Vec<crate::cost::Example> = Vec::new();
    for j in 0..data.group_count() {
        if j == k {
            continue;
        }
        if data.group(j).len() >= 4 {
            let (train_j, _) = split_group(data.group(j), cfg.split_ratio, cfg.seed, j);
            others.extend(train_j);
        } else {
            others.extend(data.group(j).iter().cloned());
        }
    }

    let d = data.dim() + 1;
    let isolated = |alpha: f64| -> Result<Vec<f64>> {
        let (family, lambda) = if others.is_empty() || alpha == 0.0 {
            let groups = vec![train_k.clone()];
            let ds = GroupedDataset::new(groups, data.dim(), data.task())?;
            (
                CostFamily::dataset(ds, cfg.loss, cfg.mu)?,
                SimplexWeights::uniform(1),
            )
        } else {
            let groups = vec![train_k.clone(), others.clone()];
            let ds = GroupedDataset::new(groups, data.dim(), data.task())?;
            let z = 1.0 + alpha;
            (
                CostFamily::dataset(ds, cfg.loss, cfg.mu)?,
                SimplexWeights::new(vec![1.0 / z, alpha / z])?,
            )
        };
        descend(&family, &lambda, &vec![0.0; d], &cfg.inner)
    };

    let mut candidates = Vec::with_capacity(cfg.alpha_grid.len());
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for (i, &alpha) in cfg.alpha_grid.iter().enumerate() {
        let w = isolated(alpha)?;
        let vcost = mean_group_cost(val_k.clone(), data, cfg.loss, cfg.mu, &w)?;
        candidates.push(AlphaCandidate {
            alpha,
            validation_cost: vcost,
        });
        let better = match &best {
            None => true,
            Some((_, best_cost, _)) => vcost < *best_cost,
        };
        if better {
            best = Some((i, vcost, w));
        }
    }
    let (best_idx, r_star, w_star) = best.expect("alpha grid is non-empty");
    Ok(BaselineReport {
        group: k,
        r_star,
        alpha_star: cfg.alpha_grid[best_idx],
        alpha_grid: candidates,
        w_star,
    })
}

/// Configuration of the recommendation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendConfig {
    pub baseline: BaselineConfig,
    pub dro: DroConfig,
    /// Per-group maximum acceptable cost; `+inf` disables the gate for a
    /// group.
    pub acceptability: Vec<f64>,
}

/// Outcome of the recommendation pipeline. A refusal is a first-class
/// result, not an error: it lists the groups whose baseline exceeds its
/// acceptability bound, and no DRO run is attempted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecommendationReport {
    pub baselines: Vec<BaselineReport>,
    /// Groups whose `r*` exceeds the acceptability bound, or `None` when the
    /// pipeline proceeded.
    pub refusal: Option<Vec<usize>>,
    pub solution: Option<DroSolution>,
    /// Calibration used for the DRO run (`r = r*`).
    pub calibration: Option<CalibrationVector>,
    /// Group-k cost of the final model on group k's validation split.
    pub validation_costs: Option<Vec<f64>>,
    /// `validation_costs[k] - r_star[k]`.
    pub shortfalls: Option<Vec<f64>>,
}

/// Runs the baseline-gated pipeline: estimates `r*` per group, refuses when
/// any baseline exceeds its acceptability bound, and otherwise runs
/// Lagrangian DRO with `r = r*` on the training splits, reporting per-group
/// validation shortfalls against the baselines.
pub fn recommend_pipeline(
    data: &GroupedDataset,
    cfg: &RecommendConfig,
) -> Result<RecommendationReport> {
    let k = data.group_count();
    if cfg.acceptability.len() != k {
        return Err(Error::contract(format!(
            "acceptability list length {} does not match group count {k}",
            cfg.acceptability.len()
        )));
    }
    if cfg.acceptability.iter().any(|a| a.is_nan()) {
        return Err(Error::contract("acceptability bounds must not be NaN"));
    }

    // step 2: best reachable performance per group, in isolation
    let baselines: Vec<BaselineReport> = (0..k)
        .map(|g| estimate_baseline(data, g, &cfg.baseline))
        .collect::<Result<_>>()?;

    // step 3: gate on acceptability
    let offending: Vec<usize> = baselines
        .iter()
        .filter(|b| b.r_star > cfg.acceptability[b.group])
        .map(|b| b.group)
        .collect();
    if !offending.is_empty() {
        return Ok(RecommendationReport {
            baselines,
            refusal: Some(offending),
            solution: None,
            calibration: None,
            validation_costs: None,
            shortfalls: None,
        });
    }

    // step 4: DRO with r = r*, trained on the same splits the baselines used
    let r = CalibrationVector::new(baselines.iter().map(|b| b.r_star).collect())?;
    let mut train_groups = Vec::with_capacity(k);
    let mut val_groups = Vec::with_capacity(k);
    for g in 0..k {
        let (train, val) = split_group(
            data.group(g),
            cfg.baseline.split_ratio,
            cfg.baseline.seed,
            g,
        );
        train_groups.push(train);
        val_groups.push(val);
    }
    let train_data = GroupedDataset::new(train_groups, data.dim(), data.task())?;
    let family = CostFamily::dataset(train_data, cfg.baseline.loss, cfg.baseline.mu)?;
    let w0 = vec![0.0; data.dim() + 1];
    let solution = lagrangian_dro(&family, &r, &cfg.dro, &w0)?;

    let mut validation_costs = Vec::with_capacity(k);
    for val in val_groups {
        validation_costs.push(mean_group_cost(
            val,
            data,
            cfg.baseline.loss,
            cfg.baseline.mu,
            &solution.w_final,
        )?);
    }
    let shortfalls = validation_costs
        .iter()
        .zip(baselines.iter())
        .map(|(c, b)| c - b.r_star)
        .collect();
    Ok(RecommendationReport {
        baselines,
        refusal: None,
        solution: Some(solution),
        calibration: Some(r),
        validation_costs: Some(validation_costs),
        shortfalls: Some(shortfalls),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{Example, TaskKind};

    fn two_group_classification(seed: u64, n: usize) -> GroupedDataset {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut groups = Vec::new();
        for theta in [0.0f64, 1.0] {
            let u = [theta.cos(), theta.sin()];
            let mut group = Vec::new();
            for i in 0..n {
                let label = if i < n / 2 { 1.0 } else { -1.0 };
                let x0 = label * u[0] + 0.8 * rng.gen_range(-1.0..1.0);
                let x1 = label * u[1] + 0.8 * rng.gen_range(-1.0..1.0);
                group.push(Example {
                    features: vec![x0, x1],
                    label,
                });
            }
            groups.push(group);
        }
        GroupedDataset::new(groups, 2, TaskKind::Classification).unwrap()
    }

    #[test]
    fn single_group_family_reduces_to_erm() {
        let data = two_group_classification(3, 20);
        let single =
            GroupedDataset::new(vec![data.group(0).to_vec()], 2, TaskKind::Classification)
                .unwrap();
        let fam = CostFamily::dataset(single, LossKind::Logistic, 0.0).unwrap();
        let cfg = DroConfig::default();
        let sol = lagrangian_dro(&fam, &CalibrationVector::zeros(1), &cfg, &[0.0; 3]).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.outer_iterations, 1);
        assert_eq!(sol.lambda_final.as_slice(), &[1.0]);
        let erm = descend(&fam, &SimplexWeights::uniform(1), &[0.0; 3], &cfg.inner).unwrap();
        assert_eq!(sol.w_final, erm);
    }

    #[test]
    fn literal_stopping_rule_fires_at_first_valid_t() {
        // forced-constant delta: huge calibration on group 0 makes group 1
        // the hardmax argmax for every w, so delta = (0, 1) throughout.
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        let r = CalibrationVector::new(vec![10.0, 0.0]).unwrap();
        let eps = 2e-4;
        let cfg = DroConfig {
            beta: f64::INFINITY,
            epsilon: eps,
            max_outer: 10_000,
            ..DroConfig::default()
        };
        let sol = lagrangian_dro(&fam, &r, &cfg, &[0.1]).unwrap();
        assert!(sol.converged);

        // mirror the lambda recurrence to find the first t where the rule holds
        let delta = SimplexWeights::one_hot(2, 1);
        let mut lambda = SimplexWeights::uniform(2);
        let mut t = 2usize;
        let mut iters = 0usize;
        loop {
            lambda = average_update(&lambda, &delta, t).unwrap();
            t += 1;
            iters += 1;
            if lambda.max_abs_diff(&delta) < t as f64 * eps {
                break;
            }
        }
        assert_eq!(sol.outer_iterations, iters);
    }

    #[test]
    fn counterexample_run_oscillates_without_converging() {
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        let cfg = DroConfig {
            beta: 2.1,
            epsilon: 1e-9,
            max_outer: 500,
            ..DroConfig::default()
        };
        let sol = lagrangian_dro(&fam, &CalibrationVector::zeros(2), &cfg, &[0.1]).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.outer_iterations, 500);
        // lambda oscillation: the dominant delta component flips at least twice
        let flips = sol
            .trajectory
            .windows(2)
            .filter(|w| {
                (w[0].delta[0] > w[0].delta[1]) != (w[1].delta[0] > w[1].delta[1])
            })
            .count();
        assert!(flips >= 2, "observed {flips} delta flips");
        // terminates in a mixture well, not at the DRO point w* = 0
        assert!(sol.w_final[0].abs() > 0.9, "w = {}", sol.w_final[0]);
    }

    #[test]
    fn trajectory_states_stay_on_simplex() {
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        let cfg = DroConfig {
            beta: 5.0,
            max_outer: 50,
            ..DroConfig::default()
        };
        let sol = lagrangian_dro(&fam, &CalibrationVector::zeros(2), &cfg, &[0.3]).unwrap();
        for rec in &sol.trajectory {
            for v in [&rec.lambda, &rec.delta] {
                let sum: f64 = v.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-9);
                assert!(v.iter().all(|&x| x >= 0.0));
            }
        }
        assert_eq!(sol.trajectory.len(), sol.outer_iterations);
    }

    #[test]
    fn determinism_bitwise() {
        let data = two_group_classification(5, 24);
        let fam = CostFamily::dataset(data, LossKind::Logistic, 0.0).unwrap();
        let cfg = DroConfig {
            max_outer: 40,
            ..DroConfig::default()
        };
        let r = CalibrationVector::zeros(2);
        let a = lagrangian_dro(&fam, &r, &cfg, &[0.0; 3]).unwrap();
        let b = lagrangian_dro(&fam, &r, &cfg, &[0.0; 3]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn baseline_alpha_zero_is_isolated_training() {
        let data = two_group_classification(11, 40);
        let cfg = BaselineConfig {
            alpha_grid: vec![0.0],
            ..BaselineConfig::default()
        };
        let rep = estimate_baseline(&data, 1, &cfg).unwrap();
        assert_eq!(rep.alpha_star, 0.0);
        assert_eq!(rep.r_star, rep.alpha_grid[0].validation_cost);
        assert_eq!(rep.r_star, rep.alpha_grid.iter().map(|c| c.validation_cost).fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn baseline_single_group_ignores_alpha() {
        let data = two_group_classification(13, 30);
        let single =
            GroupedDataset::new(vec![data.group(0).to_vec()], 2, TaskKind::Classification)
                .unwrap();
        let cfg = BaselineConfig::default();
        let rep = estimate_baseline(&single, 0, &cfg).unwrap();
        let first = rep.alpha_grid[0].validation_cost;
        for c in &rep.alpha_grid {
            assert_eq!(c.validation_cost, first);
        }
    }

    #[test]
    fn baseline_rejects_tiny_groups() {
        let data = GroupedDataset::new(
            vec![vec![
                Example { features: vec![0.0], label: 1.0 },
                Example { features: vec![1.0], label: -1.0 },
            ]],
            1,
            TaskKind::Classification,
        )
        .unwrap();
        assert!(estimate_baseline(&data, 0, &BaselineConfig::default()).is_err());
    }

    #[test]
    fn pipeline_vacuous_bounds_never_refuse() {
        let data = two_group_classification(17, 40);
        let cfg = RecommendConfig {
            baseline: BaselineConfig::default(),
            dro: DroConfig {
                max_outer: 60,
                ..DroConfig::default()
            },
            acceptability: vec![f64::INFINITY, f64::INFINITY],
        };
        let rep = recommend_pipeline(&data, &cfg).unwrap();
        assert!(rep.refusal.is_none());
        assert!(rep.solution.is_some());
        let shortfalls = rep.shortfalls.unwrap();
        assert_eq!(shortfalls.len(), 2);
    }

    #[test]
    fn pipeline_refuses_named_group() {
        let data = two_group_classification(19, 40);
        let cfg = RecommendConfig {
            baseline: BaselineConfig::default(),
            dro: DroConfig::default(),
            // impossible bound for group 1 only
            acceptability: vec![f64::INFINITY, -1.0],
        };
        let rep = recommend_pipeline(&data, &cfg).unwrap();
        assert_eq!(rep.refusal, Some(vec![1]));
        assert!(rep.solution.is_none());
    }

    #[test]
    fn sample_size_adjustment_formula() {
        let r = CalibrationVector::new(vec![1.0, 1.0]).unwrap();
        let adj = sample_size_adjusted(&r, &[100, 25], 0.5).unwrap();
        assert!((adj.as_slice()[0] - (1.0 - 0.05)).abs() < 1e-15);
        assert!((adj.as_slice()[1] - (1.0 - 0.1)).abs() < 1e-15);
    }
}
