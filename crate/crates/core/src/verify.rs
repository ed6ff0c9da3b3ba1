//! Independent oracles and theorem checkers: finite-difference gradients,
//! the min-norm point in the convex hull of group gradients (mixture
//! stationarity certificates), the converse perturbation test, curvature
//! classification, the convex dual grid search, and 1-D landscape scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostFamily;
use crate::error::{Error, Result};
use crate::optimize::{descend, CalibrationVector, DescentConfig, SimplexWeights};

/// Frank-Wolfe duality-gap stopping tolerance for the min-norm solver.
pub const MIN_NORM_GAP_TOL: f64 = 1e-12;
/// Iteration cap of the min-norm solver.
pub const MIN_NORM_MAX_ITER: usize = 100_000;
/// Probe step scale for finite-difference Hessians.
pub const HESSIAN_STEP: f64 = 1e-4;
/// Second-derivative magnitudes at or below this classify as flat.
pub const FLAT_TOL: f64 = 1e-7;

/// Central-difference gradient of `group_cost`, coordinate step
/// `h * max(1, |w_i|)`. Independent of the analytic gradient path.
pub fn fd_gradient_oracle(
    family: &CostFamily,
    k: usize,
    w: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::contract("finite-difference step must be positive"));
    }
    let mut grad = vec![0.0; w.len()];
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        let step = h * w[i].abs().max(1.0);
        probe[i] = w[i] + step;
        let f_plus = family.group_cost(k, &probe)?;
        probe[i] = w[i] - step;
        let f_minus = family.group_cost(k, &probe)?;
        probe[i] = w[i];
        if !f_plus.is_finite() || !f_minus.is_finite() {
            return Err(Error::Divergence {
                iteration: i,
                message: "non-finite cost while probing".into(),
            });
        }
        grad[i] = (f_plus - f_minus) / (2.0 * step);
    }
    Ok(grad)
}

/// Result of the min-norm-point search over the convex hull of gradients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinNormPoint {
    /// Mixture achieving the minimum-norm combination.
    pub weights: SimplexWeights,
    /// Achieved norm `||sum_k lambda_k g_k||`.
    pub norm: f64,
    /// Final Frank-Wolfe duality gap.
    pub duality_gap: f64,
    pub iterations: usize,
    /// False when the iteration cap was reached before the gap tolerance;
    /// the result is then an approximation, not an error.
    pub converged: bool,
}

/// Minimizes `||sum_k lambda_k g_k||^2` over the simplex by Frank-Wolfe with
/// away steps (duality-gap stop [`MIN_NORM_GAP_TOL`], cap
/// [`MIN_NORM_MAX_ITER`]), starting from the uniform mixture.
pub fn min_norm_in_hull(gradients: &[Vec<f64>]) -> Result<MinNormPoint> {
    let k = gradients.len();
    if k == 0 {
        return Err(Error::contract("gradient list must be non-empty"));
    }
    let d = gradients[0].len();
    if gradients.iter().any(|g| g.len() != d) {
        return Err(Error::contract("gradients must share a common dimension"));
    }
    if gradients.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::contract("gradients must be finite"));
    }

    let mut lambda = vec![1.0 / k as f64; k];
    let combine = |lam: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; d];
        for (gk, &lk) in gradients.iter().zip(lam) {
            for (pi, gi) in p.iter_mut().zip(gk) {
                *pi += lk * gi;
            }
        }
        p
    };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let mut iterations = 0;
    let mut converged = false;
    let mut gap = 0.0;
    while iterations < MIN_NORM_MAX_ITER {
        let p = combine(&lambda);
        let p_sq = dot(&p, &p);
        // scores s_k = <p, g_k>; objective gradient is 2 * s
        let scores: Vec<f64> = gradients.iter().map(|g| dot(&p, g)).collect();
        let fw = scores
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        gap = 2.0 * (p_sq - scores[fw]);
        if gap <= MIN_NORM_GAP_TOL {
            converged = true;
            break;
        }
        // away vertex: worst active coordinate
        let away = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| lambda[*i] > 0.0)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();

        // pick the steeper direction: d_fw = e_fw - lambda, d_away = lambda - e_away
        let fw_slope = scores[fw] - p_sq;
        let away_slope = p_sq - scores[away];
        let use_fw = fw_slope <= away_slope;

        // direction image q = G d and max feasible step
        let (q, gamma_max, vertex): (Vec<f64>, f64, usize) = if use_fw {
            let q: Vec<f64> = gradients[fw].iter().zip(&p).map(|(g, pi)| g - pi).collect();
            (q, 1.0, fw)
        } else {
            let q: Vec<f64> = p
                .iter()
                .zip(&gradients[away])
                .map(|(pi, g)| pi - g)
                .collect();
            let a = lambda[away];
            if a >= 1.0 {
                // hull degenerate to one vertex; nothing to move away from
                converged = true;
                break;
            }
            (q, a / (1.0 - a), away)
        };
        let q_sq = dot(&q, &q);
        if q_sq <= 0.0 {
            converged = true;
            break;
        }
        let gamma = (-dot(&p, &q) / q_sq).clamp(0.0, gamma_max);
        if gamma == 0.0 {
            converged = true;
            break;
        }
        if use_fw {
            for l in lambda.iter_mut() {
                *l *= 1.0 - gamma;
            }
            lambda[vertex] += gamma;
        } else {
            for l in lambda.iter_mut() {
                *l *= 1.0 + gamma;
            }
            lambda[vertex] -= gamma;
            lambda[vertex] = lambda[vertex].max(0.0);
        }
        let sum: f64 = lambda.iter().sum();
        for l in lambda.iter_mut() {
            *l /= sum;
        }
        iterations += 1;
    }
    let p = combine(&lambda);
    let norm = dot(&p, &p).sqrt();
    Ok(MinNormPoint {
        weights: SimplexWeights::new(lambda)?,
        norm,
        duality_gap: gap,
        iterations,
        converged,
    })
}

/// Curvature class of a mixture cost at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureClass {
    LocalMin,
    LocalMax,
    SaddleIndefinite,
    Flat,
}

impl std::fmt::Display for CurvatureClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CurvatureClass::LocalMin => "local-min",
            CurvatureClass::LocalMax => "local-max",
            CurvatureClass::SaddleIndefinite => "saddle/indefinite",
            CurvatureClass::Flat => "flat",
        };
        write!(f, "{s}")
    }
}

/// Mixture stationarity certificate at a point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarityReport {
    /// Mixture achieving the min-norm combination of group gradients.
    pub lambda_star: SimplexWeights,
    /// `||sum_k lambda*_k g_k||`.
    pub min_norm: f64,
    pub is_stationary: bool,
    /// Curvature class of the `lambda*`-mixture at the probed point.
    pub curvature: CurvatureClass,
    /// Min-norm solver reached its gap tolerance.
    pub min_norm_converged: bool,
}

/// Computes all group gradients at `w`, finds the min-norm point of their
/// convex hull, and classifies the curvature of the resulting mixture
/// (finite-difference Hessian eigenvalues for `d <= 20`, directional
/// second-difference probes along `2d` seeded random directions otherwise).
pub fn check_stationarity(
    family: &CostFamily,
    w: &[f64],
    tol: f64,
) -> Result<StationarityReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::contract("stationarity tolerance must be positive"));
    }
    let grads: Vec<Vec<f64>> = (0..family.group_count())
        .map(|k| family.group_grad(k, w))
        .collect::<Result<_>>()?;
    let mn = min_norm_in_hull(&grads)?;
    let curvature = classify_curvature(family, &mn.weights, w)?;
    Ok(StationarityReport {
        is_stationary: mn.norm <= tol,
        lambda_star: mn.weights,
        min_norm: mn.norm,
        curvature,
        min_norm_converged: mn.converged,
    })
}

fn classify_curvature(
    family: &CostFamily,
    lambda: &SimplexWeights,
    w: &[f64],
) -> Result<CurvatureClass> {
    let d = w.len();
    let f = |x: &[f64]| -> Result<f64> { Ok(family.mixture_cost_grad(lambda, x)?.0) };
    let eigenvalues: Vec<f64> = if d <= 20 {
        let h = fd_hessian(&f, w)?;
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| h[i][j]);
        m.symmetric_eigen().eigenvalues.iter().cloned().collect()
    } else {
        // directional probes: u^T H u along 2d seeded random directions
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
        let f0 = f(w)?;
        let mut probes = Vec::with_capacity(2 * d);
        for _ in 0..2 * d {
            let u = random_direction(&mut rng, d);
            let step = HESSIAN_STEP;
            let wp: Vec<f64> = w.iter().zip(&u).map(|(wi, ui)| wi + step * ui).collect();
            let wm: Vec<f64> = w.iter().zip(&u).map(|(wi, ui)| wi - step * ui).collect();
            probes.push((f(&wp)? - 2.0 * f0 + f(&wm)?) / (step * step));
        }
        probes
    };
    let max = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if max.abs() <= FLAT_TOL && min.abs() <= FLAT_TOL {
        CurvatureClass::Flat
    } else if min >= -FLAT_TOL {
        CurvatureClass::LocalMin
    } else if max <= FLAT_TOL {
        CurvatureClass::LocalMax
    } else {
        CurvatureClass::SaddleIndefinite
    })
}

fn fd_hessian<F: Fn(&[f64]) -> Result<f64>>(f: &F, w: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = w.len();
    let step = |i: usize| HESSIAN_STEP * w[i].abs().max(1.0);
    let f0 = f(w)?;
    let mut h = vec![vec![0.0; d]; d];
    let mut probe = w.to_vec();
    for i in 0..d {
        let hi = step(i);
        probe[i] = w[i] + hi;
        let fp = f(&probe)?;
        probe[i] = w[i] - hi;
        let fm = f(&probe)?;
        probe[i] = w[i];
        h[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..d {
            let hj = step(j);
            probe[i] = w[i] + hi;
            probe[j] = w[j] + hj;
            let fpp = f(&probe)?;
            probe[j] = w[j] - hj;
            let fpm = f(&probe)?;
            probe[i] = w[i] - hi;
            let fmm = f(&probe)?;
            probe[j] = w[j] + hj;
            let fmp = f(&probe)?;
            probe[i] = w[i];
            probe[j] = w[j];
            let hij = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            h[i][j] = hij;
            h[j][i] = hij;
        }
    }
    Ok(h)
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d)
            .map(|_| rand_distr::StandardNormal.sample_with(rng))
            .collect();
        let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return u.into_iter().map(|x| x / norm).collect();
        }
    }
}

trait SampleWith {
    fn sample_with(&self, rng: &mut ChaCha8Rng) -> f64;
}

impl SampleWith for rand_distr::StandardNormal {
    fn sample_with(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.sample::<f64, _>(*self)
    }
}

/// Result of the converse perturbation test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConverseReport {
    pub n_samples: usize,
    pub radii: Vec<f64>,
    /// Minimum over samples of `max_k (C_k(w*+u) - C_k(w*))`.
    pub min_observed: f64,
    pub passed: bool,
}

/// Samples perturbations around `w_star` and verifies that, with calibration
/// `r_k = C_k(w_star)`, the calibrated worst-group objective never improves:
/// `max_k (C_k(w_star + u) - r_k) >= -tol` for every sampled `u`. Sampled
/// evidence over finitely many directions, not an exhaustive proof.
pub fn check_converse(
    family: &CostFamily,
    w_star: &[f64],
    radii: &[f64],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ConverseReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
        return Err(Error::contract("radii must be positive"));
    }
    if n_samples == 0 {
        return Err(Error::contract("n_samples must be >= 1"));
    }
    let base = family.all_costs(w_star)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = w_star.len();
    let mut min_observed = f64::INFINITY;
    for &radius in radii {
        for _ in 0..n_samples {
            let u = random_direction(&mut rng, d);
            let probe: Vec<f64> = w_star
                .iter()
                .zip(&u)
                .map(|(wi, ui)| wi + radius * ui)
                .collect();
            let costs = family.all_costs(&probe)?;
            let worst = costs
                .iter()
                .zip(&base)
                .map(|(c, b)| c - b)
                .fold(f64::NEG_INFINITY, f64::max);
            min_observed = min_observed.min(worst);
        }
    }
    Ok(ConverseReport {
        n_samples,
        radii: radii.to_vec(),
        min_observed,
        passed: min_observed >= -tol,
    })
}

/// Result of the brute-force dual grid search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualOracleResult {
    /// Grid maximizer of the dual objective.
    pub lambda_star: SimplexWeights,
    /// Inner minimizer at `lambda_star`.
    pub w_star: Vec<f64>,
    /// `D(lambda*) = min_w sum_k lambda_k C_k(w) - sum_k lambda_k r_k`.
    pub dual_value: f64,
}

const DUAL_TIE_TOL: f64 = 1e-9;

/// Brute-forces the dual objective
/// `D(lambda) = min_w sum_k lambda_k C_k(w) - sum_k lambda_k r_k`
/// over a simplex grid (K = 2 or 3 only), warm-starting the inner
/// minimization across grid points. Ties within 1e-9 resolve toward the
/// lambda closest to uniform. Serves as the independent oracle for convex
/// calibrated-DRO objective values.
pub fn dual_grid_oracle(
    family: &CostFamily,
    r: &CalibrationVector,
    grid_resolution: usize,
    inner: &DescentConfig,
) -> Result<DualOracleResult> {
    if !family.is_convex() {
        return Err(Error::contract("dual grid oracle requires a convex family"));
    }
    let k = family.group_count();
    if !(k == 2 || k == 3) {
        return Err(Error::Unsupported(format!(
            "dual grid oracle supports K = 2 or 3, got K = {k}"
        )));
    }
    if r.len() != k {
        return Err(Error::contract("calibration vector length mismatch"));
    }
    if grid_resolution < 2 {
        return Err(Error::contract("grid resolution must be >= 2"));
    }
    let steps = grid_resolution - 1;
    let mut grid: Vec<SimplexWeights> = Vec::new();
    if k == 2 {
        for i in 0..=steps {
            let s = i as f64 / steps as f64;
            grid.push(SimplexWeights::new(vec![1.0 - s, s])?);
        }
    } else {
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let a = i as f64 / steps as f64;
                let b = j as f64 / steps as f64;
                let mut v = vec![a, b, 1.0 - a - b];
                // guard rounding of the third coordinate
                if v[2] < 0.0 {
                    v[2] = 0.0;
                }
                let sum: f64 = v.iter().sum();
                for x in &mut v {
                    *x /= sum;
                }
                grid.push(SimplexWeights::new(v)?);
            }
        }
    }

    let mut w = vec![0.0; family.dim()];
    let mut best: Option<(SimplexWeights, Vec<f64>, f64)> = None;
    for lambda in grid {
        w = descend(family, &lambda, &w, inner)?;
        let (mix_cost, _) = family.mixture_cost_grad(&lambda, &w)?;
        let shift: f64 = lambda
            .as_slice()
            .iter()
            .zip(r.as_slice())
            .map(|(l, rk)| l * rk)
            .sum();
        let dual = mix_cost - shift;
        let replace = match &best {
            None => true,
            Some((best_lambda, _, best_dual)) => {
                if dual > best_dual + DUAL_TIE_TOL {
                    true
                } else if (dual - best_dual).abs() <= DUAL_TIE_TOL {
                    lambda.distance_to_uniform() < best_lambda.distance_to_uniform()
                } else {
                    false
                }
            }
        };
        if replace {
            best = Some((lambda, w.clone(), dual));
        }
    }
    let (lambda_star, w_star, dual_value) = best.expect("grid is non-empty");
    Ok(DualOracleResult {
        lambda_star,
        w_star,
        dual_value,
    })
}

/// One scanned mixture of a 1-D landscape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeCurve {
    pub lambda: Vec<f64>,
    /// Mixture cost at each grid point.
    pub costs: Vec<f64>,
    /// Locations of interior local minima (strictly below both neighbors).
    pub local_minima: Vec<f64>,
}

/// Tabulated 1-D mixture landscapes over a lambda grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeMap {
    pub w_grid: Vec<f64>,
    pub curves: Vec<LandscapeCurve>,
    /// For K=2 families: smallest weight of the second cost at which the
    /// left (negative-w) local minimum disappears, located by bisection.
    pub vanishing_threshold: Option<f64>,
}

/// Tabulates the mixture cost of a 1-D family over `w_range` for each
/// lambda on the grid and extracts interior local minima. For K=2 families
/// it also bisects for the smallest second-component weight erasing the
/// left minimum.
pub fn landscape_scan_1d(
    family: &CostFamily,
    lambda_grid: &[SimplexWeights],
    w_range: (f64, f64),
    n_points: usize,
) -> Result<LandscapeMap> {
    if family.dim() != 1 {
        return Err(Error::contract("landscape scan requires a 1-D family"));
    }
    if n_points < 100 {
        return Err(Error::contract("scan needs at least 100 points"));
    }
    let (lo, hi) = w_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::contract("invalid scan range"));
    }
    let w_grid: Vec<f64> = (0..n_points)
        .map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64)
        .collect();
    let mut curves = Vec::with_capacity(lambda_grid.len());
    for lambda in lambda_grid {
        let costs = scan_costs(family, lambda, &w_grid)?;
        let local_minima = interior_minima(&w_grid, &costs);
        curves.push(LandscapeCurve {
            lambda: lambda.as_slice().to_vec(),
            costs,
            local_minima,
        });
    }
    let vanishing_threshold = if family.group_count() == 2 {
        Some(bisect_vanishing_threshold(family, &w_grid)?)
    } else {
        None
    };
    Ok(LandscapeMap {
        w_grid,
        curves,
        vanishing_threshold,
    })
}

fn scan_costs(
    family: &CostFamily,
    lambda: &SimplexWeights,
    w_grid: &[f64],
) -> Result<Vec<f64>> {
    w_grid
        .iter()
        .map(|&w| Ok(family.mixture_cost_grad(lambda, &[w])?.0))
        .collect()
}

fn interior_minima(w_grid: &[f64], costs: &[f64]) -> Vec<f64> {
    (1..costs.len() - 1)
        .filter(|&i| costs[i] < costs[i - 1] && costs[i] < costs[i + 1])
        .map(|i| w_grid[i])
        .collect()
}

fn bisect_vanishing_threshold(family: &CostFamily, w_grid: &[f64]) -> Result<f64> {
    let has_left_min = |lam2: f64| -> Result<bool> {
        let lambda = SimplexWeights::new(vec![1.0 - lam2, lam2])?;
        let costs = scan_costs(family, &lambda, w_grid)?;
        Ok(interior_minima(w_grid, &costs).iter().any(|&w| w < 0.0))
    };
    let mut lo = 0.5;
    let mut hi = 1.0;
    if !has_left_min(lo)? {
        return Ok(lo);
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if has_left_min(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
