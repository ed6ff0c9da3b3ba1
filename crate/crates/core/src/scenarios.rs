//! Seeded generators for the reproducible experiments: the two-subpopulation
//! classification task and the finite discretized adversarial-perturbation
//! family.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cost::{Example, GroupedDataset, TaskKind};
use crate::error::{Error, Result};

/// Parameters of the two-subpopulation scenario. Each subpopulation is a
/// pair of Gaussian class-conditional clouds separated across its own linear
/// boundary; the minority boundary is the majority boundary rotated by
/// `rotation` radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPopulationParams {
    pub n_majority: usize,
    pub n_minority: usize,
    /// Distance between the two class centers of a subpopulation.
    pub margin: f64,
    /// Angle between the minority and majority decision boundaries (radians).
    pub rotation: f64,
    /// Isotropic Gaussian noise scale around the class centers.
    pub noise: f64,
    pub seed: u64,
}

impl Default for TwoPopulationParams {
    fn default() -> Self {
        TwoPopulationParams {
            n_majority: 450,
            n_minority: 50,
            margin: 1.6,
            rotation: std::f64::consts::FRAC_PI_2,
            noise: 0.6,
            seed: 7,
        }
    }
}

impl TwoPopulationParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_majority < 10 || self.n_minority < 10 {
            return Err(Error::contract("subpopulation counts must be >= 10"));
        }
        if !(self.noise.is_finite() && self.noise > 0.0) {
            return Err(Error::contract("noise scale must be positive"));
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err(Error::contract("margin must be positive"));
        }
        if !self.rotation.is_finite() {
            return Err(Error::contract("rotation must be finite"));
        }
        Ok(())
    }
}

/// Generates the K=2 two-subpopulation dataset: group 0 is the majority,
/// group 1 the minority. Labels split each group between the classes within
/// one example; features are `label * (margin/2) * u_k + noise * g` with
/// `u_k` the group's boundary normal and `g` standard 2-D Gaussian noise.
/// Bit-deterministic given the seed.
pub fn gen_two_population(params: &TwoPopulationParams) -> Result<GroupedDataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let specs = [(params.n_majority, 0.0), (params.n_minority, params.rotation)];
    let mut groups = Vec::with_capacity(2);
    for (n, theta) in specs {
        let u = [theta.cos(), theta.sin()];
        let n_pos = n.div_ceil(2);
        let mut group = Vec::with_capacity(n);
        for i in 0..n {
            let label = if i < n_pos { 1.0 } else { -1.0 };
            let g0: f64 = StandardNormal.sample(&mut rng);
            let g1: f64 = StandardNormal.sample(&mut rng);
            group.push(Example {
                features: vec![
                    label * 0.5 * params.margin * u[0] + params.noise * g0,
                    label * 0.5 * params.margin * u[1] + params.noise * g1,
                ],
                label,
            });
        }
        groups.push(group);
    }
    GroupedDataset::new(groups, 2, TaskKind::Classification)
}

/// A single-population variant (K=1) used as the base distribution of the
/// adversarial scenario: one boundary, same cloud structure.
pub fn gen_base_population(
    n: usize,
    margin: f64,
    noise: f64,
    seed: u64,
) -> Result<GroupedDataset> {
    let params = TwoPopulationParams {
        n_majority: n,
        n_minority: 10, // placeholder group, dropped below
        margin,
        rotation: 0.0,
        noise,
        seed,
    };
    let data = gen_two_population(&params)?;
    GroupedDataset::new(vec![data.group(0).to_vec()], 2, TaskKind::Classification)
}

/// Parameters of the discretized adversarial-perturbation family: constant
/// feature shifts on the axis-aligned grid `{-kappa..0..+kappa}^2` with
/// `grid_steps` steps per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationGridParams {
    /// L-infinity radius of the perturbation ball.
    pub kappa: f64,
    /// Steps per side; the per-axis offsets are `j * kappa / grid_steps`
    /// for `j in -grid_steps..=grid_steps`.
    pub grid_steps: usize,
    /// Cap on the family size `(2*grid_steps + 1)^2`.
    pub max_family: usize,
}

impl Default for PerturbationGridParams {
    fn default() -> Self {
        PerturbationGridParams {
            kappa: 0.3,
            grid_steps: 1,
            max_family: 81,
        }
    }
}

/// Expands a single-group base dataset into the finite perturbation family:
/// one group per offset vector, each a shifted copy of the base. Offsets are
/// enumerated in row-major order from `(-kappa, -kappa)`; the zero offset is
/// always a member.
pub fn gen_adversarial_grid(
    base: &GroupedDataset,
    params: &PerturbationGridParams,
) -> Result<GroupedDataset> {
    if base.group_count() != 1 {
        return Err(Error::contract(
            "adversarial grid expects a single-group base dataset",
        ));
    }
    if base.dim() != 2 {
        return Err(Error::contract("adversarial grid expects 2-D features"));
    }
    if !(params.kappa.is_finite() && params.kappa >= 0.0) {
        return Err(Error::contract("kappa must be finite and >= 0"));
    }
    if params.grid_steps < 1 {
        return Err(Error::contract("grid_steps must be >= 1"));
    }
    let side = 2 * params.grid_steps + 1;
    let family_size = side * side;
    if family_size > params.max_family {
        return Err(Error::contract(format!(
            "family size {family_size} exceeds cap {}",
            params.max_family
        )));
    }
    let g = params.grid_steps as i64;
    let mut groups = Vec::with_capacity(family_size);
    for j0 in -g..=g {
        for j1 in -g..=g {
            let offset = [
                j0 as f64 * params.kappa / g as f64,
                j1 as f64 * params.kappa / g as f64,
            ];
            let shifted = base.shifted(&offset)?;
            groups.push(shifted.group(0).to_vec());
        }
    }
    GroupedDataset::new(groups, 2, TaskKind::Classification)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{CostFamily, LossKind};
    use crate::optimize::{descend, DescentConfig, SimplexWeights};

    #[test]
    fn generator_respects_requested_counts_and_balance() {
        let params = TwoPopulationParams {
            n_majority: 31,
            n_minority: 10,
            ..TwoPopulationParams::default()
        };
        let data = gen_two_population(&params).unwrap();
        assert_eq!(data.group_sizes(), vec![31, 10]);
        for k in 0..2 {
            let pos = data.group(k).iter().filter(|e| e.label == 1.0).count();
            let neg = data.group(k).len() - pos;
            assert!((pos as i64 - neg as i64).abs() <= 1);
        }
    }

    #[test]
    fn generator_is_seed_deterministic() {
        let params = TwoPopulationParams::default();
        let a = gen_two_population(&params).unwrap();
        let b = gen_two_population(&params).unwrap();
        assert_eq!(a, b);
        let other = gen_two_population(&TwoPopulationParams {
            seed: 8,
            ..params
        })
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn generator_rejects_tiny_counts() {
        let params = TwoPopulationParams {
            n_minority: 3,
            ..TwoPopulationParams::default()
        };
        assert!(gen_two_population(&params).is_err());
    }

    #[test]
    fn adversarial_grid_counts_and_contains_base() {
        let base = gen_base_population(40, 1.5, 0.5, 3).unwrap();
        let fam = gen_adversarial_grid(&base, &PerturbationGridParams::default()).unwrap();
        assert_eq!(fam.group_count(), 9);
        // middle member (index 4 in row-major 3x3) is the unperturbed base
        assert_eq!(fam.group(4), base.group(0));
    }

    #[test]
    fn adversarial_grid_enforces_cap() {
        let base = gen_base_population(40, 1.5, 0.5, 3).unwrap();
        let params = PerturbationGridParams {
            grid_steps: 5,
            max_family: 81,
            ..PerturbationGridParams::default()
        };
        assert!(gen_adversarial_grid(&base, &params).is_err());
    }

    #[test]
    fn zero_kappa_family_members_are_identical() {
        let base = gen_base_population(40, 1.5, 0.5, 3).unwrap();
        let params = PerturbationGridParams {
            kappa: 0.0,
            ..PerturbationGridParams::default()
        };
        let data = gen_adversarial_grid(&base, &params).unwrap();
        for k in 0..9 {
            assert_eq!(data.group(k), base.group(0));
        }
        // DRO on identical members equals ERM on the base
        let fam = CostFamily::dataset(data, LossKind::Logistic, 0.0).unwrap();
        let base_fam = CostFamily::dataset(base, LossKind::Logistic, 0.0).unwrap();
        let cfg = DescentConfig::default();
        let w_mix = descend(&fam, &SimplexWeights::uniform(9), &[0.0; 3], &cfg).unwrap();
        let w_base = descend(&base_fam, &SimplexWeights::uniform(1), &[0.0; 3], &cfg).unwrap();
        for (a, b) in w_mix.iter().zip(&w_base) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_zero_groups_share_a_boundary() {
        // with no rotation a single linear rule fits both groups well
        let params = TwoPopulationParams {
            rotation: 0.0,
            ..TwoPopulationParams::default()
        };
        let data = gen_two_population(&params).unwrap();
        let fam = CostFamily::dataset(data, LossKind::HingeL2, 1e-2).unwrap();
        let cfg = DescentConfig {
            max_steps: 1000,
            ..DescentConfig::default()
        };
        let w = descend(&fam, &fam.erm_weights(), &[0.0; 3], &cfg).unwrap();
        let acc0 = fam.group_accuracy(0, &w).unwrap();
        let acc1 = fam.group_accuracy(1, &w).unwrap();
        assert!(acc0 > 0.8 && acc1 > 0.8, "accuracies {acc0} {acc1}");
    }
}
