//! Cost-family abstraction with two realizations: dataset-backed expected
//! losses over grouped examples, and the closed-form 1-D nonconvex pair
//! `C1(w) = tanh(1+w) + eps*w^2`, `C2(w) = tanh(1-w) + eps*w^2`.
//!
//! Dataset-backed costs use the linear predictor
//! `f_w(x) = <w[..n], x> + w[n]` (explicit bias as the last coordinate,
//! so `d = n + 1`), with exact analytic gradients. Per-example sums are
//! reduced in index order so results are bit-deterministic.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{CalibrationVector, SimplexWeights};

/// Default curvature coefficient of the counterexample family (`w^2/20`).
pub const COUNTEREXAMPLE_EPSILON: f64 = 0.05;

/// Prediction task of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    /// Labels are exactly +1 or -1.
    Classification,
}

/// Per-example loss used by dataset-backed families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `(y - f_w(x))^2`
    Squared,
    /// `ln(1 + exp(-y f_w(x)))`, classification only.
    Logistic,
    /// `max(0, 1 - y f_w(x))` plus `(mu/2)||w||^2`, classification only.
    HingeL2,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LossKind::Squared => "squared",
            LossKind::Logistic => "logistic",
            LossKind::HingeL2 => "hinge",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(LossKind::Squared),
            "logistic" => Ok(LossKind::Logistic),
            "hinge" | "hinge-l2" => Ok(LossKind::HingeL2),
            other => Err(Error::Parse(format!("unknown loss kind '{other}'"))),
        }
    }
}

/// One labeled example `z = (x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: f64,
}

/// K labeled example sets, one per subpopulation. All examples share the
/// feature dimension and task kind; every group is nonempty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedDataset {
    groups: Vec<Vec<Example>>,
    dim: usize,
    task: TaskKind,
}

impl GroupedDataset {
    pub fn new(groups: Vec<Vec<Example>>, dim: usize, task: TaskKind) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::contract("dataset must have at least one group"));
        }
        for (k, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::contract(format!("group {k} is empty")));
            }
            for ex in group {
                if ex.features.len() != dim {
                    return Err(Error::contract(format!(
                        "group {k} has an example of dimension {}, expected {dim}",
                        ex.features.len()
                    )));
                }
                if ex.features.iter().any(|x| !x.is_finite()) || !ex.label.is_finite() {
                    return Err(Error::contract(format!(
                        "group {k} has a non-finite example"
                    )));
                }
                if task == TaskKind::Classification && ex.label != 1.0 && ex.label != -1.0 {
                    return Err(Error::contract(format!(
                        "classification label must be +1 or -1, got {}",
                        ex.label
                    )));
                }
            }
        }
        Ok(GroupedDataset { groups, dim, task })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, k: usize) -> &[Example] {
        &self.groups[k]
    }

    pub fn groups(&self) -> &[Vec<Example>] {
        &self.groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len()).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    /// A copy with every feature vector translated by `offset`.
    pub fn shifted(&self, offset: &[f64]) -> Result<GroupedDataset> {
        if offset.len() != self.dim {
            return Err(Error::contract("offset dimension mismatch"));
        }
        let groups = self
            .groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|ex| Example {
                        features: ex
                            .features
                            .iter()
                            .zip(offset)
                            .map(|(x, o)| x + o)
                            .collect(),
                        label: ex.label,
                    })
                    .collect()
            })
            .collect();
        GroupedDataset::new(groups, self.dim, self.task)
    }

    /// Write as CSV: header `group,label,f1,...,fn`, one row per example,
    /// groups in order, LF line endings.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("group,label");
        for j in 1..=self.dim {
            out.push_str(&format!(",f{j}"));
        }
        out.push('\n');
        for (k, group) in self.groups.iter().enumerate() {
            for ex in group {
                out.push_str(&format!("{k},{}", ex.label));
                for x in &ex.features {
                    out.push_str(&format!(",{x}"));
                }
                out.push('\n');
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Read the CSV format written by [`write_csv`]. When `task` is `None`,
    /// the task kind is inferred: classification when every label is exactly
    /// +1 or -1, regression otherwise.
    pub fn read_csv(path: &Path, task: Option<TaskKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dataset file".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols[0] != "group" || cols[1] != "label" {
            return Err(Error::Parse(format!(
                "bad header '{header}', expected 'group,label,f1,...'"
            )));
        }
        let dim = cols.len() - 2;
        let mut groups: Vec<Vec<Example>> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    dim + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", lineno + 2)))
            };
            let k: usize = fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad group id", lineno + 2)))?;
            let label = parse(fields[1])?;
            let features = fields[2..].iter().map(|s| parse(s)).collect::<Result<_>>()?;
            while groups.len() <= k {
                groups.push(Vec::new());
            }
            groups[k].push(Example { features, label });
        }
        let task = task.unwrap_or_else(|| {
            let all_signs = groups
                .iter()
                .flatten()
                .all(|ex| ex.label == 1.0 || ex.label == -1.0);
            if all_signs {
                TaskKind::Classification
            } else {
                TaskKind::Regression
            }
        });
        GroupedDataset::new(groups, dim, task)
    }
}

/// A dataset-backed family: `cost_k(w)` is the mean per-example loss over
/// group k, plus `(mu/2)||w||^2` for the hinge loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFamily {
    data: GroupedDataset,
    loss: LossKind,
    mu: f64,
}

/// The closed-form counterexample pair, optionally carrying calibration
/// shifts for recalibration experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleFamily {
    epsilon: f64,
    shift: Option<CalibrationVector>,
}

/// A finite indexed family of differentiable cost functions with exact
/// gradients (subgradients at hinge kinks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFamily {
    Dataset(DatasetFamily),
    ClosedForm(CounterexampleFamily),
}

fn sech2(x: f64) -> f64 {
    let t = x.tanh();
    1.0 - t * t
}

/// `ln(1 + exp(-m))` without overflow for large |m|.
fn log1p_exp_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

impl CostFamily {
    /// Builds the K=2 closed-form family
    /// `C1(w) = tanh(1+w) + eps*w^2`, `C2(w) = tanh(1-w) + eps*w^2`.
    pub fn counterexample(epsilon: f64, shift: Option<CalibrationVector>) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::contract("epsilon must be positive"));
        }
        if let Some(r) = &shift {
            if r.len() != 2 {
                return Err(Error::contract("counterexample shift must have length 2"));
            }
        }
        Ok(CostFamily::ClosedForm(CounterexampleFamily {
            epsilon,
            shift,
        }))
    }

    /// Builds a dataset-backed family with the given loss and regularization
    /// strength. Hinge and logistic require a classification dataset.
    pub fn dataset(data: GroupedDataset, loss: LossKind, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::contract("mu must be finite and nonnegative"));
        }
        if matches!(loss, LossKind::Logistic | LossKind::HingeL2)
            && data.task() != TaskKind::Classification
        {
            return Err(Error::contract(format!(
                "{loss} loss requires a classification dataset"
            )));
        }
        Ok(CostFamily::Dataset(DatasetFamily { data, loss, mu }))
    }

    /// Number of cost functions in the family.
    pub fn group_count(&self) -> usize {
        match self {
            CostFamily::Dataset(f) => f.data.group_count(),
            CostFamily::ClosedForm(_) => 2,
        }
    }

    /// Parameter dimension `d` (feature dimension + 1 for dataset families).
    pub fn dim(&self) -> usize {
        match self {
            CostFamily::Dataset(f) => f.data.dim() + 1,
            CostFamily::ClosedForm(_) => 1,
        }
    }

    /// True for families whose every member cost is convex in `w`.
    pub fn is_convex(&self) -> bool {
        matches!(self, CostFamily::Dataset(_))
    }

    pub fn as_dataset(&self) -> Option<&DatasetFamily> {
        match self {
            CostFamily::Dataset(f) => Some(f),
            CostFamily::ClosedForm(_) => None,
        }
    }

    pub fn as_closed_form(&self) -> Option<&CounterexampleFamily> {
        match self {
            CostFamily::ClosedForm(f) => Some(f),
            CostFamily::Dataset(_) => None,
        }
    }

    /// Group weights of the pooled expected risk: proportional to group size
    /// for dataset families (every example weighted equally), uniform for
    /// closed-form families.
    pub fn erm_weights(&self) -> SimplexWeights {
        match self {
            CostFamily::Dataset(f) => {
                let sizes = f.data.group_sizes();
                let total: usize = sizes.iter().sum();
                let v: Vec<f64> = sizes.iter().map(|&n| n as f64 / total as f64).collect();
                let sum: f64 = v.iter().sum();
                SimplexWeights::new(v.iter().map(|x| x / sum).collect())
                    .expect("size weights lie on the simplex")
            }
            CostFamily::ClosedForm(_) => SimplexWeights::uniform(2),
        }
    }

    fn check_args(&self, k: usize, w: &[f64]) -> Result<()> {
        if k >= self.group_count() {
            return Err(Error::contract(format!(
                "group index {k} out of range (K = {})",
                self.group_count()
            )));
        }
        if w.len() != self.dim() {
            return Err(Error::contract(format!(
                "parameter dimension {} does not match family dimension {}",
                w.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Cost of group `k` at `w`.
    pub fn group_cost(&self, k: usize, w: &[f64]) -> Result<f64> {
        Ok(self.group_cost_grad(k, w)?.0)
    }

    /// Exact gradient (chosen subgradient at hinge kinks) of `group_cost`.
    pub fn group_grad(&self, k: usize, w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.group_cost_grad(k, w)?.1)
    }

    /// Cost and gradient of group `k` at `w`, evaluated in one pass.
    pub fn group_cost_grad(&self, k: usize, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_args(k, w)?;
        match self {
            CostFamily::ClosedForm(f) => {
                let x = w[0];
                let sign = if k == 0 { 1.0 } else { -1.0 };
                let cost = (1.0 + sign * x).tanh() + f.epsilon * x * x;
                let grad = sign * sech2(1.0 + sign * x) + 2.0 * f.epsilon * x;
                Ok((cost, vec![grad]))
            }
            CostFamily::Dataset(f) => f.cost_grad(k, w),
        }
    }

    /// All group costs at `w`, in group order.
    pub fn all_costs(&self, w: &[f64]) -> Result<Vec<f64>> {
        (0..self.group_count())
            .map(|k| self.group_cost(k, w))
            .collect()
    }

    /// Cost and gradient of the `lambda`-mixture:
    /// `(sum_k lambda_k cost_k(w), sum_k lambda_k grad_k(w))`,
    /// accumulated in group order.
    pub fn mixture_cost_grad(
        &self,
        lambda: &SimplexWeights,
        w: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        if lambda.len() != self.group_count() {
            return Err(Error::contract(format!(
                "mixture length {} does not match group count {}",
                lambda.len(),
                self.group_count()
            )));
        }
        let mut cost = 0.0;
        let mut grad = vec![0.0; self.dim()];
        for (k, &lk) in lambda.as_slice().iter().enumerate() {
            let (c, g) = self.group_cost_grad(k, w)?;
            cost += lk * c;
            for (gi, gk) in grad.iter_mut().zip(&g) {
                *gi += lk * gk;
            }
        }
        Ok((cost, grad))
    }

    /// Classification accuracy of the linear predictor on group `k`
    /// (fraction of examples with `y * f_w(x) > 0`). `None` for closed-form
    /// or regression families.
    pub fn group_accuracy(&self, k: usize, w: &[f64]) -> Option<f64> {
        match self {
            CostFamily::Dataset(f) if f.data.task() == TaskKind::Classification => {
                let group = f.data.group(k);
                let correct = group
                    .iter()
                    .filter(|ex| ex.label * predict(&ex.features, w) > 0.0)
                    .count();
                Some(correct as f64 / group.len() as f64)
            }
            _ => None,
        }
    }
}

impl DatasetFamily {
    pub fn data(&self) -> &GroupedDataset {
        &self.data
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn cost_grad(&self, k: usize, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let group = self.data.group(k);
        let n = group.len() as f64;
        let d = w.len();
        let mut cost = 0.0;
        let mut grad = vec![0.0; d];
        for ex in group {
            let f = predict(&ex.features, w);
            match self.loss {
                LossKind::Squared => {
                    let resid = ex.label - f;
                    cost += resid * resid;
                    // d/dw (y - f)^2 = -2 (y - f) x_aug
                    let scale = -2.0 * resid;
                    accumulate(&mut grad, &ex.features, scale);
                }
                LossKind::Logistic => {
                    let m = ex.label * f;
                    cost += log1p_exp_neg(m);
                    // d/dw ln(1+e^{-m}) = -y sigma(-m) x_aug
                    let scale = -ex.label * sigmoid(-m);
                    accumulate(&mut grad, &ex.features, scale);
                }
                LossKind::HingeL2 => {
                    let m = ex.label * f;
                    if m < 1.0 {
                        cost += 1.0 - m;
                        accumulate(&mut grad, &ex.features, -ex.label);
                    }
                    // subgradient 0 chosen at m == 1 exactly
                }
            }
        }
        cost /= n;
        for g in grad.iter_mut() {
            *g /= n;
        }
        if self.loss == LossKind::HingeL2 {
            let sq: f64 = w.iter().map(|x| x * x).sum();
            cost += 0.5 * self.mu * sq;
            for (g, wi) in grad.iter_mut().zip(w) {
                *g += self.mu * wi;
            }
        }
        Ok((cost, grad))
    }
}

impl CounterexampleFamily {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn shift(&self) -> Option<&CalibrationVector> {
        self.shift.as_ref()
    }
}

/// Linear predictor with appended bias: `<w[..n], x> + w[n]`.
pub fn predict(features: &[f64], w: &[f64]) -> f64 {
    let mut f = w[features.len()];
    for (x, wi) in features.iter().zip(w) {
        f += x * wi;
    }
    f
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Adds `scale * (x, 1)` to `grad` (augmented-feature accumulation).
fn accumulate(grad: &mut [f64], features: &[f64], scale: f64) {
    let n = features.len();
    for (g, x) in grad[..n].iter_mut().zip(features) {
        *g += scale * x;
    }
    grad[n] += scale;
}

#[cfg(test)]
mod tests {
    use super::*;

    const TANH_1: f64 = 0.7615941559557649;
    const SECH2_1: f64 = 0.41997434161402614;

    fn single_example_dataset(x: Vec<f64>, y: f64, task: TaskKind) -> GroupedDataset {
        GroupedDataset::new(
            vec![vec![Example {
                features: x.clone(),
                label: y,
            }]],
            x.len(),
            task,
        )
        .unwrap()
    }

    #[test]
    fn counterexample_values_at_origin() {
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        assert!((fam.group_cost(0, &[0.0]).unwrap() - TANH_1).abs() < 1e-15);
        assert!((fam.group_cost(1, &[0.0]).unwrap() - TANH_1).abs() < 1e-15);
        let g0 = fam.group_grad(0, &[0.0]).unwrap();
        let g1 = fam.group_grad(1, &[0.0]).unwrap();
        assert!((g0[0] - SECH2_1).abs() < 1e-15);
        assert!((g1[0] + SECH2_1).abs() < 1e-15);
    }

    #[test]
    fn counterexample_symmetry() {
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        for &w in &[-2.0, -1.0, 0.5, 3.0] {
            let c0 = fam.group_cost(0, &[w]).unwrap();
            let c1 = fam.group_cost(1, &[-w]).unwrap();
            assert!((c0 - c1).abs() < 1e-15, "symmetry fails at w={w}");
            let g0 = fam.group_grad(0, &[w]).unwrap();
            let g1 = fam.group_grad(1, &[-w]).unwrap();
            assert!((g0[0] + g1[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn counterexample_rejects_bad_epsilon() {
        assert!(CostFamily::counterexample(0.0, None).is_err());
        assert!(CostFamily::counterexample(-0.1, None).is_err());
        assert!(CostFamily::counterexample(f64::NAN, None).is_err());
    }

    #[test]
    fn squared_zero_residual() {
        let data = single_example_dataset(vec![0.0, 0.0], 0.0, TaskKind::Regression);
        let fam = CostFamily::dataset(data, LossKind::Squared, 0.0).unwrap();
        // zero intercept: w = (w1, w2, 0)
        let c = fam.group_cost(0, &[3.0, -1.0, 0.0]).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn logistic_at_zero_margin_is_ln2() {
        let data = single_example_dataset(vec![0.4, -0.2], 1.0, TaskKind::Classification);
        let fam = CostFamily::dataset(data, LossKind::Logistic, 0.0).unwrap();
        let c = fam.group_cost(0, &[0.0, 0.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn hinge_at_zero_weights_is_one() {
        let data = GroupedDataset::new(
            vec![
                vec![Example { features: vec![1.0, 2.0], label: 1.0 }],
                vec![
                    Example { features: vec![-1.0, 0.5], label: -1.0 },
                    Example { features: vec![0.3, 0.1], label: 1.0 },
                ],
            ],
            2,
            TaskKind::Classification,
        )
        .unwrap();
        let fam = CostFamily::dataset(data, LossKind::HingeL2, 0.37).unwrap();
        for k in 0..2 {
            assert_eq!(fam.group_cost(k, &[0.0, 0.0, 0.0]).unwrap(), 1.0);
        }
    }

    #[test]
    fn loss_task_compatibility() {
        let reg = single_example_dataset(vec![1.0], 0.3, TaskKind::Regression);
        assert!(CostFamily::dataset(reg.clone(), LossKind::Logistic, 0.0).is_err());
        assert!(CostFamily::dataset(reg.clone(), LossKind::HingeL2, 0.01).is_err());
        assert!(CostFamily::dataset(reg, LossKind::Squared, 0.0).is_ok());
    }

    #[test]
    fn contract_violations() {
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        assert!(fam.group_cost(2, &[0.0]).is_err());
        assert!(fam.group_cost(0, &[0.0, 1.0]).is_err());
        let lam3 = SimplexWeights::uniform(3);
        assert!(fam.mixture_cost_grad(&lam3, &[0.0]).is_err());
    }

    #[test]
    fn one_hot_mixture_equals_group() {
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        let w = [0.73];
        for k in 0..2 {
            let lam = SimplexWeights::one_hot(2, k);
            let (c, g) = fam.mixture_cost_grad(&lam, &w).unwrap();
            assert_eq!(c, fam.group_cost(k, &w).unwrap());
            assert_eq!(g, fam.group_grad(k, &w).unwrap());
        }
    }

    #[test]
    fn classification_labels_validated() {
        let bad = GroupedDataset::new(
            vec![vec![Example { features: vec![1.0], label: 0.5 }]],
            1,
            TaskKind::Classification,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let data = GroupedDataset::new(
            vec![
                vec![
                    Example { features: vec![0.125, -3.5], label: 1.0 },
                    Example { features: vec![1.0, 2.0], label: -1.0 },
                ],
                vec![Example { features: vec![-0.75, 0.0], label: 1.0 }],
            ],
            2,
            TaskKind::Classification,
        )
        .unwrap();
        data.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("group,label,f1,f2\n"));
        let back = GroupedDataset::read_csv(&path, None).unwrap();
        assert_eq!(back, data);
        assert_eq!(back.task(), TaskKind::Classification);
    }

    #[test]
    fn erm_weights_follow_group_sizes() {
        let data = GroupedDataset::new(
            vec![
                vec![Example { features: vec![0.0], label: 1.0 }; 9],
                vec![Example { features: vec![0.0], label: -1.0 }; 1],
            ],
            1,
            TaskKind::Classification,
        )
        .unwrap();
        let fam = CostFamily::dataset(data, LossKind::Logistic, 0.0).unwrap();
        let w = fam.erm_weights();
        assert!((w.as_slice()[0] - 0.9).abs() < 1e-15);
        assert!((w.as_slice()[1] - 0.1).abs() < 1e-15);
    }
}
