//! The `dro-lab/1` run document: a JSON-serializable record of a training
//! run with its effective configuration, per-iteration trajectory, final
//! state, and optional baseline and verification blocks.

use serde::{Deserialize, Serialize};

use crate::dro::{BaselineReport, DroSolution, IterationRecord};
use crate::error::{Error, Result};
use crate::verify::{ConverseReport, LandscapeMap, StationarityReport};

pub const SCHEMA_VERSION: &str = "dro-lab/1";

/// Final state of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalState {
    pub w: Vec<f64>,
    pub lambda: Vec<f64>,
    pub costs: Vec<f64>,
    /// `costs[k] - r[k]` under the calibration the run used.
    pub shortfalls: Vec<f64>,
    /// Per-group classification accuracy, when defined.
    pub accuracy: Option<Vec<f64>>,
}

/// Verification blocks attached to a run document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerifyBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationarity: Option<StationarityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converse: Option<ConverseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landscape: Option<LandscapeMap>,
}

/// Validation-split outcome of the recommendation pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecommendationBlock {
    pub acceptability: Vec<f64>,
    /// Group-k cost of the final model on group k's validation split.
    pub validation_costs: Vec<f64>,
    /// `validation_costs[k] - r_star[k]`.
    pub validation_shortfalls: Vec<f64>,
}

/// Top-level run document (`schema: "dro-lab/1"`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDocument {
    pub schema: String,
    /// Effective configuration, echoed exactly as resolved.
    pub config: serde_json::Value,
    pub trajectory: Vec<IterationRecord>,
    /// Null when a recommendation run refused before training.
    #[serde(rename = "final")]
    pub final_state: Option<FinalState>,
    pub converged: bool,
    /// Offending groups of a refused recommendation, or null.
    pub refusal: Option<Vec<usize>>,
    /// Per-group baseline reports when calibration was estimated.
    pub baselines: Option<Vec<BaselineReport>>,
    /// Present for recommendation-pipeline runs.
    pub recommendation: Option<RecommendationBlock>,
    pub verify: Option<VerifyBlock>,
}

impl RunDocument {
    pub fn new(config: serde_json::Value, solution: &DroSolution, r: &[f64]) -> Self {
        let shortfalls = solution
            .costs_final
            .iter()
            .zip(r)
            .map(|(c, rk)| c - rk)
            .collect();
        RunDocument {
            schema: SCHEMA_VERSION.to_string(),
            config,
            trajectory: solution.trajectory.clone(),
            final_state: Some(FinalState {
                w: solution.w_final.clone(),
                lambda: solution.lambda_final.as_slice().to_vec(),
                costs: solution.costs_final.clone(),
                shortfalls,
                accuracy: None,
            }),
            converged: solution.converged,
            refusal: None,
            baselines: None,
            recommendation: None,
            verify: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RunDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema '{}', expected '{SCHEMA_VERSION}'",
                doc.schema
            )));
        }
        Ok(doc)
    }

    /// The per-iteration trajectory as CSV:
    /// `t,lambda_1..K,delta_1..K,c_1..K,mix_cost`.
    pub fn trajectory_csv(&self) -> String {
        let k = self
            .trajectory
            .first()
            .map(|rec| rec.lambda.len())
            .unwrap_or(0);
        let mut out = String::from("t");
        for name in ["lambda", "delta", "c"] {
            for i in 1..=k {
                out.push_str(&format!(",{name}_{i}"));
            }
        }
        out.push_str(",mix_cost\n");
        for rec in &self.trajectory {
            out.push_str(&rec.t.to_string());
            for block in [&rec.lambda, &rec.delta, &rec.costs] {
                for x in block {
                    out.push_str(&format!(",{x}"));
                }
            }
            out.push_str(&format!(",{}\n", rec.mixture_cost));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostFamily;
    use crate::dro::{lagrangian_dro, DroConfig};
    use crate::optimize::CalibrationVector;

    fn sample_solution() -> DroSolution {
        let fam = CostFamily::counterexample(0.05, None).unwrap();
        let cfg = DroConfig {
            max_outer: 5,
            ..DroConfig::default()
        };
        lagrangian_dro(&fam, &CalibrationVector::zeros(2), &cfg, &[0.1]).unwrap()
    }

    #[test]
    fn document_round_trips() {
        let sol = sample_solution();
        let doc = RunDocument::new(serde_json::json!({"mode": "dro"}), &sol, &[0.0, 0.0]);
        let text = doc.to_json();
        let back = RunDocument::from_json(&text).unwrap();
        assert_eq!(back.schema, SCHEMA_VERSION);
        assert_eq!(back.final_state.w, sol.w_final);
        assert_eq!(back.trajectory.len(), sol.outer_iterations);
    }

    #[test]
    fn rejects_unknown_schema() {
        let sol = sample_solution();
        let mut doc = RunDocument::new(serde_json::json!({}), &sol, &[0.0, 0.0]);
        doc.schema = "other/9".into();
        assert!(RunDocument::from_json(&doc.to_json()).is_err());
    }

    #[test]
    fn trajectory_csv_shape() {
        let sol = sample_solution();
        let doc = RunDocument::new(serde_json::json!({}), &sol, &[0.0, 0.0]);
        let csv = doc.trajectory_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,lambda_1,lambda_2,delta_1,delta_2,c_1,c_2,mix_cost"
        );
        assert_eq!(csv.lines().count(), 1 + sol.outer_iterations);
    }
}
