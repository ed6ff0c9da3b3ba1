//! Command implementations. Each returns the process exit code:
//! 0 success, 2 config/I-O error (raised as `Err`), 3 numerical divergence
//! (raised as `Err`), 4 verification failure.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use dro_lab::cost::{CostFamily, GroupedDataset, LossKind, TaskKind};
use dro_lab::dro::{
    estimate_baseline, lagrangian_dro, recommend_pipeline, sample_size_adjusted, BaselineConfig,
    BaselineReport, DroConfig, DroSolution, IterationRecord, RecommendConfig,
};
use dro_lab::optimize::{descend, CalibrationVector, SimplexWeights};
use dro_lab::report::{FinalState, RunDocument, VerifyBlock, SCHEMA_VERSION};
use dro_lab::scenarios::{
    gen_adversarial_grid, gen_base_population, gen_two_population, PerturbationGridParams,
    TwoPopulationParams,
};
use dro_lab::serde_util::beta_serde;
use dro_lab::verify::{
    check_converse, check_stationarity, dual_grid_oracle, landscape_scan_1d, LandscapeMap,
};

use crate::cli::{
    CalibrateArgs, GenerateAdversarialArgs, GenerateTwoPopArgs, RecommendArgs, TrainArgs,
    VerifyArgs,
};
use crate::config::{pick, pick_opt, EffectiveDescent, FileConfig};

pub struct Ctx {
    pub file: FileConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub quiet: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))?;
        let path = self.out.join(name);
        std::fs::write(&path, contents)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

// ---------------------------------------------------------------- generate

pub fn generate_two_pop(ctx: &Ctx, args: &GenerateTwoPopArgs) -> Result<i32> {
    let defaults = TwoPopulationParams::default();
    let sec = &ctx.file.generate;
    let params = TwoPopulationParams {
        n_majority: pick(args.n_majority, sec.n_majority, defaults.n_majority),
        n_minority: pick(args.n_minority, sec.n_minority, defaults.n_minority),
        margin: pick(args.margin, sec.margin, defaults.margin),
        rotation: pick(args.rotation, sec.rotation, defaults.rotation),
        noise: pick(args.noise, sec.noise, defaults.noise),
        seed: ctx.seed,
    };
    let data = gen_two_population(&params)?;
    std::fs::create_dir_all(&ctx.out)
        .with_context(|| format!("creating output directory {}", ctx.out.display()))?;
    let csv_path = ctx.out.join("two-pop.csv");
    data.write_csv(&csv_path)?;
    ctx.write(
        "two-pop.params.json",
        &serde_json::to_string_pretty(&params)?,
    )?;
    println!("{}", csv_path.display());
    Ok(0)
}

pub fn generate_adversarial(ctx: &Ctx, args: &GenerateAdversarialArgs) -> Result<i32> {
    let sec = &ctx.file.generate;
    let defaults = PerturbationGridParams::default();
    let params = PerturbationGridParams {
        kappa: pick(args.kappa, sec.kappa, defaults.kappa),
        grid_steps: pick(args.grid_steps, sec.grid_steps, defaults.grid_steps),
        max_family: pick(args.cap, sec.max_family, defaults.max_family),
    };
    let base = match &args.data {
        Some(path) => GroupedDataset::read_csv(path, Some(TaskKind::Classification))?,
        None => {
            let n = pick(args.n_base, sec.n_base, 200);
            let margin = pick(args.margin, sec.margin, 1.5);
            let noise = pick(args.noise, sec.noise, 0.6);
            gen_base_population(n, margin, noise, ctx.seed)?
        }
    };
    let family = gen_adversarial_grid(&base, &params)?;
    std::fs::create_dir_all(&ctx.out)
        .with_context(|| format!("creating output directory {}", ctx.out.display()))?;
    let csv_path = ctx.out.join("adversarial.csv");
    family.write_csv(&csv_path)?;
    #[derive(Serialize)]
    struct AdvProvenance<'a> {
        grid: &'a PerturbationGridParams,
        base_examples: usize,
        family_size: usize,
        seed: u64,
    }
    ctx.write(
        "adversarial.params.json",
        &serde_json::to_string_pretty(&AdvProvenance {
            grid: &params,
            base_examples: base.group(0).len(),
            family_size: family.group_count(),
            seed: ctx.seed,
        })?,
    )?;
    println!("{}", csv_path.display());
    Ok(0)
}

// ------------------------------------------------------------------- train

/// Effective train configuration, echoed into the run document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainEffective {
    pub mode: String,
    pub data: Option<String>,
    pub family: Option<String>,
    pub loss: Option<LossKind>,
    pub mu: f64,
    pub epsilon_family: f64,
    #[serde(with = "beta_serde")]
    pub beta: f64,
    pub epsilon: f64,
    pub max_outer: usize,
    pub descent: TrainDescentEcho,
    pub calibration_source: String,
    pub calibration: Vec<f64>,
    pub sample_adjust: Option<f64>,
    pub alpha_grid: Vec<f64>,
    pub split_ratio: f64,
    pub seed: u64,
    pub w0: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainDescentEcho {
    pub eta: f64,
    pub t_inner: usize,
    pub backtracking: bool,
    pub grad_tol: f64,
}

fn resolve_family(
    data_path: Option<&Path>,
    family_name: Option<&str>,
    loss: LossKind,
    mu: f64,
    epsilon_family: f64,
) -> Result<(CostFamily, Option<GroupedDataset>)> {
    match (data_path, family_name) {
        (Some(path), None) => {
            let data = GroupedDataset::read_csv(path, None)?;
            let family = CostFamily::dataset(data.clone(), loss, mu)?;
            Ok((family, Some(data)))
        }
        (None, Some("counterexample")) => {
            Ok((CostFamily::counterexample(epsilon_family, None)?, None))
        }
        (None, Some(other)) => bail!("unknown analytic family '{other}'"),
        (Some(_), Some(_)) => bail!("--data and --family are mutually exclusive"),
        (None, None) => bail!("one of --data or --family is required"),
    }
}

pub fn train(ctx: &Ctx, args: &TrainArgs) -> Result<i32> {
    let sec = &ctx.file.train;
    let mode = pick(args.mode.clone(), sec.mode.clone(), "dro".into());
    if mode != "erm" && mode != "dro" {
        bail!("mode must be 'erm' or 'dro', got '{mode}'");
    }
    let loss: LossKind = pick(args.loss.clone(), sec.loss.clone(), "hinge".into())
        .parse()
        .map_err(|e: dro_lab::Error| anyhow!(e))?;
    let mu = pick(args.mu, sec.mu, 1e-2);
    let epsilon_family = pick(args.epsilon_family, ctx.file.verify.epsilon_family, 0.05);
    let descent = EffectiveDescent {
        eta: pick(args.eta, sec.eta, 0.1),
        t_inner: pick(args.t_inner, sec.t_inner, 200),
        backtracking: !args.no_backtracking && sec.backtracking.unwrap_or(true),
        grad_tol: pick(args.grad_tol, sec.grad_tol, 1e-10),
    };
    let beta = pick(args.beta, sec.beta, 5.0);
    let epsilon = pick(args.epsilon, sec.epsilon, 1e-9);
    let max_outer = pick(args.max_outer, sec.max_outer, 500);
    let alpha_grid = pick(
        args.alpha_grid.clone(),
        sec.alpha_grid.clone(),
        BaselineConfig::default().alpha_grid,
    );
    let split_ratio = pick(args.split_ratio, sec.split_ratio, 0.7);
    let sample_adjust = pick_opt(args.sample_adjust, sec.sample_adjust);

    let (family, dataset) = resolve_family(
        args.data.as_deref(),
        args.family.as_deref(),
        loss,
        mu,
        epsilon_family,
    )?;
    let k = family.group_count();
    let d = family.dim();
    let w0 = match &args.w0 {
        Some(v) => {
            if v.len() != d {
                bail!("--w0 has {} entries, family dimension is {d}", v.len());
            }
            v.clone()
        }
        None => vec![0.0; d],
    };

    // resolve calibration
    let calibration_source = pick(
        args.calibration.clone(),
        sec.calibration.clone(),
        "zero".into(),
    );
    let mut baselines: Option<Vec<BaselineReport>> = None;
    let mut r = match calibration_source.as_str() {
        "zero" => CalibrationVector::zeros(k),
        "estimate" => {
            let data = dataset
                .as_ref()
                .ok_or_else(|| anyhow!("--calibration estimate requires a dataset"))?;
            let bcfg = BaselineConfig {
                loss,
                mu,
                alpha_grid: alpha_grid.clone(),
                split_ratio,
                seed: ctx.seed,
                inner: dro_lab::DescentConfig {
                    max_steps: descent.t_inner.max(500),
                    grad_tol: descent.grad_tol.min(1e-9),
                    ..descent.to_core()
                },
            };
            let reports: Vec<BaselineReport> = (0..k)
                .map(|g| estimate_baseline(data, g, &bcfg))
                .collect::<dro_lab::Result<_>>()?;
            let r = CalibrationVector::new(reports.iter().map(|b| b.r_star).collect())?;
            baselines = Some(reports);
            r
        }
        list => CalibrationVector::new(
            crate::config::parse_real_list(list).map_err(|e| anyhow!(e))?,
        )?,
    };
    if r.len() != k {
        bail!("calibration vector length {} does not match K = {k}", r.len());
    }
    if let Some(c_adj) = sample_adjust {
        let sizes = dataset
            .as_ref()
            .ok_or_else(|| anyhow!("--sample-adjust requires a dataset"))?
            .group_sizes();
        r = sample_size_adjusted(&r, &sizes, c_adj)?;
    }

    let effective = TrainEffective {
        mode: mode.clone(),
        data: args.data.as_ref().map(|p| p.display().to_string()),
        family: args.family.clone(),
        loss: Some(loss),
        mu,
        epsilon_family,
        beta,
        epsilon,
        max_outer,
        descent: TrainDescentEcho {
            eta: descent.eta,
            t_inner: descent.t_inner,
            backtracking: descent.backtracking,
            grad_tol: descent.grad_tol,
        },
        calibration_source,
        calibration: r.as_slice().to_vec(),
        sample_adjust,
        alpha_grid,
        split_ratio,
        seed: ctx.seed,
        w0: w0.clone(),
    };

    let solution = if mode == "erm" {
        erm_pseudo_solution(&family, &w0, &descent)?
    } else {
        let cfg = DroConfig {
            beta,
            epsilon,
            max_outer,
            inner: descent.to_core(),
            seed: ctx.seed,
            unscaled_stop: false,
        };
        lagrangian_dro(&family, &r, &cfg, &w0)?
    };

    let mut doc = RunDocument::new(serde_json::to_value(&effective)?, &solution, r.as_slice());
    doc.baselines = baselines;
    if let Some(fs) = doc.final_state.as_mut() {
        fs.accuracy = group_accuracies(&family, &solution.w_final);
    }

    let stem = args.name.clone().unwrap_or_else(|| "run".into());
    let json_path = ctx.write(&format!("{stem}.json"), &doc.to_json())?;
    ctx.write(&format!("{stem}.trajectory.csv"), &doc.trajectory_csv())?;
    if family.dim() == 1 {
        ctx.write(
            &format!("{stem}.landscape.csv"),
            &counterexample_landscape_csv(&family)?,
        )?;
    }
    println!("{}", json_path.display());
    if !solution.converged {
        ctx.say("note: lambda stopping rule did not fire; run flagged non-converged");
    }
    Ok(0)
}

fn group_accuracies(family: &CostFamily, w: &[f64]) -> Option<Vec<f64>> {
    (0..family.group_count())
        .map(|k| family.group_accuracy(k, w))
        .collect()
}

/// ERM is descent on the pooled expected risk (group weights proportional to
/// size). The run document records it as a single-iteration trajectory.
fn erm_pseudo_solution(
    family: &CostFamily,
    w0: &[f64],
    descent_cfg: &EffectiveDescent,
) -> Result<DroSolution> {
    let lambda = family.erm_weights();
    let w = descend(family, &lambda, w0, &descent_cfg.to_core())?;
    let costs = family.all_costs(&w)?;
    let mixture_cost = lambda
        .as_slice()
        .iter()
        .zip(&costs)
        .map(|(l, c)| l * c)
        .sum();
    Ok(DroSolution {
        w_final: w,
        lambda_final: lambda.clone(),
        costs_final: costs.clone(),
        trajectory: vec![IterationRecord {
            t: family.group_count(),
            lambda: lambda.as_slice().to_vec(),
            delta: lambda.as_slice().to_vec(),
            costs,
            mixture_cost,
        }],
        converged: true,
        outer_iterations: 1,
    })
}

fn counterexample_landscape_csv(family: &CostFamily) -> Result<String> {
    let grid = vec![SimplexWeights::uniform(2)];
    let map = landscape_scan_1d(family, &grid, (-3.0, 3.0), 6001)?;
    let mut out = String::from("w,c1,c2,max,mix\n");
    for (i, &w) in map.w_grid.iter().enumerate() {
        let c1 = family.group_cost(0, &[w])?;
        let c2 = family.group_cost(1, &[w])?;
        out.push_str(&format!(
            "{w},{c1},{c2},{},{}\n",
            c1.max(c2),
            map.curves[0].costs[i]
        ));
    }
    Ok(out)
}

// --------------------------------------------------------------- calibrate

pub fn calibrate(ctx: &Ctx, args: &CalibrateArgs) -> Result<i32> {
    let sec = &ctx.file.calibrate;
    let loss: LossKind = pick(args.loss.clone(), sec.loss.clone(), "logistic".into())
        .parse()
        .map_err(|e: dro_lab::Error| anyhow!(e))?;
    let defaults = BaselineConfig::default();
    let cfg = BaselineConfig {
        loss,
        mu: pick(args.mu, sec.mu, 1e-2),
        alpha_grid: pick(
            args.alpha_grid.clone(),
            sec.alpha_grid.clone(),
            defaults.alpha_grid,
        ),
        split_ratio: pick(args.split_ratio, sec.split_ratio, 0.7),
        seed: ctx.seed,
        inner: dro_lab::DescentConfig {
            step_size: pick(args.eta, sec.eta, 0.1),
            max_steps: pick(args.t_inner, sec.t_inner, 500),
            backtracking: true,
            grad_tol: pick(args.grad_tol, sec.grad_tol, 1e-9),
        },
    };
    let data = GroupedDataset::read_csv(&args.data, None)?;
    let reports: Vec<BaselineReport> = (0..data.group_count())
        .map(|g| estimate_baseline(&data, g, &cfg))
        .collect::<dro_lab::Result<_>>()?;
    #[derive(Serialize)]
    struct CalibrationDoc<'a> {
        schema: &'static str,
        config: &'a BaselineConfig,
        baselines: &'a [BaselineReport],
    }
    let path = ctx.write(
        "baselines.json",
        &serde_json::to_string_pretty(&CalibrationDoc {
            schema: SCHEMA_VERSION,
            config: &cfg,
            baselines: &reports,
        })?,
    )?;
    println!("{}", path.display());
    for rep in &reports {
        ctx.say(format!(
            "group {}: r* = {:.6} (alpha* = {})",
            rep.group, rep.r_star, rep.alpha_star
        ));
    }
    Ok(0)
}

// ------------------------------------------------------------------ verify

#[derive(Debug, Serialize)]
struct VerifyDoc {
    schema: String,
    target: serde_json::Value,
    verify: VerifyBlock,
    failures: Vec<String>,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    vanishing_threshold: Option<f64>,
}

pub fn verify(ctx: &Ctx, args: &VerifyArgs) -> Result<i32> {
    let sec = &ctx.file.verify;
    let tol = pick(args.tol, sec.tol, 1e-4);
    let radii = pick(
        args.radii.clone(),
        sec.radii.clone(),
        vec![1e-3, 1e-2],
    );
    let samples = pick(args.samples, sec.samples, 200);
    let converse_tol = 1e-8;

    let mut block = VerifyBlock::default();
    let mut failures: Vec<String> = Vec::new();
    let mut landscape: Option<LandscapeMap> = None;
    let target;

    match (&args.run, args.family.as_deref()) {
        (Some(run_path), None) => {
            let text = std::fs::read_to_string(run_path)
                .with_context(|| format!("reading run file {}", run_path.display()))?;
            let doc = RunDocument::from_json(&text)?;
            let cfg: TrainEffective = serde_json::from_value(doc.config.clone())
                .map_err(|e| anyhow!("run config not recognized: {e}"))?;
            let (family, _) = resolve_family(
                cfg.data.as_deref().map(Path::new),
                cfg.family.as_deref(),
                cfg.loss.unwrap_or(LossKind::Logistic),
                cfg.mu,
                cfg.epsilon_family,
            )?;
            let final_state = doc
                .final_state
                .as_ref()
                .ok_or_else(|| anyhow!("run document has no final state"))?;
            let w = &final_state.w;
            let r = CalibrationVector::new(cfg.calibration.clone())?;

            let st = check_stationarity(&family, w, tol)?;
            if !st.is_stationary {
                failures.push(format!("stationarity: min_norm {:.3e} > {tol:.3e}", st.min_norm));
            }
            let conv = check_converse(&family, w, &radii, samples, cfg.seed, converse_tol)?;
            if !conv.passed {
                failures.push(format!(
                    "converse: min observed {:.3e} < -{converse_tol:.0e}",
                    conv.min_observed
                ));
            }
            if family.is_convex() && family.group_count() <= 3 {
                let res_grid = pick(args.grid_resolution, sec.grid_resolution, 2001);
                let inner = dro_lab::DescentConfig {
                    max_steps: 600,
                    grad_tol: 1e-8,
                    ..Default::default()
                };
                let dual = dual_grid_oracle(&family, &r, res_grid, &inner)?;
                let objective = final_state
                    .costs
                    .iter()
                    .zip(r.as_slice())
                    .map(|(c, rk)| c - rk)
                    .fold(f64::NEG_INFINITY, f64::max);
                let gap = (objective - dual.dual_value).abs();
                block.dual_gap = Some(gap);
                if gap > 1e-3 {
                    failures.push(format!("dual oracle: |objective - D*| = {gap:.3e} > 1e-3"));
                }
            }
            block.stationarity = Some(st);
            block.converse = Some(conv);
            target = serde_json::json!({"run": run_path.display().to_string()});
        }
        (None, Some("counterexample")) => {
            let at = args.at.unwrap_or(0.0);
            let epsilon_family = pick(args.epsilon_family, sec.epsilon_family, 0.05);
            let family = CostFamily::counterexample(epsilon_family, None)?;
            let w = vec![at];
            let st = check_stationarity(&family, &w, tol)?;
            if !st.is_stationary {
                failures.push(format!("stationarity: min_norm {:.3e} > {tol:.3e}", st.min_norm));
            }
            let conv = check_converse(&family, &w, &radii, samples, ctx.seed, converse_tol)?;
            if !conv.passed {
                failures.push(format!(
                    "converse: min observed {:.3e} < -{converse_tol:.0e}",
                    conv.min_observed
                ));
            }
            let grid: Vec<SimplexWeights> = [0.5, 0.75, 0.875]
                .iter()
                .map(|&l2| SimplexWeights::new(vec![1.0 - l2, l2]))
                .collect::<dro_lab::Result<_>>()?;
            let map = landscape_scan_1d(&family, &grid, (-3.0, 3.0), 6001)?;
            if let Some(th) = map.vanishing_threshold {
                if !(th > 0.5 && th < 1.0) {
                    failures.push(format!("landscape: vanishing threshold {th} out of (0.5, 1)"));
                }
            }
            block.stationarity = Some(st);
            block.converse = Some(conv);
            landscape = Some(map);
            target = serde_json::json!({
                "family": "counterexample", "at": at, "epsilon": epsilon_family
            });
        }
        (Some(_), Some(_)) => bail!("--run and --family are mutually exclusive"),
        (None, Some(other)) => bail!("unknown analytic family '{other}'"),
        (None, None) => bail!("one of --run or --family is required"),
    }

    let vanishing_threshold = landscape.as_ref().and_then(|m| m.vanishing_threshold);
    if let Some(map) = &landscape {
        let mut csv = String::from("lambda2,w,cost\n");
        for curve in &map.curves {
            for (w, c) in map.w_grid.iter().zip(&curve.costs) {
                csv.push_str(&format!("{},{w},{c}\n", curve.lambda[1]));
            }
        }
        ctx.write("verify.landscape.csv", &csv)?;
        block.landscape = landscape;
    }
    let passed = failures.is_empty();
    let doc = VerifyDoc {
        schema: SCHEMA_VERSION.to_string(),
        target,
        verify: block,
        failures: failures.clone(),
        passed,
        vanishing_threshold,
    };
    let path = ctx.write("verify.json", &serde_json::to_string_pretty(&doc)?)?;
    println!("{}", path.display());
    if passed {
        ctx.say("all enabled checks passed");
        Ok(0)
    } else {
        for f in &failures {
            eprintln!("verification failure: {f}");
        }
        Ok(4)
    }
}

// --------------------------------------------------------------- recommend

pub fn recommend(ctx: &Ctx, args: &RecommendArgs) -> Result<i32> {
    let data = GroupedDataset::read_csv(&args.data, None)?;
    let k = data.group_count();
    let acceptability = pick(
        args.acceptability.clone(),
        ctx.file.recommend.acceptability.clone(),
        vec![f64::INFINITY; k],
    );
    let tsec = &ctx.file.train;
    let csec = &ctx.file.calibrate;
    let loss: LossKind = pick(args.loss.clone(), csec.loss.clone(), "logistic".into())
        .parse()
        .map_err(|e: dro_lab::Error| anyhow!(e))?;
    let defaults = BaselineConfig::default();
    let cfg = RecommendConfig {
        baseline: BaselineConfig {
            loss,
            mu: pick(args.mu, csec.mu, 1e-2),
            alpha_grid: pick(
                args.alpha_grid.clone(),
                csec.alpha_grid.clone(),
                defaults.alpha_grid,
            ),
            split_ratio: pick(args.split_ratio, csec.split_ratio, 0.7),
            seed: ctx.seed,
            inner: dro_lab::DescentConfig {
                max_steps: 1000,
                grad_tol: 1e-9,
                ..Default::default()
            },
        },
        dro: DroConfig {
            beta: pick(args.beta, tsec.beta, f64::INFINITY),
            epsilon: pick(args.epsilon, tsec.epsilon, 1e-9),
            max_outer: pick(args.max_outer, tsec.max_outer, 500),
            inner: dro_lab::DescentConfig {
                max_steps: pick(args.t_inner, tsec.t_inner, 200),
                grad_tol: 1e-9,
                ..Default::default()
            },
            seed: ctx.seed,
            unscaled_stop: false,
        },
        acceptability: acceptability.clone(),
    };
    let report = recommend_pipeline(&data, &cfg)?;

    #[derive(Serialize)]
    struct RecommendEcho<'a> {
        data: String,
        acceptability: &'a [f64],
        baseline: &'a BaselineConfig,
        dro: &'a DroConfig,
    }
    let config = serde_json::to_value(RecommendEcho {
        data: args.data.display().to_string(),
        acceptability: &acceptability,
        baseline: &cfg.baseline,
        dro: &cfg.dro,
    })?;

    let refused = report.refusal.is_some();
    let doc = match &report.solution {
        Some(sol) => {
            let r = report.calibration.as_ref().expect("calibration accompanies solution");
            let mut doc = RunDocument::new(config, sol, r.as_slice());
            doc.baselines = Some(report.baselines.clone());
            doc.recommendation = Some(dro_lab::report::RecommendationBlock {
                acceptability: acceptability.clone(),
                validation_costs: report.validation_costs.clone().unwrap(),
                validation_shortfalls: report.shortfalls.clone().unwrap(),
            });
            doc
        }
        None => RunDocument {
            schema: SCHEMA_VERSION.to_string(),
            config,
            trajectory: Vec::new(),
            final_state: None,
            converged: false,
            refusal: report.refusal.clone(),
            baselines: Some(report.baselines.clone()),
            recommendation: None,
            verify: None,
        },
    };
    let path = ctx.write("recommend.json", &doc.to_json())?;
    println!("{}", path.display());
    if refused {
        let groups = report.refusal.unwrap();
        eprintln!(
            "refusal: baseline cost exceeds the acceptability bound for groups {groups:?}; \
             DRO cannot reach an acceptable result there"
        );
    } else
    if let Some(shortfalls) = &report.shortfalls {
        for (g, s) in shortfalls.iter().enumerate() {
            ctx.say(format!("group {g}: validation shortfall vs r* = {s:+.6}"));
        }
    }
    Ok(0)
}
