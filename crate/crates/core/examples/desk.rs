// Temporary desk-calibration harness; not part of the deliverable.
use dro_lab::cost::{CostFamily, LossKind};
use dro_lab::dro::{lagrangian_dro, DroConfig};
use dro_lab::optimize::{descend, CalibrationVector, DescentConfig};
use dro_lab::scenarios::{
    gen_adversarial_grid, gen_base_population, gen_two_population, PerturbationGridParams,
    TwoPopulationParams,
};
use dro_lab::verify::{check_stationarity, dual_grid_oracle};

fn gap_scan() {
    println!("== two-pop margin micro-scan (hinge, beta=5) ==");
    for margin in [1.6, 1.65, 1.7, 1.75] {
        let mut line = format!(" margin {margin}:");
        for seed in [7u64, 17, 27] {
            let params = TwoPopulationParams { margin, seed, ..TwoPopulationParams::default() };
            let data = gen_two_population(&params).unwrap();
            let fam = CostFamily::dataset(data, LossKind::HingeL2, 1e-2).unwrap();
            let erm_cfg = DescentConfig { max_steps: 1500, grad_tol: 1e-8, ..DescentConfig::default() };
            let w_erm = descend(&fam, &fam.erm_weights(), &[0.0; 3], &erm_cfg).unwrap();
            let dro_cfg = DroConfig {
                beta: 5.0,
                epsilon: 1e-6,
                max_outer: 250,
                inner: DescentConfig { max_steps: 60, ..DescentConfig::default() },
                ..DroConfig::default()
            };
            let sol = lagrangian_dro(&fam, &CalibrationVector::zeros(2), &dro_cfg, &[0.0; 3]).unwrap();
            let a_e: Vec<f64> = (0..2).map(|k| fam.group_accuracy(k, &w_erm).unwrap() * 100.0).collect();
            let a_d: Vec<f64> = (0..2).map(|k| fam.group_accuracy(k, &sol.w_final).unwrap() * 100.0).collect();
            let c_e = fam.all_costs(&w_erm).unwrap();
            let maxc = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            line.push_str(&format!(
                " [{seed}: {:.1}/{:.1}/+{:.1}/d{:+.2}]",
                (a_e[0] - a_e[1]).abs(),
                (a_d[0] - a_d[1]).abs(),
                a_d[0].min(a_d[1]) - a_e[0].min(a_e[1]),
                maxc(&c_e) - maxc(&sol.costs_final)
            ));
        }
        println!("{line}");
    }
}

fn convex_scan() {
    println!("\n== convex logistic scenario timing ==");
    for (tag, noise, n, inner_tol, outer) in [
        ("0.7 n150 tol1e-7 o1200", 0.7, 150, 1e-7, 1200),
        ("0.7 n100 tol1e-7 o1200", 0.7, 100, 1e-7, 1200),
        ("0.75 n100 tol1e-7 o1200", 0.75, 100, 1e-7, 1200),
        ("0.7 n100 tol1e-8 o1500", 0.7, 100, 1e-8, 1500),
    ] {
        let params = TwoPopulationParams {
            n_majority: n,
            n_minority: n,
            margin: 1.0,
            noise,
            seed: 7,
            ..TwoPopulationParams::default()
        };
        let data = gen_two_population(&params).unwrap();
        let fam = CostFamily::dataset(data, LossKind::Logistic, 0.0).unwrap();
        let t = std::time::Instant::now();
        print!(" {tag}:");
        for (name, r) in [("eq", vec![0.0, 0.0]), ("sh", vec![0.0, 0.3])] {
            let r = CalibrationVector::new(r).unwrap();
            let inner = DescentConfig { max_steps: 600, grad_tol: inner_tol, ..DescentConfig::default() };
            let dual = dual_grid_oracle(&fam, &r, 2001, &inner).unwrap();
            let dro_cfg = DroConfig {
                beta: f64::INFINITY,
                epsilon: 1e-12,
                max_outer: outer,
                inner: DescentConfig { max_steps: 150, grad_tol: 1e-9, ..DescentConfig::default() },
                ..DroConfig::default()
            };
            let sol = lagrangian_dro(&fam, &r, &dro_cfg, &[0.0; 3]).unwrap();
            let obj = sol.calibrated_objective(&r);
            print!(" {name}: diff={:+.2e}", obj - dual.dual_value);
            if name == "eq" {
                let rep = check_stationarity(&fam, &sol.w_final, 1e-4).unwrap();
                print!(" mn={:.1e} {}", rep.min_norm, rep.curvature);
            }
        }
        println!("  elapsed {:?}", t.elapsed());
    }
}

fn adversarial_scan() {
    println!("\n== adversarial timing ==");
    for (nbase, outer, inner) in [(200, 300, 100), (200, 400, 80), (150, 400, 100)] {
        let t = std::time::Instant::now();
        let base = gen_base_population(nbase, 1.5, 0.6, 7).unwrap();
        let grid = gen_adversarial_grid(&base, &PerturbationGridParams::default()).unwrap();
        let fam = CostFamily::dataset(grid, LossKind::Logistic, 0.0).unwrap();
        let erm_cfg = DescentConfig { max_steps: 2000, grad_tol: 1e-10, ..DescentConfig::default() };
        let w_erm = descend(&fam, &fam.erm_weights(), &[0.0; 3], &erm_cfg).unwrap();
        let dro_cfg = DroConfig {
            beta: f64::INFINITY,
            epsilon: 1e-12,
            max_outer: outer,
            inner: DescentConfig { max_steps: inner, grad_tol: 1e-10, ..DescentConfig::default() },
            ..DroConfig::default()
        };
        let sol = lagrangian_dro(&fam, &CalibrationVector::zeros(9), &dro_cfg, &[0.0; 3]).unwrap();
        let maxc = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let margin = maxc(&fam.all_costs(&w_erm).unwrap()) - maxc(&sol.costs_final);
        println!(
            " n={nbase} outer={outer} inner={inner}: margin {:+.2e} elapsed {:?}",
            margin,
            t.elapsed()
        );
    }
}

fn main() {
    gap_scan();
    convex_scan();
    adversarial_scan();
}
