use std::f64::consts::PI;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cell_solver::{cell_solution_csv, solve_local, CellContext, XI_ETA};
use crate::convergence_harness::{
    benchmark_quadrature, corrector_check_basis, eps_to_limit_study, two_scale_pairing, LimitStudyConfig, TestFunction,
    TwoScaleTest, XFactor, YFactor,
};
use crate::error::Result;
use crate::macro_solver::{
    grid_csv, solution_csv, solve_classical_reference, solve_coupled_two_scale, solve_eps_problem, solve_homogenized,
    DisplacementField, COUPLED_SOLVE_TOL, SOLVE_TOL,
};
use crate::strain_kinematics::{default_battery, membrane_strains, residual_bound_audit, strain_snapshot_csv};
use crate::surface_geometry::eval_geometry;
use crate::wrinkle_geometry::{
    audit_printed_displays, eval_exact_eps, geometry_check, reports_to_csv, run_expansion_suite, ExpansionProtocol,
};

use super::config::RunConfig;

const GRID: usize = 16;
const GEOMETRY_SAMPLES: usize = 1000;

/// Files and summary lines produced by a run, held in memory until the run
/// has succeeded.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
    pub flags: Vec<(String, bool)>,
}

impl Outcome {
    fn file(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    fn kv(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    fn flag(&mut self, key: impl Into<String>, pass: bool) {
        self.flags.push((key.into(), pass));
    }

    pub fn pass(&self) -> bool {
        self.flags.iter().all(|(_, p)| *p)
    }

    /// `key=value` lines: seed and command, values, flags, overall verdict.
    pub fn summary_text(&self, command: &str, seed: u64) -> String {
        let mut s = format!("seed={seed}\ncommand={command}\n");
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k}={v}");
        }
        for (k, p) in &self.flags {
            let _ = writeln!(s, "{k}={p}");
        }
        let _ = writeln!(s, "pass={}", self.pass());
        s
    }
}

fn with_seed(seed: u64, csv: String) -> String {
    format!("# seed={seed}\n{csv}")
}

fn l2_distance(a: &DisplacementField, b: &DisplacementField, cfg: &RunConfig) -> Result<f64> {
    let rule = cfg.quadrature.rule(cfg.shell.lengths, &crate::surface_geometry::ShapeFunction::zero(), None)?;
    let mut s = 0.0;
    for (&x1, &w1) in rule.x1.nodes.iter().zip(&rule.x1.weights) {
        for (&x2, &w2) in rule.x2.nodes.iter().zip(&rule.x2.weights) {
            let (da, db) = (a.eval([x1, x2]), b.eval([x1, x2]));
            s += w1 * w2 * (0..3).map(|i| (da[i] - db[i]).powi(2)).sum::<f64>();
        }
    }
    Ok(s.sqrt())
}

pub fn geometry(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let r = geometry_check(&cfg.shell.chart, &cfg.theta(), cfg.shell.lengths, GEOMETRY_SAMPLES, seed)?;
    out.file("geometry_check.csv", with_seed(seed, r.to_csv()));
    for (id, v) in &r.defects {
        out.kv(format!("geometry_check.{id}"), format!("{v:e}"));
    }
    out.flag("geometry_check.pass", r.pass);
    Ok(())
}

pub fn expand(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let theta = cfg.theta();
    let reports = run_expansion_suite(&cfg.shell.chart, &theta, &ExpansionProtocol::default())?;
    out.file("expansion.csv", with_seed(seed, reports_to_csv(&reports)));
    for r in &reports {
        out.kv(format!("expand.{}.pass", r.quantity_id), r.pass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = cfg.shell.lengths;
    let samples: Vec<([f64; 2], [f64; 2])> = (0..64)
        .map(|_| ([l[0] * rng.random::<f64>(), l[1] * rng.random::<f64>()], [rng.random(), rng.random()]))
        .collect();
    let displays = audit_printed_displays(&cfg.shell.chart, &theta, &samples)?;
    let mut csv = String::from("display_id,max_gap,matches\n");
    for d in &displays {
        let _ = writeln!(csv, "{},{:e},{}", d.display_id, d.max_gap, d.matches);
    }
    out.file("displays.csv", with_seed(seed, csv));
    out.flag("expand.pass", reports.iter().all(|r| r.pass));
    Ok(())
}

pub fn strain_audit(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let theta = cfg.theta();
    let fields = default_battery(cfg.space(), seed);
    let sched = &cfg.eps.audit_schedule;
    let a = residual_bound_audit(&cfg.shell.chart, &theta, &fields, sched, &cfg.quadrature)?;
    let mut csv = String::from("field,eps,membrane_ratio,bending_ratio\n");
    for (f, (m, b)) in a.membrane_ratio.iter().zip(&a.bending_ratio).enumerate() {
        for (k, &eps) in sched.iter().enumerate() {
            let _ = writeln!(csv, "{f},{eps:e},{:e},{:e}", m[k], b[k]);
        }
    }
    out.file("strain_audit.csv", with_seed(seed, csv));
    let worst = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    out.kv("strain_audit.membrane_spread", format!("{:e}", worst(&a.membrane_spread)));
    out.kv("strain_audit.bending_spread", format!("{:e}", worst(&a.bending_spread)));

    let eps = sched[0];
    let n = 8;
    let l = cfg.shell.lengths;
    let pts: Vec<[f64; 2]> =
        (0..n * n).map(|k| [l[0] * ((k / n) as f64 + 0.5) / n as f64, l[1] * ((k % n) as f64 + 0.5) / n as f64]).collect();
    let u = &fields[0];
    let snap = strain_snapshot_csv(&pts, |x| {
        let g = eval_geometry(&cfg.shell.chart, x)?;
        let ge = eval_exact_eps(&cfg.shell.chart, &theta, x, eps)?;
        Ok(membrane_strains(&u.eval(x), &ge, &g, &theta.values([x[0] / eps, x[1] / eps])).exact)
    })?;
    out.file("strain_snapshot.csv", with_seed(seed, snap));
    out.flag("strain_audit.pass", a.pass);
    Ok(())
}

pub fn cell(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let theta = cfg.theta();
    let mut all_ok = true;
    for (k, &x0) in cfg.cell.points.iter().enumerate() {
        let ctx = CellContext::new(&cfg.shell.chart, &theta, x0, &cfg.params())?;
        let mut sols = Vec::new();
        for xi in XI_ETA {
            sols.push(solve_local(&ctx, xi, cfg.cell.truncation)?);
        }
        let kernel = crate::cell_solver::assemble_cell_system(&ctx, XI_ETA[0], cfg.cell.truncation)?.kernel_dimension()?;
        out.file(&format!("cell_{k}.csv"), with_seed(seed, cell_solution_csv(&sols)));
        out.kv(format!("cell.{k}.x0"), format!("{:e};{:e}", x0[0], x0[1]));
        out.kv(format!("cell.{k}.kernel_dimension"), kernel);
        for s in &sols {
            out.kv(format!("cell.{k}.energy_{}{}", s.xi_eta[0] + 1, s.xi_eta[1] + 1), format!("{:e}", s.energy));
        }
        all_ok &= kernel == 0;
    }
    out.flag("cell.pass", all_ok);
    Ok(())
}

pub fn solve_eps(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let setup = cfg.setup();
    let mut ok = true;
    for (k, &eps) in cfg.eps.schedule.iter().enumerate() {
        let sol = solve_eps_problem(&setup, eps, &cfg.force)?;
        out.file(&format!("solution_eps_{k}.csv"), with_seed(seed, solution_csv(&sol.field)));
        out.file(&format!("grid_eps_{k}.csv"), with_seed(seed, grid_csv(&sol.field, GRID)));
        out.kv(format!("solve_eps.{k}.eps"), format!("{eps:e}"));
        out.kv(format!("solve_eps.{k}.energy"), format!("{:e}", sol.energy));
        out.kv(format!("solve_eps.{k}.residual"), format!("{:e}", sol.residual));
        ok &= sol.residual < SOLVE_TOL;
    }
    out.flag("solve_eps.pass", ok);
    Ok(())
}

pub fn solve_macro(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let setup = cfg.setup();
    let hom = solve_homogenized(&setup, &cfg.force)?;
    let classical = solve_classical_reference(&setup, &cfg.force)?;
    out.file("solution_macro.csv", with_seed(seed, solution_csv(&hom.field)));
    out.file("grid_macro.csv", with_seed(seed, grid_csv(&hom.field, GRID)));
    out.kv("solve_macro.energy", format!("{:e}", hom.energy));
    out.kv("solve_macro.residual", format!("{:e}", hom.residual));
    out.kv("solve_macro.classical_l2_gap", format!("{:e}", l2_distance(&hom.field, &classical.field, cfg)?));
    out.flag("solve_macro.pass", hom.residual < SOLVE_TOL);
    Ok(())
}

pub fn solve_coupled(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let setup = cfg.setup();
    let two = solve_coupled_two_scale(&setup, &cfg.corrector, &cfg.force)?;
    let hom = solve_homogenized(&setup, &cfg.force)?;
    out.file("solution_coupled.csv", with_seed(seed, solution_csv(&two.u0)));
    out.file("grid_coupled.csv", with_seed(seed, grid_csv(&two.u0, GRID)));
    let mut corr = String::from("macro_index,cell_index,coefficient\n");
    for p in 0..two.corrector.coeffs.nrows() {
        for q in 0..two.corrector.coeffs.ncols() {
            let _ = writeln!(corr, "{p},{q},{:e}", two.corrector.coeffs[(p, q)]);
        }
    }
    out.file("corrector_coupled.csv", with_seed(seed, corr));
    let gap = l2_distance(&two.u0, &hom.field, cfg)?;
    let norm = l2_distance(&two.u0, &DisplacementField::zero(setup.space), cfg)?;
    let rel = if norm > 0.0 { gap / norm } else { 0.0 };
    let mut dec = String::from("metric,value\n");
    for (k, v) in [
        ("coupled_residual", two.residual),
        ("coupled_unregularized_residual", two.unregularized_residual),
        ("u0_l2_norm_coupled", norm),
        ("u0_l2_gap_coupled_vs_decoupled", gap),
        ("u0_relative_gap", rel),
    ] {
        let _ = writeln!(dec, "{k},{v:e}");
        out.kv(format!("solve_coupled.{k}"), format!("{v:e}"));
    }
    out.file("decoupling.csv", with_seed(seed, dec));
    out.flag("solve_coupled.pass", two.residual < COUPLED_SOLVE_TOL);
    Ok(())
}

fn sine_field(eps: f64, x: [f64; 2]) -> f64 {
    (2.0 * PI * x[0] / eps).sin()
}

pub fn two_scale_study(cfg: &RunConfig, seed: u64, out: &mut Outcome) -> Result<()> {
    let sched: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
    let test = TwoScaleTest {
        study_id: "sin_sin".into(),
        lengths: [1.0, 1.0],
        field: &sine_field,
        field_frequencies: [1, 0],
        phi: TestFunction { x: XFactor::One, y: YFactor::Sin { k1: 1, k2: 0 } },
        claimed_limit: 0.5,
        strong_limit_norm: Some(0.5f64.sqrt()),
        eps_schedule: sched.clone(),
    };
    let quad = benchmark_quadrature().resolving_frequency(1, sched[sched.len() - 1]);
    let pairing = two_scale_pairing(&test, &quad)?;
    out.file("two_scale_pairing.csv", pairing.to_csv(seed));
    out.flag("two_scale.pairing.pass", pairing.pass());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = cfg.shell.lengths;
    let xs: Vec<[f64; 2]> = (0..5).map(|_| [l[0] * rng.random::<f64>(), l[1] * rng.random::<f64>()]).collect();
    let cc = corrector_check_basis(cfg.space(), &cfg.shell.chart, &cfg.theta(), &xs, 8)?;
    let csv = format!(
        "check_id,value\nsamples,{}\nmax_identity_defect,{:e}\nmax_value_defect,{:e}\nmax_mean,{:e}\npass,{}\n",
        cc.samples, cc.max_identity_defect, cc.max_value_defect, cc.max_mean, cc.pass
    );
    out.file("corrector_check.csv", with_seed(seed, csv));
    out.kv("two_scale.corrector.max_identity_defect", format!("{:e}", cc.max_identity_defect));
    out.flag("two_scale.corrector.pass", cc.pass);

    let study = LimitStudyConfig {
        study_id: "eps_to_limit".into(),
        setup: cfg.setup(),
        force: cfg.force,
        eps_schedule: cfg.eps.schedule.clone(),
        corrector: cfg.corrector,
    };
    let (rep, _) = eps_to_limit_study(&study)?;
    out.file("limit_study.csv", rep.to_csv(seed));
    for g in rep.metric("i_l2_gap") {
        out.kv(format!("two_scale.limit.l2_gap@{:e}", g.eps), format!("{:e}", g.gap));
    }
    for f in &rep.flags {
        if f.asserted {
            out.flag(format!("two_scale.limit.{}", f.name), f.pass);
        } else {
            out.kv(format!("two_scale.limit.{}", f.name), f.pass);
        }
    }
    Ok(())
}

/// Runs one command (or all of them) into an in-memory outcome.
pub fn dispatch(command: &str, cfg: &RunConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    type Runner = fn(&RunConfig, u64, &mut Outcome) -> Result<()>;
    let table: [(&str, Runner); 8] = [
        ("geometry-check", geometry),
        ("expand", expand),
        ("strain-audit", strain_audit),
        ("cell", cell),
        ("solve-eps", solve_eps),
        ("solve-macro", solve_macro),
        ("solve-coupled", solve_coupled),
        ("two-scale-study", two_scale_study),
    ];
    for (name, run) in table {
        if command == "all" || command == name {
            run(cfg, seed, &mut out)?;
        }
    }
    Ok(out)
}
