//! Scenario runner: resolves a configuration, runs the matching solver and
//! writes CSV series plus a JSON summary into one output directory.

mod config;
mod output;

pub use config::{preset, Case, ExperimentConfig, VariantChoice, OUT_ENV, PRESETS};
pub use output::{fmt_num, CsvWriter};

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::diagnostics::{interface_flux, rate_study, refinement_drift, Side};
use crate::elliptic::{solve_penalized_elliptic, EllipticProblem, EllipticSaddle, PenaltyConfig};
use crate::error::{Error, Result};
use crate::saddle::{uzawa_iterate, MultiplierState, SaddleProblem};
use crate::transport::{StructureRegion, TransportProblem};

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Runs `cfg` and writes its outputs under [`ExperimentConfig::output_dir`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let out_dir = cfg.output_dir();
    std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
    let mut files = Vec::new();

    let config_path = out_dir.join("config.txt");
    std::fs::write(&config_path, cfg.to_key_values()).map_err(|e| io_err(&config_path, e))?;
    files.push(config_path);

    let start = std::time::Instant::now();
    let results = match cfg.case {
        Case::Elliptic => run_elliptic(cfg, &out_dir, &mut files)?,
        Case::Rates => run_rates(cfg, &out_dir, &mut files)?,
        Case::UzawaDemo => run_uzawa_demo(cfg, &out_dir, &mut files)?,
        Case::AdvDiff | Case::Burgers => run_transport(cfg, &out_dir, &mut files)?,
    };

    let summary = json!({
        "case": cfg.case.name(),
        "config": config_json(cfg),
        "results": results,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let summary_path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    std::fs::write(&summary_path, text + "\n").map_err(|e| io_err(&summary_path, e))?;
    files.push(summary_path);

    Ok(RunReport { out_dir, files, summary })
}

fn config_json(cfg: &ExperimentConfig) -> Value {
    let map: serde_json::Map<String, Value> = cfg
        .to_key_values()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
        .collect();
    Value::Object(map)
}

fn penalties(cfg: &ExperimentConfig, eps: f64) -> Vec<(String, PenaltyConfig)> {
    let r = cfg.resolved_r();
    match cfg.resolved_variant() {
        VariantChoice::All => crate::elliptic::PenaltyVariant::ALL
            .iter()
            .map(|v| (v.name().to_string(), v.penalty(eps, r)))
            .collect(),
        VariantChoice::One(v) => vec![(v.name().to_string(), v.penalty(eps, r))],
        VariantChoice::Custom => vec![(
            "custom".to_string(),
            PenaltyConfig { alpha: cfg.alpha, beta: cfg.beta, gamma: cfg.gamma, eps, r },
        )],
    }
}

fn run_elliptic(cfg: &ExperimentConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let mesh = cfg.mesh()?;
    let mut runs = Vec::new();
    for eps in cfg.resolved_eps_sweep() {
        for (name, penalty) in penalties(cfg, eps) {
            let problem = EllipticProblem::new(mesh, penalty, cfg.u0)?;
            let m = problem.structure_start()?;
            let u = solve_penalized_elliptic(&problem)?;
            let path = out.join(format!("solution_{name}_eps{eps:e}.csv"));
            let mut w = CsvWriter::create(&path, &["step", "time", "node", "x", "u"])?;
            for (i, v) in u.iter().enumerate() {
                w.row(&[0.to_string(), fmt_num(0.0), i.to_string(), fmt_num(mesh.x(i)), fmt_num(*v)])?;
            }
            w.finish()?;
            files.push(path);
            runs.push(json!({
                "variant": name,
                "eps": eps,
                "u_interface": u[m],
                "u_end": u[mesh.n_nodes() - 1],
                "flux_left": interface_flux(&u, &mesh, m, Side::Left, 1.0)?,
            }));
        }
    }
    Ok(json!({ "runs": runs }))
}

fn run_rates(cfg: &ExperimentConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let mesh = cfg.mesh()?;
    let sweep = cfg.resolved_eps_sweep();
    let mut variants = Vec::new();
    let choices = penalties(cfg, sweep[0]);
    let single = choices.len() == 1;
    for (name, penalty) in choices {
        let study = rate_study(&mesh, penalty, cfg.u0, &sweep)?;
        let smallest = sweep.iter().copied().fold(f64::INFINITY, f64::min);
        let drift = refinement_drift(&mesh, penalty.with_eps(smallest), cfg.u0)?;
        let path = if single { out.join("rates.csv") } else { out.join(format!("rates_{name}.csv")) };
        let header = ["eps", "err_l2_S", "err_l2_whole", "err_h1_fluid", "err_interface", "err_flux"];
        let mut w = CsvWriter::create(&path, &header)?;
        for s in &study.samples {
            w.row(&[
                fmt_num(s.eps),
                fmt_num(s.err_l2_structure),
                fmt_num(s.err_l2_whole),
                fmt_num(s.err_h1_fluid),
                fmt_num(s.err_interface),
                fmt_num(s.err_flux),
            ])?;
        }
        let sl = &study.slopes;
        let fits = [&sl.l2_structure, &sl.l2_whole, &sl.h1_fluid, &sl.interface, &sl.flux];
        let mut footer = vec!["slope".to_string()];
        footer.extend(fits.iter().map(|f| fmt_num(f.slope)));
        w.row(&footer)?;
        w.finish()?;
        files.push(path);
        variants.push(json!({
            "variant": name,
            "slopes": {
                "err_l2_S": sl.l2_structure.slope,
                "err_l2_whole": sl.l2_whole.slope,
                "err_h1_fluid": sl.h1_fluid.slope,
                "err_interface": sl.interface.slope,
                "err_flux": sl.flux.slope,
            },
            "r_squared": {
                "err_l2_S": sl.l2_structure.r_squared,
                "err_l2_whole": sl.l2_whole.r_squared,
                "err_h1_fluid": sl.h1_fluid.r_squared,
                "err_interface": sl.interface.r_squared,
                "err_flux": sl.flux.r_squared,
            },
            "refinement_drift": drift,
        }));
    }
    Ok(json!({ "variants": variants }))
}

fn run_uzawa_demo(cfg: &ExperimentConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let mesh = cfg.mesh()?;
    let r = cfg.resolved_r();
    let penalty = match cfg.resolved_variant() {
        VariantChoice::One(v) => v.penalty(cfg.eps, r),
        _ => PenaltyConfig { alpha: cfg.alpha, beta: cfg.beta, gamma: cfg.gamma, eps: cfg.eps, r },
    };
    let saddle = EllipticSaddle::new(EllipticProblem::new(mesh, penalty, cfg.u0)?, r)?;
    let m = saddle.problem.structure_start()?;
    let res = uzawa_iterate(&saddle, r, MultiplierState::zeros(1), cfg.tol, cfg.max_iter)?;
    let right_coeff = 1.0 + penalty.beta / penalty.eps;

    let sol_path = out.join("solution.csv");
    let mul_path = out.join("multipliers.csv");
    let flux_path = out.join("stress.csv");
    let mut sol = CsvWriter::create(&sol_path, &["step", "time", "node", "x", "u"])?;
    let mut mul = CsvWriter::create(
        &mul_path,
        &["step", "time", "lambda_a", "lambda_b", "uzawa_iters", "residual"],
    )?;
    let mut flux = CsvWriter::create(&flux_path, &["step", "time", "flux_a", "flux_b"])?;
    for (p, lambda) in res.multiplier_history.iter().enumerate() {
        let u = saddle.solve_primal(lambda)?;
        for (i, v) in u.iter().enumerate() {
            sol.row(&[p.to_string(), fmt_num(0.0), i.to_string(), fmt_num(mesh.x(i)), fmt_num(*v)])?;
        }
        mul.row(&[
            p.to_string(),
            fmt_num(0.0),
            fmt_num(lambda.values()[0]),
            fmt_num(f64::NAN),
            (p + 1).to_string(),
            fmt_num(res.residual_history[p]),
        ])?;
        flux.row(&[
            p.to_string(),
            fmt_num(0.0),
            fmt_num(interface_flux(&u, &mesh, m, Side::Left, 1.0)?),
            fmt_num(interface_flux(&u, &mesh, m, Side::Right, right_coeff)?),
        ])?;
    }
    for (w, path) in [(sol, sol_path), (mul, mul_path), (flux, flux_path)] {
        w.finish()?;
        files.push(path);
    }
    Ok(json!({
        "iterations": res.iterations,
        "updates_to_1e-8": res.updates_to_reach(1e-8),
        "converged": res.converged,
        "final_residual": res.final_residual(),
        "multiplier": res.multiplier.values()[0],
        "u_interface": res.state[m],
    }))
}

fn run_transport(cfg: &ExperimentConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let kind = cfg.case.transport_kind().expect("transport case");
    let mesh = cfg.mesh()?;
    let structure = StructureRegion::new(&mesh, cfg.xa, cfg.xb)?;
    let problem = TransportProblem::new(kind, mesh, cfg.transport_params(), Some(structure), cfg.penalty()?)?;
    let u_init = problem.initial_state()?;
    let traj = problem.run(&u_init)?;

    let sol_path = out.join("solution.csv");
    let mut sol = CsvWriter::create(&sol_path, &["step", "time", "node", "x", "u"])?;
    for snap in &traj.snapshots {
        for (i, v) in snap.values.iter().enumerate() {
            sol.row(&[
                snap.step.to_string(),
                fmt_num(snap.time),
                i.to_string(),
                fmt_num(mesh.x(i)),
                fmt_num(*v),
            ])?;
        }
    }
    sol.finish()?;
    files.push(sol_path);

    let mul_path = out.join("multipliers.csv");
    let mut mul = CsvWriter::create(
        &mul_path,
        &["step", "time", "lambda_a", "lambda_b", "uzawa_iters", "residual"],
    )?;
    for rec in &traj.multiplier_series {
        let l = rec.multiplier.values();
        mul.row(&[
            rec.step.to_string(),
            fmt_num(rec.time),
            fmt_num(l.first().copied().unwrap_or(0.0)),
            fmt_num(l.get(1).copied().unwrap_or(0.0)),
            rec.uzawa_iterations.to_string(),
            fmt_num(rec.residual),
        ])?;
    }
    mul.finish()?;
    files.push(mul_path);

    let flux_path = out.join("stress.csv");
    let mut flux = CsvWriter::create(&flux_path, &["step", "time", "flux_a", "flux_b"])?;
    for rec in &traj.flux_series {
        flux.row(&[rec.step.to_string(), fmt_num(rec.time), fmt_num(rec.flux_a), fmt_num(rec.flux_b)])?;
    }
    flux.finish()?;
    files.push(flux_path);

    let max_residual = traj.multiplier_series.iter().map(|r| r.residual).fold(0.0, f64::max);
    let total_iters: usize = traj.multiplier_series.iter().map(|r| r.uzawa_iterations).sum();
    let all_converged = traj.multiplier_series.iter().all(|r| r.converged);
    let final_state = traj.final_state().cloned().unwrap_or(u_init);
    let mass: f64 = final_state[..mesh.n_nodes() - 1].iter().sum::<f64>() * mesh.dx();
    Ok(json!({
        "kind": kind.name(),
        "steps": cfg.steps,
        "dt": cfg.dt(),
        "max_constraint_residual": max_residual,
        "total_uzawa_iterations": total_iters,
        "all_converged": all_converged,
        "final_mass": mass,
        "final_max": final_state.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "final_min": final_state.iter().copied().fold(f64::INFINITY, f64::min),
    }))
}
