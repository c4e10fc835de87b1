use penduo::diagnostics::l2_distance;
use penduo::saddle::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use penduo::transport::{BoundaryMode, Scheme, StructureRegion, TransportKind, TransportParams, TransportProblem};
use penduo::{Mesh1D, PenaltyConfig, State};

fn final_state(kind: TransportKind, scheme: Scheme, eps: f64, r: f64) -> (State, Mesh1D) {
    let mesh = Mesh1D::new(1.0, 501).unwrap();
    let params = TransportParams {
        nu: 0.001,
        c: 1.0,
        dt: 0.002,
        n_steps: 1000,
        bc_mode: BoundaryMode::ExactPeriodic,
        scheme,
        interior_gamma_on: true,
        warm_start: false,
        tol: DEFAULT_TOL,
        max_iter: DEFAULT_MAX_ITER,
        snapshot_stride: 1000,
    };
    let structure = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
    let penalty = PenaltyConfig::new(1.0, 0.0, 1.0, eps, r).unwrap();
    let p = TransportProblem::new(kind, mesh, params, Some(structure), penalty).unwrap();
    let traj = p.run(&p.initial_state().unwrap()).unwrap();
    (traj.final_state().unwrap().clone(), mesh)
}

fn pairs(kind: TransportKind, r_penalty: f64) -> (f64, f64) {
    let (p2, mesh) = final_state(kind, Scheme::PenaltyOnly, 1e-2, r_penalty);
    let (p4, _) = final_state(kind, Scheme::PenaltyOnly, 1e-4, r_penalty);
    let (d2, _) = final_state(kind, Scheme::Duality, 1e-2, 10.0);
    let (d4, _) = final_state(kind, Scheme::Duality, 1e-4, 10.0);
    (l2_distance(&d2, &d4, &mesh).unwrap(), l2_distance(&p2, &p4, &mesh).unwrap())
}

#[test]
fn duality_is_eps_robust_advdiff() {
    let (dual, pen) = pairs(TransportKind::AdvDiff, 10.0);
    assert!(dual <= 10.0 * pen, "dual {dual:e}, penalty {pen:e}");
    assert!(dual <= pen, "dual {dual:e}, penalty {pen:e}");
}

#[test]
fn duality_is_eps_robust_burgers() {
    let (dual, pen) = pairs(TransportKind::Burgers, 0.1);
    assert!(dual <= 10.0 * pen, "dual {dual:e}, penalty {pen:e}");
    assert!(dual <= pen, "dual {dual:e}, penalty {pen:e}");
}

#[test]
fn duality_run_tracks_motion_every_step() {
    let mesh = Mesh1D::new(1.0, 501).unwrap();
    let params = TransportParams { scheme: Scheme::Duality, n_steps: 300, ..TransportParams::default() };
    let structure = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
    let penalty = PenaltyConfig::new(1.0, 0.0, 1.0, 1e-3, 10.0).unwrap();
    let p = TransportProblem::new(TransportKind::AdvDiff, mesh, params, Some(structure), penalty).unwrap();
    let traj = p.run(&p.initial_state().unwrap()).unwrap();
    assert_eq!(traj.multiplier_series.len(), 300);
    for rec in &traj.multiplier_series {
        assert!(rec.converged && rec.residual <= DEFAULT_TOL, "step {}: {:e}", rec.step, rec.residual);
    }
}

#[test]
fn warm_start_saves_iterations_and_matches() {
    let run = |warm| {
        let mesh = Mesh1D::new(1.0, 501).unwrap();
        let params = TransportParams { scheme: Scheme::Duality, warm_start: warm, n_steps: 200, ..TransportParams::default() };
        let structure = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
        let penalty = PenaltyConfig::new(1.0, 0.0, 1.0, 1e-3, 10.0).unwrap();
        let p = TransportProblem::new(TransportKind::AdvDiff, mesh, params, Some(structure), penalty).unwrap();
        let traj = p.run(&p.initial_state().unwrap()).unwrap();
        let iters: usize = traj.multiplier_series.iter().map(|r| r.uzawa_iterations).sum();
        (traj.final_state().unwrap().clone(), iters, mesh)
    };
    let (cold, cold_iters, mesh) = run(false);
    let (warm, warm_iters, _) = run(true);
    assert!(warm_iters < cold_iters, "{warm_iters} vs {cold_iters}");
    assert!(l2_distance(&cold, &warm, &mesh).unwrap() < 1e-8);
}
