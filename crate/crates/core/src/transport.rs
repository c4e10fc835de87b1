//! Time-dependent 1D transport with an immersed structure of prescribed
//! velocity.
//!
//! Each step treats transport explicitly (first-order upwind for linear
//! advection, Godunov for Burgers) and everything else implicitly:
//! diffusion, the volume penalty over the closed structure span (trapezoid
//! lumped, so half weight at the interfaces), the point penalty at the two
//! interfaces and the interface multipliers. Rows are the
//! lumped-mass (dx-weighted) nodal equations, so the point terms `r` and
//! `λ` enter unscaled, as in the static model.
//!
//! In duality mode every step runs an Uzawa loop on the two interface
//! values.

use crate::diagnostics::{interface_flux, Side};
use crate::elliptic::{Mesh1D, PenaltyConfig, State};
use crate::error::{Error, Result};
use crate::linalg::{solve_with_corners, Corner, TridiagonalSystem};
use crate::saddle::{uzawa_iterate, MultiplierState, SaddleProblem, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    AdvDiff,
    Burgers,
}

impl TransportKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::AdvDiff => "advdiff",
            Self::Burgers => "burgers",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// `u(0) = u(L)` by index wrap.
    ExactPeriodic,
    /// `x = 0` and `x = L` kept as separate unknowns tied by a `1/ε` penalty.
    PenalizedPeriodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    PenaltyOnly,
    Duality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportParams {
    pub nu: f64,
    /// Advection speed; ignored for Burgers.
    pub c: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub bc_mode: BoundaryMode,
    pub scheme: Scheme,
    pub interior_gamma_on: bool,
    /// Start each step's Uzawa loop from the previous step's multiplier.
    pub warm_start: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub snapshot_stride: usize,
}

impl Default for TransportParams {
    fn default() -> Self {
        Self {
            nu: 0.001,
            c: 1.0,
            dt: 2.0 / 1000.0,
            n_steps: 1000,
            bc_mode: BoundaryMode::ExactPeriodic,
            scheme: Scheme::PenaltyOnly,
            interior_gamma_on: false,
            warm_start: false,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            snapshot_stride: 10,
        }
    }
}

/// Stability of the explicit-transport / implicit-diffusion step.
///
/// Von Neumann analysis of upwind transport at Courant number `σ` with
/// backward-Euler diffusion at `μ = ν Δt / Δx²` gives the bound
/// `σ (σ - 1) <= 2μ`, which reduces to `σ <= 1` without diffusion.
pub fn check_stability(speed: f64, nu: f64, dt: f64, dx: f64) -> Result<()> {
    let courant = speed.abs() * dt / dx;
    let diffusion = nu * dt / (dx * dx);
    if !courant.is_finite() || courant * (courant - 1.0) > 2.0 * diffusion + 1e-12 {
        return Err(Error::CflViolation { courant, diffusion });
    }
    Ok(())
}

/// Immersed interval, snapped to mesh nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureRegion {
    pub x_a: f64,
    pub x_b: f64,
    pub i_a: usize,
    pub i_b: usize,
}

impl StructureRegion {
    pub fn new(mesh: &Mesh1D, x_a: f64, x_b: f64) -> Result<Self> {
        if !(0.0 < x_a && x_a < x_b && x_b < mesh.length()) {
            return Err(Error::InvalidParameter(format!(
                "structure needs 0 < x_a < x_b < L, got [{x_a}, {x_b}] on L = {}",
                mesh.length()
            )));
        }
        let i_a = mesh.nearest_node(x_a);
        let i_b = mesh.nearest_node(x_b);
        if i_a == 0 || i_a >= i_b || i_b + 1 >= mesh.n_nodes() {
            return Err(Error::InvalidParameter(format!(
                "structure [{x_a}, {x_b}] does not snap to interior nodes (got {i_a}, {i_b})"
            )));
        }
        Ok(Self {
            x_a: mesh.x(i_a),
            x_b: mesh.x(i_b),
            i_a,
            i_b,
        })
    }
}

/// Prescribed structure velocity `d(x, t) = sin(2πt) (0.4 + 2(2x - x_a - x_b)/L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub x_a: f64,
    pub x_b: f64,
    pub length: f64,
}

impl RigidMotion {
    pub fn new(structure: &StructureRegion, length: f64) -> Self {
        Self {
            x_a: structure.x_a,
            x_b: structure.x_b,
            length,
        }
    }

    pub fn time_profile(&self, t: f64) -> f64 {
        (2.0 * std::f64::consts::PI * t).sin()
    }

    pub fn space_profile(&self, x: f64) -> f64 {
        0.4 + 2.0 * (2.0 * x - self.x_a - self.x_b) / self.length
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.time_profile(t) * self.space_profile(x)
    }
}

/// Initial velocity: two linear ramps reaching zero a distance `L/5` from
/// the structure, zero in between.
pub fn initial_condition(x: f64, structure: &StructureRegion, length: f64) -> f64 {
    let fifth = length / 5.0;
    if x <= structure.x_a - fifth {
        4.4 * (structure.x_a - x - fifth)
    } else if x >= structure.x_b + fifth {
        4.4 * (x - structure.x_b - fifth)
    } else {
        0.0
    }
}

/// Exact Riemann flux for `f(u) = u²/2`.
pub fn godunov_flux(ul: f64, ur: f64) -> f64 {
    let f = |u: f64| 0.5 * u * u;
    if ul <= ur {
        if ul <= 0.0 && ur >= 0.0 {
            0.0
        } else {
            f(ul).min(f(ur))
        }
    } else {
        f(ul).max(f(ur))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub values: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierRecord {
    pub step: usize,
    pub time: f64,
    pub multiplier: MultiplierState,
    pub uzawa_iterations: usize,
    /// Sup norm of `(u_a - d_a, u_b - d_b)` for the accepted state.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxRecord {
    pub step: usize,
    pub time: f64,
    pub flux_a: f64,
    pub flux_b: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub multiplier_series: Vec<MultiplierRecord>,
    pub flux_series: Vec<FluxRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&State> {
        self.snapshots.last().map(|s| &s.values)
    }
}

/// One implicit step, assembled once and solvable for any multiplier.
#[derive(Debug, Clone)]
struct StepSystem {
    sys: TridiagonalSystem,
    corners: Vec<Corner>,
    rhs: Vec<f64>,
    /// Unknown indices of the two interfaces.
    interfaces: Option<(usize, usize)>,
    exact_wrap: bool,
}

impl StepSystem {
    fn solve(&self, multiplier: &[f64]) -> Result<State> {
        let mut rhs = self.rhs.clone();
        if let Some((a, b)) = self.interfaces {
            rhs[a] -= multiplier.first().copied().unwrap_or(0.0);
            rhs[b] -= multiplier.get(1).copied().unwrap_or(0.0);
        }
        let mut u = solve_with_corners(&self.sys, &self.corners, &rhs)?;
        if self.exact_wrap {
            u.push(u[0]);
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportProblem {
    pub kind: TransportKind,
    pub mesh: Mesh1D,
    pub params: TransportParams,
    pub structure: Option<StructureRegion>,
    pub penalty: PenaltyConfig,
}

impl TransportProblem {
    pub fn new(
        kind: TransportKind,
        mesh: Mesh1D,
        params: TransportParams,
        structure: Option<StructureRegion>,
        penalty: PenaltyConfig,
    ) -> Result<Self> {
        penalty.validate()?;
        if !(params.dt > 0.0) || !(params.nu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and nu >= 0, got dt = {}, nu = {}",
                params.dt, params.nu
            )));
        }
        if params.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot stride must be >= 1".into()));
        }
        if params.scheme == Scheme::Duality && structure.is_none() {
            return Err(Error::InvalidParameter("duality needs a structure".into()));
        }
        if kind == TransportKind::AdvDiff {
            check_stability(params.c, params.nu, params.dt, mesh.dx())?;
        }
        Ok(Self {
            kind,
            mesh,
            params,
            structure,
            penalty,
        })
    }

    pub fn motion(&self) -> Option<RigidMotion> {
        self.structure
            .as_ref()
            .map(|s| RigidMotion::new(s, self.mesh.length()))
    }

    /// Standard initial state sampled at the nodes.
    pub fn initial_state(&self) -> Result<State> {
        let s = self
            .structure
            .ok_or_else(|| Error::InvalidParameter("initial condition needs a structure".into()))?;
        Ok(self
            .mesh
            .nodes()
            .iter()
            .map(|&x| initial_condition(x, &s, self.mesh.length()))
            .collect())
    }

    /// Prescribed interface values at time `t`.
    fn interface_targets(&self, t: f64) -> Option<[f64; 2]> {
        let s = self.structure?;
        let motion = RigidMotion::new(&s, self.mesh.length());
        Some([motion.value(s.x_a, t), motion.value(s.x_b, t)])
    }

    fn assemble(&self, state: &[f64], t_next: f64) -> Result<StepSystem> {
        let n = self.mesh.n_nodes();
        if state.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: state.len() });
        }
        let dx = self.mesh.dx();
        let dt = self.params.dt;
        let nu = self.params.nu;
        let exact_wrap = self.params.bc_mode == BoundaryMode::ExactPeriodic;

        // exact wrap drops the duplicate node at x = L
        let m = if exact_wrap { n - 1 } else { n };
        let left = |i: usize| if i == 0 { n - 2 } else { i - 1 };
        let right = |i: usize| if i == m - 1 { if exact_wrap { 0 } else { 1 } } else { i + 1 };

        let transport: Vec<f64> = match self.kind {
            TransportKind::AdvDiff => {
                let c = self.params.c;
                (0..m)
                    .map(|i| {
                        if c >= 0.0 {
                            c * (state[i] - state[left(i)]) / dx
                        } else {
                            c * (state[right(i)] - state[i]) / dx
                        }
                    })
                    .collect()
            }
            TransportKind::Burgers => {
                let speed = state.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                check_stability(speed, nu, dt, dx)?;
                (0..m)
                    .map(|i| {
                        let u = state[i];
                        (godunov_flux(u, state[right(i)]) - godunov_flux(state[left(i)], u)) / dx
                    })
                    .collect()
            }
        };

        let mut sys = TridiagonalSystem::zeros(m);
        let mut corners = Vec::new();
        let mut rhs = vec![0.0; m];
        let mut couple = |sys: &mut TridiagonalSystem, i: usize, j: usize, v: f64| {
            if i.abs_diff(j) <= 1 {
                sys.add(i, j, v);
            } else {
                corners.push(Corner { row: i, col: j, value: v });
            }
        };

        let k = nu / dx;
        for i in 0..m {
            sys.add(i, i, dx / dt + 2.0 * k);
            if k != 0.0 {
                couple(&mut sys, i, left(i), -k);
                couple(&mut sys, i, right(i), -k);
            }
            rhs[i] = dx / dt * state[i] - dx * transport[i];
        }

        if !exact_wrap {
            let w = 1.0 / self.penalty.eps;
            sys.add(0, 0, w);
            sys.add(m - 1, m - 1, w);
            couple(&mut sys, 0, m - 1, -w);
            couple(&mut sys, m - 1, 0, -w);
        }

        let mut interfaces = None;
        if let (Some(s), Some(motion)) = (self.structure, self.motion()) {
            let PenaltyConfig { gamma, eps, r, .. } = self.penalty;
            if self.params.interior_gamma_on && gamma > 0.0 {
                let w = dx * gamma / eps;
                for i in s.i_a..=s.i_b {
                    let lump = if i == s.i_a || i == s.i_b { 0.5 } else { 1.0 };
                    sys.add_point_penalty(&mut rhs, i, lump * w, motion.value(self.mesh.x(i), t_next))?;
                }
            }
            for i in [s.i_a, s.i_b] {
                sys.add_point_penalty(&mut rhs, i, r, motion.value(self.mesh.x(i), t_next))?;
            }
            interfaces = Some((s.i_a, s.i_b));
        }

        Ok(StepSystem {
            sys,
            corners,
            rhs,
            interfaces,
            exact_wrap,
        })
    }

    fn check_multiplier(multiplier: &MultiplierState) -> Result<()> {
        if multiplier.len() != 2 {
            return Err(Error::LengthMismatch { expected: 2, found: multiplier.len() });
        }
        Ok(())
    }

    /// One step of the scheme at the given multiplier, whatever the kind.
    pub fn step(&self, state: &[f64], multiplier: &MultiplierState, t_next: f64) -> Result<State> {
        Self::check_multiplier(multiplier)?;
        self.assemble(state, t_next)?.solve(multiplier.values())
    }

    /// Upwind advection step; errors if the problem is not linear.
    pub fn step_linear(&self, state: &[f64], multiplier: &MultiplierState, t_next: f64) -> Result<State> {
        if self.kind != TransportKind::AdvDiff {
            return Err(Error::InvalidParameter("step_linear on a Burgers problem".into()));
        }
        self.step(state, multiplier, t_next)
    }

    /// Godunov step; errors if the problem is not Burgers.
    pub fn step_burgers(&self, state: &[f64], multiplier: &MultiplierState, t_next: f64) -> Result<State> {
        if self.kind != TransportKind::Burgers {
            return Err(Error::InvalidParameter("step_burgers on a linear problem".into()));
        }
        self.step(state, multiplier, t_next)
    }

    fn interface_residual(&self, state: &[f64], t: f64) -> Vec<f64> {
        match (self.structure, self.interface_targets(t)) {
            (Some(s), Some([da, db])) => vec![state[s.i_a] - da, state[s.i_b] - db],
            _ => vec![0.0, 0.0],
        }
    }

    fn fluxes(&self, state: &[f64]) -> Result<(f64, f64)> {
        match self.structure {
            Some(s) => Ok((
                interface_flux(state, &self.mesh, s.i_a, Side::Left, self.params.nu)?,
                interface_flux(state, &self.mesh, s.i_b, Side::Right, self.params.nu)?,
            )),
            None => Ok((0.0, 0.0)),
        }
    }

    /// Marches `n_steps` from `u_init`.
    pub fn run(&self, u_init: &[f64]) -> Result<Trajectory> {
        let n = self.mesh.n_nodes();
        if u_init.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: u_init.len() });
        }
        let p = &self.params;
        let mut traj = Trajectory::default();
        let mut u: State = u_init.to_vec();
        if p.bc_mode == BoundaryMode::ExactPeriodic {
            u[n - 1] = u[0];
        }
        traj.snapshots.push(Snapshot { step: 0, time: 0.0, values: u.clone() });

        let mut multiplier = MultiplierState::zeros(2);
        for step in 1..=p.n_steps {
            let t = step as f64 * p.dt;
            let system = self.assemble(&u, t)?;
            let record = match p.scheme {
                Scheme::PenaltyOnly => {
                    u = system.solve(&[0.0, 0.0])?;
                    let residual = sup(&self.interface_residual(&u, t));
                    MultiplierRecord {
                        step,
                        time: t,
                        multiplier: MultiplierState::zeros(2),
                        uzawa_iterations: 1,
                        residual,
                        converged: true,
                    }
                }
                Scheme::Duality => {
                    let start = if p.warm_start { multiplier.clone() } else { MultiplierState::zeros(2) };
                    let saddle = StepSaddle { problem: self, system: &system, t };
                    let res = uzawa_iterate(&saddle, self.penalty.r, start, p.tol, p.max_iter)?;
                    u = res.state;
                    multiplier = res.multiplier.clone();
                    MultiplierRecord {
                        step,
                        time: t,
                        multiplier: res.multiplier,
                        uzawa_iterations: res.iterations,
                        residual: res.residual_history.last().copied().unwrap_or(f64::NAN),
                        converged: res.converged,
                    }
                }
            };
            traj.multiplier_series.push(record);
            let (flux_a, flux_b) = self.fluxes(&u)?;
            traj.flux_series.push(FluxRecord { step, time: t, flux_a, flux_b });
            if step % p.snapshot_stride == 0 || step == p.n_steps {
                traj.snapshots.push(Snapshot { step, time: t, values: u.clone() });
            }
        }
        Ok(traj)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// The per-step interface constraint seen by the Uzawa driver.
struct StepSaddle<'a> {
    problem: &'a TransportProblem,
    system: &'a StepSystem,
    t: f64,
}

impl SaddleProblem for StepSaddle<'_> {
    fn n_constraints(&self) -> usize {
        2
    }

    fn solve_primal(&self, multiplier: &MultiplierState) -> Result<State> {
        self.system.solve(multiplier.values())
    }

    fn constraint_residual(&self, state: &State) -> Vec<f64> {
        self.problem.interface_residual(state, self.t)
    }
}

/// Convenience: the run dispatching on `kind`, as a free function.
pub fn run_transient(problem: &TransportProblem, u_init: &[f64]) -> Result<Trajectory> {
    problem.run(u_init)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_mesh() -> Mesh1D {
        Mesh1D::new(1.0, 501).unwrap()
    }

    fn penalty(eps: f64, r: f64) -> PenaltyConfig {
        PenaltyConfig::new(1.0, 0.0, 1.0, eps, r).unwrap()
    }

    fn free(kind: TransportKind, mesh: Mesh1D, params: TransportParams) -> TransportProblem {
        TransportProblem::new(kind, mesh, params, None, penalty(1e-3, 0.0)).unwrap()
    }

    #[test]
    fn godunov_cases() {
        for u in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            assert_eq!(godunov_flux(u, u), 0.5 * u * u);
        }
        assert_eq!(godunov_flux(1.0, -1.0), 0.5);
        assert_eq!(godunov_flux(-1.0, 1.0), 0.0);
        assert_eq!(godunov_flux(0.5, 2.0), 0.125);
        assert_eq!(godunov_flux(-2.0, -0.5), 0.125);
        assert_eq!(godunov_flux(-2.0, 1.0), 0.0);
        assert_eq!(godunov_flux(0.2, -3.0), 4.5);
    }

    #[test]
    fn initial_condition_values() {
        let mesh = Mesh1D::new(1.0, 501).unwrap();
        let s = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
        assert_eq!((s.i_a, s.i_b), (225, 275));
        assert!((initial_condition(0.0, &s, 1.0) - 1.1).abs() < 1e-12);
        assert!((initial_condition(1.0, &s, 1.0) - 1.1).abs() < 1e-12);
        assert!(initial_condition(s.x_a - 0.2, &s, 1.0).abs() < 1e-12);
        assert_eq!(initial_condition(0.5, &s, 1.0), 0.0);
    }

    #[test]
    fn motion_profile() {
        let mesh = base_mesh();
        let s = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
        let m = RigidMotion::new(&s, 1.0);
        assert!((m.space_profile(0.5 * (s.x_a + s.x_b)) - 0.4).abs() < 1e-15);
        assert!((m.value(0.55, 0.25) - 0.6).abs() < 1e-12);
        assert!(m.value(0.45, 0.5).abs() < 1e-12);
    }

    #[test]
    fn structure_validation() {
        let mesh = base_mesh();
        assert!(StructureRegion::new(&mesh, 0.6, 0.5).is_err());
        assert!(StructureRegion::new(&mesh, 0.0, 0.5).is_err());
        assert!(StructureRegion::new(&mesh, 0.3, 1.0).is_err());
    }

    #[test]
    fn stability_bound() {
        assert!(check_stability(1.0, 0.0, 0.002, 0.002).is_ok());
        assert!(check_stability(1.1, 0.0, 0.002, 0.002).is_err());
        // default Burgers data: σ = 1.1, μ = 0.5
        assert!(check_stability(1.1, 0.001, 0.002, 0.002).is_ok());
        assert!(check_stability(2.5, 0.001, 0.002, 0.002).is_err());
        let mesh = base_mesh();
        let params = TransportParams { c: 2.0, ..TransportParams::default() };
        assert!(matches!(
            TransportProblem::new(TransportKind::AdvDiff, mesh, params, None, penalty(1e-3, 0.0)),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn constants_are_preserved() {
        for kind in [TransportKind::AdvDiff, TransportKind::Burgers] {
            for bc in [BoundaryMode::ExactPeriodic, BoundaryMode::PenalizedPeriodic] {
                let params = TransportParams { bc_mode: bc, ..TransportParams::default() };
                let p = free(kind, base_mesh(), params);
                let u = vec![0.3; 501];
                let next = p.step(&u, &MultiplierState::zeros(2), 0.002).unwrap();
                assert!(next.iter().all(|v| (v - 0.3).abs() < 1e-13), "{kind:?} {bc:?}");
            }
        }
    }

    #[test]
    fn upwind_shift_at_unit_courant() {
        let mesh = Mesh1D::new(1.0, 51).unwrap();
        let params = TransportParams { nu: 0.0, dt: mesh.dx(), ..TransportParams::default() };
        let p = free(TransportKind::AdvDiff, mesh, params);
        let mut u: Vec<f64> = (0..51).map(|i| ((i * 7) % 13) as f64).collect();
        u[50] = u[0];
        let next = p.step_linear(&u, &MultiplierState::zeros(2), mesh.dx()).unwrap();
        for i in 1..50 {
            assert!((next[i] - u[i - 1]).abs() < 1e-12);
        }
        assert!((next[0] - u[49]).abs() < 1e-12);
        assert!(p.step_burgers(&u, &MultiplierState::zeros(2), 0.02).is_err());
    }

    #[test]
    fn base_step_stays_finite() {
        let mesh = base_mesh();
        let s = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
        let p = TransportProblem::new(
            TransportKind::AdvDiff,
            mesh,
            TransportParams { interior_gamma_on: true, ..TransportParams::default() },
            Some(s),
            penalty(1e-3, 10.0),
        )
        .unwrap();
        let u0 = p.initial_state().unwrap();
        let u1 = p.step(&u0, &MultiplierState::new(vec![0.5, -0.5]).unwrap(), 0.002).unwrap();
        assert!(u1.iter().all(|v| v.is_finite()));
        assert!(p.step(&u0, &MultiplierState::zeros(3), 0.002).is_err());
    }

    #[test]
    fn mass_conserved_without_structure() {
        let mesh = base_mesh();
        let u: Vec<f64> = mesh
            .nodes()
            .iter()
            .map(|x| 0.5 + 0.4 * (2.0 * std::f64::consts::PI * x).sin() - 0.3 * (x - 0.5).abs())
            .collect();
        for kind in [TransportKind::AdvDiff, TransportKind::Burgers] {
            let p = free(kind, mesh, TransportParams::default());
            let mut v = u.clone();
            v[500] = v[0];
            for step in 1..=50 {
                let before: f64 = v[..500].iter().sum();
                v = p.step(&v, &MultiplierState::zeros(2), step as f64 * 0.002).unwrap();
                let after: f64 = v[..500].iter().sum();
                assert!((after - before).abs() <= 1e-12 * before.abs(), "{kind:?}");
            }
        }
    }

    #[test]
    fn maximum_principle_linear() {
        let mesh = base_mesh();
        let u: Vec<f64> = mesh.nodes().iter().map(|&x| if (0.2..0.4).contains(&x) { 1.0 } else { -0.5 }).collect();
        let params = TransportParams { n_steps: 200, ..TransportParams::default() };
        let traj = free(TransportKind::AdvDiff, mesh, params).run(&u).unwrap();
        for s in &traj.snapshots {
            assert!(s.values.iter().all(|&v| (-0.5 - 1e-12..=1.0 + 1e-12).contains(&v)));
        }
    }

    #[test]
    fn riemann_shock_speed() {
        // u = 1 on [0, 1], 0 on (1, 4]; the shock starts at 1 with speed 1/2
        let mesh = Mesh1D::new(4.0, 801).unwrap();
        let u: Vec<f64> = mesh.nodes().iter().map(|&x| if x <= 1.0 { 1.0 } else { 0.0 }).collect();
        let dt = 0.5 * mesh.dx();
        let params = TransportParams {
            nu: 0.0,
            dt,
            n_steps: (1.0 / dt).round() as usize,
            ..TransportParams::default()
        };
        let traj = free(TransportKind::Burgers, mesh, params).run(&u).unwrap();
        let end = traj.final_state().unwrap();
        let front = shock_position(end, &mesh, 1.2);
        assert!((front - 1.5).abs() <= 2.0 * mesh.dx(), "front at {front}");
    }

    /// First downward crossing of 1/2 to the right of `from`.
    fn shock_position(u: &[f64], mesh: &Mesh1D, from: f64) -> f64 {
        let start = mesh.nearest_node(from);
        for i in start..u.len() - 1 {
            if u[i] >= 0.5 && u[i + 1] < 0.5 {
                let w = (u[i] - 0.5) / (u[i] - u[i + 1]);
                return mesh.x(i) + w * mesh.dx();
            }
        }
        f64::NAN
    }

    #[test]
    fn decreasing_ramp_steepens() {
        let mesh = base_mesh();
        let u: Vec<f64> = mesh
            .nodes()
            .iter()
            .map(|&x| if x < 0.1 { 1.0 } else if x < 0.3 { 1.0 - (x - 0.1) / 0.2 } else { 0.0 })
            .collect();
        let params = TransportParams { nu: 0.0, dt: 0.001, n_steps: 250, ..TransportParams::default() };
        let traj = free(TransportKind::Burgers, mesh, params).run(&u).unwrap();
        let max_jump = |v: &[f64]| v.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        let end = traj.final_state().unwrap();
        // characteristics cross at t = 0.2; by t = 0.25 the ramp is a shock
        assert!(max_jump(end) > 0.3, "{}", max_jump(end));
        assert!(max_jump(&u) < 0.011);
    }

    #[test]
    fn duality_tracks_prescribed_motion() {
        let mesh = base_mesh();
        let s = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
        let params = TransportParams { scheme: Scheme::Duality, n_steps: 100, ..TransportParams::default() };
        let p = TransportProblem::new(TransportKind::AdvDiff, mesh, params, Some(s), penalty(1e-3, 10.0)).unwrap();
        let traj = p.run(&p.initial_state().unwrap()).unwrap();
        assert_eq!(traj.multiplier_series.len(), 100);
        let motion = p.motion().unwrap();
        for snap in &traj.snapshots[1..] {
            assert!((snap.values[s.i_a] - motion.value(s.x_a, snap.time)).abs() <= 1e-10);
        }
        for r in &traj.multiplier_series {
            assert!(r.converged && r.residual <= 1e-10, "step {}: {}", r.step, r.residual);
        }
    }

    #[test]
    fn zero_steps_gives_initial_snapshot() {
        let mesh = base_mesh();
        let s = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
        let params = TransportParams { n_steps: 0, ..TransportParams::default() };
        let p = TransportProblem::new(TransportKind::Burgers, mesh, params, Some(s), penalty(1e-3, 0.1)).unwrap();
        let traj = p.run(&p.initial_state().unwrap()).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert!(traj.multiplier_series.is_empty() && traj.flux_series.is_empty());
    }

    #[test]
    fn penalized_periodic_matches_exact_wrap() {
        // node 0 and node n-1 see identical stencils, so with matching data
        // the tie is inactive and both modes agree to roundoff
        let mesh = base_mesh();
        let s = StructureRegion::new(&mesh, 0.45, 0.55).unwrap();
        let run = |bc, eps| {
            let params = TransportParams { bc_mode: bc, n_steps: 200, ..TransportParams::default() };
            let p = TransportProblem::new(TransportKind::AdvDiff, mesh, params, Some(s), penalty(eps, 10.0)).unwrap();
            p.run(&p.initial_state().unwrap()).unwrap().final_state().unwrap().clone()
        };
        let exact = run(BoundaryMode::ExactPeriodic, 1e-3);
        for eps in [1e-3, 1e-6] {
            let pen = run(BoundaryMode::PenalizedPeriodic, eps);
            let d = exact.iter().zip(&pen).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(d < 1e-8, "eps {eps}: {d}");
        }
    }

    #[test]
    fn periodic_penalty_ties_endpoints() {
        let mesh = base_mesh();
        let mut u = vec![0.0; 501];
        u[500] = 1.0;
        let gap = |eps: f64| {
            let params = TransportParams { bc_mode: BoundaryMode::PenalizedPeriodic, c: 0.5, ..TransportParams::default() };
            let p = TransportProblem::new(TransportKind::AdvDiff, mesh, params, None, penalty(eps, 0.0)).unwrap();
            let v = p.step(&u, &MultiplierState::zeros(2), 0.002).unwrap();
            (v[0] - v[500]).abs()
        };
        let (g1, g2) = (gap(1e-2), gap(1e-4));
        assert!(g1 < 0.1 && g2 < 1e-2 * g1 * 1.01, "{g1} {g2}");
    }

    #[test]
    fn snapshot_times_increase() {
        let mesh = base_mesh();
        let params = TransportParams { n_steps: 35, snapshot_stride: 10, ..TransportParams::default() };
        let traj = free(TransportKind::AdvDiff, mesh, params).run(&vec![0.0; 501]).unwrap();
        let steps: Vec<usize> = traj.snapshots.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 10, 20, 30, 35]);
        assert!(traj.snapshots.windows(2).all(|w| w[0].time < w[1].time));
    }
}
