//! Static penalty model on `]0, L[` with the rigid part on `]L/2, L[`.
//!
//! Find `u` with `u(0) = 0` such that for all admissible `v`
//!
//! ```text
//! ∫ u'v' + (α/ε)(u(L/2) - u0) v(L/2)
//!        + ∫_{L/2}^{L} (β/ε) u'v' + (γ/ε)(u - u0) v = 0
//! ```
//!
//! discretised with P1 elements on a uniform mesh and a lumped mass for the
//! γ term, which keeps every system tridiagonal.

use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, TridiagonalSystem};
use crate::saddle::{MultiplierState, SaddleProblem};

/// Nodal values on a [`Mesh1D`], one entry per node.
pub type State = Vec<f64>;

/// Uniform grid on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    length: f64,
    n_nodes: usize,
}

impl Mesh1D {
    pub fn new(length: f64, n_nodes: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidMesh(format!("length must be positive, got {length}")));
        }
        if n_nodes < 3 {
            return Err(Error::InvalidMesh(format!("need at least 3 nodes, got {n_nodes}")));
        }
        Ok(Self { length, n_nodes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n_nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_nodes {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.x(i)).collect()
    }

    /// Node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = (x / self.dx()).round();
        (i.max(0.0) as usize).min(self.n_nodes - 1)
    }

    /// Index of the node at `L/2`, if there is one.
    pub fn midpoint_node(&self) -> Result<usize> {
        let cells = self.n_nodes - 1;
        if cells % 2 == 1 {
            return Err(Error::MisalignedStructure(cells));
        }
        Ok(cells / 2)
    }
}

/// Penalty coefficients plus the duality step `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
    pub r: f64,
}

impl PenaltyConfig {
    pub fn new(alpha: f64, beta: f64, gamma: f64, eps: f64, r: f64) -> Result<Self> {
        let cfg = Self { alpha, beta, gamma, eps, r };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {}", self.eps)));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidParameter(format!("r must be >= 0, got {}", self.r)));
        }
        Ok(())
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }
}

/// The four penalty combinations compared on the static model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyVariant {
    Alpha,
    Beta,
    Gamma,
    AlphaBeta,
}

impl PenaltyVariant {
    pub const ALL: [PenaltyVariant; 4] = [Self::Alpha, Self::Beta, Self::Gamma, Self::AlphaBeta];

    /// `(α, β, γ)` for this variant.
    pub fn weights(self) -> (f64, f64, f64) {
        match self {
            Self::Alpha => (1.0, 0.0, 0.0),
            Self::Beta => (0.0, 1.0, 0.0),
            Self::Gamma => (0.0, 0.0, 1.0),
            Self::AlphaBeta => (1.0, 1.0, 0.0),
        }
    }

    pub fn penalty(self, eps: f64, r: f64) -> PenaltyConfig {
        let (alpha, beta, gamma) = self.weights();
        PenaltyConfig { alpha, beta, gamma, eps, r }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::Beta => "beta",
            Self::Gamma => "gamma",
            Self::AlphaBeta => "alpha_beta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticProblem {
    pub mesh: Mesh1D,
    pub penalty: PenaltyConfig,
    pub u0: f64,
}

impl EllipticProblem {
    pub fn new(mesh: Mesh1D, penalty: PenaltyConfig, u0: f64) -> Result<Self> {
        mesh.midpoint_node()?;
        penalty.validate()?;
        Ok(Self { mesh, penalty, u0 })
    }

    /// Node index of `L/2`.
    pub fn structure_start(&self) -> Result<usize> {
        self.mesh.midpoint_node()
    }

    /// Assembles the reduced system (unknowns are nodes `1..n`) with an
    /// arbitrary point weight at `L/2` and a multiplier load there.
    fn assemble_with(&self, point_weight: f64, multiplier: f64) -> Result<(TridiagonalSystem, Vec<f64>)> {
        let m = self.structure_start()?;
        let n = self.mesh.n_nodes();
        let dx = self.mesh.dx();
        let PenaltyConfig { beta, gamma, eps, .. } = self.penalty;

        // unknown k <-> node k + 1
        let mut sys = TridiagonalSystem::zeros(n - 1);
        let mut rhs = vec![0.0; n - 1];

        for e in 0..n - 1 {
            let coef = if e < m { 1.0 } else { 1.0 + beta / eps };
            let k = coef / dx;
            if e == 0 {
                // node 0 carries u = 0 and is eliminated
                sys.add(0, 0, k);
            } else {
                sys.add_edge(e - 1, k);
            }
        }

        if gamma > 0.0 {
            let g = gamma / eps;
            for node in m..n {
                let w = if node == m || node == n - 1 { 0.5 * dx } else { dx };
                sys.add_point_penalty(&mut rhs, node - 1, g * w, self.u0)?;
            }
        }

        sys.add_point_penalty(&mut rhs, m - 1, point_weight, self.u0)?;
        rhs[m - 1] -= multiplier;
        Ok((sys, rhs))
    }

    fn solve_with(&self, point_weight: f64, multiplier: f64) -> Result<State> {
        let (sys, rhs) = self.assemble_with(point_weight, multiplier)?;
        let inner = solve_tridiagonal(&sys, &rhs)?;
        let mut u = Vec::with_capacity(inner.len() + 1);
        u.push(0.0);
        u.extend(inner);
        Ok(u)
    }
}

/// Assembles the penalised system on the unknowns `u_1 .. u_{n-1}`.
pub fn assemble_elliptic(p: &EllipticProblem) -> Result<(TridiagonalSystem, Vec<f64>)> {
    p.assemble_with(p.penalty.alpha / p.penalty.eps, 0.0)
}

/// Solves the penalised problem; the returned state includes `u(0) = 0`.
pub fn solve_penalized_elliptic(p: &EllipticProblem) -> Result<State> {
    p.solve_with(p.penalty.alpha / p.penalty.eps, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitVariant {
    /// `u = u0` enforced on the structure.
    ConstraintActive,
    /// H1-seminorm penalty alone: zero load gives the zero minimiser.
    BetaOnly,
}

/// ε → 0 limit of the penalised solution, sampled at the nodes.
pub fn exact_limit_solution(mesh: &Mesh1D, u0: f64, variant: LimitVariant) -> Result<State> {
    let m = mesh.midpoint_node()?;
    let half = 0.5 * mesh.length();
    Ok(match variant {
        LimitVariant::ConstraintActive => (0..mesh.n_nodes())
            .map(|i| if i >= m { u0 } else { u0 * mesh.x(i) / half })
            .collect(),
        LimitVariant::BetaOnly => vec![0.0; mesh.n_nodes()],
    })
}

/// Slope of the limit solution at `L/2⁻`; the converged multiplier is its negative.
pub fn exact_limit_flux(u0: f64, length: f64) -> f64 {
    2.0 * u0 / length
}

/// Closed-form value `u(L/2)` for the α-only penalty.
pub fn alpha_only_midpoint(u0: f64, length: f64, alpha: f64, eps: f64) -> f64 {
    u0 / (1.0 + 2.0 * eps / (alpha * length))
}

/// Augmented Lagrangian form of the static problem: the point penalty uses
/// weight `α·r` and the constraint `u(L/2) = u0` carries a multiplier.
#[derive(Debug, Clone, Copy)]
pub struct EllipticSaddle {
    pub problem: EllipticProblem,
    pub r: f64,
}

impl EllipticSaddle {
    pub fn new(problem: EllipticProblem, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("r must be > 0, got {r}")));
        }
        Ok(Self { problem, r })
    }
}

impl SaddleProblem for EllipticSaddle {
    fn n_constraints(&self) -> usize {
        1
    }

    fn solve_primal(&self, multiplier: &MultiplierState) -> Result<State> {
        let lambda = multiplier.values().first().copied().unwrap_or(0.0);
        self.problem.solve_with(self.problem.penalty.alpha * self.r, lambda)
    }

    fn constraint_residual(&self, state: &State) -> Vec<f64> {
        let m = (self.problem.mesh.n_nodes() - 1) / 2;
        vec![state[m] - self.problem.u0]
    }
}
