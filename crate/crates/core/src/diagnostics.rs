//! Interface stresses, discrete error norms and log-log rate fits.

use crate::elliptic::{
    exact_limit_flux, exact_limit_solution, solve_penalized_elliptic, EllipticProblem, LimitVariant,
    Mesh1D, PenaltyConfig, State,
};
use crate::error::{Error, Result};

/// Default ε sweep for the rate studies.
pub const DEFAULT_EPS_SWEEP: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `ν u'` at `node`, from a one-sided second-order difference on `side`.
pub fn interface_flux(state: &[f64], mesh: &Mesh1D, node: usize, side: Side, nu: f64) -> Result<f64> {
    let n = state.len();
    if n != mesh.n_nodes() {
        return Err(Error::MeshMismatch(n, mesh.n_nodes()));
    }
    let dx = mesh.dx();
    let du = match side {
        Side::Left => {
            if node < 2 || node >= n {
                return Err(Error::IndexOutOfRange { index: node, len: n });
            }
            (3.0 * state[node] - 4.0 * state[node - 1] + state[node - 2]) / (2.0 * dx)
        }
        Side::Right => {
            if node + 2 >= n {
                return Err(Error::IndexOutOfRange { index: node + 2, len: n });
            }
            (-3.0 * state[node] + 4.0 * state[node + 1] - state[node + 2]) / (2.0 * dx)
        }
    };
    Ok(nu * du)
}

/// Closed node span `[first, last]` occupied by the structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSpan {
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Whole,
    Structure(NodeSpan),
    /// Everything outside the open structure span.
    Fluid(NodeSpan),
}

impl Region {
    fn contains_edge(&self, i: usize) -> bool {
        match *self {
            Region::Whole => true,
            Region::Structure(s) => i >= s.first && i < s.last,
            Region::Fluid(s) => i < s.first || i >= s.last,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
    pub sup: f64,
}

/// Trapezoid L², forward-difference H¹ seminorm and sup norm of `a - b`
/// over the cells of `region`.
pub fn error_norms(a: &[f64], b: &[f64], mesh: &Mesh1D, region: Region) -> Result<ErrorNorms> {
    if a.len() != b.len() {
        return Err(Error::MeshMismatch(a.len(), b.len()));
    }
    if a.len() != mesh.n_nodes() {
        return Err(Error::MeshMismatch(a.len(), mesh.n_nodes()));
    }
    let dx = mesh.dx();
    let e: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mut l2, mut h1, mut sup) = (0.0, 0.0, 0.0f64);
    for i in 0..e.len() - 1 {
        if !region.contains_edge(i) {
            continue;
        }
        l2 += 0.5 * dx * (e[i] * e[i] + e[i + 1] * e[i + 1]);
        h1 += (e[i + 1] - e[i]).powi(2) / dx;
        sup = sup.max(e[i].abs()).max(e[i + 1].abs());
    }
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        sup,
    })
}

/// Least-squares line through `(ln eps, ln error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::NonPositiveData(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(e, err)) = points.iter().find(|(e, err)| !(*e > 0.0) || !(*err > 0.0)) {
        return Err(Error::NonPositiveData(format!("point ({e}, {err})")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NonPositiveData("all eps values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}

/// Errors of one penalised solve against the constrained limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub eps: f64,
    pub err_l2_structure: f64,
    pub err_l2_whole: f64,
    pub err_h1_fluid: f64,
    /// `|u(L/2) - u0|`
    pub err_interface: f64,
    /// `|u'(L/2⁻) - 2u0/L|`
    pub err_flux: f64,
}

/// Fitted slopes for each error column of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSlopes {
    pub l2_structure: RateFit,
    pub l2_whole: RateFit,
    pub h1_fluid: RateFit,
    pub interface: RateFit,
    pub flux: RateFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub samples: Vec<RateSample>,
    pub slopes: RateSlopes,
}

/// Errors of the static penalty model at one ε.
pub fn rate_sample(mesh: &Mesh1D, penalty: PenaltyConfig, u0: f64) -> Result<RateSample> {
    let problem = EllipticProblem::new(*mesh, penalty, u0)?;
    let m = problem.structure_start()?;
    let u = solve_penalized_elliptic(&problem)?;
    let limit = exact_limit_solution(mesh, u0, LimitVariant::ConstraintActive)?;
    let span = NodeSpan { first: m, last: mesh.n_nodes() - 1 };
    let flux = interface_flux(&u, mesh, m, Side::Left, 1.0)?;
    Ok(RateSample {
        eps: penalty.eps,
        err_l2_structure: error_norms(&u, &limit, mesh, Region::Structure(span))?.l2,
        err_l2_whole: error_norms(&u, &limit, mesh, Region::Whole)?.l2,
        err_h1_fluid: error_norms(&u, &limit, mesh, Region::Fluid(span))?.h1_semi,
        err_interface: (u[m] - u0).abs(),
        err_flux: (flux - exact_limit_flux(u0, mesh.length())).abs(),
    })
}

/// Sweeps ε for a fixed `(α, β, γ)` and fits every error column.
pub fn rate_study(mesh: &Mesh1D, penalty: PenaltyConfig, u0: f64, eps_sweep: &[f64]) -> Result<RateStudy> {
    let samples = eps_sweep
        .iter()
        .map(|&eps| rate_sample(mesh, penalty.with_eps(eps), u0))
        .collect::<Result<Vec<_>>>()?;
    let fit = |f: fn(&RateSample) -> f64| {
        let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.eps, f(s))).collect();
        fit_rate(&pts)
    };
    let slopes = RateSlopes {
        l2_structure: fit(|s| s.err_l2_structure)?,
        l2_whole: fit(|s| s.err_l2_whole)?,
        h1_fluid: fit(|s| s.err_h1_fluid)?,
        interface: fit(|s| s.err_interface)?,
        flux: fit(|s| s.err_flux)?,
    };
    Ok(RateStudy { samples, slopes })
}

/// Relative change of the smallest-ε errors when the mesh is refined once.
///
/// Small values mean discretisation error is negligible next to the
/// penalty error on the given mesh.
pub fn refinement_drift(mesh: &Mesh1D, penalty: PenaltyConfig, u0: f64) -> Result<f64> {
    let fine = Mesh1D::new(mesh.length(), 2 * (mesh.n_nodes() - 1) + 1)?;
    let a = rate_sample(mesh, penalty, u0)?;
    let b = rate_sample(&fine, penalty, u0)?;
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
    Ok([
        rel(a.err_l2_structure, b.err_l2_structure),
        rel(a.err_interface, b.err_interface),
        rel(a.err_flux, b.err_flux),
        rel(a.err_h1_fluid, b.err_h1_fluid),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

/// Convenience for a mesh-wide comparison of two nodal states.
pub fn l2_distance(a: &State, b: &State, mesh: &Mesh1D) -> Result<f64> {
    Ok(error_norms(a, b, mesh, Region::Whole)?.l2)
}
