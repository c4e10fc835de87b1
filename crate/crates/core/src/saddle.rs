//! Penalty-duality (augmented Lagrangian) driver.
//!
//! Uzawa iteration: solve the penalised primal problem at a fixed
//! multiplier, then move the multiplier along the constraint residual,
//! `λ ← λ + r (u - u0)`, until the constraint holds to tolerance.

use crate::elliptic::State;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Lagrange multipliers, one per constrained degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierState {
    values: Vec<f64>,
}

impl MultiplierState {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite multiplier {v}")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Euclidean distance to another multiplier of the same length.
    pub fn distance(&self, other: &MultiplierState) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// A constrained problem the Uzawa driver can work on.
///
/// `solve_primal` must be deterministic in its argument.
pub trait SaddleProblem {
    fn n_constraints(&self) -> usize;

    /// Solves the penalised problem with the multiplier held fixed.
    fn solve_primal(&self, multiplier: &MultiplierState) -> Result<State>;

    /// `u - u0` on the constrained degrees of freedom.
    fn constraint_residual(&self, state: &State) -> Vec<f64>;
}

/// `λ + r·residual`, componentwise.
pub fn multiplier_update(
    multiplier: &MultiplierState,
    r: f64,
    residual: &[f64],
) -> Result<MultiplierState> {
    if residual.len() != multiplier.len() {
        return Err(Error::LengthMismatch {
            expected: multiplier.len(),
            found: residual.len(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("duality step must be > 0, got {r}")));
    }
    let values = multiplier
        .values
        .iter()
        .zip(residual)
        .map(|(l, e)| l + r * e)
        .collect();
    MultiplierState::new(values)
}

#[derive(Debug, Clone)]
pub struct UzawaResult {
    /// Primal solution at `multiplier`.
    pub state: State,
    pub multiplier: MultiplierState,
    /// Sup norm of the constraint residual after each primal solve.
    pub residual_history: Vec<f64>,
    /// Multiplier used for each primal solve (`λ^0, λ^1, ...`).
    pub multiplier_history: Vec<MultiplierState>,
    pub iterations: usize,
    pub converged: bool,
}

impl UzawaResult {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Number of multiplier updates before the residual first dropped to
    /// `threshold`, if it ever did.
    pub fn updates_to_reach(&self, threshold: f64) -> Option<usize> {
        self.residual_history.iter().position(|&r| r <= threshold)
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Runs the Uzawa iteration from `initial`.
///
/// Not converging within `max_iter` solves is reported through
/// [`UzawaResult::converged`], not as an error.
pub fn uzawa_iterate<P: SaddleProblem + ?Sized>(
    problem: &P,
    r: f64,
    initial: MultiplierState,
    tol: f64,
    max_iter: usize,
) -> Result<UzawaResult> {
    if !(r > 0.0) || !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter(format!(
            "uzawa needs r > 0, tol > 0, max_iter >= 1 (got {r}, {tol}, {max_iter})"
        )));
    }
    if initial.len() != problem.n_constraints() {
        return Err(Error::LengthMismatch {
            expected: problem.n_constraints(),
            found: initial.len(),
        });
    }

    let mut multiplier = initial;
    let mut residual_history = Vec::new();
    let mut multiplier_history = Vec::new();
    loop {
        let state = problem.solve_primal(&multiplier)?;
        let residual = problem.constraint_residual(&state);
        let norm = sup_norm(&residual);
        residual_history.push(norm);
        multiplier_history.push(multiplier.clone());

        let converged = norm <= tol;
        if converged || residual_history.len() >= max_iter {
            return Ok(UzawaResult {
                state,
                multiplier,
                iterations: residual_history.len(),
                residual_history,
                multiplier_history,
                converged,
            });
        }
        multiplier = multiplier_update(&multiplier, r, &residual)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scalar model `k u + w (u - u0) + λ = 0`, constraint `u = u0`.
    struct Scalar {
        k: f64,
        w: f64,
        u0: f64,
    }

    impl SaddleProblem for Scalar {
        fn n_constraints(&self) -> usize {
            1
        }
        fn solve_primal(&self, m: &MultiplierState) -> Result<State> {
            Ok(vec![(self.w * self.u0 - m.values()[0]) / (self.k + self.w)])
        }
        fn constraint_residual(&self, s: &State) -> Vec<f64> {
            vec![s[0] - self.u0]
        }
    }

    #[test]
    fn update_formula() {
        let l = MultiplierState::zeros(2);
        let next = multiplier_update(&l, 10.0, &[0.5, -0.2]).unwrap();
        assert!((next.values()[0] - 5.0).abs() < 1e-15);
        assert!((next.values()[1] + 2.0).abs() < 1e-15);
        assert_eq!(multiplier_update(&next, 3.0, &[0.0, 0.0]).unwrap(), next);
    }

    #[test]
    fn update_is_linear_in_residual() {
        let l = MultiplierState::new(vec![0.3, -1.0]).unwrap();
        let (a, b) = ([0.25, -0.5], [0.5, 0.125]);
        let two = multiplier_update(&multiplier_update(&l, 4.0, &a).unwrap(), 4.0, &b).unwrap();
        let one = multiplier_update(&l, 4.0, &[a[0] + b[0], a[1] + b[1]]).unwrap();
        assert_eq!(two, one);
    }

    #[test]
    fn update_length_checked() {
        assert_eq!(
            multiplier_update(&MultiplierState::zeros(2), 1.0, &[1.0]),
            Err(Error::LengthMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn already_feasible_converges_immediately() {
        let p = Scalar { k: 2.0, w: 1.0, u0: 0.0 };
        let res = uzawa_iterate(&p, 10.0, MultiplierState::zeros(1), 1e-10, 50).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.multiplier.values(), &[0.0]);
    }

    #[test]
    fn scalar_model_converges_to_exact_multiplier() {
        let p = Scalar { k: 2.0, w: 10.0, u0: 1.0 };
        let res = uzawa_iterate(&p, 10.0, MultiplierState::zeros(1), 1e-12, 200).unwrap();
        assert!(res.converged);
        assert!((res.multiplier.values()[0] + 2.0).abs() < 1e-10);
        assert_eq!(res.residual_history.len(), res.iterations);
        // contraction factor k / (k + w) = 1/6
        for w in res.residual_history.windows(2).filter(|w| w[1] > 1e-9) {
            assert!((w[1] / w[0] - 1.0 / 6.0).abs() < 1e-6);
        }
    }

    #[test]
    fn max_iter_flags_not_converged() {
        let p = Scalar { k: 100.0, w: 1.0, u0: 1.0 };
        let res = uzawa_iterate(&p, 1.0, MultiplierState::zeros(1), 1e-14, 5).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 5);
        assert!(res.final_residual() > 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = Scalar { k: 1.0, w: 1.0, u0: 1.0 };
        assert!(uzawa_iterate(&p, 0.0, MultiplierState::zeros(1), 1e-8, 10).is_err());
        assert!(uzawa_iterate(&p, 1.0, MultiplierState::zeros(1), 0.0, 10).is_err());
        assert!(uzawa_iterate(&p, 1.0, MultiplierState::zeros(1), 1e-8, 0).is_err());
        assert!(uzawa_iterate(&p, 1.0, MultiplierState::zeros(2), 1e-8, 10).is_err());
        assert!(MultiplierState::new(vec![f64::NAN]).is_err());
    }
}
