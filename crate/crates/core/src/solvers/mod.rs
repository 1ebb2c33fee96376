//! Reference solvers for the standard forms.
//!
//! * [`solve_lp_simplex`]: dense two-phase simplex with Bland's rule.
//! * [`solve_qp_admm`], [`solve_cone_admm`]: operator splitting on one
//!   prefactorized linear system per solve.

mod admm;
mod project;
mod simplex;

pub use admm::{solve_cone_admm, solve_lp_admm, solve_qp_admm};
pub use project::{project_cone, project_soc};
pub use simplex::solve_lp_simplex;

use crate::error::SolverError;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub max_iter: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Over-relaxation, in (0, 2).
    pub alpha: f64,
    pub rho: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { max_iter: 20_000, eps_abs: 1e-6, eps_rel: 1e-6, alpha: 1.6, rho: 1.0 }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::InvalidSettings(what.to_string()));
        if !(self.eps_abs > 0.0 && self.eps_abs.is_finite()) {
            return bad("eps_abs must be positive");
        }
        if !(self.eps_rel > 0.0 && self.eps_rel.is_finite()) {
            return bad("eps_rel must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad("alpha must lie in (0, 2)");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        Ok(())
    }

    /// Same settings with both tolerances replaced.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_abs = eps;
        self.eps_rel = eps;
        self
    }
}
