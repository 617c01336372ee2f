//! Model hyperparameters shared by graph construction, ranking and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which linear solver computes the ranking vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Direct,
    Iterative,
    /// Direct below [`HyperParams::DIRECT_SOLVE_MAX_VERTICES`], iterative above.
    Auto,
}

/// Unit in which the common prefix and length of two file paths are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityUnit {
    /// `/`-separated path components.
    Components,
    /// Unicode scalar values.
    Chars,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    /// Regularization weight in (0, 1). Larger values let the ranking
    /// diffuse further from the query.
    pub alpha: f64,
    /// Maximum number of PR-PR connections created on behalf of one PR.
    pub m: usize,
    /// Per-comment decay for repeated comments by one reviewer, in (0, 1].
    pub lambda: f64,
    pub solver: SolverKind,
    /// Convergence threshold for the iterative solver (max-norm change).
    pub tol: f64,
    pub max_iter: usize,
    pub similarity_unit: SimilarityUnit,
}

impl HyperParams {
    pub const DIRECT_SOLVE_MAX_VERTICES: usize = 1_000;

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(1..=100).contains(&self.m) {
            return Err(Error::InvalidParameter(format!(
                "m must lie in [1, 100], got {}",
                self.m
            )));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be a positive finite number, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha: 0.9,
            m: 10,
            lambda: 0.8,
            solver: SolverKind::Auto,
            tol: 1e-10,
            max_iter: 10_000,
            similarity_unit: SimilarityUnit::Components,
        }
    }
}
