//! Numerical certificates for the coercivity inequalities, the generalized
//! Grönwall bound and the a priori estimates of the diffusion-wave problem.
//!
//! Every check is a pure function of its inputs. Continuum inequalities are
//! checked with the slack `TOL_INEQ · (1 + scale)`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::fracode::FodeError;
use crate::fracops::{FracError, SampledPath, TimeGrid};
use crate::galerkin::GalerkinError;

mod coercivity;
mod estimates;
mod gronwall;

pub use coercivity::{
    check_coercivity_basic, check_coercivity_basic_with_tol, check_coercivity_matrix, check_coercivity_matrix_with_tol,
    coercivity_battery, coercivity_battery_with_tol, gradient_mass_matrix,
};
pub use estimates::{
    alpha_limit_study, check_strong_estimate, check_weak_estimate, compatibility_defect, estimate_battery,
    random_problem, AlphaLimitStudy, BatteryCase, BatteryConfig, BatterySummary, EstimateBattery, EstimateEntry, EstimateKind,
    ProblemDescriptor,
};
pub use gronwall::{fit_gronwall_constant, gronwall_certificate, gronwall_certificate_with_tol};

/// Relative slack for discretized continuum inequalities.
pub const TOL_INEQ: f64 = 5e-3;
/// Relative tolerance of the `F(0) = A(0)a₀` compatibility check.
pub const TOL_COMPAT: f64 = 1e-8;
/// Allowed relative drift of a fitted constant under `n → 2n`.
pub const STABILITY_BAND: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("initial value {value:e} exceeds the zero-trace tolerance {tol:e}")]
    Trace { value: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incompatible data: mode {mode} has |f_k(0) - (A(0)a0, phi_k)| = {defect:e} > {tol:e}")]
    Incompatible { mode: usize, defect: f64, tol: f64 },
    #[error("estimate violated: rhs is zero but lhs = {lhs:e}")]
    EstimateViolation { lhs: f64 },
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Fode(#[from] FodeError),
    #[error(transparent)]
    Galerkin(#[from] GalerkinError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Passed,
    Failed,
    /// The hypothesis of the inequality does not hold, so nothing is certified.
    NotApplicable,
}

/// Both sides of an inequality at every checkpoint time.
///
/// `margin` is the minimum over checkpoints of `rhs − lhs` (for `lhs ≤ rhs`)
/// or `lhs − rhs` (for `lhs ≥ rhs`). A witness passes when
/// `margin ≥ −tolerance` and every fitted constant is grid-stable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityWitness {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub t: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub verdict: Verdict,
    pub fitted: BTreeMap<String, f64>,
    /// `None` when nothing was fitted.
    pub stable: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Orientation {
    /// Certifies `lhs ≥ rhs`.
    Lower,
    /// Certifies `lhs ≤ rhs`.
    Upper,
}

impl InequalityWitness {
    pub(crate) fn build(
        name: &str,
        params: BTreeMap<String, f64>,
        grid: &TimeGrid,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        orientation: Orientation,
        tolerance: f64,
    ) -> Self {
        let margin = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| match orientation {
                Orientation::Lower => l - r,
                Orientation::Upper => r - l,
            })
            .fold(f64::INFINITY, f64::min);
        let passed = margin >= -tolerance;
        Self {
            name: name.to_string(),
            params,
            t: grid.nodes().collect(),
            lhs,
            rhs,
            margin,
            tolerance,
            passed,
            verdict: if passed { Verdict::Passed } else { Verdict::Failed },
            fitted: BTreeMap::new(),
            stable: None,
        }
    }

    /// Keeps every `stride`-th checkpoint (and the last); `margin` and the
    /// verdict still refer to all checkpoints.
    pub fn thinned(mut self, stride: usize) -> Self {
        let stride = stride.max(1);
        let n = self.t.len();
        let keep: Vec<usize> = (0..n).filter(|i| i % stride == 0 || *i + 1 == n).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        self.t = pick(&self.t);
        self.lhs = pick(&self.lhs);
        self.rhs = pick(&self.rhs);
        self
    }

    pub(crate) fn with_fit(mut self, fitted: BTreeMap<String, f64>, stable: bool) -> Self {
        self.fitted = fitted;
        self.stable = Some(stable);
        self.passed = self.margin >= -self.tolerance && stable;
        self.verdict = if self.passed { Verdict::Passed } else { Verdict::Failed };
        self
    }
}

pub(crate) fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `|C(2n)/C(n) − 1| ≤ STABILITY_BAND`; two vanishing constants are stable.
pub(crate) fn is_stable(coarse: f64, fine: f64) -> bool {
    if !(coarse.is_finite() && fine.is_finite()) {
        return false;
    }
    if coarse == 0.0 && fine == 0.0 {
        return true;
    }
    coarse > 0.0 && (fine / coarse - 1.0).abs() <= STABILITY_BAND
}

/// Every other node of `path`; requires an even step count.
pub(crate) fn coarsen(path: &SampledPath) -> Result<SampledPath, VerifyError> {
    let n = path.grid().n_steps();
    if n % 2 != 0 || n < 4 {
        return Err(VerifyError::InvalidArgument(format!(
            "refinement study needs an even step count >= 4, found {n}"
        )));
    }
    let grid = TimeGrid::new(path.grid().t_max(), n / 2)?;
    let values: Vec<f64> = (0..=n / 2).flat_map(|i| path.at(2 * i).to_vec()).collect();
    Ok(SampledPath::new(grid, path.dim(), values)?)
}

/// Trapezoid rule for `∫_0^T g(t)² dt` on the grid.
pub(crate) fn trapezoid_sq(step: f64, pointwise: &[f64]) -> f64 {
    let n = pointwise.len() - 1;
    let inner: f64 = pointwise[1..n].iter().map(|v| v * v).sum();
    step * (inner + 0.5 * (pointwise[0].powi(2) + pointwise[n].powi(2)))
}
