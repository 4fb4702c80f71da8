use serde::Serialize;

use super::{FodeError, FodeProblem, FodeSolution};
use crate::fracops::{l2_norm, sobolev_slobodecki_norm, NormFlavor};

/// Both sides of the a priori bound
/// `‖v‖_{H_α} + ‖u‖_{H^α} ≤ C (|a0| + |a1| + ‖F‖_{L²})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWitness {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

const ZERO_DATA_TOL: f64 = 1e-12;

/// `‖v‖_{H_α}` is represented by `‖∂_t^α v‖_{L²}`; `‖u‖_{H^α}` is the discrete
/// Sobolev–Slobodecki norm.
pub fn estimate_witness(problem: &FodeProblem, solution: &FodeSolution) -> Result<EstimateWitness, FodeError> {
    if solution.u.grid() != problem.grid() || solution.u.dim() != problem.dim() {
        return Err(FodeError::Dimension {
            what: "solution",
            expected: problem.dim(),
            found: solution.u.dim(),
        });
    }
    let lhs = solution.norms.caputo_l2
        + sobolev_slobodecki_norm(problem.alpha().value(), &solution.u, NormFlavor::Plain)?;
    let rhs = problem.a0().norm() + problem.a1().norm() + l2_norm(problem.f());
    if rhs == 0.0 {
        if lhs > ZERO_DATA_TOL {
            return Err(FodeError::EstimateViolation { lhs });
        }
        return Ok(EstimateWitness { lhs, rhs, ratio: 0.0 });
    }
    Ok(EstimateWitness {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}
