use nalgebra::{DMatrix, DVector, LU};
use serde::Serialize;

use super::{FodeError, FodeProblem};
use crate::fracops::gamma::gamma;
use crate::fracops::{l2_norm, ConvolutionWeights, SampledPath, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FodeNorms {
    /// `‖∂_t^α v‖_{L²}`, read off the equation as `‖P v + F̃‖_{L²}`.
    pub caputo_l2: f64,
    pub u_l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FodeSolution {
    pub u: SampledPath,
    pub v: SampledPath,
    /// `∂_t^α v = P v + F̃` at every node.
    pub rate: SampledPath,
    /// `max_n |v_n - Σ_i w_{n,i} (P_i v_i + F̃_i)|`.
    pub residual: f64,
    pub norms: FodeNorms,
}

/// Smallest step count with `w_{n,n} ‖P‖_∞ < 1/2`.
pub(crate) fn required_steps(alpha: f64, t_max: f64, p_norm: f64) -> usize {
    if p_norm == 0.0 {
        return 2;
    }
    let bound = t_max * (2.0 * p_norm / gamma(alpha + 2.0)).powf(1.0 / alpha);
    (bound.floor() as usize + 1).max(2)
}

fn check_step(problem: &FodeProblem, diagonal: f64) -> Result<(), FodeError> {
    if diagonal * problem.p_norm() < 0.5 {
        return Ok(());
    }
    let grid = problem.grid();
    let mut required = required_steps(problem.alpha().value(), grid.t_max(), problem.p_norm());
    // guard against the floor landing exactly on the boundary
    while TimeGrid::new(grid.t_max(), required)
        .ok()
        .and_then(|g| ConvolutionWeights::new(problem.alpha(), g).ok())
        .is_some_and(|w| w.diagonal() * problem.p_norm() >= 0.5)
    {
        required += 1;
    }
    Err(FodeError::RefineGrid {
        required,
        found: grid.n_steps(),
    })
}

/// Implicit product-trapezoid marching for `v = J^α(Pv + F̃)`.
pub fn solve_fode(problem: &FodeProblem) -> Result<FodeSolution, FodeError> {
    let grid = *problem.grid();
    let dim = problem.dim();
    let weights = ConvolutionWeights::new(problem.alpha(), grid)?;
    let w = weights.diagonal();
    check_step(problem, w)?;

    let source = problem.shifted_source();
    let src = source.values();
    let len = grid.len();
    let mut v = vec![0.0; len * dim];
    let mut g = vec![0.0; len * dim];
    g[..dim].copy_from_slice(&src[..dim]);

    let step_matrix = |i: usize| DMatrix::identity(dim, dim) - problem.p().at(i) * w;
    let cached: Option<LU<f64, _, _>> = problem.p().is_constant().then(|| step_matrix(0).lu());
    let mut hist = vec![0.0; dim];
    for n in 1..len {
        weights.history(n, &g, dim, &mut hist);
        let rhs = DVector::from_iterator(dim, hist.iter().zip(&src[n * dim..(n + 1) * dim]).map(|(h, s)| h + w * s));
        let vn = match &cached {
            Some(lu) => lu.solve(&rhs),
            None => step_matrix(n).lu().solve(&rhs),
        }
        .ok_or(FodeError::Singular { node: n })?;
        if vn.iter().any(|x| !x.is_finite()) {
            return Err(FodeError::NonFinite { what: "solution", node: n });
        }
        let gn = problem.p().at(n) * &vn;
        for j in 0..dim {
            v[n * dim + j] = vn[j];
            g[n * dim + j] = gn[j] + src[n * dim + j];
        }
    }

    let resubstituted = weights.apply(&g, dim);
    let residual = v
        .iter()
        .zip(&resubstituted)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let mut u = vec![0.0; v.len()];
    for (i, t) in grid.nodes().enumerate() {
        for j in 0..dim {
            u[i * dim + j] = v[i * dim + j] + problem.a0()[j] + t * problem.a1()[j];
        }
    }
    let u = SampledPath::new(grid, dim, u)?;
    let v = SampledPath::new(grid, dim, v)?;
    let rate = SampledPath::new(grid, dim, g)?;
    let norms = FodeNorms {
        caputo_l2: l2_norm(&rate),
        u_l2: l2_norm(&u),
    };
    Ok(FodeSolution {
        u,
        v,
        rate,
        residual,
        norms,
    })
}
