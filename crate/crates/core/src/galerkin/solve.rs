use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::{eigenvalue, Assembler, BasisTable, GalerkinError, SpectralProblem};
use crate::fracode::{solve_fode, FodeProblem, FodeSolution, MatrixPath};
use crate::fracops::{time_derivative, SampledPath};

/// `u_N(x_j, t_i)` on an output lattice, row-major in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldLattice {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl FieldLattice {
    #[inline]
    pub fn at(&self, ti: usize, xj: usize) -> f64 {
        self.values[ti * self.x.len() + xj]
    }
}

/// Spectral norms of `u_N(·, t_i)` at every grid node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralNorms {
    pub t: Vec<f64>,
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

/// Solution norms appearing in the a priori estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    /// `‖u_N‖_{L^∞(0,T;H¹₀)}`.
    pub h1_sup: f64,
    /// `‖∂_t u_N‖_{L²(0,T;L²)}`.
    pub dt_l2: f64,
    /// `‖u_N‖_{L^∞(0,T;H²)}` through `‖Δu_N‖`.
    pub h2_sup: f64,
    /// `‖∂_t^α(u_N - a_{0,N} - t a_{1,N})‖_{L^∞(0,T;L²)}`.
    pub caputo_sup: f64,
    /// `‖∂_t^α(u_N - a_{0,N} - t a_{1,N})‖_{L²(0,T;H^{-1})}`, standing in for the `H_α(0,T;H^{-1})` norm.
    pub h_alpha_hminus1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBundle {
    pub p: FodeSolution,
    pub field: FieldLattice,
    pub series: SpectralNorms,
    pub norms: NormReport,
    /// `‖Q‖_∞` over the grid.
    pub q_norm: f64,
}

/// `u_N = Σ p_k φ_k` at `x_nodes` and every `t_stride`-th node (the last node is always included).
pub fn reconstruct(p: &SampledPath, x_nodes: &[f64], t_stride: usize) -> Result<FieldLattice, GalerkinError> {
    if let Some(&x) = x_nodes.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
        return Err(GalerkinError::Domain(x));
    }
    let stride = t_stride.max(1);
    let n = p.grid().n_steps();
    let mut rows: Vec<usize> = (0..=n).step_by(stride).collect();
    if rows.last() != Some(&n) {
        rows.push(n);
    }
    let modes = p.dim();
    let basis = BasisTable::new(modes, x_nodes);
    let mut values = Vec::with_capacity(rows.len() * x_nodes.len());
    for &i in &rows {
        let coeffs = p.at(i);
        for j in 0..x_nodes.len() {
            values.push((1..=modes).map(|k| coeffs[k - 1] * basis.value_row(k)[j]).sum());
        }
    }
    Ok(FieldLattice {
        x: x_nodes.to_vec(),
        t: rows.iter().map(|&i| p.grid().node(i)).collect(),
        values,
    })
}

fn weighted_norms(p: &SampledPath, weight: impl Fn(f64) -> f64) -> Vec<f64> {
    let lambdas: Vec<f64> = (1..=p.dim()).map(|k| weight(eigenvalue(k))).collect();
    p.values()
        .chunks_exact(p.dim())
        .map(|c| c.iter().zip(&lambdas).map(|(v, w)| w * v * v).sum::<f64>().sqrt())
        .collect()
}

fn trapezoid_l2(grid_step: f64, pointwise: &[f64]) -> f64 {
    let n = pointwise.len() - 1;
    let inner: f64 = pointwise[1..n].iter().map(|v| v * v).sum();
    (grid_step * (inner + 0.5 * (pointwise[0].powi(2) + pointwise[n].powi(2)))).sqrt()
}

pub(crate) fn norm_report(p: &FodeSolution) -> (SpectralNorms, NormReport) {
    let u = &p.u;
    let h = u.grid().step();
    let series = SpectralNorms {
        t: u.grid().nodes().collect(),
        l2: u.pointwise_norms(),
        h1: weighted_norms(u, |l| l),
        h2: weighted_norms(u, |l| l * l),
    };
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(*x));
    let report = NormReport {
        h1_sup: sup(&series.h1),
        dt_l2: trapezoid_l2(h, &time_derivative(u).pointwise_norms()),
        h2_sup: sup(&series.h2),
        caputo_sup: sup(&p.rate.pointwise_norms()),
        h_alpha_hminus1: trapezoid_l2(h, &weighted_norms(&p.rate, |l| 1.0 / l)),
    };
    (series, report)
}

/// Assembles `Q(t_i)` (once when no coefficient depends on `t`) and marches
/// the reduced system.
pub fn solve_ibvp(problem: &SpectralProblem, x_nodes: &[f64], t_stride: usize) -> Result<SolutionBundle, GalerkinError> {
    let assembler = Assembler::new(problem.modes());
    let grid = *problem.grid();
    let q = if problem.coefficients().depends_on_t() {
        let times: Vec<f64> = grid.nodes().collect();
        MatrixPath::Nodal(
            times
                .par_iter()
                .map(|&t| assembler.assemble_q(problem.coefficients(), t))
                .collect::<Result<_, _>>()?,
        )
    } else {
        MatrixPath::Constant(assembler.assemble_q(problem.coefficients(), 0.0)?)
    };
    let fode = FodeProblem::new(
        problem.alpha().value(),
        DVector::from_column_slice(problem.a0()),
        DVector::from_column_slice(problem.a1()),
        q,
        problem.f().clone(),
    )?;
    let q_norm = fode.p_norm();
    let p = solve_fode(&fode)?;
    let field = reconstruct(&p.u, x_nodes, t_stride)?;
    let (series, norms) = norm_report(&p);
    Ok(SolutionBundle {
        p,
        field,
        series,
        norms,
        q_norm,
    })
}
