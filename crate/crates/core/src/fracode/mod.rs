//! Linear systems of time-fractional ODEs of order `α ∈ (1, 2]`:
//!
//! ```text
//! ∂_t^α (u - a0 - t a1) = P(t) u + F(t),   u - a0 - t a1 ∈ H_α(0, T)
//! ```
//!
//! solved through the Volterra form `v = J^α(Pv) + J^α F̃`,
//! `v = u - a0 - t a1`, `F̃ = F + P a0 + t P a1`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fracops::{FracError, FracOrder, SampledPath, TimeGrid};

mod regularity;
mod solve;
mod witness;

pub use regularity::{regularity_probe, FodeModel, RegularityReport, RegularityStatus, REGULARITY_ORDER};
pub use solve::{solve_fode, FodeNorms, FodeSolution};
pub use witness::{estimate_witness, EstimateWitness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FodeError {
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error("order {0} outside (1, 2]")]
    InvalidAlpha(f64),
    #[error("{what}: expected dimension {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite {what} at node {node}")]
    NonFinite { what: &'static str, node: usize },
    #[error("time step too large for the implicit step: refine to at least {required} steps (have {found})")]
    RefineGrid { required: usize, found: usize },
    #[error("singular step matrix at node {node}")]
    Singular { node: usize },
    #[error("incompatible data: |F(0) + P(0) a0| = {value:e} exceeds {tol:e}")]
    Incompatible { value: f64, tol: f64 },
    #[error("zero data produced a nonzero solution (norm {lhs:e})")]
    EstimateViolation { lhs: f64 },
}

/// `P(t)` sampled at every grid node, or a single constant matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixPath {
    Constant(DMatrix<f64>),
    Nodal(Vec<DMatrix<f64>>),
}

impl MatrixPath {
    /// Samples an evaluator once per node.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> DMatrix<f64>) -> Self {
        MatrixPath::Nodal(grid.nodes().map(f).collect())
    }

    #[inline]
    pub fn at(&self, i: usize) -> &DMatrix<f64> {
        match self {
            MatrixPath::Constant(m) => m,
            MatrixPath::Nodal(ms) => &ms[i],
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MatrixPath::Constant(_))
    }

    /// `max_i ‖P(t_i)‖_∞` (max row sum).
    pub fn sup_norm(&self) -> f64 {
        match self {
            MatrixPath::Constant(m) => row_sum_norm(m),
            MatrixPath::Nodal(ms) => ms.iter().map(row_sum_norm).fold(0.0, f64::max),
        }
    }
}

pub(crate) fn row_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Discrete initial value problem on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FodeProblem {
    alpha: FracOrder,
    a0: DVector<f64>,
    a1: DVector<f64>,
    p: MatrixPath,
    f: SampledPath,
    p_norm: f64,
}

impl FodeProblem {
    pub fn new(
        alpha: f64,
        a0: DVector<f64>,
        a1: DVector<f64>,
        p: MatrixPath,
        f: SampledPath,
    ) -> Result<Self, FodeError> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(FodeError::InvalidAlpha(alpha));
        }
        let dim = f.dim();
        for (what, found) in [("a0", a0.len()), ("a1", a1.len())] {
            if found != dim {
                return Err(FodeError::Dimension { what, expected: dim, found });
            }
        }
        if a0.iter().chain(a1.iter()).any(|v| !v.is_finite()) {
            return Err(FodeError::NonFinite {
                what: "initial data",
                node: 0,
            });
        }
        let len = f.grid().len();
        match &p {
            MatrixPath::Constant(m) => check_matrix(m, dim, 0)?,
            MatrixPath::Nodal(ms) => {
                if ms.len() != len {
                    return Err(FodeError::Dimension {
                        what: "P samples",
                        expected: len,
                        found: ms.len(),
                    });
                }
                for (i, m) in ms.iter().enumerate() {
                    check_matrix(m, dim, i)?;
                }
            }
        }
        let p_norm = p.sup_norm();
        Ok(Self {
            alpha: FracOrder::new(alpha)?,
            a0,
            a1,
            p,
            f,
            p_norm,
        })
    }

    /// Constant `P` and `F` given as a path.
    pub fn constant(alpha: f64, a0: &[f64], a1: &[f64], p: DMatrix<f64>, f: SampledPath) -> Result<Self, FodeError> {
        Self::new(
            alpha,
            DVector::from_column_slice(a0),
            DVector::from_column_slice(a1),
            MatrixPath::Constant(p),
            f,
        )
    }

    #[inline]
    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        self.f.grid()
    }

    pub fn a0(&self) -> &DVector<f64> {
        &self.a0
    }

    pub fn a1(&self) -> &DVector<f64> {
        &self.a1
    }

    pub fn p(&self) -> &MatrixPath {
        &self.p
    }

    pub fn f(&self) -> &SampledPath {
        &self.f
    }

    /// `max_i ‖P(t_i)‖_∞`.
    pub fn p_norm(&self) -> f64 {
        self.p_norm
    }

    /// `F̃ = F + P a0 + t P a1` at every node.
    pub fn shifted_source(&self) -> SampledPath {
        let dim = self.dim();
        let grid = *self.grid();
        let mut values = self.f.values().to_vec();
        for (i, t) in grid.nodes().enumerate() {
            let shift = self.p.at(i) * (&self.a0 + &self.a1 * t);
            for (o, s) in values[i * dim..(i + 1) * dim].iter_mut().zip(shift.iter()) {
                *o += s;
            }
        }
        SampledPath::new(grid, dim, values).expect("finite shifted source")
    }
}

fn check_matrix(m: &DMatrix<f64>, dim: usize, node: usize) -> Result<(), FodeError> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(FodeError::Dimension {
            what: "P",
            expected: dim,
            found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(FodeError::NonFinite { what: "P", node });
    }
    Ok(())
}
