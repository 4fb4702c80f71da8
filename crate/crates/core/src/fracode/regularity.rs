use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{solve_fode, FodeError, FodeProblem, MatrixPath};
use crate::fracops::{SampledPath, TimeGrid, TOL_ZERO};

/// Observed order expected when `F + P a0` has zero trace and a derivative in `L²`.
pub const REGULARITY_ORDER: f64 = 1.8;

type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;
type SourceFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// Continuous-time problem that can be discretized on any grid.
#[derive(Clone)]
pub struct FodeModel {
    alpha: f64,
    t_max: f64,
    a0: Vec<f64>,
    a1: Vec<f64>,
    p: MatrixFn,
    p_constant: bool,
    f: SourceFn,
}

impl fmt::Debug for FodeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FodeModel")
            .field("alpha", &self.alpha)
            .field("t_max", &self.t_max)
            .field("a0", &self.a0)
            .field("a1", &self.a1)
            .field("p_constant", &self.p_constant)
            .finish_non_exhaustive()
    }
}

impl FodeModel {
    pub fn new(
        alpha: f64,
        t_max: f64,
        a0: Vec<f64>,
        a1: Vec<f64>,
        p: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
        f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            alpha,
            t_max,
            a0,
            a1,
            p: Arc::new(p),
            p_constant: false,
            f: Arc::new(f),
        }
    }

    /// Model with a time-independent matrix; the step factorization is reused.
    pub fn with_constant_matrix(
        alpha: f64,
        t_max: f64,
        a0: Vec<f64>,
        a1: Vec<f64>,
        p: DMatrix<f64>,
        f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        let mut model = Self::new(alpha, t_max, a0, a1, move |_| p.clone(), f);
        model.p_constant = true;
        model
    }

    pub fn dim(&self) -> usize {
        self.a0.len()
    }

    pub fn discretize(&self, n_steps: usize) -> Result<FodeProblem, FodeError> {
        let grid = TimeGrid::new(self.t_max, n_steps)?;
        let p = if self.p_constant {
            MatrixPath::Constant((self.p)(0.0))
        } else {
            MatrixPath::from_fn(grid, |t| (self.p)(t))
        };
        let f = SampledPath::from_fn_vec(grid, self.dim(), |t, out| (self.f)(t, out))?;
        FodeProblem::new(
            self.alpha,
            DVector::from_column_slice(&self.a0),
            DVector::from_column_slice(&self.a1),
            p,
            f,
        )
    }

    /// `|F(0) + P(0) a0|` and the tolerance it is held to.
    fn compatibility(&self) -> (f64, f64) {
        let mut f0 = vec![0.0; self.dim()];
        (self.f)(0.0, &mut f0);
        let f0 = DVector::from_vec(f0);
        let pa0 = (self.p)(0.0) * DVector::from_column_slice(&self.a0);
        let value = (&f0 + &pa0).norm();
        (value, TOL_ZERO * (1.0 + f0.norm() + pa0.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularityStatus {
    /// Every level agrees to rounding; no order can be measured.
    Exact,
    /// All observed orders reach [`REGULARITY_ORDER`].
    Converged,
    Degraded,
    /// Successive differences do not shrink.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub levels: Vec<usize>,
    /// `u(T)` at each level.
    pub end_values: Vec<Vec<f64>>,
    /// `|u_{2n}(T) - u_n(T)|` for consecutive levels.
    pub differences: Vec<f64>,
    /// `log2` ratios of consecutive differences.
    pub orders: Vec<f64>,
    pub status: RegularityStatus,
}

const LEVELS: usize = 4;

/// Solves on `n, 2n, 4n, 8n` steps and reports the observed order of `u(T)`.
pub fn regularity_probe(model: &FodeModel, base_steps: usize) -> Result<RegularityReport, FodeError> {
    let (value, tol) = model.compatibility();
    if value > tol {
        return Err(FodeError::Incompatible { value, tol });
    }
    let levels: Vec<usize> = (0..LEVELS).map(|k| base_steps << k).collect();
    let end_values = levels
        .par_iter()
        .map(|&n| {
            let sol = solve_fode(&model.discretize(n)?)?;
            Ok(sol.u.at(n).to_vec())
        })
        .collect::<Result<Vec<_>, FodeError>>()?;
    let differences: Vec<f64> = end_values
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .collect();
    let orders: Vec<f64> = differences.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    let scale = 1.0 + end_values.last().map_or(0.0, |u| u.iter().map(|x| x * x).sum::<f64>().sqrt());
    let status = if differences.iter().all(|&d| d <= 1e-13 * scale) {
        RegularityStatus::Exact
    } else if differences.windows(2).any(|d| d[1].partial_cmp(&d[0]) != Some(std::cmp::Ordering::Less)) {
        RegularityStatus::Inconclusive
    } else if orders.iter().all(|&p| p >= REGULARITY_ORDER) {
        RegularityStatus::Converged
    } else {
        RegularityStatus::Degraded
    };
    Ok(RegularityReport {
        levels,
        end_values,
        differences,
        orders,
        status,
    })
}
