//! Spectral Galerkin reduction of
//!
//! ```text
//! ∂_t^α (u - u0 - t u1) = -A(t) u + F,   A(t)u = -∂_x(a ∂_x u) + b ∂_x u + c u
//! ```
//!
//! on `Ω = (0, 1)` with homogeneous Dirichlet conditions, onto the first `N`
//! sine modes.

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::exprparse::EvalError;
use crate::fracode::FodeError;
use crate::fracops::{FracError, FracOrder, SampledPath, TimeGrid};

mod basis;
mod coefficients;
pub mod quadrature;
mod solve;

pub use basis::{cos_pi, eigenpair, eigenvalue, sin_pi, BasisTable, Eigenfunction};
pub use coefficients::{CoefficientBounds, CoefficientField, ScalarField};
pub use quadrature::CompositeRule;
pub use solve::{reconstruct, solve_ibvp, FieldLattice, NormReport, SolutionBundle, SpectralNorms};

pub const MODE_CAP: usize = 256;
pub const STEP_CAP: usize = 65536;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalerkinError {
    #[error("eigenpair index must be >= 1, got {0}")]
    InvalidIndex(usize),
    #[error("cannot evaluate {field} at x={x}, t={t}: {source}")]
    Eval {
        field: &'static str,
        x: f64,
        t: f64,
        #[source]
        source: EvalError,
    },
    #[error("ellipticity violated: a({x}, {t}) = {value} outside [{sigma0}, {sigma1}]")]
    Ellipticity {
        x: f64,
        t: f64,
        value: f64,
        sigma0: f64,
        sigma1: f64,
    },
    #[error("invalid ellipticity bounds sigma0={sigma0}, sigma1={sigma1}")]
    InvalidBounds { sigma0: f64, sigma1: f64 },
    #[error("{what} = {value} exceeds the cap {cap}")]
    ResourceCap { what: &'static str, value: usize, cap: usize },
    #[error("x = {0} lies outside [0, 1]")]
    Domain(f64),
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Fode(#[from] FodeError),
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// Quadrature rule and basis samples shared by projections and assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembler {
    rule: CompositeRule,
    basis: BasisTable,
}

impl Assembler {
    pub fn new(modes: usize) -> Self {
        let rule = CompositeRule::for_modes(modes);
        let basis = BasisTable::new(modes, &rule.points);
        Self { rule, basis }
    }

    pub fn modes(&self) -> usize {
        self.basis.modes
    }

    pub fn rule(&self) -> &CompositeRule {
        &self.rule
    }

    fn sample(&self, field: &ScalarField, name: &'static str, t: f64) -> Result<Vec<f64>, GalerkinError> {
        self.rule.points.iter().map(|&x| field.eval(name, x, t)).collect()
    }

    /// `(g(·, t), φ_k)` for `k = 1..=N`.
    pub fn project(&self, field: &ScalarField, name: &'static str, t: f64) -> Result<Vec<f64>, GalerkinError> {
        let weighted: Vec<f64> = self
            .sample(field, name, t)?
            .iter()
            .zip(&self.rule.weights)
            .map(|(g, w)| g * w)
            .collect();
        Ok((1..=self.modes())
            .map(|k| self.basis.value_row(k).iter().zip(&weighted).map(|(p, g)| p * g).sum())
            .collect())
    }

    /// `q_{ℓk}(t) = -∫ a φ_k' φ_ℓ' - ∫ (b φ_k' + c φ_k) φ_ℓ`.
    pub fn assemble_q(&self, coeffs: &CoefficientField, t: f64) -> Result<DMatrix<f64>, GalerkinError> {
        let n = self.modes();
        let m = self.rule.len();
        let values = DMatrix::from_row_slice(n, m, &self.basis.values);
        let derivs = DMatrix::from_row_slice(n, m, &self.basis.derivatives);
        let weighted = |field: &ScalarField, name: &'static str, rows: &DMatrix<f64>| -> Result<DMatrix<f64>, GalerkinError> {
            let g = self.sample(field, name, t)?;
            let mut scaled = rows.clone();
            for (q, mut col) in scaled.column_iter_mut().enumerate() {
                col *= g[q] * self.rule.weights[q];
            }
            Ok(scaled)
        };
        let mut q = -(weighted(&coeffs.a, "a", &derivs)? * derivs.transpose());
        if !coeffs.b.is_zero() {
            q -= weighted(&coeffs.b, "b", &values)? * derivs.transpose();
        }
        if !coeffs.c.is_zero() {
            q -= weighted(&coeffs.c, "c", &values)? * values.transpose();
        }
        Ok(q)
    }

    /// `‖g - Σ (g, φ_k) φ_k‖_{H¹}`, derivatives of `g` by central differences.
    pub fn h1_truncation_error(&self, field: &ScalarField, coeffs: &[f64]) -> Result<f64, GalerkinError> {
        const H: f64 = 1e-5;
        let mut total = 0.0;
        for (q, (&x, &w)) in self.rule.points.iter().zip(&self.rule.weights).enumerate() {
            let g = field.eval("u0", x, 0.0)?;
            let dg = (field.eval("u0", x + H, 0.0)? - field.eval("u0", x - H, 0.0)?) / (2.0 * H);
            let (mut r, mut dr) = (g, dg);
            for (k, c) in coeffs.iter().enumerate() {
                r -= c * self.basis.value_row(k + 1)[q];
                dr -= c * self.basis.derivative_row(k + 1)[q];
            }
            total += w * (r * r + dr * dr);
        }
        Ok(total.sqrt())
    }
}

/// Problem data of the reduced system `∂_t^α(p - a⁰ - t a¹) = Q(t) p + f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProblem {
    alpha: FracOrder,
    modes: usize,
    coefficients: CoefficientField,
    bounds: CoefficientBounds,
    a0: Vec<f64>,
    a1: Vec<f64>,
    f: SampledPath,
    a0_h1_truncation: f64,
}

fn check_caps(modes: usize, grid: &TimeGrid) -> Result<(), GalerkinError> {
    if modes == 0 {
        return Err(GalerkinError::InvalidIndex(0));
    }
    if modes > MODE_CAP {
        return Err(GalerkinError::ResourceCap {
            what: "modes",
            value: modes,
            cap: MODE_CAP,
        });
    }
    if grid.n_steps() > STEP_CAP {
        return Err(GalerkinError::ResourceCap {
            what: "n_steps",
            value: grid.n_steps(),
            cap: STEP_CAP,
        });
    }
    Ok(())
}

impl SpectralProblem {
    /// Projects initial data `u0`, `u1` and forcing `F(x, t_i)` onto `modes` sine modes.
    pub fn from_fields(
        alpha: f64,
        grid: TimeGrid,
        modes: usize,
        coefficients: CoefficientField,
        u0: &ScalarField,
        u1: &ScalarField,
        forcing: &ScalarField,
    ) -> Result<Self, GalerkinError> {
        check_caps(modes, &grid)?;
        let assembler = Assembler::new(modes);
        let a0 = assembler.project(u0, "u0", 0.0)?;
        let a1 = assembler.project(u1, "u1", 0.0)?;
        let rows: Vec<Vec<f64>> = if forcing.is_zero() {
            vec![vec![0.0; modes]; grid.len()]
        } else {
            let times: Vec<f64> = grid.nodes().collect();
            times
                .par_iter()
                .map(|&t| assembler.project(forcing, "F", t))
                .collect::<Result<_, _>>()?
        };
        let f = SampledPath::new(grid, modes, rows.concat())?;
        let truncation = assembler.h1_truncation_error(u0, &a0)?;
        let mut problem = Self::from_coefficients(alpha, coefficients, a0, a1, f)?;
        problem.a0_h1_truncation = truncation;
        Ok(problem)
    }

    /// Problem given directly by modal data; `f` fixes the grid and mode count.
    pub fn from_coefficients(
        alpha: f64,
        coefficients: CoefficientField,
        a0: Vec<f64>,
        a1: Vec<f64>,
        f: SampledPath,
    ) -> Result<Self, GalerkinError> {
        let modes = f.dim();
        check_caps(modes, f.grid())?;
        for (what, v) in [("a0 coefficients", &a0), ("a1 coefficients", &a1)] {
            if v.len() != modes {
                return Err(GalerkinError::Dimension {
                    what,
                    expected: modes,
                    found: v.len(),
                });
            }
        }
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(FodeError::InvalidAlpha(alpha).into());
        }
        let bounds = coefficients.validate(f.grid().t_max())?;
        Ok(Self {
            alpha: FracOrder::new(alpha)?,
            modes,
            coefficients,
            bounds,
            a0,
            a1,
            f,
            a0_h1_truncation: 0.0,
        })
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid(&self) -> &TimeGrid {
        self.f.grid()
    }

    pub fn coefficients(&self) -> &CoefficientField {
        &self.coefficients
    }

    pub fn bounds(&self) -> &CoefficientBounds {
        &self.bounds
    }

    pub fn a0(&self) -> &[f64] {
        &self.a0
    }

    pub fn a1(&self) -> &[f64] {
        &self.a1
    }

    pub fn f(&self) -> &SampledPath {
        &self.f
    }

    /// `λ_k = (kπ)²`, `k = 1..=N`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.modes).map(eigenvalue).collect()
    }

    /// `‖u0 - Σ a⁰_k φ_k‖_{H¹}`; zero when built from modal data.
    pub fn a0_h1_truncation(&self) -> f64 {
        self.a0_h1_truncation
    }

    /// Same data with `a⁰`, `a¹`, `f` replaced.
    pub fn with_data(&self, a0: Vec<f64>, a1: Vec<f64>, f: SampledPath) -> Result<Self, GalerkinError> {
        let mut p = Self::from_coefficients(self.alpha.value(), self.coefficients.clone(), a0, a1, f)?;
        p.a0_h1_truncation = 0.0;
        Ok(p)
    }
}
