use std::fmt;

use serde::Serialize;

use super::GalerkinError;
use crate::exprparse::{parse, ExprAst, ExprError, Var};

/// A scalar field `g(x, t)` on `[0, 1] × [0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Constant(f64),
    Expr(ExprAst),
}

impl ScalarField {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        Ok(match parse(source)? {
            ExprAst::Number(v) => ScalarField::Constant(v),
            ast => ScalarField::Expr(ast),
        })
    }

    pub fn zero() -> Self {
        ScalarField::Constant(0.0)
    }

    /// Evaluates at `(x, t)`; `name` labels the field in errors.
    pub fn eval(&self, name: &'static str, x: f64, t: f64) -> Result<f64, GalerkinError> {
        match self {
            ScalarField::Constant(v) => Ok(*v),
            ScalarField::Expr(ast) => ast.evaluate(x, t).map_err(|source| GalerkinError::Eval { field: name, x, t, source }),
        }
    }

    pub fn depends_on_t(&self) -> bool {
        match self {
            ScalarField::Constant(_) => false,
            ScalarField::Expr(ast) => ast.depends_on(Var::T),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Constant(v) if *v == 0.0)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(v) => write!(f, "{v}"),
            ScalarField::Expr(ast) => write!(f, "{ast}"),
        }
    }
}

/// Sup-norm bounds of the coefficients and of their `t`-derivatives, sampled
/// on the checking lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientBounds {
    pub a_min: f64,
    pub a_max: f64,
    pub a_t: f64,
    pub b: f64,
    pub b_t: f64,
    pub c: f64,
    pub c_t: f64,
}

pub const LATTICE: usize = 64;

/// Principal part `a`, drift `b` and reaction `c` of
/// `A(t)u = -∂_x(a ∂_x u) + b ∂_x u + c u`, with ellipticity bounds `σ₀ ≤ a ≤ σ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub a: ScalarField,
    pub b: ScalarField,
    pub c: ScalarField,
    pub sigma0: f64,
    pub sigma1: f64,
}

impl CoefficientField {
    /// `a ≡ 1`, `b = c ≡ 0`.
    pub fn laplacian() -> Self {
        Self {
            a: ScalarField::Constant(1.0),
            b: ScalarField::zero(),
            c: ScalarField::zero(),
            sigma0: 1.0,
            sigma1: 1.0,
        }
    }

    pub fn depends_on_t(&self) -> bool {
        self.a.depends_on_t() || self.b.depends_on_t() || self.c.depends_on_t()
    }

    /// Checks `σ₀ ≤ a ≤ σ₁` and finiteness of `a, b, c` and their
    /// forward-difference `t`-derivatives on a 64×64 lattice of `[0,1]×[0,T]`.
    pub fn validate(&self, t_max: f64) -> Result<CoefficientBounds, GalerkinError> {
        if !(self.sigma0 > 0.0 && self.sigma0 <= self.sigma1 && self.sigma1.is_finite()) {
            return Err(GalerkinError::InvalidBounds {
                sigma0: self.sigma0,
                sigma1: self.sigma1,
            });
        }
        let step = 1.0 / (LATTICE - 1) as f64;
        let dt = t_max * step;
        let mut bounds = CoefficientBounds {
            a_min: f64::INFINITY,
            a_max: f64::NEG_INFINITY,
            a_t: 0.0,
            b: 0.0,
            b_t: 0.0,
            c: 0.0,
            c_t: 0.0,
        };
        for i in 0..LATTICE {
            let x = i as f64 * step;
            for j in 0..LATTICE {
                let t = if j == LATTICE - 1 { t_max } else { j as f64 * dt };
                let a = self.a.eval("a", x, t)?;
                if !(a >= self.sigma0 && a <= self.sigma1) {
                    return Err(GalerkinError::Ellipticity {
                        x,
                        t,
                        value: a,
                        sigma0: self.sigma0,
                        sigma1: self.sigma1,
                    });
                }
                bounds.a_min = bounds.a_min.min(a);
                bounds.a_max = bounds.a_max.max(a);
                let b = self.b.eval("b", x, t)?;
                let c = self.c.eval("c", x, t)?;
                bounds.b = bounds.b.max(b.abs());
                bounds.c = bounds.c.max(c.abs());
                if j + 1 < LATTICE {
                    let tn = if j + 2 == LATTICE { t_max } else { (j + 1) as f64 * dt };
                    let h = tn - t;
                    bounds.a_t = bounds.a_t.max(((self.a.eval("a", x, tn)? - a) / h).abs());
                    bounds.b_t = bounds.b_t.max(((self.b.eval("b", x, tn)? - b) / h).abs());
                    bounds.c_t = bounds.c_t.max(((self.c.eval("c", x, tn)? - c) / h).abs());
                }
            }
        }
        Ok(bounds)
    }
}
