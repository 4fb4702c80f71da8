use super::GalerkinError;

/// `sin(π y)`, exactly zero at integer `y`.
pub fn sin_pi(y: f64) -> f64 {
    let r = y - 2.0 * (0.5 * y).round();
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else if r > 0.5 {
        (std::f64::consts::PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(std::f64::consts::PI * (1.0 + r)).sin()
    } else {
        (std::f64::consts::PI * r).sin()
    }
}

/// `cos(π y)`, exactly zero at half-integers.
pub fn cos_pi(y: f64) -> f64 {
    let r = (y - 2.0 * (0.5 * y).round()).abs();
    if r == 0.5 {
        0.0
    } else if r > 0.5 {
        -(std::f64::consts::PI * (1.0 - r)).cos()
    } else {
        (std::f64::consts::PI * r).cos()
    }
}

/// Dirichlet eigenfunction `φ_k(x) = √2 sin(kπx)` of `-d²/dx²` on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eigenfunction {
    k: usize,
}

impl Eigenfunction {
    pub fn index(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        std::f64::consts::SQRT_2 * sin_pi(self.k as f64 * x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        std::f64::consts::SQRT_2 * std::f64::consts::PI * self.k as f64 * cos_pi(self.k as f64 * x)
    }
}

/// `λ_k = (kπ)²`.
pub fn eigenvalue(k: usize) -> f64 {
    let s = k as f64 * std::f64::consts::PI;
    s * s
}

pub fn eigenpair(k: usize) -> Result<(f64, Eigenfunction), GalerkinError> {
    if k == 0 {
        return Err(GalerkinError::InvalidIndex(k));
    }
    Ok((eigenvalue(k), Eigenfunction { k }))
}

/// `φ_k` and `φ_k'` for `k = 1..=modes` at each point, mode-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTable {
    pub modes: usize,
    pub points: usize,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl BasisTable {
    pub fn new(modes: usize, xs: &[f64]) -> Self {
        let mut values = Vec::with_capacity(modes * xs.len());
        let mut derivatives = Vec::with_capacity(modes * xs.len());
        for k in 1..=modes {
            let phi = Eigenfunction { k };
            values.extend(xs.iter().map(|&x| phi.value(x)));
            derivatives.extend(xs.iter().map(|&x| phi.derivative(x)));
        }
        Self {
            modes,
            points: xs.len(),
            values,
            derivatives,
        }
    }

    #[inline]
    pub fn value_row(&self, k: usize) -> &[f64] {
        &self.values[(k - 1) * self.points..k * self.points]
    }

    #[inline]
    pub fn derivative_row(&self, k: usize) -> &[f64] {
        &self.derivatives[(k - 1) * self.points..k * self.points]
    }
}
