use super::gamma::gamma as gamma_fn;
use super::weights::ConvolutionWeights;
use super::{FracError, FracOrder, SampledPath};

/// Relative threshold for zero-trace checks: `|u(0)| <= TOL_ZERO · ‖u‖_∞`.
pub const TOL_ZERO: f64 = 1e-10;

impl ConvolutionWeights {
    /// `J^γ` applied componentwise to a path on the same grid.
    pub fn integrate(&self, path: &SampledPath) -> Result<SampledPath, FracError> {
        if path.grid() != self.grid() {
            return Err(FracError::GridMismatch);
        }
        let out = self.apply(path.values(), path.dim());
        SampledPath::new(*path.grid(), path.dim(), out)
    }
}

/// Riemann–Liouville integral `J^γ path`; `γ = 0` returns the path unchanged.
pub fn frac_integral(order: FracOrder, path: &SampledPath) -> Result<SampledPath, FracError> {
    if order.value() == 0.0 {
        return Ok(path.clone());
    }
    ConvolutionWeights::new(order, *path.grid())?.integrate(path)
}

/// Caputo derivative `∂_t^γ`, `0 < γ <= 2`, with the default trace tolerance.
pub fn caputo_derivative(order: FracOrder, path: &SampledPath) -> Result<SampledPath, FracError> {
    caputo_derivative_with_tol(order, path, TOL_ZERO)
}

/// Caputo derivative realized as `d^m/dt^m J^{m-γ}`, `m = ⌈γ⌉`.
///
/// `0 < γ < 1`: three-point backward differences of `J^{1-γ}u` (two-point at
/// node 1, forward at node 0). `γ = 1`: plain backward differences.
/// `1 < γ <= 2`: central second differences of `J^{2-γ}u`, one-sided at both
/// ends. The value at node 0 is first-order accurate at best.
///
/// For non-integer `γ` the multiple `κ t^γ` that makes the remainder's second
/// difference at the origin vanish is split off and differentiated exactly
/// (`∂^γ t^γ = Γ(γ+1)`); the grid scheme only sees the remainder. Without
/// this, the `t^γ` onset of `u = J^γ v`, `v(0) ≠ 0`, leaves an `O(1)` error
/// at the first nodes.
pub fn caputo_derivative_with_tol(
    order: FracOrder,
    path: &SampledPath,
    tol_zero: f64,
) -> Result<SampledPath, FracError> {
    let gamma = order.value();
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(FracError::InvalidOrder(gamma));
    }
    if gamma > 0.5 {
        check_trace(path, tol_zero)?;
    }
    let m = if gamma <= 1.0 { 1 } else { 2 };
    let beta = m as f64 - gamma;
    let (kappa, remainder) = if beta > 0.0 {
        split_onset(path, gamma)
    } else {
        (vec![0.0; path.dim()], path.clone())
    };
    let smoothed = frac_integral(FracOrder::new(beta)?, &remainder)?;
    let mut values = if gamma == 1.0 {
        first_difference(&smoothed)
    } else if m == 1 {
        backward_difference2(&smoothed)
    } else {
        second_difference(&smoothed)
    };
    if kappa.iter().any(|&k| k != 0.0) {
        let exact = gamma_fn(gamma + 1.0);
        for chunk in values.chunks_exact_mut(path.dim()) {
            for (v, k) in chunk.iter_mut().zip(&kappa) {
                *v += k * exact;
            }
        }
    }
    SampledPath::new(*path.grid(), path.dim(), values)
}

/// Splits `u = κ t^q + r` with `r_0 - 2r_1 + r_2 = 0` componentwise.
fn split_onset(path: &SampledPath, q: f64) -> (Vec<f64>, SampledPath) {
    let dim = path.dim();
    let grid = *path.grid();
    let denom = grid.step().powf(q) * (2f64.powf(q) - 2.0);
    let kappa: Vec<f64> = (0..dim)
        .map(|j| (path.get(0, j) - 2.0 * path.get(1, j) + path.get(2, j)) / denom)
        .collect();
    if kappa.iter().all(|&k| k == 0.0) {
        return (kappa, path.clone());
    }
    let mut values = path.values().to_vec();
    for (i, t) in grid.nodes().enumerate() {
        let tq = t.powf(q);
        for j in 0..dim {
            values[i * dim + j] -= kappa[j] * tq;
        }
    }
    let rest = SampledPath::new(grid, dim, values).expect("finite remainder");
    (kappa, rest)
}

pub(crate) fn check_trace(path: &SampledPath, tol_zero: f64) -> Result<(), FracError> {
    let tol = tol_zero * path.sup_norm();
    let initial = path.at(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if initial > tol {
        return Err(FracError::TraceViolation { value: initial, tol });
    }
    Ok(())
}

fn first_difference(y: &SampledPath) -> Vec<f64> {
    let dim = y.dim();
    let n = y.grid().n_steps();
    let h = y.grid().step();
    let v = y.values();
    let mut out = vec![0.0; v.len()];
    for j in 0..dim {
        out[j] = (v[dim + j] - v[j]) / h;
    }
    for i in 1..=n {
        for j in 0..dim {
            out[i * dim + j] = (v[i * dim + j] - v[(i - 1) * dim + j]) / h;
        }
    }
    out
}

fn backward_difference2(y: &SampledPath) -> Vec<f64> {
    let dim = y.dim();
    let n = y.grid().n_steps();
    let h = y.grid().step();
    let v = y.values();
    let at = |i: usize, j: usize| v[i * dim + j];
    let mut out = vec![0.0; v.len()];
    for j in 0..dim {
        out[j] = (at(1, j) - at(0, j)) / h;
        out[dim + j] = out[j];
        for i in 2..=n {
            out[i * dim + j] = (3.0 * at(i, j) - 4.0 * at(i - 1, j) + at(i - 2, j)) / (2.0 * h);
        }
    }
    out
}

fn second_difference(y: &SampledPath) -> Vec<f64> {
    let dim = y.dim();
    let n = y.grid().n_steps();
    let h2 = y.grid().step() * y.grid().step();
    let v = y.values();
    let at = |i: usize, j: usize| v[i * dim + j];
    let mut out = vec![0.0; v.len()];
    for j in 0..dim {
        out[j] = (at(2, j) - 2.0 * at(1, j) + at(0, j)) / h2;
        out[n * dim + j] = (at(n, j) - 2.0 * at(n - 1, j) + at(n - 2, j)) / h2;
    }
    for i in 1..n {
        for j in 0..dim {
            out[i * dim + j] = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / h2;
        }
    }
    out
}

/// Second-order finite-difference `d/dt` on the grid (central inside,
/// three-point one-sided at the ends). Exact on quadratics.
pub fn time_derivative(path: &SampledPath) -> SampledPath {
    let dim = path.dim();
    let n = path.grid().n_steps();
    let h = path.grid().step();
    let v = path.values();
    let at = |i: usize, j: usize| v[i * dim + j];
    let mut out = vec![0.0; v.len()];
    for j in 0..dim {
        out[j] = (-3.0 * at(0, j) + 4.0 * at(1, j) - at(2, j)) / (2.0 * h);
        out[n * dim + j] = (3.0 * at(n, j) - 4.0 * at(n - 1, j) + at(n - 2, j)) / (2.0 * h);
        for i in 1..n {
            out[i * dim + j] = (at(i + 1, j) - at(i - 1, j)) / (2.0 * h);
        }
    }
    SampledPath::new(*path.grid(), dim, out).expect("finite differences of a finite path")
}
