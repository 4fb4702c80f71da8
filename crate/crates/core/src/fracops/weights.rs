//! Product-trapezoidal weights for the Riemann–Liouville integral.
//!
//! The integrand is replaced by its piecewise-linear interpolant on the grid
//! and the kernel `(t_n - s)^{γ-1} / Γ(γ)` is integrated exactly. On a uniform
//! grid the weight table is Toeplitz apart from the first column, so it is
//! stored as two vectors of length `n_steps + 1`.

use serde::Serialize;

use super::gamma::gamma;
use super::{FracError, FracOrder, TimeGrid};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvolutionWeights {
    order: FracOrder,
    grid: TimeGrid,
    /// `w_{n,n}`, identical for every `n >= 1`.
    diagonal: f64,
    /// `interior[k] = w_{n,n-k}` for `1 <= k < n`.
    interior: Vec<f64>,
    /// `start[n] = w_{n,0}`.
    start: Vec<f64>,
}

/// Generalized binomial series helper: returns `Σ_{m>=m0} C(p,m) x^m`
/// restricted to even `m` when `even_only` is set.
fn binomial_tail(p: f64, x: f64, m0: usize, even_only: bool) -> f64 {
    let mut coeff = 1.0; // C(p, 0)
    let mut xm = 1.0;
    let mut sum = 0.0;
    for m in 1..400usize {
        coeff *= (p - (m as f64 - 1.0)) / m as f64;
        xm *= x;
        if m < m0 || (even_only && m % 2 == 1) {
            continue;
        }
        let term = coeff * xm;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() && m as f64 > p + 2.0 {
            break;
        }
        if coeff == 0.0 {
            break;
        }
    }
    sum
}

/// `(k+1)^p - 2k^p + (k-1)^p` without cancellation for large `k`.
fn second_difference(p: f64, k: usize) -> f64 {
    let kf = k as f64;
    if k < 4 {
        (kf + 1.0).powf(p) - 2.0 * kf.powf(p) + (kf - 1.0).powf(p)
    } else {
        2.0 * kf.powf(p) * binomial_tail(p, 1.0 / kf, 2, true)
    }
}

/// `(n-1)^p - n^p + p·n^{p-1}` without cancellation for large `n`.
fn start_term(p: f64, n: usize) -> f64 {
    let nf = n as f64;
    if n < 4 {
        (nf - 1.0).powf(p) - nf.powf(p) + p * nf.powf(p - 1.0)
    } else {
        nf.powf(p) * binomial_tail(p, -1.0 / nf, 2, false)
    }
}

impl ConvolutionWeights {
    pub fn new(order: FracOrder, grid: TimeGrid) -> Result<Self, FracError> {
        let gamma_val = order.value();
        if gamma_val <= 0.0 {
            return Err(FracError::InvalidOrder(gamma_val));
        }
        let n = grid.n_steps();
        if n < 2 {
            return Err(FracError::InvalidGrid(format!("at least 2 intervals required, got {n}")));
        }
        let p = gamma_val + 1.0;
        let scale = grid.step().powf(gamma_val) / gamma(gamma_val + 2.0);
        let mut interior = vec![0.0; n + 1];
        let mut start = vec![0.0; n + 1];
        for k in 1..=n {
            interior[k] = scale * second_difference(p, k);
            start[k] = scale * start_term(p, k);
        }
        Ok(Self {
            order,
            grid,
            diagonal: scale,
            interior,
            start,
        })
    }

    #[inline]
    pub fn order(&self) -> FracOrder {
        self.order
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `w_{n,n}` (the same for every row `n >= 1`).
    #[inline]
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// `w_{n,i}` for `0 <= i <= n`.
    #[inline]
    pub fn weight(&self, n: usize, i: usize) -> f64 {
        debug_assert!(i <= n && n <= self.grid.n_steps());
        if n == 0 {
            0.0
        } else if i == n {
            self.diagonal
        } else if i == 0 {
            self.start[n]
        } else {
            self.interior[n - i]
        }
    }

    /// Sum of row `n`, compensated.
    pub fn row_sum(&self, n: usize) -> f64 {
        neumaier_sum((0..=n).map(|i| self.weight(n, i)))
    }

    /// Accumulates `Σ_{i<n} w_{n,i} g_i` into `out` (length `dim`), where `g`
    /// is node-major with stride `dim`. The diagonal term is left to the caller.
    pub fn history(&self, n: usize, g: &[f64], dim: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        if n == 0 {
            return;
        }
        let w0 = self.start[n];
        for (o, &gv) in out.iter_mut().zip(&g[..dim]) {
            *o += w0 * gv;
        }
        for i in 1..n {
            let w = self.interior[n - i];
            let gi = &g[i * dim..(i + 1) * dim];
            for (o, &gv) in out.iter_mut().zip(gi) {
                *o += w * gv;
            }
        }
    }

    /// Full quadrature `Σ_{i<=n} w_{n,i} g_i` for every node.
    pub fn apply(&self, g: &[f64], dim: usize) -> Vec<f64> {
        let len = self.grid.len();
        assert_eq!(g.len(), len * dim);
        let mut out = vec![0.0; len * dim];
        let mut row = vec![0.0; dim];
        for n in 1..len {
            self.history(n, g, dim, &mut row);
            let gn = &g[n * dim..(n + 1) * dim];
            for ((o, r), &gv) in out[n * dim..(n + 1) * dim].iter_mut().zip(&row).zip(gn) {
                *o = r + self.diagonal * gv;
            }
        }
        out
    }
}

pub(crate) fn neumaier_sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(gamma: f64, t: f64, n: usize) -> ConvolutionWeights {
        ConvolutionWeights::new(FracOrder::new(gamma).unwrap(), TimeGrid::new(t, n).unwrap()).unwrap()
    }

    #[test]
    fn gamma_one_is_trapezoid() {
        let w = weights(1.0, 1.0, 10);
        let tau = 0.1;
        for n in 1..=10 {
            assert!((w.weight(n, 0) - tau / 2.0).abs() < 1e-15);
            assert!((w.weight(n, n) - tau / 2.0).abs() < 1e-15);
            for i in 1..n {
                assert!((w.weight(n, i) - tau).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_on_constants() {
        for &g in &[0.1, 0.5, 0.9, 1.0, 1.3, 1.5, 2.0, 2.7] {
            for &n in &[4usize, 64, 1000, 4096] {
                let w = weights(g, 1.3, n);
                for row in (1..=n).step_by((n / 50).max(1)).chain([n]) {
                    let t = w.grid().node(row);
                    let expected = t.powf(g) / gamma(g + 1.0);
                    let got = w.row_sum(row);
                    assert!((got / expected - 1.0).abs() <= 1e-12, "g={g} n={n} row={row}");
                }
            }
        }
    }

    #[test]
    fn weights_nonnegative() {
        for &g in &[0.05, 0.5, 1.0, 1.5, 2.0] {
            let w = weights(g, 1.0, 300);
            for n in 1..=300 {
                for i in 0..=n {
                    assert!(w.weight(n, i) >= 0.0, "g={g} n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn stable_branch_agrees_with_direct_formula() {
        for &p in &[1.3, 1.5, 2.0, 2.9] {
            for k in 4..40 {
                let kf = k as f64;
                let direct = (kf + 1.0).powf(p) - 2.0 * kf.powf(p) + (kf - 1.0).powf(p);
                assert!((second_difference(p, k) / direct - 1.0).abs() < 1e-11);
                let direct_start = (kf - 1.0).powf(p) - kf.powf(p) + p * kf.powf(p - 1.0);
                assert!((start_term(p, k) / direct_start - 1.0).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_order() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        assert!(matches!(
            ConvolutionWeights::new(FracOrder::new(0.0).unwrap(), grid),
            Err(FracError::InvalidOrder(_))
        ));
    }
}
