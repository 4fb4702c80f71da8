//! Discrete Sobolev–Slobodecki norms on `(0, T)`.
//!
//! For `γ = ℓ + θ`, `ℓ ∈ ℕ`, `θ ∈ [0, 1)`:
//!
//! ```text
//! ‖u‖²_{H^γ} = Σ_{k≤ℓ} ‖u^{(k)}‖²_{L²}                       (θ = 0)
//! ‖u‖²_{H^γ} = Σ_{k≤ℓ} ‖u^{(k)}‖²_{L²} + ‖u^{(ℓ)}‖²_{H^θ}      (ℓ ≥ 1, θ > 0)
//! ‖v‖²_{H^θ} = ‖v‖²_{L²} + ∫∫ |v(t)-v(s)|² / |t-s|^{1+2θ}
//! ```
//!
//! The zero-trace flavor adds `∫ t^{-1} |u^{(ℓ)}|²` when `θ = 1/2` and
//! rejects paths with `u(0) ≠ 0` when `γ > 1/2`.

use serde::{Deserialize, Serialize};

use super::operators::{check_trace, time_derivative, TOL_ZERO};
use super::{FracError, SampledPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormFlavor {
    /// `H^γ(0, T)`.
    Plain,
    /// `H_γ(0, T)`, the zero-initial-trace subspace.
    ZeroTrace,
}

/// Trapezoid `∫_0^T |u(t)|² dt` summed over components.
pub fn l2_norm_squared(path: &SampledPath) -> f64 {
    let h = path.grid().step();
    let sq = path.pointwise_norms();
    let n = sq.len() - 1;
    let interior: f64 = sq[1..n].iter().map(|v| v * v).sum();
    h * (interior + 0.5 * (sq[0] * sq[0] + sq[n] * sq[n]))
}

pub fn l2_norm(path: &SampledPath) -> f64 {
    l2_norm_squared(path).sqrt()
}

/// Cell midpoint values `(u_i + u_{i+1}) / 2`, node-major.
fn midpoints(path: &SampledPath) -> Vec<f64> {
    let dim = path.dim();
    let v = path.values();
    let n = path.grid().n_steps();
    (0..n * dim).map(|idx| 0.5 * (v[idx] + v[idx + dim])).collect()
}

/// Double-integral seminorm by the midpoint rule over off-diagonal cells.
pub fn slobodecki_seminorm_squared(path: &SampledPath, theta: f64) -> f64 {
    let dim = path.dim();
    let n = path.grid().n_steps();
    let h = path.grid().step();
    let mid = midpoints(path);
    let exponent = 1.0 + 2.0 * theta;
    let kernel: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { (k as f64 * h).powf(-exponent) }).collect();
    let mut total = 0.0;
    for i in 0..n {
        let ui = &mid[i * dim..(i + 1) * dim];
        let mut row = 0.0;
        for j in (i + 1)..n {
            let uj = &mid[j * dim..(j + 1) * dim];
            let d2: f64 = ui.iter().zip(uj).map(|(a, b)| (a - b) * (a - b)).sum();
            row += d2 * kernel[j - i];
        }
        total += row;
    }
    2.0 * total * h * h
}

/// Midpoint `∫_0^T t^{-1} |u(t)|² dt`.
pub fn weighted_trace_term(path: &SampledPath) -> f64 {
    let dim = path.dim();
    let n = path.grid().n_steps();
    let h = path.grid().step();
    let mid = midpoints(path);
    (0..n)
        .map(|i| {
            let m = (i as f64 + 0.5) * h;
            let sq: f64 = mid[i * dim..(i + 1) * dim].iter().map(|v| v * v).sum();
            sq / m
        })
        .sum::<f64>()
        * h
}

/// Discrete `‖path‖_{H^γ}` or `‖path‖_{H_γ}`.
pub fn sobolev_slobodecki_norm(gamma: f64, path: &SampledPath, flavor: NormFlavor) -> Result<f64, FracError> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(FracError::InvalidOrder(gamma));
    }
    let ell = gamma.floor() as usize;
    let theta = gamma - ell as f64;
    if ell >= 1 && path.grid().n_steps() < 8 * ell {
        return Err(FracError::InsufficientResolution {
            needed: 8 * ell,
            found: path.grid().n_steps(),
        });
    }
    if flavor == NormFlavor::ZeroTrace && gamma > 0.5 {
        check_trace(path, TOL_ZERO)?;
    }
    let mut derivative = path.clone();
    let mut total = l2_norm_squared(path);
    for _ in 0..ell {
        derivative = time_derivative(&derivative);
        total += l2_norm_squared(&derivative);
    }
    if theta > 0.0 {
        if ell >= 1 {
            total += l2_norm_squared(&derivative);
        }
        total += slobodecki_seminorm_squared(&derivative, theta);
        if flavor == NormFlavor::ZeroTrace && (theta - 0.5).abs() < 1e-12 {
            total += weighted_trace_term(&derivative);
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::TimeGrid;

    fn linear(n: usize) -> SampledPath {
        SampledPath::from_fn(TimeGrid::new(1.0, n).unwrap(), |t| t).unwrap()
    }

    #[test]
    fn zero_path_has_zero_norm() {
        let p = SampledPath::zeros(TimeGrid::new(1.0, 64).unwrap(), 2);
        for &g in &[0.0, 0.25, 0.5, 0.9, 1.0, 1.5, 2.0] {
            for flavor in [NormFlavor::Plain, NormFlavor::ZeroTrace] {
                assert_eq!(sobolev_slobodecki_norm(g, &p, flavor).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn quarter_norm_of_t() {
        let exact = (1.0 / 3.0 + 8.0 / 15.0f64).sqrt();
        let got = sobolev_slobodecki_norm(0.25, &linear(512), NormFlavor::Plain).unwrap();
        assert!((got / exact - 1.0).abs() <= 0.01, "{got} vs {exact}");
    }

    #[test]
    fn half_zero_trace_norm_of_t() {
        let exact_sq = 11.0 / 6.0;
        let got = sobolev_slobodecki_norm(0.5, &linear(512), NormFlavor::ZeroTrace).unwrap();
        assert!((got * got / exact_sq - 1.0).abs() <= 0.01, "{}", got * got);
    }

    #[test]
    fn h1_norm_of_t() {
        let got = sobolev_slobodecki_norm(1.0, &linear(512), NormFlavor::ZeroTrace).unwrap();
        assert!((got - (1.0 / 3.0 + 1.0f64).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn zero_trace_flavor_rejects_offset() {
        let p = SampledPath::from_fn(TimeGrid::new(1.0, 64).unwrap(), |t| 1.0 + t).unwrap();
        assert!(matches!(
            sobolev_slobodecki_norm(0.75, &p, NormFlavor::ZeroTrace),
            Err(FracError::TraceViolation { .. })
        ));
        assert!(sobolev_slobodecki_norm(0.75, &p, NormFlavor::Plain).is_ok());
        assert!(sobolev_slobodecki_norm(0.25, &p, NormFlavor::ZeroTrace).is_ok());
    }

    #[test]
    fn coarse_grid_rejected_for_higher_orders() {
        let p = linear(12);
        assert!(matches!(
            sobolev_slobodecki_norm(2.5, &p, NormFlavor::Plain),
            Err(FracError::InsufficientResolution { .. })
        ));
    }
}
