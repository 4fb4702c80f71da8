use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{coarsen, is_stable, params, InequalityWitness, Orientation, VerifyError, TOL_INEQ};
use crate::fracops::sampling::{seeded_rng, BandLimited};
use crate::fracops::{caputo_derivative, frac_integral, FracOrder, SampledPath, TimeGrid, TOL_ZERO};
use crate::galerkin::{cos_pi, CoefficientField, CompositeRule};

fn check_gamma(gamma: f64) -> Result<(), VerifyError> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(VerifyError::InvalidArgument(format!("coercivity order must lie in (0, 1], got {gamma}")))
    }
}

fn check_zero_start(path: &SampledPath) -> Result<(), VerifyError> {
    let tol = TOL_ZERO * path.sup_norm();
    let value = path.at(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if value > tol {
        return Err(VerifyError::Trace { value, tol });
    }
    Ok(())
}

fn scalar(grid: TimeGrid, values: Vec<f64>) -> Result<SampledPath, VerifyError> {
    Ok(SampledPath::new(grid, 1, values)?)
}

/// `J^γ⟨∂_t^γ u, u⟩(t) ≥ ½|u(t)|²` at every node, for `u(0) = 0`.
pub fn check_coercivity_basic(gamma: f64, u: &SampledPath) -> Result<InequalityWitness, VerifyError> {
    check_coercivity_basic_with_tol(gamma, u, TOL_INEQ)
}

/// [`check_coercivity_basic`] with slack `tol_ineq · (1 + ‖u‖²_∞)`.
pub fn check_coercivity_basic_with_tol(gamma: f64, u: &SampledPath, tol_ineq: f64) -> Result<InequalityWitness, VerifyError> {
    check_gamma(gamma)?;
    check_zero_start(u)?;
    let grid = *u.grid();
    let d = caputo_derivative(FracOrder::derivative(gamma)?, u)?;
    let pairing: Vec<f64> = (0..grid.len())
        .map(|i| d.at(i).iter().zip(u.at(i)).map(|(a, b)| a * b).sum())
        .collect();
    let lhs = frac_integral(FracOrder::new(gamma)?, &scalar(grid, pairing)?)?.into_values();
    let rhs: Vec<f64> = u.pointwise_norms().iter().map(|n| 0.5 * n * n).collect();
    let scale = u.sup_norm().powi(2);
    Ok(InequalityWitness::build(
        "coercivity_basic",
        params(&[("gamma", gamma), ("n_steps", grid.n_steps() as f64)]),
        &grid,
        lhs,
        rhs,
        Orientation::Lower,
        tol_ineq * (1.0 + scale),
    ))
}

/// `M_{kl}(t) = ∫_0^1 a(x, t) ψ_k ψ_l dx` with `ψ_k = √2 cos(kπx)`, the
/// orthonormal basis in which `∂_x u_N` has coefficients `kπ p_k`.
pub fn gradient_mass_matrix(coeffs: &CoefficientField, modes: usize, t: f64) -> Result<DMatrix<f64>, VerifyError> {
    let rule = CompositeRule::for_modes(modes);
    let a: Vec<f64> = rule
        .points
        .iter()
        .map(|&x| coeffs.a.eval("a", x, t))
        .collect::<Result<_, _>>()?;
    let psi: Vec<Vec<f64>> = (1..=modes)
        .map(|k| rule.points.iter().map(|&x| std::f64::consts::SQRT_2 * cos_pi(k as f64 * x)).collect())
        .collect();
    let mut m = DMatrix::zeros(modes, modes);
    for k in 0..modes {
        for l in k..modes {
            let s: f64 = (0..rule.len()).map(|q| rule.weights[q] * a[q] * psi[k][q] * psi[l][q]).sum();
            m[(k, l)] = s;
            m[(l, k)] = s;
        }
    }
    Ok(m)
}

struct MatrixSides {
    lhs: Vec<f64>,
    base: Vec<f64>,
    accumulated: Vec<f64>,
}

fn matrix_sides(gamma: f64, coeffs: &CoefficientField, v: &SampledPath) -> Result<MatrixSides, VerifyError> {
    let grid = *v.grid();
    let modes = v.dim();
    let masses: Vec<DMatrix<f64>> = if coeffs.a.depends_on_t() {
        let times: Vec<f64> = grid.nodes().collect();
        times
            .par_iter()
            .map(|&t| gradient_mass_matrix(coeffs, modes, t))
            .collect::<Result<_, _>>()?
    } else {
        vec![gradient_mass_matrix(coeffs, modes, 0.0)?]
    };
    let d = caputo_derivative(FracOrder::derivative(gamma)?, v)?;
    let pairing: Vec<f64> = (0..grid.len())
        .map(|i| {
            let m = &masses[if masses.len() == 1 { 0 } else { i }];
            let (vi, di) = (v.at(i), d.at(i));
            (0..modes)
                .map(|k| vi[k] * (0..modes).map(|l| m[(k, l)] * di[l]).sum::<f64>())
                .sum()
        })
        .collect();
    let lhs = frac_integral(FracOrder::new(gamma)?, &scalar(grid, pairing)?)?.into_values();
    let sq: Vec<f64> = v.pointwise_norms().iter().map(|n| n * n).collect();
    let base = sq.iter().map(|s| 0.5 * coeffs.sigma0 * s).collect();
    let accumulated = frac_integral(FracOrder::new(1.0)?, &scalar(grid, sq)?)?.into_values();
    Ok(MatrixSides { lhs, base, accumulated })
}

/// Smallest `C ≥ 0` with `lhs ≥ base − C·accumulated − tol` at every node.
fn fit_constant(sides: &MatrixSides, tol: f64) -> f64 {
    let mut c = 0.0f64;
    for ((l, b), acc) in sides.lhs.iter().zip(&sides.base).zip(&sides.accumulated) {
        let deficit = b - l - tol;
        if deficit > 0.0 {
            c = c.max(if *acc > 0.0 { deficit / acc } else { f64::INFINITY });
        }
    }
    // round up so that the fitted inequality also holds in floating point
    c * (1.0 + 1e-12)
}

/// `J^γ[∫ a v ∂_s^γ v dx](t) ≥ (σ₀/2)‖v(t)‖² − C ∫_0^t ‖v‖² ds` in one space
/// dimension, with `v = ∂_x u_N` given by its coefficients in the cosine basis
/// of [`gradient_mass_matrix`].
///
/// `C` is fitted on the grid of `v` and on every other node of it; the witness
/// passes when the fit is finite and the two values agree within
/// [`STABILITY_BAND`](super::STABILITY_BAND).
pub fn check_coercivity_matrix(
    gamma: f64,
    coeffs: &CoefficientField,
    v: &SampledPath,
) -> Result<InequalityWitness, VerifyError> {
    check_coercivity_matrix_with_tol(gamma, coeffs, v, TOL_INEQ)
}

/// [`check_coercivity_matrix`] with slack `tol_ineq · (1 + ‖v‖²_∞)`.
pub fn check_coercivity_matrix_with_tol(
    gamma: f64,
    coeffs: &CoefficientField,
    v: &SampledPath,
    tol_ineq: f64,
) -> Result<InequalityWitness, VerifyError> {
    check_gamma(gamma)?;
    let grid = *v.grid();
    coeffs.validate(grid.t_max())?;
    check_zero_start(v)?;
    let tol = tol_ineq * (1.0 + v.sup_norm().powi(2));
    let coarse_path = coarsen(v)?;
    let fine = matrix_sides(gamma, coeffs, v)?;
    let coarse = matrix_sides(gamma, coeffs, &coarse_path)?;
    let c_fine = fit_constant(&fine, tol);
    let c_coarse = fit_constant(&coarse, tol);
    let rhs = fine
        .base
        .iter()
        .zip(&fine.accumulated)
        .map(|(b, acc)| if c_fine.is_finite() { b - c_fine * acc } else { *b })
        .collect();
    let fitted = [("C".to_string(), c_fine), ("C_coarse".to_string(), c_coarse)].into_iter().collect();
    Ok(InequalityWitness::build(
        "coercivity_matrix",
        params(&[
            ("gamma", gamma),
            ("sigma0", coeffs.sigma0),
            ("n_steps", grid.n_steps() as f64),
            ("modes", v.dim() as f64),
        ]),
        &grid,
        fine.lhs,
        rhs,
        Orientation::Lower,
        tol,
    )
    .with_fit(fitted, is_stable(c_coarse, c_fine)))
}

/// [`check_coercivity_basic`] on seeded band-limited paths with `u(0) = 0`,
/// ordered by `(gamma, seed)`.
pub fn coercivity_battery(gammas: &[f64], seeds: &[u64], n_steps: usize) -> Result<Vec<InequalityWitness>, VerifyError> {
    coercivity_battery_with_tol(gammas, seeds, n_steps, TOL_INEQ)
}

pub fn coercivity_battery_with_tol(
    gammas: &[f64],
    seeds: &[u64],
    n_steps: usize,
    tol_ineq: f64,
) -> Result<Vec<InequalityWitness>, VerifyError> {
    let grid = TimeGrid::new(1.0, n_steps)?;
    let cases: Vec<(f64, u64)> = gammas.iter().flat_map(|&g| seeds.iter().map(move |&s| (g, s))).collect();
    cases
        .par_iter()
        .map(|&(g, seed)| {
            let u = BandLimited::random(&mut seeded_rng(seed), 1.0, 6, true).sample(grid)?;
            let mut w = check_coercivity_basic_with_tol(g, &u, tol_ineq)?;
            w.params.insert("seed".into(), seed as f64);
            Ok(w)
        })
        .collect()
}
