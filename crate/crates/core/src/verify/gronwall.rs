use super::{params, InequalityWitness, Orientation, Verdict, VerifyError, TOL_INEQ};
use crate::fracops::gamma::gamma as gamma_fn;
use crate::fracops::{frac_integral, mittag_leffler1, FracOrder, SampledPath};

fn check_inputs(w: &SampledPath, a: f64, c: f64, gamma: f64) -> Result<(), VerifyError> {
    if w.dim() != 1 {
        return Err(VerifyError::InvalidArgument(format!("Grönwall path must be scalar, got dim {}", w.dim())));
    }
    if let Some(v) = w.values().iter().find(|v| **v < 0.0) {
        return Err(VerifyError::InvalidArgument(format!("Grönwall path must be non-negative, found {v}")));
    }
    if !(a >= 0.0 && a.is_finite() && c >= 0.0 && c.is_finite()) {
        return Err(VerifyError::InvalidArgument(format!("need finite a, C >= 0, got a={a}, C={c}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(VerifyError::InvalidArgument(format!("Grönwall order must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

/// `∫_0^t (t−s)^{γ−1} w(s) ds = Γ(γ) J^γ w(t)` at every node.
fn kernel_integral(w: &SampledPath, gamma: f64) -> Result<Vec<f64>, VerifyError> {
    let g = gamma_fn(gamma);
    Ok(frac_integral(FracOrder::new(gamma)?, w)?.values().iter().map(|v| g * v).collect())
}

/// Generalized Grönwall bound: if `w(t) ≤ a + C ∫_0^t (t−s)^{γ−1} w(s) ds` at
/// every node, then `w(t) ≤ a E_γ(C Γ(γ) t^γ)`.
///
/// The hypothesis is checked first; when it fails the returned witness
/// describes the hypothesis and carries [`Verdict::NotApplicable`].
pub fn gronwall_certificate(w: &SampledPath, a: f64, c: f64, gamma: f64) -> Result<InequalityWitness, VerifyError> {
    gronwall_certificate_with_tol(w, a, c, gamma, TOL_INEQ)
}

/// [`gronwall_certificate`] with slack `tol_ineq · (1 + max(a, ‖w‖_∞))`.
pub fn gronwall_certificate_with_tol(
    w: &SampledPath,
    a: f64,
    c: f64,
    gamma: f64,
    tol_ineq: f64,
) -> Result<InequalityWitness, VerifyError> {
    check_inputs(w, a, c, gamma)?;
    let grid = *w.grid();
    let scale = a.max(w.sup_norm());
    let tol = tol_ineq * (1.0 + scale);
    let p = params(&[("a", a), ("C", c), ("gamma", gamma), ("n_steps", grid.n_steps() as f64)]);
    let kernel = kernel_integral(w, gamma)?;
    let hypothesis_rhs: Vec<f64> = kernel.iter().map(|k| a + c * k).collect();
    let hypothesis = InequalityWitness::build(
        "gronwall_hypothesis",
        p.clone(),
        &grid,
        w.values().to_vec(),
        hypothesis_rhs,
        Orientation::Upper,
        tol,
    );
    if !hypothesis.passed {
        return Ok(InequalityWitness {
            passed: false,
            verdict: Verdict::NotApplicable,
            ..hypothesis
        });
    }
    let g = gamma_fn(gamma);
    let bound = grid
        .nodes()
        .map(|t| bound_at(a, c * g * t.powf(gamma), gamma))
        .collect::<Result<Vec<f64>, VerifyError>>()?;
    Ok(InequalityWitness::build(
        "gronwall_conclusion",
        p,
        &grid,
        w.values().to_vec(),
        bound,
        Orientation::Upper,
        tol,
    ))
}

/// `a E_γ(z)` for `z ≥ 0`. Past the supported range of the Mittag-Leffler
/// evaluation the leading exponential term `(1/γ) exp(z^{1/γ})` is used; its
/// relative error there is far below the inequality slack.
fn bound_at(a: f64, z: f64, gamma: f64) -> Result<f64, VerifyError> {
    if a == 0.0 {
        return Ok(0.0);
    }
    match mittag_leffler1(gamma, z) {
        Ok(e) => Ok(a * e),
        Err(_) if z > 0.0 => Ok(a * (z.powf(1.0 / gamma)).exp() / gamma),
        Err(e) => Err(e.into()),
    }
}

/// Smallest `C ≥ 0` with `w ≤ a + C ∫_0^t (t−s)^{γ−1} w ds` at every node, or
/// `+∞` when no such constant exists.
pub fn fit_gronwall_constant(w: &SampledPath, a: f64, gamma: f64) -> Result<f64, VerifyError> {
    check_inputs(w, a, 0.0, gamma)?;
    let kernel = kernel_integral(w, gamma)?;
    let mut c = 0.0f64;
    for (wi, k) in w.values().iter().zip(&kernel) {
        let deficit = wi - a;
        if deficit > 0.0 {
            c = c.max(if *k > 0.0 { deficit / k } else { f64::INFINITY });
        }
    }
    Ok(c)
}
