use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{trapezoid_sq, VerifyError, TOL_COMPAT};
use crate::fracode::FodeError;
use crate::fracops::sampling::{seeded_rng, BandLimited};
use crate::fracops::{time_derivative, SampledPath, TimeGrid};
use crate::galerkin::{
    eigenvalue, solve_ibvp, Assembler, CoefficientField, GalerkinError, ScalarField, SolutionBundle, SpectralProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// `‖u‖_{L^∞H¹₀} + ‖u‖_{H¹L²} + ‖u − a₀ − ta₁‖_{H_α H^{-1}} ≲ ‖a₀‖_{H¹₀} + ‖a₁‖_{L²} + ‖F‖_{L²L²}`.
    Weak,
    /// `‖∂_t^α(u − a₀ − ta₁)‖_{L^∞L²} + ‖u‖_{H¹H¹₀} + ‖u‖_{L^∞H²} ≲ ‖a₀‖_{H²} + ‖a₁‖_{H¹₀} + ‖F‖_{H¹L²}`.
    Strong,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateEntry {
    pub kind: EstimateKind,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub lhs_terms: BTreeMap<String, f64>,
    pub rhs_terms: BTreeMap<String, f64>,
}

fn spectral_norm(c: &[f64], power: i32) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, v)| eigenvalue(k + 1).powi(power) * v * v)
        .sum::<f64>()
        .sqrt()
}

fn weighted_series(p: &SampledPath, power: i32) -> Vec<f64> {
    p.values().chunks_exact(p.dim()).map(|c| spectral_norm(c, power)).collect()
}

fn check_pair(bundle: &SolutionBundle, data: &SpectralProblem) -> Result<(), VerifyError> {
    let u = &bundle.p.u;
    if u.dim() != data.modes() || u.grid() != data.grid() {
        return Err(VerifyError::InvalidArgument(format!(
            "bundle ({} modes, {} steps) does not match the problem ({} modes, {} steps)",
            u.dim(),
            u.grid().n_steps(),
            data.modes(),
            data.grid().n_steps()
        )));
    }
    Ok(())
}

fn entry(
    kind: EstimateKind,
    lhs_terms: [(&str, f64); 3],
    rhs_terms: [(&str, f64); 3],
) -> Result<EstimateEntry, VerifyError> {
    let lhs: f64 = lhs_terms.iter().map(|(_, v)| v).sum();
    let rhs: f64 = rhs_terms.iter().map(|(_, v)| v).sum();
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= 1e-12 {
        0.0
    } else {
        return Err(VerifyError::EstimateViolation { lhs });
    };
    let collect = |terms: [(&str, f64); 3]| terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Ok(EstimateEntry {
        kind,
        lhs,
        rhs,
        ratio,
        lhs_terms: collect(lhs_terms),
        rhs_terms: collect(rhs_terms),
    })
}

/// Ratio of the two sides of the weak-solution estimate for a computed bundle.
pub fn check_weak_estimate(bundle: &SolutionBundle, data: &SpectralProblem) -> Result<EstimateEntry, VerifyError> {
    check_pair(bundle, data)?;
    let h = data.grid().step();
    let n = &bundle.norms;
    let u_h1_l2 = (trapezoid_sq(h, &bundle.series.l2) + n.dt_l2 * n.dt_l2).sqrt();
    entry(
        EstimateKind::Weak,
        [
            ("u_linf_h1", n.h1_sup),
            ("u_h1_l2", u_h1_l2),
            ("v_halpha_hminus1", n.h_alpha_hminus1),
        ],
        [
            ("a0_h1", spectral_norm(data.a0(), 1)),
            ("a1_l2", spectral_norm(data.a1(), 0)),
            ("f_l2_l2", trapezoid_sq(h, &data.f().pointwise_norms()).sqrt()),
        ],
    )
}

/// `max_k |f_k(0) − (A(0)a₀, φ_k)|` with its mode (1-based) and tolerance
/// `TOL_COMPAT · (1 + ‖f(0)‖_∞ + ‖A(0)a₀‖_∞)`.
pub fn compatibility_defect(data: &SpectralProblem) -> Result<(usize, f64, f64), VerifyError> {
    let q = Assembler::new(data.modes()).assemble_q(data.coefficients(), 0.0)?;
    let a0 = nalgebra::DVector::from_column_slice(data.a0());
    // Q = −A on the subspace
    let qa = &q * a0;
    let f0 = data.f().at(0);
    let mut worst = (1, 0.0f64);
    for k in 0..data.modes() {
        let d = (f0[k] + qa[k]).abs();
        if d > worst.1 {
            worst = (k + 1, d);
        }
    }
    let scale = f0.iter().fold(0.0f64, |m, v| m.max(v.abs())) + qa.amax();
    Ok((worst.0, worst.1, TOL_COMPAT * (1.0 + scale)))
}

/// Ratio of the two sides of the strong-solution estimate; the data must
/// satisfy `F(·, 0) = A(0)a₀` on the Galerkin subspace.
pub fn check_strong_estimate(bundle: &SolutionBundle, data: &SpectralProblem) -> Result<EstimateEntry, VerifyError> {
    check_pair(bundle, data)?;
    let (mode, defect, tol) = compatibility_defect(data)?;
    if defect > tol {
        return Err(VerifyError::Incompatible { mode, defect, tol });
    }
    let h = data.grid().step();
    let n = &bundle.norms;
    let u = &bundle.p.u;
    let u_h1_h1 = (trapezoid_sq(h, &bundle.series.h1) + trapezoid_sq(h, &weighted_series(&time_derivative(u), 1))).sqrt();
    let f = data.f();
    let f_h1_l2 = (trapezoid_sq(h, &f.pointwise_norms()) + trapezoid_sq(h, &time_derivative(f).pointwise_norms())).sqrt();
    entry(
        EstimateKind::Strong,
        [
            ("v_caputo_linf_l2", n.caputo_sup),
            ("u_h1_h1", u_h1_h1),
            ("u_linf_h2", n.h2_sup),
        ],
        [
            ("a0_h2", spectral_norm(data.a0(), 2)),
            ("a1_h1", spectral_norm(data.a1(), 1)),
            ("f_h1_l2", f_h1_l2),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemDescriptor {
    pub seed: u64,
    pub alpha: f64,
    pub family: String,
    pub modes: usize,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatterySummary {
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateBattery {
    pub kind: EstimateKind,
    pub problems: Vec<ProblemDescriptor>,
    pub ratios: Vec<f64>,
    pub summary: BatterySummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryCase {
    pub seed: u64,
    pub alpha: f64,
    /// Coefficient family: `"laplacian"` or `"variable"`.
    pub family: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub kind: EstimateKind,
    pub cases: Vec<BatteryCase>,
    pub modes: usize,
    pub n_steps: usize,
    pub t_max: f64,
}

impl BatteryConfig {
    /// Seeds `0..count` with `α` and family cycling through the given lists.
    pub fn cycled(kind: EstimateKind, count: u64, alphas: &[f64], families: &[&str], modes: usize, n_steps: usize) -> Self {
        let cases = (0..count)
            .map(|seed| BatteryCase {
                seed,
                alpha: alphas[seed as usize % alphas.len()],
                family: families[seed as usize % families.len()].to_string(),
            })
            .collect();
        Self {
            kind,
            cases,
            modes,
            n_steps,
            t_max: 1.0,
        }
    }
}

fn coefficient_family(family: &str, rng: &mut impl Rng) -> Result<CoefficientField, VerifyError> {
    match family {
        "laplacian" => Ok(CoefficientField::laplacian()),
        "variable" => {
            let amp = rng.gen_range(0.1..0.4);
            let phase = rng.gen_range(0.0..1.0);
            let drift = rng.gen_range(-0.5..0.5);
            let react = rng.gen_range(0.0..1.0);
            let field = |s: String| ScalarField::parse(&s).map_err(|e| VerifyError::InvalidArgument(e.to_string()));
            Ok(CoefficientField {
                a: field(format!("1 + {amp:.6}*sin(2*pi*(x + {phase:.6}))*exp(-t)"))?,
                b: field(format!("{drift:.6}*cos(pi*x)"))?,
                c: field(format!("{react:.6}*(1 + t)"))?,
                sigma0: 0.5,
                sigma1: 1.5,
            })
        }
        other => Err(VerifyError::InvalidArgument(format!("unknown coefficient family {other:?}"))),
    }
}

/// Seeded smooth modal data; for [`EstimateKind::Strong`] the forcing is
/// shifted so that `f(0) = −Q(0)a₀`.
pub fn random_problem(
    seed: u64,
    alpha: f64,
    family: &str,
    modes: usize,
    grid: TimeGrid,
    kind: EstimateKind,
) -> Result<SpectralProblem, VerifyError> {
    let mut rng = seeded_rng(seed);
    let coeffs = coefficient_family(family, &mut rng)?;
    let mut draw = |p: i32| -> Vec<f64> { (1..=modes).map(|k| rng.gen_range(-1.0..1.0) / (k as f64).powi(p)).collect() };
    let a0 = draw(3);
    let a1 = draw(2);
    let profiles: Vec<BandLimited> = (0..modes)
        .map(|_| BandLimited::random(&mut rng, grid.t_max(), 4, false))
        .collect();
    let (start, offset) = match kind {
        EstimateKind::Weak => (vec![0.0; modes], vec![0.0; modes]),
        EstimateKind::Strong => {
            let q = Assembler::new(modes).assemble_q(&coeffs, 0.0)?;
            let qa = q * nalgebra::DVector::from_column_slice(&a0);
            (profiles.iter().map(|p| p.eval(0.0)).collect(), qa.iter().copied().collect())
        }
    };
    let f = SampledPath::from_fn_vec(grid, modes, |t, out| {
        for k in 0..modes {
            out[k] = (profiles[k].eval(t) - start[k]) / ((k + 1) as f64).powi(2) - offset[k];
        }
    })?;
    Ok(SpectralProblem::from_coefficients(alpha, coeffs, a0, a1, f)?)
}

/// Solves, refining the grid once when the step is too coarse for the
/// implicit scheme.
fn solve_refining(
    seed: u64,
    alpha: f64,
    family: &str,
    config: &BatteryConfig,
) -> Result<(SpectralProblem, SolutionBundle), VerifyError> {
    let mut grid = TimeGrid::new(config.t_max, config.n_steps)?;
    loop {
        let problem = random_problem(seed, alpha, family, config.modes, grid, config.kind)?;
        match solve_ibvp(&problem, &[], usize::MAX) {
            Ok(bundle) => return Ok((problem, bundle)),
            Err(GalerkinError::Fode(FodeError::RefineGrid { required, found })) if required > found => {
                grid = TimeGrid::new(config.t_max, required.next_multiple_of(64))?;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Runs the estimate check on every case in parallel; results are ordered by seed.
pub fn estimate_battery(config: &BatteryConfig) -> Result<EstimateBattery, VerifyError> {
    let mut cases = config.cases.clone();
    cases.sort_by_key(|c| c.seed);
    let results: Vec<(ProblemDescriptor, f64)> = cases
        .par_iter()
        .map(|case| {
            let (problem, bundle) = solve_refining(case.seed, case.alpha, &case.family, config)?;
            let e = match config.kind {
                EstimateKind::Weak => check_weak_estimate(&bundle, &problem)?,
                EstimateKind::Strong => check_strong_estimate(&bundle, &problem)?,
            };
            let descriptor = ProblemDescriptor {
                seed: case.seed,
                alpha: case.alpha,
                family: case.family.clone(),
                modes: config.modes,
                n_steps: problem.grid().n_steps(),
            };
            Ok((descriptor, e.ratio))
        })
        .collect::<Result<_, VerifyError>>()?;
    let (problems, ratios): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(VerifyError::InvalidArgument(format!("non-finite or negative ratio {r}")));
    }
    Ok(EstimateBattery {
        kind: config.kind,
        problems,
        summary: summarize(&ratios),
        ratios,
    })
}

fn summarize(ratios: &[f64]) -> BatterySummary {
    if ratios.is_empty() {
        return BatterySummary { median: 0.0, max: 0.0 };
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    BatterySummary {
        median,
        max: sorted[m - 1],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaLimitStudy {
    pub alphas: Vec<f64>,
    /// Max-norm distance to the `α = 2` field on the output lattice.
    pub distances: Vec<f64>,
    pub monotone: bool,
}

/// Solves the same data for each `α` and for `α = 2` and reports the
/// lattice max-norm distances.
pub fn alpha_limit_study(
    template: &SpectralProblem,
    alphas: &[f64],
    x_nodes: &[f64],
    t_stride: usize,
) -> Result<AlphaLimitStudy, VerifyError> {
    let solve = |alpha: f64| -> Result<Vec<f64>, VerifyError> {
        let p = SpectralProblem::from_coefficients(
            alpha,
            template.coefficients().clone(),
            template.a0().to_vec(),
            template.a1().to_vec(),
            template.f().clone(),
        )?;
        Ok(solve_ibvp(&p, x_nodes, t_stride)?.field.values)
    };
    let wave = solve(2.0)?;
    let distances = alphas
        .par_iter()
        .map(|&a| {
            let field = solve(a)?;
            Ok(field.iter().zip(&wave).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
        })
        .collect::<Result<Vec<f64>, VerifyError>>()?;
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    Ok(AlphaLimitStudy {
        alphas: alphas.to_vec(),
        distances,
        monotone,
    })
}
