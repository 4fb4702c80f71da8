use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{Ladder, ProblemConfig, Reference};
use super::output::{coeffs_csv, csv_bytes, field_csv, num, write_json, write_atomic};
use super::{CliError, CommonArgs, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::fracops::{mittag_leffler, SampledPath, TimeGrid};
use crate::galerkin::{eigenvalue, solve_ibvp, ScalarField, SolutionBundle, SpectralProblem};
use crate::verify::{
    check_coercivity_matrix_with_tol, check_strong_estimate, check_weak_estimate, coercivity_battery_with_tol,
    estimate_battery, fit_gronwall_constant, gronwall_certificate_with_tol, BatteryCase, BatteryConfig, EstimateBattery,
    EstimateEntry, EstimateKind, InequalityWitness, Verdict, VerifyError,
};

pub struct Context {
    pub config: ProblemConfig,
    pub config_path: String,
    pub out: PathBuf,
    pub threads: usize,
    started: Instant,
}

impl Context {
    pub fn load(args: &CommonArgs, threads: usize) -> Result<Self, CliError> {
        let started = Instant::now();
        let config_path = args.config.display().to_string();
        let source = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
            path: config_path.clone(),
            source,
        })?;
        let mut config = ProblemConfig::parse(&config_path, &source)?;
        if let Some(seed) = args.seed {
            config.problem.seed = seed;
        }
        std::fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
            path: args.out.display().to_string(),
            source,
        })?;
        Ok(Self {
            config,
            config_path,
            out: args.out.clone(),
            threads,
            started,
        })
    }

    fn grid(&self, n_steps: usize) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.config.problem.t_max, n_steps).map_err(|e| CliError::Config(format!("error: {e}")))
    }

    fn problem(&self, n_steps: usize, modes: usize) -> Result<SpectralProblem, CliError> {
        Ok(self.config.spectral_problem(n_steps, modes)?)
    }

    fn x_nodes(&self) -> Vec<f64> {
        let n = self.config.output.x_nodes;
        (0..n).map(|j| j as f64 / (n - 1) as f64).collect()
    }

    fn write_run(&self, command: &str) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Run<'a> {
            command: &'a str,
            version: &'a str,
            config_file: &'a str,
            config: &'a ProblemConfig,
        }
        write_json(
            &self.out,
            "run.json",
            &Run {
                command,
                version: env!("CARGO_PKG_VERSION"),
                config_file: &self.config_path,
                config: &self.config,
            },
        )?;
        Ok(())
    }

    fn write_timings(&self, phases: &[(&str, f64)]) -> Result<(), CliError> {
        let mut seconds: BTreeMap<&str, f64> = phases.iter().copied().collect();
        seconds.insert("total", self.started.elapsed().as_secs_f64());
        write_json(
            &self.out,
            "timings.json",
            &serde_json::json!({ "threads": self.threads, "seconds": seconds }),
        )?;
        Ok(())
    }

    fn solve_main(&self) -> Result<(SpectralProblem, SolutionBundle), CliError> {
        let c = &self.config;
        let problem = self.problem(c.problem.n_steps, c.problem.modes)?;
        let bundle = solve_ibvp(&problem, &self.x_nodes(), c.output.t_stride)?;
        Ok((problem, bundle))
    }
}

fn out_path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

pub fn solve(ctx: &Context) -> Result<i32, CliError> {
    let t0 = Instant::now();
    let (problem, bundle) = ctx.solve_main()?;
    let solve_time = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    write_atomic(&ctx.out, "field.csv", &field_csv(&bundle.field))?;
    write_atomic(&ctx.out, "coeffs.csv", &coeffs_csv(&bundle.p.u))?;
    write_json(
        &ctx.out,
        "norms.json",
        &serde_json::json!({
            "norms": bundle.norms,
            "q_norm": bundle.q_norm,
            "residual": bundle.p.residual,
            "a0_h1_truncation": problem.a0_h1_truncation(),
        }),
    )?;
    ctx.write_run("solve")?;
    ctx.write_timings(&[("solve", solve_time), ("write", t1.elapsed().as_secs_f64())])?;
    println!(
        "solved: alpha={} modes={} n_steps={}  sup ||u||_H1 = {}  residual = {:e}",
        ctx.config.problem.alpha,
        problem.modes(),
        problem.grid().n_steps(),
        bundle.norms.h1_sup,
        bundle.p.residual
    );
    println!("wrote {}", out_path(&ctx.out, "field.csv"));
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    check: String,
    verdict: Verdict,
    detail: String,
}

#[derive(Serialize)]
struct EstimateReport {
    verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    entry: Option<EstimateEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

#[derive(Serialize)]
struct BatteryReport {
    verdict: Verdict,
    uniformity_factor: f64,
    battery: EstimateBattery,
}

#[derive(Serialize)]
struct WitnessFile {
    rows: Vec<Row>,
    coercivity_basic: Vec<InequalityWitness>,
    coercivity_matrix: InequalityWitness,
    gronwall: InequalityWitness,
    estimates: BTreeMap<&'static str, EstimateReport>,
    batteries: BTreeMap<&'static str, BatteryReport>,
}

/// Checkpoints kept per witness in `witnesses.json`.
const WITNESS_CHECKPOINTS: usize = 16;

fn thin(w: InequalityWitness) -> InequalityWitness {
    let stride = (w.t.len() / WITNESS_CHECKPOINTS).max(1);
    w.thinned(stride)
}

fn verdict(passed: bool) -> Verdict {
    if passed {
        Verdict::Passed
    } else {
        Verdict::Failed
    }
}

fn estimate_report(result: Result<EstimateEntry, VerifyError>) -> Result<EstimateReport, CliError> {
    match result {
        Ok(entry) => Ok(EstimateReport {
            verdict: verdict(entry.ratio.is_finite()),
            entry: Some(entry),
            reason: None,
        }),
        Err(e @ VerifyError::Incompatible { .. }) => Ok(EstimateReport {
            verdict: Verdict::NotApplicable,
            entry: None,
            reason: Some(e.to_string()),
        }),
        Err(VerifyError::EstimateViolation { lhs }) => Ok(EstimateReport {
            verdict: Verdict::Failed,
            entry: None,
            reason: Some(format!("zero data produced a non-zero solution (lhs = {lhs:e})")),
        }),
        Err(e) => Err(e.into()),
    }
}

fn gradient_data(problem: &SpectralProblem, grid: TimeGrid) -> Result<SampledPath, CliError> {
    let modes = problem.modes();
    let mut g: Vec<f64> = problem
        .a0()
        .iter()
        .enumerate()
        .map(|(k, a)| eigenvalue(k + 1).sqrt() * a)
        .collect();
    if g.iter().all(|v| *v == 0.0) {
        g[0] = 1.0;
    }
    SampledPath::from_fn_vec(grid, modes, |t, out| {
        for k in 0..modes {
            out[k] = t * g[k];
        }
    })
    .map_err(|e| CliError::Precondition(e.to_string()))
}

pub fn verify(ctx: &Context) -> Result<i32, CliError> {
    let c = &ctx.config;
    let v = &c.verify;
    let seed = c.problem.seed;
    let mut rows = Vec::new();
    let t0 = Instant::now();

    let seeds: Vec<u64> = (0..v.coercivity_cases).map(|i| seed + i).collect();
    let basic = coercivity_battery_with_tol(&v.coercivity_gammas, &seeds, v.coercivity_steps, v.tol_ineq)?;
    for &g in &v.coercivity_gammas {
        let group: Vec<&InequalityWitness> = basic.iter().filter(|w| w.params["gamma"] == g).collect();
        let failed = group.iter().filter(|w| !w.passed).count();
        let worst = group.iter().map(|w| w.margin).fold(f64::INFINITY, f64::min);
        rows.push(Row {
            check: format!("coercivity_basic gamma={g}"),
            verdict: verdict(failed == 0),
            detail: format!("{} cases, {failed} failed, min margin {worst:e}", group.len()),
        });
    }

    let (problem, bundle) = ctx.solve_main()?;

    let steps = v.coercivity_steps + v.coercivity_steps % 2;
    let matrix = check_coercivity_matrix_with_tol(
        v.matrix_gamma,
        &c.fields.coefficients,
        &gradient_data(&problem, ctx.grid(steps)?)?,
        v.tol_ineq,
    )?;
    rows.push(Row {
        check: format!("coercivity_matrix gamma={}", v.matrix_gamma),
        verdict: matrix.verdict,
        detail: format!("C = {}, C(n/2) = {}, margin {:e}", matrix.fitted["C"], matrix.fitted["C_coarse"], matrix.margin),
    });

    let w = SampledPath::new(*problem.grid(), 1, bundle.series.h1.clone()).map_err(|e| CliError::Precondition(e.to_string()))?;
    let a = w.values()[0].max(1e-3 * w.sup_norm());
    let fitted = fit_gronwall_constant(&w, a, v.gronwall_gamma)?;
    let gronwall = gronwall_certificate_with_tol(&w, a, if fitted.is_finite() { fitted } else { 0.0 }, v.gronwall_gamma, v.tol_ineq)?;
    rows.push(Row {
        check: format!("gronwall gamma={}", v.gronwall_gamma),
        verdict: gronwall.verdict,
        detail: format!("w = ||u_N||_H1, a = {a}, fitted C = {fitted}, margin {:e}", gronwall.margin),
    });

    let mut estimates = BTreeMap::new();
    for (name, result) in [
        ("weak", check_weak_estimate(&bundle, &problem)),
        ("strong", check_strong_estimate(&bundle, &problem)),
    ] {
        let report = estimate_report(result)?;
        rows.push(Row {
            check: format!("estimate_{name} (config problem)"),
            verdict: report.verdict,
            detail: match (&report.entry, &report.reason) {
                (Some(e), _) => format!("lhs/rhs = {}", e.ratio),
                (None, Some(r)) => r.clone(),
                (None, None) => String::new(),
            },
        });
        estimates.insert(name, report);
    }

    let mut batteries = BTreeMap::new();
    if v.battery_problems > 0 {
        for (name, kind) in [("weak", EstimateKind::Weak), ("strong", EstimateKind::Strong)] {
            let config = BatteryConfig {
                kind,
                cases: (0..v.battery_problems)
                    .map(|i| BatteryCase {
                        seed: seed + i,
                        alpha: v.battery_alphas[i as usize % v.battery_alphas.len()],
                        family: v.battery_families[i as usize % v.battery_families.len()].clone(),
                    })
                    .collect(),
                modes: v.battery_modes,
                n_steps: v.battery_steps,
                t_max: c.problem.t_max,
            };
            let battery = estimate_battery(&config)?;
            let s = battery.summary;
            let passed = s.max <= v.uniformity_factor * s.median;
            rows.push(Row {
                check: format!("battery_{name} ({} problems)", battery.ratios.len()),
                verdict: verdict(passed),
                detail: format!("median {} max {} (limit {}x median)", s.median, s.max, v.uniformity_factor),
            });
            batteries.insert(
                name,
                BatteryReport {
                    verdict: verdict(passed),
                    uniformity_factor: v.uniformity_factor,
                    battery,
                },
            );
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();

    let file = WitnessFile {
        rows: rows.clone(),
        coercivity_basic: basic.into_iter().map(thin).collect(),
        coercivity_matrix: thin(matrix),
        gronwall: thin(gronwall),
        estimates,
        batteries,
    };
    write_json(&ctx.out, "witnesses.json", &file)?;
    ctx.write_run("verify")?;
    ctx.write_timings(&[("verify", elapsed)])?;

    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(0);
    for r in &rows {
        let label = match r.verdict {
            Verdict::Passed => "PASS",
            Verdict::Failed => "FAIL",
            Verdict::NotApplicable => "N/A ",
        };
        println!("{:<width$}  {label}  {}", r.check, r.detail);
    }
    let failed = rows.iter().filter(|r| r.verdict == Verdict::Failed).count();
    let skipped = rows.iter().filter(|r| r.verdict == Verdict::NotApplicable).count();
    if skipped > 0 {
        eprintln!("warning: {skipped} check(s) not applicable: hypotheses not met by the data");
    }
    println!("{} checks, {failed} failed, {skipped} not applicable", rows.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Modal solution for constant coefficients `a`, `c` with `b = 0`, `F = 0`.
fn exact_modes(problem: &SpectralProblem, a: f64, c: f64, t: f64) -> Result<Vec<f64>, CliError> {
    let alpha = problem.alpha().value();
    (0..problem.modes())
        .map(|k| {
            let z = -(a * eigenvalue(k + 1) + c) * t.powf(alpha);
            let e1 = mittag_leffler(alpha, 1.0, z);
            let e2 = mittag_leffler(alpha, 2.0, z);
            match (e1, e2) {
                (Ok(e1), Ok(e2)) => Ok(problem.a0()[k] * e1 + problem.a1()[k] * t * e2),
                (Err(e), _) | (_, Err(e)) => Err(CliError::Config(format!("error: exact reference unavailable: {e}"))),
            }
        })
        .collect()
}

fn constant_coefficients(ctx: &Context) -> Result<(f64, f64), CliError> {
    let f = &ctx.config.fields;
    match (&f.coefficients.a, &f.coefficients.c) {
        (ScalarField::Constant(a), ScalarField::Constant(c)) if f.coefficients.b.is_zero() && f.f.is_zero() => Ok((*a, *c)),
        _ => Err(CliError::Config(
            "error: the exact reference needs constant a and c, b = 0 and F = 0".into(),
        )),
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    (0..n).map(|k| (at(a, k) - at(b, k)).powi(2)).sum::<f64>().sqrt()
}

pub fn convergence(ctx: &Context) -> Result<i32, CliError> {
    let c = &ctx.config;
    let Some(opts) = &c.convergence else {
        return Err(CliError::Config(format!(
            "error: {} has no [convergence] section",
            ctx.config_path
        )));
    };
    let t0 = Instant::now();
    if opts.ladder == Ladder::Modes && opts.reference == Reference::Exact {
        return Err(CliError::Config("error: a modes ladder compares against the finest level only".into()));
    }
    let solve_level = |level: usize| -> Result<(SpectralProblem, SampledPath), CliError> {
        let (n, modes) = match opts.ladder {
            Ladder::Time => (level, c.problem.modes),
            Ladder::Modes => (c.problem.n_steps, level),
        };
        let problem = ctx.problem(n, modes)?;
        let u = solve_ibvp(&problem, &[], usize::MAX)?.p.u;
        Ok((problem, u))
    };
    let solutions = opts
        .levels
        .iter()
        .map(|&l| solve_level(l))
        .collect::<Result<Vec<_>, _>>()?;

    let mut errors = Vec::new();
    match opts.reference {
        Reference::Exact => {
            let (a, cc) = constant_coefficients(ctx)?;
            for (problem, u) in &solutions {
                let mut worst = 0.0f64;
                for (i, t) in u.grid().nodes().enumerate() {
                    worst = worst.max(sup_distance(u.at(i), &exact_modes(problem, a, cc, t)?));
                }
                errors.push(worst);
            }
        }
        Reference::Finest => {
            let (_, reference) = solutions.last().expect("at least three levels");
            for (_, u) in &solutions[..solutions.len() - 1] {
                let stride = reference.grid().n_steps() / u.grid().n_steps();
                let worst = (0..u.grid().len())
                    .map(|i| sup_distance(u.at(i), reference.at(i * stride)))
                    .fold(0.0f64, f64::max);
                errors.push(worst);
            }
        }
    }

    let levels = &opts.levels[..errors.len()];
    let mut rows = Vec::new();
    for (i, (&l, &e)) in levels.iter().zip(&errors).enumerate() {
        let (order, monotone) = if i == 0 {
            (String::new(), true)
        } else {
            let o = (errors[i - 1] / e).ln() / (l as f64 / levels[i - 1] as f64).ln();
            (num(o), e < errors[i - 1])
        };
        rows.push(vec![l.to_string(), num(e), order, monotone.to_string()]);
    }
    let header = ["level", "error", "order", "monotone"].map(String::from);
    write_atomic(&ctx.out, "convergence.csv", &csv_bytes(&header, rows.clone()))?;
    ctx.write_run("convergence")?;
    ctx.write_timings(&[("convergence", t0.elapsed().as_secs_f64())])?;

    let fitted = fitted_order(levels, &errors);
    println!("{:>8}  {:>24}  {:>20}  monotone", "level", "error", "order");
    for r in &rows {
        println!("{:>8}  {:>24}  {:>20}  {}", r[0], r[1], r[2], r[3]);
    }
    println!("fitted order: {}", fitted.map_or("n/a".to_string(), num));
    if rows.iter().any(|r| r[3] == "false") {
        eprintln!("warning: non-monotone errors in the ladder");
    }
    Ok(EXIT_OK)
}

/// Least-squares slope of `−log e` against `log level` over positive errors.
pub(crate) fn fitted_order(levels: &[usize], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(l, e)| ((*l as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Some(-num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_order_of_power_law() {
        let levels = [64, 128, 256];
        let errors: Vec<f64> = levels.iter().map(|&l| 3.0 * (l as f64).powi(-2)).collect();
        assert!((fitted_order(&levels, &errors).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fitted_order(&[1], &[1.0]), None);
    }

    #[test]
    fn distance_pads_missing_modes() {
        assert_eq!(sup_distance(&[3.0], &[3.0, 4.0]), 4.0);
    }
}
