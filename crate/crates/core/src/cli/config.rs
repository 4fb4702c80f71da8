//! Problem files: TOML with expression strings for the coefficient and data
//! fields. See `docs/config.md` for the full grammar.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::diagnostic::render;
use crate::fracops::TimeGrid;
use crate::galerkin::{CoefficientField, GalerkinError, ScalarField, SpectralProblem, MODE_CAP, STEP_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ExprValue {
    Text(String),
    Number(f64),
}

type Expr = Spanned<ExprValue>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    coefficients: RawCoefficients,
    #[serde(default)]
    data: RawData,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    verify: RawVerify,
    convergence: Option<RawConvergence>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    alpha: Spanned<f64>,
    #[serde(rename = "T")]
    t_max: Spanned<f64>,
    n_steps: Spanned<i64>,
    modes: Spanned<i64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficients {
    a: Expr,
    b: Option<Expr>,
    c: Option<Expr>,
    sigma0: Spanned<f64>,
    sigma1: Spanned<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    u0: Option<Expr>,
    u1: Option<Expr>,
    #[serde(rename = "F")]
    f: Option<Expr>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    x_nodes: Option<Spanned<i64>>,
    t_stride: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    tol_ineq: Option<Spanned<f64>>,
    coercivity_gammas: Option<Spanned<Vec<f64>>>,
    coercivity_cases: Option<Spanned<i64>>,
    coercivity_steps: Option<Spanned<i64>>,
    matrix_gamma: Option<Spanned<f64>>,
    gronwall_gamma: Option<Spanned<f64>>,
    battery_problems: Option<Spanned<i64>>,
    battery_alphas: Option<Spanned<Vec<f64>>>,
    battery_families: Option<Spanned<Vec<String>>>,
    battery_modes: Option<Spanned<i64>>,
    battery_steps: Option<Spanned<i64>>,
    uniformity_factor: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    ladder: Spanned<String>,
    levels: Spanned<Vec<i64>>,
    reference: Option<Spanned<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSection {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub n_steps: usize,
    pub modes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSection {
    pub a: String,
    pub b: String,
    pub c: String,
    pub sigma0: f64,
    pub sigma1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataSection {
    pub u0: String,
    pub u1: String,
    #[serde(rename = "F")]
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSection {
    pub x_nodes: usize,
    pub t_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub tol_ineq: f64,
    pub coercivity_gammas: Vec<f64>,
    pub coercivity_cases: u64,
    pub coercivity_steps: usize,
    pub matrix_gamma: f64,
    pub gronwall_gamma: f64,
    pub battery_problems: u64,
    pub battery_alphas: Vec<f64>,
    pub battery_families: Vec<String>,
    pub battery_modes: usize,
    pub battery_steps: usize,
    pub uniformity_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ladder {
    Time,
    Modes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Exact,
    Finest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceOptions {
    pub ladder: Ladder,
    pub levels: Vec<usize>,
    pub reference: Reference,
}

/// Parsed coefficient and data fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Fields {
    pub coefficients: CoefficientField,
    pub u0: ScalarField,
    pub u1: ScalarField,
    pub f: ScalarField,
}

/// A fully resolved problem file; serializes to the `config` entry of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    pub problem: ProblemSection,
    pub coefficients: CoefficientSection,
    pub data: DataSection,
    pub output: OutputSection,
    pub verify: VerifyOptions,
    pub convergence: Option<ConvergenceOptions>,
    #[serde(skip)]
    pub fields: Fields,
}

struct Ctx<'a> {
    path: &'a str,
    source: &'a str,
}

impl Ctx<'_> {
    fn error(&self, span: Option<Range<usize>>, message: impl AsRef<str>) -> ConfigError {
        ConfigError(render(self.path, self.source, span, message.as_ref()))
    }

    fn expr(&self, value: Option<&Expr>, key: &str) -> Result<(String, ScalarField, Option<Range<usize>>), ConfigError> {
        let Some(value) = value else {
            return Ok(("0".into(), ScalarField::zero(), None));
        };
        let span = value.span();
        match value.get_ref() {
            ExprValue::Number(v) => {
                if !v.is_finite() {
                    return Err(self.error(Some(span), format!("{key}: value must be finite")));
                }
                Ok((format!("{v}"), ScalarField::Constant(*v), Some(span)))
            }
            ExprValue::Text(text) => {
                let field = ScalarField::parse(text).map_err(|e| {
                    // map the expression span into the file when the string is written verbatim
                    let raw = &self.source[span.clone()];
                    let inner = raw.len() >= 2 && &raw[1..raw.len() - 1] == text.as_str();
                    let s = e.span();
                    let file_span = if inner {
                        span.start + 1 + s.start..span.start + 1 + s.end
                    } else {
                        span.clone()
                    };
                    self.error(Some(file_span), format!("{key}: {}", e.message()))
                })?;
                Ok((text.clone(), field, Some(span)))
            }
        }
    }
}

fn count(ctx: &Ctx, v: &Spanned<i64>, key: &str, min: i64, max: i64) -> Result<usize, ConfigError> {
    let x = *v.get_ref();
    if x < min || x > max {
        return Err(ctx.error(Some(v.span()), format!("{key} must lie in [{min}, {max}], got {x}")));
    }
    Ok(x as usize)
}

fn opt_count(ctx: &Ctx, v: &Option<Spanned<i64>>, key: &str, default: usize, min: i64, max: i64) -> Result<usize, ConfigError> {
    v.as_ref().map_or(Ok(default), |v| count(ctx, v, key, min, max))
}

fn in_range(
    ctx: &Ctx,
    v: &Spanned<f64>,
    key: &str,
    ok: impl Fn(f64) -> bool,
    what: &str,
) -> Result<f64, ConfigError> {
    let x = *v.get_ref();
    if !(x.is_finite() && ok(x)) {
        return Err(ctx.error(Some(v.span()), format!("{key} must be {what}, got {x}")));
    }
    Ok(x)
}

fn list(
    ctx: &Ctx,
    v: &Option<Spanned<Vec<f64>>>,
    key: &str,
    default: &[f64],
    ok: impl Fn(f64) -> bool,
    what: &str,
) -> Result<Vec<f64>, ConfigError> {
    let Some(v) = v else {
        return Ok(default.to_vec());
    };
    if v.get_ref().is_empty() || v.get_ref().iter().any(|x| !(x.is_finite() && ok(*x))) {
        return Err(ctx.error(Some(v.span()), format!("{key} must be a non-empty list of values {what}")));
    }
    Ok(v.get_ref().clone())
}

pub const DEFAULT_COERCIVITY_GAMMAS: [f64; 4] = [0.3, 0.5, 0.9, 1.0];

impl ProblemConfig {
    /// The Galerkin system of this problem on `n_steps` uniform steps with `modes` modes.
    pub fn spectral_problem(&self, n_steps: usize, modes: usize) -> Result<SpectralProblem, GalerkinError> {
        let grid = TimeGrid::new(self.problem.t_max, n_steps)?;
        let f = &self.fields;
        SpectralProblem::from_fields(self.problem.alpha, grid, modes, f.coefficients.clone(), &f.u0, &f.u1, &f.f)
    }

    /// Parses and validates a problem file; `path` only labels diagnostics.
    pub fn parse(path: &str, source: &str) -> Result<Self, ConfigError> {
        let ctx = Ctx { path, source };
        let raw: RawConfig = toml::from_str(source).map_err(|e| ctx.error(e.span(), e.message().trim_end()))?;

        let p = &raw.problem;
        let alpha = in_range(&ctx, &p.alpha, "alpha", |a| a > 1.0 && a <= 2.0, "in (1, 2]")?;
        let t_max = in_range(&ctx, &p.t_max, "T", |t| t > 0.0, "positive")?;
        let n_steps = count(&ctx, &p.n_steps, "n_steps", 2, STEP_CAP as i64)?;
        let modes = count(&ctx, &p.modes, "modes", 1, MODE_CAP as i64)?;

        let c = &raw.coefficients;
        let (a_src, a, a_span) = ctx.expr(Some(&c.a), "a")?;
        let (b_src, b, b_span) = ctx.expr(c.b.as_ref(), "b")?;
        let (c_src, c_field, c_span) = ctx.expr(c.c.as_ref(), "c")?;
        let sigma0 = in_range(&ctx, &c.sigma0, "sigma0", |s| s > 0.0, "positive")?;
        let sigma1 = in_range(&ctx, &c.sigma1, "sigma1", |s| s >= sigma0, "at least sigma0")?;
        let coefficients = CoefficientField {
            a,
            b,
            c: c_field,
            sigma0,
            sigma1,
        };
        coefficients.validate(t_max).map_err(|e| {
            let span = match &e {
                GalerkinError::Ellipticity { .. } => a_span.clone(),
                GalerkinError::Eval { field: "a", .. } => a_span.clone(),
                GalerkinError::Eval { field: "b", .. } => b_span.clone(),
                GalerkinError::Eval { field: "c", .. } => c_span.clone(),
                _ => None,
            };
            ctx.error(span, e.to_string())
        })?;

        let d = &raw.data;
        let (u0_src, u0, _) = ctx.expr(d.u0.as_ref(), "u0")?;
        let (u1_src, u1, _) = ctx.expr(d.u1.as_ref(), "u1")?;
        let (f_src, f, _) = ctx.expr(d.f.as_ref(), "F")?;

        let o = &raw.output;
        let output = OutputSection {
            x_nodes: opt_count(&ctx, &o.x_nodes, "x_nodes", 33, 2, 1 << 16)?,
            t_stride: opt_count(&ctx, &o.t_stride, "t_stride", 1, 1, i64::MAX)?,
        };

        let v = &raw.verify;
        let unit = |g: f64| g > 0.0 && g <= 1.0;
        let verify = VerifyOptions {
            tol_ineq: v
                .tol_ineq
                .as_ref()
                .map_or(Ok(crate::verify::TOL_INEQ), |t| in_range(&ctx, t, "tol_ineq", |x| x >= 0.0, "non-negative"))?,
            coercivity_gammas: list(&ctx, &v.coercivity_gammas, "coercivity_gammas", &DEFAULT_COERCIVITY_GAMMAS, unit, "in (0, 1]")?,
            coercivity_cases: opt_count(&ctx, &v.coercivity_cases, "coercivity_cases", 100, 0, 100_000)? as u64,
            coercivity_steps: opt_count(&ctx, &v.coercivity_steps, "coercivity_steps", 1024, 4, STEP_CAP as i64)?,
            matrix_gamma: v
                .matrix_gamma
                .as_ref()
                .map_or(Ok(0.5), |g| in_range(&ctx, g, "matrix_gamma", unit, "in (0, 1]"))?,
            gronwall_gamma: v
                .gronwall_gamma
                .as_ref()
                .map_or(Ok(if alpha < 2.0 { alpha - 1.0 } else { 1.0 }), |g| {
                    in_range(&ctx, g, "gronwall_gamma", unit, "in (0, 1]")
                })?,
            battery_problems: opt_count(&ctx, &v.battery_problems, "battery_problems", 20, 0, 10_000)? as u64,
            battery_alphas: list(&ctx, &v.battery_alphas, "battery_alphas", &[1.2, 1.5, 1.8], |a| a > 1.0 && a <= 2.0, "in (1, 2]")?,
            battery_families: match &v.battery_families {
                None => vec!["variable".into()],
                Some(f) => {
                    if f.get_ref().is_empty() || f.get_ref().iter().any(|s| s != "variable" && s != "laplacian") {
                        return Err(ctx.error(Some(f.span()), "battery_families entries must be \"variable\" or \"laplacian\""));
                    }
                    f.get_ref().clone()
                }
            },
            battery_modes: opt_count(&ctx, &v.battery_modes, "battery_modes", 8, 1, MODE_CAP as i64)?,
            battery_steps: opt_count(&ctx, &v.battery_steps, "battery_steps", 512, 2, STEP_CAP as i64)?,
            uniformity_factor: v
                .uniformity_factor
                .as_ref()
                .map_or(Ok(10.0), |u| in_range(&ctx, u, "uniformity_factor", |x| x >= 1.0, "at least 1"))?,
        };

        let convergence = raw.convergence.as_ref().map(|c| convergence(&ctx, c)).transpose()?;

        Ok(Self {
            problem: ProblemSection {
                alpha,
                t_max,
                n_steps,
                modes,
                seed: p.seed.unwrap_or(0),
            },
            coefficients: CoefficientSection {
                a: a_src,
                b: b_src,
                c: c_src,
                sigma0,
                sigma1,
            },
            data: DataSection {
                u0: u0_src,
                u1: u1_src,
                f: f_src,
            },
            output,
            verify,
            convergence,
            fields: Fields { coefficients, u0, u1, f },
        })
    }
}

fn convergence(ctx: &Ctx, c: &RawConvergence) -> Result<ConvergenceOptions, ConfigError> {
    let ladder = match c.ladder.get_ref().as_str() {
        "time" => Ladder::Time,
        "modes" => Ladder::Modes,
        other => return Err(ctx.error(Some(c.ladder.span()), format!("ladder must be \"time\" or \"modes\", got {other:?}"))),
    };
    let reference = match c.reference.as_ref().map(|r| (r.get_ref().as_str(), r.span())) {
        None | Some(("finest", _)) => Reference::Finest,
        Some(("exact", _)) => Reference::Exact,
        Some((other, span)) => {
            return Err(ctx.error(Some(span), format!("reference must be \"exact\" or \"finest\", got {other:?}")))
        }
    };
    let raw = c.levels.get_ref();
    let cap = match ladder {
        Ladder::Time => STEP_CAP,
        Ladder::Modes => MODE_CAP,
    } as i64;
    let minimum = match reference {
        Reference::Exact => 2,
        Reference::Finest => 3,
    };
    if raw.len() < minimum {
        return Err(ctx.error(
            Some(c.levels.span()),
            format!("a {reference:?} ladder needs at least {minimum} levels, got {}", raw.len()).to_lowercase(),
        ));
    }
    if raw.iter().any(|&l| l < 1 || l > cap) || raw.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ctx.error(Some(c.levels.span()), format!("levels must be strictly increasing integers in [1, {cap}]")));
    }
    let levels: Vec<usize> = raw.iter().map(|&l| l as usize).collect();
    if ladder == Ladder::Time && reference == Reference::Finest {
        let finest = *levels.last().unwrap_or(&1);
        if levels.iter().any(|l| finest % l != 0) {
            return Err(ctx.error(Some(c.levels.span()), "every time level must divide the finest level"));
        }
    }
    Ok(ConvergenceOptions {
        ladder,
        levels,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
alpha = 1.5
T = 1.0
n_steps = 64
modes = 2

[coefficients]
a = "1 + 0.5*sin(pi*x)*exp(-t)"
sigma0 = 1.0
sigma1 = 1.5
"#;

    #[test]
    fn defaults_are_filled() {
        let c = ProblemConfig::parse("m.toml", MINIMAL).unwrap();
        assert_eq!(c.coefficients.b, "0");
        assert_eq!(c.data.u0, "0");
        assert_eq!(c.output.x_nodes, 33);
        assert_eq!(c.verify.coercivity_gammas, DEFAULT_COERCIVITY_GAMMAS.to_vec());
        assert!((c.verify.gronwall_gamma - 0.5).abs() < 1e-15);
        assert!(c.convergence.is_none());
    }

    #[test]
    fn numeric_expressions_are_accepted() {
        let src = MINIMAL.replace("a = \"1 + 0.5*sin(pi*x)*exp(-t)\"", "a = 1.25");
        let c = ProblemConfig::parse("m.toml", &src).unwrap();
        assert_eq!(c.fields.coefficients.a, ScalarField::Constant(1.25));
    }

    #[test]
    fn expression_error_points_into_file() {
        let src = MINIMAL.replace("sin(pi*x)", "sin(pi*y)");
        let err = ProblemConfig::parse("m.toml", &src).unwrap_err().0;
        let line = src.lines().position(|l| l.starts_with("a =")).unwrap() + 1;
        assert!(err.contains(&format!("m.toml:{line}:")), "{err}");
        let caret = err.lines().last().unwrap();
        let text = err.lines().nth(3).unwrap();
        let col = caret.find('^').unwrap();
        assert_eq!(&text[col..col + 1], "y", "{err}");
    }

    #[test]
    fn validation_errors() {
        for (from, to, needle) in [
            ("alpha = 1.5", "alpha = 2.5", "alpha must be in (1, 2]"),
            ("n_steps = 64", "n_steps = 1", "n_steps must lie in"),
            ("sigma1 = 1.5", "sigma1 = 1.2", "ellipticity"),
            ("modes = 2", "modes = 2\nfoo = 1", "unknown field"),
        ] {
            let err = ProblemConfig::parse("m.toml", &MINIMAL.replace(from, to)).unwrap_err().0;
            assert!(err.contains(needle), "{needle}: {err}");
        }
    }

    #[test]
    fn single_level_ladder_is_rejected() {
        let src = format!("{MINIMAL}\n[convergence]\nladder = \"time\"\nlevels = [256]\n");
        assert!(ProblemConfig::parse("m.toml", &src).unwrap_err().0.contains("at least"));
        let ok = format!("{MINIMAL}\n[convergence]\nladder = \"time\"\nlevels = [64, 128, 256]\n");
        assert_eq!(ProblemConfig::parse("m.toml", &ok).unwrap().convergence.unwrap().levels, vec![64, 128, 256]);
    }
}
