//! Galerkin layer: decoupling, spectral convergence, boundary and Parseval checks.

use fracwave::fracode::{solve_fode, FodeProblem};
use fracwave::fracops::{SampledPath, TimeGrid};
use fracwave::galerkin::{
    eigenvalue, reconstruct, solve_ibvp, Assembler, CoefficientField, ScalarField, SpectralProblem,
};
use nalgebra::DMatrix;

fn uniform(n: usize) -> Vec<f64> {
    (0..=n).map(|j| j as f64 / n as f64).collect()
}

fn field(src: &str) -> ScalarField {
    ScalarField::parse(src).unwrap()
}

#[test]
fn laplacian_system_decouples_into_scalar_problems() {
    let grid = TimeGrid::new(1.0, 400).unwrap();
    let problem = SpectralProblem::from_fields(
        1.6,
        grid,
        4,
        CoefficientField::laplacian(),
        &field("x*(1-x)"),
        &field("sin(2*pi*x)"),
        &field("exp(-t)*x"),
    )
    .unwrap();
    let bundle = solve_ibvp(&problem, &uniform(8), 10).unwrap();
    for k in 0..4 {
        let f = SampledPath::new(grid, 1, problem.f().component(k)).unwrap();
        let scalar = FodeProblem::constant(
            1.6,
            &[problem.a0()[k]],
            &[problem.a1()[k]],
            DMatrix::from_element(1, 1, -eigenvalue(k + 1)),
            f,
        )
        .unwrap();
        let alone = solve_fode(&scalar).unwrap();
        for i in 0..=400 {
            let coupled = bundle.p.u.get(i, k);
            assert!((coupled - alone.u.values()[i]).abs() <= 1e-12 * (1.0 + coupled.abs()), "mode {k} node {i}");
        }
    }
}

fn midpoint_value(modes: usize) -> f64 {
    let grid = TimeGrid::new(1.0, 2048).unwrap();
    let coeffs = CoefficientField {
        a: field("2 + cos(2*pi*x)"),
        b: ScalarField::zero(),
        c: field("1 + x"),
        sigma0: 1.0,
        sigma1: 3.0,
    };
    let problem = SpectralProblem::from_fields(
        1.5,
        grid,
        modes,
        coeffs,
        &field("sin(pi*x)*exp(cos(pi*x))"),
        &ScalarField::zero(),
        &ScalarField::zero(),
    )
    .unwrap();
    let bundle = solve_ibvp(&problem, &[0.5], 2048).unwrap();
    *bundle.field.values.last().unwrap()
}

#[test]
fn error_decays_geometrically_in_modes() {
    let reference = midpoint_value(64);
    let errors: Vec<f64> = [2usize, 4, 8, 16].iter().map(|&n| (midpoint_value(n) - reference).abs()).collect();
    // e_N ≤ C ρ^N: every doubling gains at least a fixed factor per added mode
    for (w, n) in errors.windows(2).zip([2.0, 4.0, 8.0]) {
        let per_mode = (w[1] / w[0]).ln() / n;
        assert!(per_mode <= -0.5, "{errors:?}");
    }
}

#[test]
fn field_vanishes_on_the_boundary() {
    let grid = TimeGrid::new(2.0, 512).unwrap();
    let coeffs = CoefficientField {
        a: field("1 + 0.5*sin(pi*x)*exp(-t)"),
        b: field("0.3*t"),
        c: field("x"),
        sigma0: 1.0,
        sigma1: 1.5,
    };
    let problem = SpectralProblem::from_fields(
        1.3,
        grid,
        8,
        coeffs,
        &field("x*(1-x)"),
        &field("sin(3*pi*x)"),
        &field("cos(t)*x^2"),
    )
    .unwrap();
    let bundle = solve_ibvp(&problem, &uniform(20), 1).unwrap();
    for ti in 0..bundle.field.t.len() {
        assert_eq!(bundle.field.at(ti, 0), 0.0);
        assert_eq!(bundle.field.at(ti, 20), 0.0);
    }
    assert!(bundle.p.residual <= 1e-12 * (1.0 + bundle.p.u.sup_norm()));
    assert!(bundle.norms.h2_sup >= bundle.norms.h1_sup * std::f64::consts::PI * 0.999);
}

#[test]
fn parseval_on_256_nodes() {
    let grid = TimeGrid::new(1.0, 128).unwrap();
    let problem = SpectralProblem::from_fields(
        1.8,
        grid,
        6,
        CoefficientField::laplacian(),
        &field("x*(1-x)*(1+x)"),
        &field("x*(1-x)"),
        &field("t"),
    )
    .unwrap();
    let bundle = solve_ibvp(&problem, &[0.5], 1).unwrap();
    let xs = uniform(256);
    let lattice = reconstruct(&bundle.p.u, &xs, 8).unwrap();
    for (ti, &t) in lattice.t.iter().enumerate() {
        let i = (t / grid.step()).round() as usize;
        let row: Vec<f64> = (0..xs.len()).map(|j| lattice.at(ti, j)).collect();
        let l2 = (row[1..256].iter().map(|v| v * v).sum::<f64>() / 256.0).sqrt();
        let spectral = bundle.series.l2[i];
        assert!((l2 - spectral).abs() <= 1e-3 * spectral, "t={t}: {l2} vs {spectral}");
    }
}

#[test]
fn bessel_inequality_for_projections() {
    let asm = Assembler::new(16);
    for src in ["x*(1-x)", "exp(x)", "abs(x-0.3)", "sqrt(x)"] {
        let f = field(src);
        let coeffs = asm.project(&f, "u0", 0.0).unwrap();
        let norm2 = asm.rule().integrate(|x| f.eval("u0", x, 0.0).unwrap().powi(2));
        let sum: f64 = coeffs.iter().map(|c| c * c).sum();
        assert!(sum <= norm2 * (1.0 + 1e-12), "{src}");
    }
}

#[test]
fn assembly_is_deterministic_across_thread_counts() {
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let coeffs = CoefficientField {
        a: field("1 + 0.5*sin(pi*x)*exp(-t)"),
        b: ScalarField::zero(),
        c: ScalarField::zero(),
        sigma0: 1.0,
        sigma1: 1.5,
    };
    let problem =
        SpectralProblem::from_fields(1.5, grid, 5, coeffs, &field("x*(1-x)"), &ScalarField::zero(), &field("t*x")).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve_ibvp(&problem, &uniform(10), 4).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert!(one.field.values.iter().zip(&four.field.values).all(|(a, b)| a.to_bits() == b.to_bits()));
}
