use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use fracwave_ffi::*;

const WAVE: &str = "[problem]\nalpha = 2.0\nT = 1.0\nn_steps = 2048\nmodes = 2\n\
                    [coefficients]\na = 1\nsigma0 = 1\nsigma1 = 1\n\
                    [data]\nu0 = \"sin(pi*x)\"\n";

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { fw_last_error(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn problem(src: &str) -> Result<*mut FwProblem, FwStatus> {
    let src = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    match unsafe { fw_problem_from_toml(src.as_ptr(), &mut p) } {
        FwStatus::Ok => Ok(p),
        s => {
            assert!(p.is_null());
            Err(s)
        }
    }
}

#[test]
fn wave_solution_round_trip() {
    let p = problem(WAVE).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fw_solve(p, &mut s) }, FwStatus::Ok);
    unsafe { fw_problem_free(p) };

    let (mut n, mut m) = (0, 0);
    assert_eq!(unsafe { fw_solution_dims(s, &mut n, &mut m) }, FwStatus::Ok);
    assert_eq!((n, m), (2049, 2));

    let mut coeffs = vec![0.0; n * m];
    assert_eq!(unsafe { fw_solution_coefficients(s, coeffs.as_mut_ptr(), coeffs.len()) }, FwStatus::Ok);
    let mut times = vec![0.0; n];
    assert_eq!(unsafe { fw_solution_times(s, times.as_mut_ptr(), n) }, FwStatus::Ok);
    assert_eq!(times[n - 1], 1.0);
    let first = std::f64::consts::FRAC_1_SQRT_2;
    assert!((coeffs[0] - first).abs() < 1e-9);
    assert!((coeffs[(n - 1) * m] + first).abs() < 1e-3);
    assert!(coeffs.iter().skip(1).step_by(2).all(|c| c.abs() < 1e-12));

    let mut u = 0.0;
    assert_eq!(unsafe { fw_solution_eval(s, n - 1, 0.5, &mut u) }, FwStatus::Ok);
    assert!((u + 1.0).abs() < 1e-3, "{u}");

    let mut norms = FwNorms::default();
    assert_eq!(unsafe { fw_solution_norms(s, &mut norms) }, FwStatus::Ok);
    assert!((norms.h1_sup - std::f64::consts::PI / 2f64.sqrt()).abs() < 1e-9);
    unsafe { fw_solution_free(s) };
}

#[test]
fn errors_carry_messages() {
    assert_eq!(problem("[problem]\nalpha = 2.5\n").unwrap_err(), FwStatus::Config);
    assert!(last_error().contains("error"), "{}", last_error());

    let coarse = WAVE.replace("n_steps = 2048", "n_steps = 4").replace("modes = 2", "modes = 64");
    let p = problem(&coarse).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fw_solve(p, &mut s) }, FwStatus::Precondition);
    assert!(s.is_null());
    assert!(!last_error().is_empty());
    unsafe { fw_problem_free(p) };

    let mut out = 0.0;
    assert_eq!(unsafe { fw_mittag_leffler(0.0, 1.0, 1.0, &mut out) }, FwStatus::InvalidArgument);
    assert_eq!(unsafe { fw_mittag_leffler(1.0, 1.0, 1.0, &mut out) }, FwStatus::Ok);
    assert_eq!(last_error(), "");
    assert!((out - std::f64::consts::E).abs() < 1e-12);
}

#[test]
fn null_and_short_buffers_are_rejected() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fw_problem_from_toml(ptr::null(), &mut out) }, FwStatus::NullPointer);
    assert_eq!(unsafe { fw_solve(ptr::null(), &mut ptr::null_mut()) }, FwStatus::NullPointer);
    unsafe {
        fw_problem_free(ptr::null_mut());
        fw_solution_free(ptr::null_mut());
    }

    let p = problem(WAVE).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fw_solve(p, &mut s) }, FwStatus::Ok);
    let mut small = [0.0; 4];
    assert_eq!(unsafe { fw_solution_coefficients(s, small.as_mut_ptr(), 4) }, FwStatus::BufferTooSmall);
    let mut u = 0.0;
    assert_eq!(unsafe { fw_solution_eval(s, 1 << 20, 0.5, &mut u) }, FwStatus::InvalidArgument);
    assert_eq!(unsafe { fw_solution_eval(s, 0, 1.5, &mut u) }, FwStatus::InvalidArgument);
    unsafe {
        fw_solution_free(s);
        fw_problem_free(p);
    }
}

#[test]
fn operators_on_raw_samples() {
    let n = 1025;
    let ones = vec![1.0; n];
    let mut j = vec![0.0; n];
    assert_eq!(unsafe { fw_frac_integral(0.5, 1.0, ones.as_ptr(), n, j.as_mut_ptr()) }, FwStatus::Ok);
    assert!((j[n - 1] - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
    let mut back = vec![0.0; n];
    assert_eq!(unsafe { fw_caputo_derivative(0.5, 1.0, j.as_ptr(), n, back.as_mut_ptr()) }, FwStatus::Ok);
    assert!(back.iter().all(|v| (v - 1.0).abs() < 5e-3));
    assert_eq!(
        unsafe { fw_frac_integral(0.5, 1.0, ones.as_ptr(), 2, j.as_mut_ptr()) },
        FwStatus::InvalidArgument
    );
    let version = unsafe { CStr::from_ptr(fw_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn c_program_links_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(crate_dir.join("include/fracwave.h")).unwrap();
    for name in ["fw_problem_from_toml", "fw_solve", "fw_last_error", "FW_STATUS_PRECONDITION"] {
        assert!(header.contains(name), "{name}");
    }
    // the test binary lives in target/<profile>/deps; the static library one level up
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libfracwave_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let exe = tempfile::tempdir().unwrap();
    let bin = exe.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-D_DEFAULT_SOURCE")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 2049 1 -1.0"));
}
