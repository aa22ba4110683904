use std::ffi::{c_void, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use pgpe_ffi::*;

fn last_error() -> String {
    let p = pgpe_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(pgpe_median_from_std(2.0, &mut out), PgpeStatus::Ok);
        assert!((out - 1.34898).abs() < 1e-12);
        assert_eq!(pgpe_mirror(2.0, 1.0, &mut out), PgpeStatus::Ok);
        assert!((out - 0.3316417363834089).abs() < 1e-12);
        let theta = [0.5, 0.0];
        assert_eq!(
            pgpe_objective_value(PgpeObjective::Rastrigin as i32, theta.as_ptr(), 2, &mut out),
            PgpeStatus::Ok
        );
        assert!((out - 20.25).abs() < 1e-12);
    }
}

#[test]
fn errors_are_codes_with_messages() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(pgpe_mirror(1.0, -1.0, &mut out), PgpeStatus::InvalidArgument);
        assert!(last_error().contains("phi"), "{}", last_error());
        assert_eq!(pgpe_median_from_std(1.0, ptr::null_mut()), PgpeStatus::NullPointer);
        assert_eq!(
            pgpe_objective_value(7, [1.0].as_ptr(), 1, &mut out),
            PgpeStatus::InvalidArgument
        );
        assert!(last_error().contains("objective"));
        let mut h = ptr::null_mut();
        assert_eq!(
            pgpe_optimizer_new(42, [0.0].as_ptr(), 1, 1.0, 0.1, 0.1, 0, &mut h),
            PgpeStatus::InvalidArgument
        );
        assert!(h.is_null());
        assert_eq!(
            pgpe_optimizer_new(PgpeVariant::Sys as i32, [0.0].as_ptr(), 1, -1.0, 0.1, 0.1, 0, &mut h),
            PgpeStatus::InvalidArgument
        );
        assert_eq!(pgpe_optimizer_step(ptr::null_mut(), 0, ptr::null_mut()), PgpeStatus::NullPointer);
    }
}

fn new_optimizer(variant: PgpeVariant, mu0: &[f64], seed: u64) -> *mut PgpeOptimizer {
    let mut h = ptr::null_mut();
    let status = unsafe { pgpe_optimizer_new(variant as i32, mu0.as_ptr(), mu0.len(), 1.0, 0.1, 0.05, seed, &mut h) };
    assert_eq!(status, PgpeStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn optimizer_handle_lifecycle() {
    let h = new_optimizer(PgpeVariant::SupSys, &[1.0, -1.0, 0.5], 3);
    unsafe {
        let mut dim = 0;
        assert_eq!(pgpe_optimizer_dim(h, &mut dim), PgpeStatus::Ok);
        assert_eq!(dim, 3);
        let mut best = f64::NAN;
        for _ in 0..400 {
            assert_eq!(pgpe_optimizer_step(h, PgpeObjective::Sphere as i32, &mut best), PgpeStatus::Ok);
        }
        assert!(best.is_finite());
        let mut evals = 0;
        assert_eq!(pgpe_optimizer_evaluations(h, &mut evals), PgpeStatus::Ok);
        assert_eq!(evals, 1600);
        let mut mu = [0.0; 3];
        let mut sigma = [0.0; 3];
        assert_eq!(pgpe_optimizer_mu(h, mu.as_mut_ptr(), 3), PgpeStatus::Ok);
        assert_eq!(pgpe_optimizer_sigma(h, sigma.as_mut_ptr(), 3), PgpeStatus::Ok);
        let f: f64 = mu.iter().map(|m| m * m).sum();
        assert!(f < 0.1, "mu {mu:?}");
        assert!(sigma.iter().all(|s| *s > 0.0));
        assert_eq!(pgpe_optimizer_mu(h, mu.as_mut_ptr(), 2), PgpeStatus::DimensionMismatch);
        pgpe_optimizer_free(h);
        pgpe_optimizer_free(ptr::null_mut());
    }
}

unsafe extern "C" fn neg_sphere(theta: *const f64, dim: usize, user_data: *mut c_void) -> f64 {
    let calls = &mut *(user_data as *mut u64);
    *calls += 1;
    -std::slice::from_raw_parts(theta, dim).iter().map(|x| x * x).sum::<f64>()
}

#[test]
fn callback_matches_builtin_objective() {
    let a = new_optimizer(PgpeVariant::SupIf, &[0.7, -0.2], 9);
    let b = new_optimizer(PgpeVariant::SupIf, &[0.7, -0.2], 9);
    let mut calls: u64 = 0;
    unsafe {
        for _ in 0..50 {
            let (mut ra, mut rb) = (0.0, 0.0);
            assert_eq!(pgpe_optimizer_step(a, PgpeObjective::Sphere as i32, &mut ra), PgpeStatus::Ok);
            let data = &mut calls as *mut u64 as *mut c_void;
            assert_eq!(pgpe_optimizer_step_with(b, Some(neg_sphere), data, &mut rb), PgpeStatus::Ok);
            assert_eq!(ra, rb);
        }
        let (mut ma, mut mb) = ([0.0; 2], [0.0; 2]);
        pgpe_optimizer_mu(a, ma.as_mut_ptr(), 2);
        pgpe_optimizer_mu(b, mb.as_mut_ptr(), 2);
        assert_eq!(ma, mb);
        let mut evals = 0;
        pgpe_optimizer_evaluations(b, &mut evals);
        assert_eq!(evals, calls);
        assert_eq!(pgpe_optimizer_step_with(b, None, ptr::null_mut(), ptr::null_mut()), PgpeStatus::NullPointer);
        pgpe_optimizer_free(a);
        pgpe_optimizer_free(b);
    }
}

const CONFIG: &str = r#"{
  "run": {
    "objective": "sphere",
    "dim": 3,
    "meta": { "variant": "SyS", "alpha_mu": 0.05, "alpha_sigma": 0.02 },
    "mu0_range": 1.0,
    "sigma0": 1.0,
    "max_evaluations": 400,
    "target_reward": -0.1,
    "base_seed": 5,
    "run_count": 3,
    "grid_points": 10
  }
}"#;

#[test]
fn batch_from_json_is_deterministic() {
    let config = CString::new(CONFIG).unwrap();
    let run = || unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(pgpe_run_batch_json(config.as_ptr(), &mut out), PgpeStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        pgpe_string_free(out);
        text
    };
    let first = run();
    assert!(first.starts_with("evaluations,mean_best_reward,std_best_reward,success_rate\n"));
    assert_eq!(first.lines().count(), 11);
    assert_eq!(first, run());

    let bad = CString::new(CONFIG.replace("\"SyS\"", "\"SupSys\"")).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pgpe_run_batch_json(bad.as_ptr(), &mut out) }, PgpeStatus::Config);
    assert!(out.is_null());
    assert!(last_error().contains("run.meta.variant"), "{}", last_error());
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pgpe.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "pgpe_last_error_message",
        "pgpe_median_from_std",
        "pgpe_mirror",
        "pgpe_objective_value",
        "pgpe_optimizer_new",
        "pgpe_optimizer_free",
        "pgpe_optimizer_step",
        "pgpe_optimizer_step_with",
        "pgpe_optimizer_mu",
        "pgpe_optimizer_sigma",
        "pgpe_run_batch_json",
        "pgpe_string_free",
        "typedef struct PgpeOptimizer PgpeOptimizer;",
        "PGPE_STATUS_OK = 0",
        "PGPE_VARIANT_SUP_SYS = 2",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include "pgpe.h"

static double neg_sphere(const double *theta, size_t dim, void *user) {
    double s = 0.0;
    for (size_t i = 0; i < dim; i++) s += theta[i] * theta[i];
    (void)user;
    return -s;
}

int main(void) {
    double phi = 0.0;
    if (pgpe_median_from_std(1.0, &phi) != PGPE_STATUS_OK) return 1;
    if (pgpe_mirror(1.0, -1.0, &phi) != PGPE_STATUS_INVALID_ARGUMENT) return 2;
    if (pgpe_last_error_message() == NULL) return 3;
    double mu0[2] = {0.5, -0.5};
    PgpeOptimizer *opt = NULL;
    if (pgpe_optimizer_new(PGPE_VARIANT_SUP_SYS, mu0, 2, 1.0, 0.1, 0.05, 1, &opt) != PGPE_STATUS_OK) return 4;
    double best = 0.0;
    for (int i = 0; i < 100; i++) {
        if (pgpe_optimizer_step_with(opt, neg_sphere, NULL, &best) != PGPE_STATUS_OK) return 5;
    }
    uint64_t evals = 0;
    pgpe_optimizer_evaluations(opt, &evals);
    pgpe_optimizer_free(opt);
    printf("%llu\n", (unsigned long long)evals);
    return evals == 400 ? 0 : 6;
}
"#;

/// Compiles and links a C program against the generated header and the
/// static library, when a C compiler is available.
#[test]
fn c_program_links_and_runs() {
    let target_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .and_then(Path::parent)
        .unwrap()
        .to_path_buf();
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // `cargo test` links the rlib only, so the archive may be stale or missing.
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let built = Command::new(cargo)
        .args(["build", "--quiet", "-p", "pgpe-ffi", "--lib"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .status()
        .unwrap();
    assert!(built.success(), "building the static library failed");
    let archive = target_dir.join("libpgpe_ffi.a");
    let dir = std::env::temp_dir().join(format!("pgpe-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    let exe = dir.join("smoke");
    std::fs::write(&src, C_SMOKE).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke program failed to build");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "smoke exited with {:?}", run.status);
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "400");
    let _ = std::fs::remove_dir_all(&dir);
}
