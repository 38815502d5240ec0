use std::ffi::c_char;
use std::path::Path;
use std::process::Command;
use std::ptr;

use simbo_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { simbo_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn gp_round_trip() {
    let gp = simbo_gp_new(2);
    assert!(!gp.is_null());
    let x = [0.25, 0.75];
    assert_eq!(unsafe { simbo_gp_add(gp, x.as_ptr(), 2, 3.0) }, SimboStatus::Ok);
    assert_eq!(unsafe { simbo_gp_len(gp) }, 1);
    let (mut m, mut v) = (0.0, 0.0);
    assert_eq!(unsafe { simbo_gp_posterior(gp, x.as_ptr(), 2, &mut m, &mut v) }, SimboStatus::Ok);
    // σ_k² = 1, σ_n = 0.1: mean = 3 / 1.01.
    assert!((m - 3.0 / 1.01).abs() < 1e-12, "{m}");
    assert!(v > 0.0 && v < 1.0);
    unsafe { simbo_gp_free(gp) };
}

#[test]
fn shape_errors_are_reported() {
    let gp = simbo_gp_new(2);
    let x = [0.5; 3];
    assert_eq!(unsafe { simbo_gp_add(gp, x.as_ptr(), 3, 1.0) }, SimboStatus::InvalidArgument);
    assert!(last_error().contains("expected 2"), "{}", last_error());
    unsafe { simbo_gp_free(gp) };
    assert!(simbo_gp_new(0).is_null());
}

#[test]
fn null_handles_are_rejected() {
    let x = [0.5; 2];
    assert_eq!(unsafe { simbo_gp_add(ptr::null_mut(), x.as_ptr(), 2, 1.0) }, SimboStatus::NullPointer);
    assert_eq!(unsafe { simbo_gp_len(ptr::null()) }, 0);
    let mut out = SimboRollout::default();
    assert_eq!(
        unsafe { simbo_rollout(ptr::null(), SimboFidelity::L1, x.as_ptr(), 2, 1.0, &mut out) },
        SimboStatus::NullPointer
    );
    unsafe {
        simbo_gp_free(ptr::null_mut());
        simbo_model_free(ptr::null_mut());
    }
}

#[test]
fn rollout_is_deterministic() {
    let model = simbo_model_new();
    let u = [0.5; 5];
    let mut a = SimboRollout::default();
    let mut b = SimboRollout::default();
    unsafe {
        assert_eq!(simbo_rollout(model, SimboFidelity::L1, u.as_ptr(), 5, 1.0, &mut a), SimboStatus::Ok);
        assert_eq!(simbo_rollout(model, SimboFidelity::L1, u.as_ptr(), 5, 1.0, &mut b), SimboStatus::Ok);
    }
    assert_eq!(a, b);
    assert!(a.t_sim <= 1.0);
    assert_eq!(a.walked, a.cost < 100.0);
    let bad = [0.5; 4];
    let s = unsafe { simbo_rollout(model, SimboFidelity::L1, bad.as_ptr(), 4, 1.0, &mut a) };
    assert_eq!(s, SimboStatus::InvalidArgument);
    unsafe { simbo_model_free(model) };
}

#[test]
fn expected_improvement_closed_form() {
    assert!((simbo_expected_improvement(0.0, 1.0, 0.0) - 0.398_942_280_4).abs() < 1e-9);
    assert_eq!(simbo_expected_improvement(2.0, 0.0, 1.0), 0.0);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/simbo.h")).unwrap();
    for name in [
        "simbo_model_new",
        "simbo_rollout",
        "simbo_gp_new",
        "simbo_gp_posterior",
        "simbo_last_error",
        "SIMBO_STATUS_NULL_POINTER",
        "typedef struct SimboGp SimboGp",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", "-"])
        .arg("-I")
        .arg(&dir)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child.stdin.take().unwrap().write_all(b"#include \"simbo.h\"\nint main(void) { return 0; }\n")?;
            child.wait_with_output()
        })
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
