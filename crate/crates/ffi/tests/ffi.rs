use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use crs_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(crs_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn path3(eps: f64) -> *mut CrsInstance {
    let us = [0usize, 1, 2];
    let vs = [1usize, 2, 3];
    let xs = [1.0 - eps, eps, 1.0 - eps];
    let mut h = ptr::null_mut();
    let s = unsafe { crs_instance_new(4, us.as_ptr(), vs.as_ptr(), xs.as_ptr(), 3, &mut h) };
    assert_eq!(s, CrsStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn constants() {
    let mut v = 0.0;
    assert_eq!(unsafe { crs_beta(1.0, &mut v) }, CrsStatus::Ok);
    assert!((v - 0.476_222_388_197_391_3).abs() < 1e-12);
    assert_eq!(unsafe { crs_gamma(1.0, &mut v) }, CrsStatus::Ok);
    assert!((v - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-12);
    assert_eq!(unsafe { crs_beta(2.0, &mut v) }, CrsStatus::ParameterError);
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { crs_beta(1.0, ptr::null_mut()) },
        CrsStatus::NullPointer
    );
}

#[test]
fn exact_and_estimated_balancedness() {
    let h = path3(0.1);
    assert_eq!(unsafe { crs_instance_edge_count(h) }, 3);
    let scheme = CString::new("ex4.1").unwrap();
    let mut vals = [0.0; 3];
    let mut min = 0.0;
    let s = unsafe { crs_exact_balancedness(h, scheme.as_ptr(), vals.as_mut_ptr(), 3, &mut min) };
    assert_eq!(s, CrsStatus::Ok, "{}", last_error());
    assert!((vals[1] - 0.37).abs() < 1e-12);
    assert_eq!(min, vals[1]);

    let mut se = [0.0; 3];
    let s = unsafe {
        crs_estimate_balancedness(
            h,
            scheme.as_ptr(),
            20_000,
            7,
            vals.as_mut_ptr(),
            se.as_mut_ptr(),
            3,
        )
    };
    assert_eq!(s, CrsStatus::Ok, "{}", last_error());
    assert!((vals[1] - 0.37).abs() < 4.5 * se[1].max(1e-9));

    let s = unsafe {
        crs_exact_balancedness(h, scheme.as_ptr(), vals.as_mut_ptr(), 2, ptr::null_mut())
    };
    assert_eq!(s, CrsStatus::BufferTooSmall);
    let merged = CString::new("alg4").unwrap();
    let s = unsafe {
        crs_exact_balancedness(h, merged.as_ptr(), vals.as_mut_ptr(), 3, ptr::null_mut())
    };
    assert_eq!(s, CrsStatus::CapabilityError);
    unsafe { crs_instance_free(h) };
}

#[test]
fn resolve_outputs_a_matching() {
    let h = path3(0.5);
    for name in [
        "ex2.2", "alg1", "alg2", "ex4.1", "alg3", "alg4", "alg5", "alg6", "ex1.4",
    ] {
        let scheme = CString::new(name).unwrap();
        for seed in 0..50 {
            let mut edges = [usize::MAX; 3];
            let mut len = 0;
            let s =
                unsafe { crs_resolve(h, scheme.as_ptr(), seed, edges.as_mut_ptr(), 3, &mut len) };
            assert_eq!(s, CrsStatus::Ok, "{name}: {}", last_error());
            let picked = &edges[..len];
            assert!(!(picked.contains(&0) && picked.contains(&1)));
            assert!(!(picked.contains(&1) && picked.contains(&2)));
        }
    }
    let bad = CString::new("nope").unwrap();
    let mut edges = [0usize; 3];
    let mut len = 0;
    let s = unsafe { crs_resolve(h, bad.as_ptr(), 0, edges.as_mut_ptr(), 3, &mut len) };
    assert_eq!(s, CrsStatus::InputError);
    assert!(last_error().contains("nope"));
    unsafe { crs_instance_free(h) };
}

#[test]
fn json_round_trip_and_errors() {
    let json = CString::new(
        r#"{"vertices":3,"edges":[{"id":0,"u":0,"v":1,"x":0.5},{"id":1,"u":1,"v":2,"x":0.5}]}"#,
    )
    .unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { crs_instance_from_json(json.as_ptr(), &mut h) },
        CrsStatus::Ok
    );
    assert_eq!(unsafe { crs_instance_edge_count(h) }, 2);
    unsafe { crs_instance_free(h) };

    let broken = CString::new("{").unwrap();
    let mut h2 = ptr::null_mut();
    assert_eq!(
        unsafe { crs_instance_from_json(broken.as_ptr(), &mut h2) },
        CrsStatus::InputError
    );
    assert!(h2.is_null());

    let us = [0usize];
    let vs = [0usize];
    let xs = [0.5];
    let s = unsafe { crs_instance_new(2, us.as_ptr(), vs.as_ptr(), xs.as_ptr(), 1, &mut h2) };
    assert_eq!(s, CrsStatus::InputError);
    unsafe { crs_instance_free(ptr::null_mut()) };
    assert_eq!(unsafe { crs_instance_edge_count(ptr::null()) }, 0);
}

#[test]
fn header_declares_every_export() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/crs.h")).unwrap();
    for f in [
        "crs_last_error_message",
        "crs_instance_new",
        "crs_instance_from_json",
        "crs_instance_free",
        "crs_instance_edge_count",
        "crs_beta",
        "crs_gamma",
        "crs_resolve",
        "crs_exact_balancedness",
        "crs_estimate_balancedness",
        "CRS_STATUS_CAPABILITY_ERROR",
    ] {
        assert!(header.contains(f), "missing {f}");
    }
    // Syntax-check as C when a compiler is present.
    if let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror"])
        .arg(dir.join("include/crs.h"))
        .output()
    {
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn c_program_links_against_static_library() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let profile = if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    };
    let lib_dir = dir.join("../../target").join(profile);
    if !lib_dir.join("libcrs_ffi.a").exists()
        || Command::new("cc").arg("--version").output().is_err()
    {
        return;
    }
    let exe = std::env::temp_dir().join(format!("crs_ffi_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(lib_dir.join("libcrs_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("bogus"));
}
