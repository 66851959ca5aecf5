use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ilab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ilab_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(ilab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn couette_evans_and_stability() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ilab_profile_couette(&mut p), IlabStatus::Ok);
        let mut d = IlabComplex { re: 0.0, im: 0.0 };
        assert_eq!(ilab_evans(p, IlabComplex { re: 0.3, im: 0.7 }, &mut d), IlabStatus::Ok);
        assert!((d.re - 2.0).abs() < 1e-10 && d.im.abs() < 1e-10);
        let b = IlabBox { re_min: -2.0, re_max: 2.0, im_min: 0.05, im_max: 2.0 };
        let mut c0 = IlabComplex { re: 0.0, im: 0.0 };
        assert_eq!(ilab_gamma0_hydro(p, b, &mut c0), IlabStatus::Stable);
        assert!(last_error().starts_with("stable"));
        assert_eq!(ilab_evans(p, IlabComplex { re: 0.0, im: 1e-5 }, &mut d), IlabStatus::NearCriticalLayer);
        ilab_profile_free(p);
    }
}

#[test]
fn tanh_growth_rate() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(ilab_profile_tanh(0.3, &mut p), IlabStatus::Ok);
        let mut v = [0.0; 4];
        assert_eq!(ilab_profile_eval(p, 0.1, v.as_mut_ptr()), IlabStatus::Ok);
        assert!((v[0] - (0.1f64 / 0.3).tanh()).abs() < 1e-15);
        let b = IlabBox { re_min: -1.0, re_max: 1.0, im_min: 0.01, im_max: 1.0 };
        let mut c0 = IlabComplex { re: 0.0, im: 0.0 };
        assert_eq!(ilab_gamma0_hydro(p, b, &mut c0), IlabStatus::Ok);
        assert!((c0.im - 0.5799160690260488).abs() < 1e-9);
        assert!(last_error().is_empty());
        ilab_profile_free(p);

        assert_eq!(ilab_profile_tanh(-1.0, &mut p), IlabStatus::InvalidParameter);
        assert!(!last_error().is_empty());
        let coeffs = [0.0, 1.0];
        assert_eq!(ilab_profile_table(coeffs.as_ptr(), 2, &mut p), IlabStatus::Ok);
        ilab_profile_free(p);
    }
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(ilab_profile_couette(ptr::null_mut()), IlabStatus::NullPointer);
        let mut d = IlabComplex { re: 0.0, im: 0.0 };
        assert_eq!(ilab_evans(ptr::null(), IlabComplex { re: 0.0, im: 1.0 }, &mut d), IlabStatus::NullPointer);
        assert_eq!(ilab_select_parameters(ptr::null(), ptr::null_mut()), IlabStatus::NullPointer);
        ilab_profile_free(ptr::null_mut());
        ilab_equilibrium_free(ptr::null_mut());
    }
}

#[test]
fn kinetic_entry_points() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(ilab_equilibrium_maxwellian(1, &mut m), IlabStatus::Ok);
        let (mut f, mut fp) = (0.0, 0.0);
        assert_eq!(ilab_marginal_eval(m, 0.5, &mut f, &mut fp), IlabStatus::Ok);
        let pi = std::f64::consts::PI;
        assert!((f - (-0.25f64).exp() / pi.sqrt()).abs() < 1e-8);
        assert!((fp + (-0.25f64).exp() / pi.sqrt()).abs() < 1e-6);
        let mut d = IlabComplex { re: 0.0, im: 0.0 };
        assert_eq!(ilab_dispersion(m, IlabComplex { re: 50.0, im: 0.0 }, IlabKernel::Kie, &mut d), IlabStatus::Ok);
        assert!(((d.re - 1.0).powi(2) + d.im * d.im).sqrt() < 0.01);
        assert_eq!(ilab_dispersion(m, IlabComplex { re: 1e-5, im: 0.0 }, IlabKernel::Kie, &mut d), IlabStatus::Precondition);
        let b = IlabBox { re_min: 0.01, re_max: 2.0, im_min: -3.0, im_max: 3.0 };
        let mut l = IlabComplex { re: 0.0, im: 0.0 };
        assert_eq!(ilab_gamma0_kinetic(m, b, IlabKernel::Vdb, &mut l), IlabStatus::Stable);
        ilab_equilibrium_free(m);

        let mut s = ptr::null_mut();
        assert_eq!(ilab_equilibrium_shell(0.8, 0.2, 1, &mut s), IlabStatus::Ok);
        let b = IlabBox { re_min: 0.01, re_max: 4.0, im_min: -6.0, im_max: 6.0 };
        for k in [IlabKernel::Kie, IlabKernel::Vdb] {
            assert_eq!(ilab_gamma0_kinetic(s, b, k, &mut l), IlabStatus::Ok);
            assert!(l.re > 0.0);
            assert_eq!(ilab_dispersion(s, l, k, &mut d), IlabStatus::Ok);
            assert!((d.re * d.re + d.im * d.im).sqrt() < 1e-10);
        }
        ilab_equilibrium_free(s);
        assert_eq!(ilab_equilibrium_maxwellian(7, &mut m), IlabStatus::InvalidParameter);
    }
}

fn worked_request() -> IlabParamRequest {
    IlabParamRequest {
        s: 2.0,
        alpha: 1.0,
        k: 1.0,
        d: 1.0,
        m: 4,
        big_m: 20,
        beta: 0.02,
        lambda0: IlabComplex { re: 0.5, im: 0.0 },
        k0: 1.0,
        gamma: 0.5,
        delta0_prime: 0.1,
        eps: 0.125,
    }
}

#[test]
fn parameter_selection() {
    unsafe {
        let mut out = IlabParams::default();
        assert_eq!(ilab_select_parameters(&worked_request(), &mut out), IlabStatus::Ok);
        assert!((out.alpha_prime - 0.825).abs() < 1e-14);
        assert!((out.kappa - 0.8 / 1.02).abs() < 1e-14);
        assert!((out.s_eps * out.gamma1 - out.delta0).abs() < 1e-12);
        let bad = IlabParamRequest { beta: 0.03, ..worked_request() };
        assert_eq!(ilab_select_parameters(&bad, &mut out), IlabStatus::Admissibility);
        assert!(last_error().contains("βM"));
    }
}

/// Compiles a small C program against the generated header and the static library.
#[test]
fn header_compiles_and_links_from_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test builds leave the fresh static library next to the test binary in
    // target/<profile>/deps; only `cargo build` copies it one level up.
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = [deps.join("libilab_ffi.a"), deps.parent().unwrap().join("libilab_ffi.a")]
        .into_iter()
        .find(|p| p.exists())
        .expect("libilab_ffi.a not built");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "ilab.h"
int main(void) {
    IlabProfile *p = NULL;
    if (ilab_profile_tanh(0.3, &p) != ILAB_STATUS_OK) return 1;
    IlabBox b = { -1.0, 1.0, 0.01, 1.0 };
    IlabComplex c0;
    if (ilab_gamma0_hydro(p, b, &c0) != ILAB_STATUS_OK) return 2;
    ilab_profile_free(p);
    if (ilab_profile_tanh(-1.0, &p) != ILAB_STATUS_INVALID_PARAMETER) return 3;
    printf("%.12f %s\n", c0.im, ilab_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("0.579916069026"), "{text}");
}
