use std::ffi::CStr;
use std::path::Path;
use std::ptr;

use orlicz_ffi::*;

fn last_error() -> String {
    let p = orlicz_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn power(p: f64) -> *mut OrliczYoung {
    let mut y = ptr::null_mut();
    assert_eq!(unsafe { orlicz_young_power(p, &mut y) }, OrliczStatus::Ok);
    assert!(!y.is_null());
    y
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(orlicz_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn evaluates_power_and_conjugate() {
    let y = power(2.0);
    let mut v = 0.0;
    unsafe {
        assert_eq!(orlicz_young_eval(y, 3.0, &mut v), OrliczStatus::Ok);
        assert_eq!(v, 9.0);
        assert_eq!(orlicz_young_density(y, 3.0, &mut v), OrliczStatus::Ok);
        assert_eq!(v, 6.0);
        assert_eq!(orlicz_young_inverse(y, 16.0, &mut v), OrliczStatus::Ok);
        assert!((v - 4.0).abs() < 1e-12);
        let mut c = ptr::null_mut();
        assert_eq!(orlicz_young_conjugate(y, &mut c), OrliczStatus::Ok);
        // (t²)~(s) = s²/4
        assert_eq!(orlicz_young_eval(c, 2.0, &mut v), OrliczStatus::Ok);
        assert!((v - 1.0).abs() < 1e-6, "{v}");
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(orlicz_young_indices(y, &mut lo, &mut hi), OrliczStatus::Ok);
        assert_eq!((lo, hi), (2.0, 2.0));
        assert_eq!(orlicz_young_matuszewska_index(y, &mut v), OrliczStatus::Ok);
        assert!((v - 2.0).abs() < 1e-6);
        orlicz_young_free(c);
        orlicz_young_free(y);
    }
}

#[test]
fn sobolev_conjugate_of_the_square_in_four_dimensions() {
    // A = t², n = 4: A_n(s) = (8/27) s⁴
    let y = power(2.0);
    let mut s = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(orlicz_sobolev_new(y, 4, &mut s), OrliczStatus::Ok);
        for t in [0.1, 1.0, 10.0] {
            assert_eq!(orlicz_sobolev_eval(s, t, &mut v), OrliczStatus::Ok);
            let want = 8.0 / 27.0 * t.powi(4);
            assert!((v - want).abs() / want < 1e-5, "{t}: {v}");
            let mut h = 0.0;
            assert_eq!(orlicz_sobolev_h(s, t, &mut h), OrliczStatus::Ok);
            assert_eq!(orlicz_sobolev_h_inverse(s, h, &mut v), OrliczStatus::Ok);
            assert!((v - t).abs() / t < 1e-8);
            assert_eq!(orlicz_sobolev_density(s, t, &mut v), OrliczStatus::Ok);
            assert!(v > 0.0);
        }
        orlicz_sobolev_free(s);
        let mut bad = ptr::null_mut();
        assert_eq!(orlicz_sobolev_new(y, 2, &mut bad), OrliczStatus::Unsupported);
        assert!(bad.is_null());
        assert!(last_error().contains("unsupported"));
        orlicz_young_free(y);
    }
}

#[test]
fn indicator_norm_through_the_abi() {
    // ‖k·1_E‖ = k / A⁻¹(1/|E|)
    let mut y = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(orlicz_young_power_log(1.5, 1.0, &mut y), OrliczStatus::Ok);
        let vals = [2.0, 2.0, 0.0];
        let w = [0.125, 0.125, 0.75];
        assert_eq!(orlicz_luxemburg_norm(y, vals.as_ptr(), w.as_ptr(), 3, &mut v), OrliczStatus::Ok);
        let mut inv = 0.0;
        assert_eq!(orlicz_young_inverse(y, 4.0, &mut inv), OrliczStatus::Ok);
        assert!((v - 2.0 / inv).abs() / v < 1e-10);
        orlicz_young_free(y);
    }
}

#[test]
fn tables_round_trip() {
    let t: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
    let a: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
    let mut y = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(orlicz_young_table(t.as_ptr(), a.as_ptr(), t.len(), true, &mut y), OrliczStatus::Ok);
        assert_eq!(orlicz_young_eval(y, 2.5, &mut v), OrliczStatus::Ok);
        assert!((v - 6.25).abs() < 1e-9, "{v}");
        orlicz_young_free(y);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut y = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(orlicz_young_power(0.5, &mut y), OrliczStatus::Config);
        assert!(y.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(orlicz_young_power(2.0, ptr::null_mut()), OrliczStatus::NullPointer);
        assert_eq!(orlicz_young_eval(ptr::null(), 1.0, &mut v), OrliczStatus::NullPointer);
        let y = power(2.0);
        assert_eq!(orlicz_young_eval(y, -1.0, &mut v), OrliczStatus::Domain);
        assert_eq!(orlicz_young_eval(y, 1.0, ptr::null_mut()), OrliczStatus::NullPointer);
        assert_eq!(orlicz_young_eval(y, 1.0, &mut v), OrliczStatus::Ok);
        assert!(orlicz_last_error().is_null());
        assert_eq!(orlicz_luxemburg_norm(y, ptr::null(), ptr::null(), 2, &mut v), OrliczStatus::NullPointer);
        let t = [0.0, 1.0];
        assert_eq!(orlicz_young_table(t.as_ptr(), t.as_ptr(), 1, true, &mut ptr::null_mut()), OrliczStatus::Config);
        orlicz_young_free(y);
        orlicz_young_free(ptr::null_mut());
        orlicz_sobolev_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    let mut y = ptr::null_mut();
    assert_ne!(unsafe { orlicz_young_power(-1.0, &mut y) }, OrliczStatus::Ok);
    std::thread::spawn(|| assert!(orlicz_last_error().is_null())).join().unwrap();
    assert!(!orlicz_last_error().is_null());
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/orlicz.h")).unwrap();
    for f in [
        "orlicz_version", "orlicz_last_error", "orlicz_young_power", "orlicz_young_power_log", "orlicz_young_table",
        "orlicz_young_conjugate", "orlicz_young_free", "orlicz_young_eval", "orlicz_young_density",
        "orlicz_young_inverse", "orlicz_young_indices", "orlicz_young_matuszewska_index", "orlicz_luxemburg_norm",
        "orlicz_sobolev_new", "orlicz_sobolev_free", "orlicz_sobolev_h", "orlicz_sobolev_h_inverse",
        "orlicz_sobolev_eval", "orlicz_sobolev_density",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f}");
    }
    assert!(h.contains("typedef struct OrliczYoung OrliczYoung;"));
    assert!(h.contains("ORLICZ_STATUS_OK = 0"));
}

#[test]
fn c_program_links_against_the_static_library() {
    let Ok(exe) = std::env::current_exe() else { return };
    let target = exe.parent().and_then(Path::parent).unwrap();
    let lib = target.join("liborlicz_ffi.a");
    let cc = std::process::Command::new("cc").arg("--version").output();
    if cc.is_err() || !lib.is_file() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let bin = std::env::temp_dir().join(format!("orlicz-smoke-{}", std::process::id()));
    let st = std::process::Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(st.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    let _ = std::fs::remove_file(&bin);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
