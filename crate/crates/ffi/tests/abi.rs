use std::ffi::{CStr, CString};
use std::ptr;

use heis_ffi::*;

fn parse(spec: &str) -> *mut HeisMap {
    let s = CString::new(spec).unwrap();
    let mut h = ptr::null_mut();
    let st = unsafe { heis_map_parse(s.as_ptr(), &mut h) };
    assert_eq!(st, HeisStatus::Ok, "{}", last_error());
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(heis_last_error()) }.to_string_lossy().into_owned()
}

const P: HeisPoint = HeisPoint { x: 0.4, y: -0.3, t: 0.7 };

#[test]
fn conformal_word_has_vanishing_schwarzians() {
    let h = parse("inv∘tr(1,0.5,-0.2)∘rot(0.3)∘dil(1.7)");
    let mut out = HeisComplex { re: f64::NAN, im: f64::NAN };
    unsafe {
        assert_eq!(heis_s_cr(h, P, &mut out), HeisStatus::Ok);
        assert!(out.re.abs() < 1e-8 && out.im.abs() < 1e-8, "{out:?}");
        assert_eq!(heis_s_cl(h, P, &mut out), HeisStatus::Ok);
        assert!(out.re.abs() < 1e-8 && out.im.abs() < 1e-8, "{out:?}");
        assert_eq!(last_error(), "");
        assert_eq!(heis_map_contact_assumed(h), 1);
        heis_map_free(h);
    }
}

#[test]
fn preschwarzian_of_dilation_vanishes_and_of_inversion_does_not() {
    let mut out = HeisComplex { re: 1.0, im: 1.0 };
    unsafe {
        let d = parse("dil(3)");
        assert_eq!(heis_preschwarzian(d, P, &mut out), HeisStatus::Ok);
        assert_eq!((out.re, out.im), (0.0, 0.0));
        heis_map_free(d);
        // λ = 1/N⁴ for the inversion, so Pf = −Z ln N⁴ ≠ 0 away from the t axis
        let i = parse("inv");
        assert_eq!(heis_preschwarzian(i, P, &mut out), HeisStatus::Ok);
        assert!(out.re.hypot(out.im) > 0.1);
        heis_map_free(i);
    }
}

#[test]
fn contact_assessment_fields() {
    let mut a = std::mem::MaybeUninit::<HeisContact>::uninit();
    unsafe {
        let h = parse("dil(2)");
        assert_eq!(heis_assess_contact(h, P, a.as_mut_ptr()), HeisStatus::Ok);
        let a = a.assume_init();
        assert_eq!(a.image, HeisPoint { x: 0.8, y: -0.6, t: 2.8 });
        assert!((a.lambda - 4.0).abs() < 1e-12);
        assert_eq!((a.is_contact, a.is_conformal, a.orientation), (1, 1, 1));
        assert_eq!(a.mu_defined, 1);
        heis_map_free(h);

        let h = parse("expr(x; y; t + x)");
        assert_eq!(heis_map_contact_assumed(h), 0);
        let mut c = std::mem::MaybeUninit::<HeisContact>::uninit();
        assert_eq!(heis_assess_contact(h, P, c.as_mut_ptr()), HeisStatus::Ok);
        assert_eq!(c.assume_init().is_contact, 0);
        let mut out = HeisComplex { re: 0.0, im: 0.0 };
        assert_eq!(heis_s_cr(h, P, &mut out), HeisStatus::NotContact);
        assert!(last_error().contains("not contact"));
        heis_map_free(h);
    }
}

#[test]
fn error_codes() {
    let mut h = ptr::null_mut();
    let bad = CString::new("inv∘nope(2)").unwrap();
    unsafe {
        assert_eq!(heis_map_parse(bad.as_ptr(), &mut h), HeisStatus::Parse);
        assert!(h.is_null());
        assert!(last_error().contains("nope"));
        assert_eq!(heis_map_parse(ptr::null(), &mut h), HeisStatus::NullPointer);

        let inv = parse("inv");
        let mut q = HeisPoint { x: 0.0, y: 0.0, t: 0.0 };
        assert_eq!(heis_map_apply(inv, q, &mut q), HeisStatus::Singular);
        assert!(last_error().contains("inversion singular at origin"));
        let mut out = HeisComplex { re: 0.0, im: 0.0 };
        assert_eq!(heis_s_cr(ptr::null(), P, &mut out), HeisStatus::NullPointer);
        assert_eq!(heis_s_cr(inv, P, ptr::null_mut()), HeisStatus::NullPointer);
        heis_map_free(inv);
        heis_map_free(ptr::null_mut());
    }
}

#[test]
fn group_operations() {
    let p = HeisPoint { x: 1.0, y: 2.0, t: 3.0 };
    let q = HeisPoint { x: -0.5, y: 0.25, t: 1.0 };
    let pq = heis_group_mul(p, q);
    // t₁ + t₂ + 2(x₂y₁ − x₁y₂) = 3 + 1 + 2(−1 − 0.25)
    assert_eq!(pq, HeisPoint { x: 0.5, y: 2.25, t: 1.5 });
    let e = heis_group_mul(p, heis_group_inv(p));
    assert_eq!(e, HeisPoint { x: 0.0, y: 0.0, t: 0.0 });
    let n = heis_koranyi_norm(HeisPoint { x: 1.0, y: 0.0, t: 0.0 });
    assert!((n - 1.0).abs() < 1e-15);
    // dilation homogeneity
    let d = heis_koranyi_norm(HeisPoint { x: 2.0, y: 4.0, t: 12.0 });
    assert!((d - 2.0 * heis_koranyi_norm(p)).abs() < 1e-12);
}

#[test]
fn ledger_json_round_trip() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(heis_ledger_json(&mut s), HeisStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        heis_string_free(s);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let entries = v["entries"].as_array().unwrap();
        assert_eq!(entries.len(), 12);
        assert_eq!(entries[0]["id"], "a");
        assert_eq!(entries[0]["verdict"], "confirmed");
    }
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(heis_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/heis.h")).unwrap();
    for name in [
        "heis_map_parse",
        "heis_map_free",
        "heis_s_cr",
        "heis_s_cl",
        "heis_preschwarzian",
        "heis_assess_contact",
        "heis_group_mul",
        "heis_koranyi_norm",
        "heis_ledger_json",
        "heis_string_free",
        "heis_last_error",
        "typedef struct HeisMap HeisMap",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn errors_are_thread_local() {
    let bad = CString::new("bogus").unwrap();
    let mut h = ptr::null_mut();
    unsafe { heis_map_parse(bad.as_ptr(), &mut h) };
    assert!(!last_error().is_empty());
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
}

#[test]
fn header_is_valid_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"heis.h\"\nint main(void) { HeisPoint p = {1, 2, 3}; return heis_koranyi_norm(p) > 0 ? 0 : 1; }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("heis-ffi-c");
    std::fs::create_dir_all(&d).unwrap();
    d
}
