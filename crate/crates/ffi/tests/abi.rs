use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use coarse_lab_ffi::*;

fn gen(family: &str, n: usize) -> *mut CoarseSpace {
    let f = CString::new(family).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { coarse_space_generate(f.as_ptr(), n, &mut s) },
        CoarseStatus::Ok
    );
    s
}

fn last_error() -> String {
    let p = coarse_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn space_roundtrip() {
    let s = gen("zplus", 10);
    let (mut len, mut d, mut idx, mut bad) = (0usize, 0f64, 0usize, 1usize);
    unsafe {
        assert_eq!(coarse_space_len(s, &mut len), CoarseStatus::Ok);
        assert_eq!(coarse_space_dist(s, 2, 7, &mut d), CoarseStatus::Ok);
        let l = CString::new("4").unwrap();
        assert_eq!(coarse_space_index_of(s, l.as_ptr(), &mut idx), CoarseStatus::Ok);
        assert_eq!(coarse_space_validate(s, &mut bad), CoarseStatus::Ok);
        assert_eq!(coarse_space_dist(s, 2, 99, &mut d), CoarseStatus::OutOfRange);
        assert!(!last_error().is_empty());
        coarse_space_free(s);
    }
    assert_eq!((len, idx, bad), (11, 4, 0));
}

#[test]
fn json_space_and_errors() {
    let ok = CString::new(r#"{"points":["a","b"],"matrix":[[0,1],[1,0]]}"#).unwrap();
    let bad = CString::new("{not json").unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(coarse_space_from_json(ok.as_ptr(), &mut s), CoarseStatus::Ok);
        let mut c = 0.0;
        assert_eq!(coarse_connectivity_threshold(s, &mut c), CoarseStatus::Ok);
        assert_eq!(c, 1.0);
        coarse_space_free(s);
        let mut t = ptr::null_mut();
        assert_eq!(coarse_space_from_json(bad.as_ptr(), &mut t), CoarseStatus::Parse);
        assert!(t.is_null());
        assert_eq!(coarse_space_from_json(ptr::null(), &mut t), CoarseStatus::NullPointer);
        assert_eq!(last_error(), "null pointer argument");
    }
}

#[test]
fn map_controls() {
    let x = gen("zplus", 8);
    let half: Vec<usize> = (0..=8).map(|i| i / 2).collect();
    let id: Vec<usize> = (0..=8).collect();
    let scales = [1.0, 2.0, 4.0];
    unsafe {
        let (mut f, mut g) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            coarse_map_new(x, x, half.as_ptr(), half.len(), &mut f),
            CoarseStatus::Ok
        );
        assert_eq!(coarse_map_new(x, x, id.as_ptr(), id.len(), &mut g), CoarseStatus::Ok);
        let mut bad = ptr::null_mut();
        assert_eq!(
            coarse_map_new(x, x, id.as_ptr(), 3, &mut bad),
            CoarseStatus::InvalidInput
        );

        let mut c = 0.0;
        assert_eq!(coarse_closeness(f, g, &mut c), CoarseStatus::Ok);
        assert_eq!(c, 4.0);

        let mut t = ptr::null_mut();
        assert_eq!(
            coarse_uniformity_control(f, scales.as_ptr(), 3, &mut t),
            CoarseStatus::Ok
        );
        let (mut n, mut sc, mut b) = (0usize, 0.0, 0.0);
        assert_eq!(coarse_control_len(t, &mut n), CoarseStatus::Ok);
        assert_eq!(n, 3);
        assert_eq!(coarse_control_entry(t, 2, &mut sc, &mut b), CoarseStatus::Ok);
        assert_eq!((sc, b), (4.0, 2.0));
        assert_eq!(coarse_control_at(t, 1.5, &mut b), CoarseStatus::Ok);
        assert_eq!(b, 1.0);
        assert_eq!(coarse_control_entry(t, 3, &mut sc, &mut b), CoarseStatus::OutOfRange);

        let mut u = ptr::null_mut();
        assert_eq!(
            coarse_upper_control(x, 1.0, scales.as_ptr(), 3, &mut u),
            CoarseStatus::Ok
        );
        assert_eq!(coarse_control_entry(u, 1, &mut sc, &mut b), CoarseStatus::Ok);
        assert_eq!(b, 3.0);

        coarse_control_free(t);
        coarse_control_free(u);
        coarse_map_free(f);
        coarse_map_free(g);
        coarse_space_free(x);
    }
}

#[test]
fn cone_distance() {
    let ok = CString::new(r#"{"points":["a","b"],"matrix":[[0,1],[1,0]]}"#).unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        coarse_space_from_json(ok.as_ptr(), &mut s);
        let mut d = 0.0;
        assert_eq!(coarse_cone_metric(s, 0, 3, 0, 5, &mut d), CoarseStatus::Ok);
        assert!((d - 2.0).abs() < 1e-9);
        assert_eq!(coarse_cone_metric(s, 0, 1, 1, 1, &mut d), CoarseStatus::Ok);
        assert!((d - 1.0).abs() < 1e-9);
        coarse_space_free(s);
    }
}

#[test]
fn suite_csv() {
    let tower = CString::new("zplus:16,32").unwrap();
    let mut pass = false;
    let mut csv = ptr::null_mut();
    unsafe {
        assert_eq!(coarse_suite_run(tower.as_ptr(), &mut pass, &mut csv), CoarseStatus::Ok);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        coarse_string_free(csv);
        assert!(text.starts_with("check,scale,constant,bound,verdict"));
        let empty = CString::new("zplus:").unwrap();
        assert_ne!(coarse_suite_run(empty.as_ptr(), &mut pass, &mut csv), CoarseStatus::Ok);
    }
}

#[test]
fn frees_accept_null() {
    unsafe {
        coarse_space_free(ptr::null_mut());
        coarse_map_free(ptr::null_mut());
        coarse_control_free(ptr::null_mut());
        coarse_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/coarse_lab.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in [
        "coarse_space_generate",
        "coarse_last_error",
        "coarse_suite_run",
        "COARSE_STATUS_OK",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(
        &src,
        format!("#include \"{header}\"\nint main(void) {{ return COARSE_STATUS_OK; }}\n"),
    )
    .unwrap();
    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status()
    {
        Ok(st) => assert!(st.success(), "header failed to compile"),
        Err(_) => eprintln!("cc not available; skipped compile check"),
    }
}
