use std::ffi::{c_char, CStr, CString};
use std::ptr;

use schema_focus_ffi::*;

const ABC: &str = r#"{"name":"abc","entity_types":[
 {"id":"A","properties":["p1","p2"]},
 {"id":"B","properties":["p2","p3"]},
 {"id":"C","properties":["p3"]}]}"#;

fn parse(text: &str) -> *mut SfSchema {
    let mut out = ptr::null_mut();
    let st = unsafe {
        sf_schema_parse(
            text.as_ptr(),
            text.len(),
            SfInputFormat::Canonical,
            ptr::null(),
            &mut out,
        )
    };
    assert_eq!(st, SfStatus::Ok, "{}", last_error());
    out
}

fn last_error() -> String {
    let p = sf_last_error();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

fn take(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { sf_string_free(p) };
    s
}

#[test]
fn metrics_through_handle() {
    let s = parse(ABC);
    unsafe {
        assert_eq!(sf_schema_entity_count(s), 3);
        assert_eq!(sf_schema_property_count(s), 3);
        let a = CString::new("A").unwrap();
        let mut v = 0.0;
        assert_eq!(sf_focus_e(s, a.as_ptr(), &mut v), SfStatus::Ok);
        assert!((v - 1.5).abs() < 1e-12);
        assert_eq!(sf_normalized_cue(s, a.as_ptr(), &mut v), SfStatus::Ok);
        assert!((v - 0.75).abs() < 1e-12);
        assert_eq!(sf_cue_cr(s, &mut v), SfStatus::Ok);
        assert!((v - 0.6).abs() < 1e-12);
        assert_eq!(sf_focus_k(s, &mut v), SfStatus::Ok);
        assert!((v - (0.75 + 0.5 + 0.5) / 3.0).abs() < 1e-12);
        assert_eq!(sf_balance(s, &mut v), SfStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        sf_schema_free(s);
    }
}

#[test]
fn unknown_entity_is_validation_error() {
    let s = parse(ABC);
    let z = CString::new("Z").unwrap();
    let mut v = 0.0;
    let st = unsafe { sf_focus_e(s, z.as_ptr(), &mut v) };
    assert_eq!(st, SfStatus::Validation);
    assert!(last_error().contains('Z'));
    unsafe { sf_schema_free(s) };
}

#[test]
fn parse_errors_and_nulls() {
    let bad = "{ not json";
    let mut out = ptr::null_mut();
    let st = unsafe { sf_schema_parse(bad.as_ptr(), bad.len(), SfInputFormat::Json, ptr::null(), &mut out) };
    assert_eq!(st, SfStatus::Parse);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let mut v = 0.0;
    assert_eq!(unsafe { sf_focus_k(ptr::null(), &mut v) }, SfStatus::NullArgument);
    unsafe { sf_schema_free(ptr::null_mut()) };
    unsafe { sf_string_free(ptr::null_mut()) };
}

#[test]
fn undefined_metric_status() {
    let s = parse(r#"{"name":"e","entity_types":[{"id":"A","properties":[]}]}"#);
    let mut v = 0.0;
    assert_eq!(unsafe { sf_cue_cr(s, &mut v) }, SfStatus::UndefinedMetric);
    assert_eq!(unsafe { sf_schema_warning_count(s) }, 1);
    assert!(!unsafe { sf_schema_warning(s, 0) }.is_null());
    assert!(unsafe { sf_schema_warning(s, 1) }.is_null());
    unsafe { sf_schema_free(s) };
}

#[test]
fn string_outputs() {
    let s = parse(ABC);
    unsafe {
        let mut out = ptr::null_mut();
        let metric = CString::new("focus").unwrap();
        assert_eq!(
            sf_rank_entities(s, metric.as_ptr(), ptr::null(), SfOutputFormat::Csv, &mut out),
            SfStatus::Ok
        );
        assert_eq!(
            take(out),
            "rank,id,label,score\n1,A,A,1.500000\n2,B,B,1.000000\n3,C,C,0.500000\n"
        );

        let bogus = CString::new("bogus").unwrap();
        assert_eq!(
            sf_rank_entities(s, bogus.as_ptr(), ptr::null(), SfOutputFormat::Csv, &mut out),
            SfStatus::Usage
        );

        assert_eq!(sf_export_cxt(s, &mut out), SfStatus::Ok);
        assert_eq!(take(out), "B\n\n3\n3\n\nA\nB\nC\np1\np2\np3\nXX.\n.XX\n..X\n");

        assert_eq!(sf_metric_report(s, SfOutputFormat::Json, &mut out), SfStatus::Ok);
        assert!(take(out).contains("\"focus-v1\""));

        assert_eq!(sf_schema_tags(s, 2, &mut out), SfStatus::Ok);
        assert_eq!(take(out), r#"["a","b"]"#);

        assert_eq!(sf_schema_to_json(s, &mut out), SfStatus::Ok);
        assert!(take(out).contains("\"abc\""));

        let mut inh = ptr::null_mut();
        assert_eq!(sf_schema_inherit(s, &mut inh), SfStatus::Ok);
        assert_eq!(sf_schema_entity_count(inh), 3);
        sf_schema_free(inh);
        sf_schema_free(s);
    }
}

#[test]
fn etr_and_spearman() {
    let s = parse(ABC);
    let tree = CString::new("tree").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { sf_etr_run(s, tree.as_ptr(), 42, 20, 1.0, 0.0, 5, 3, &mut out) };
    assert_eq!(st, SfStatus::Ok, "{}", last_error());
    let json = take(out);
    assert!(json.contains("\"mean_accuracy\": 1.0"), "{json}");

    let mut v = 0.0;
    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [10.0, 20.0, 30.0, 35.0];
    assert_eq!(unsafe { sf_spearman(x.as_ptr(), y.as_ptr(), 4, &mut v) }, SfStatus::Ok);
    assert!((v - 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { sf_spearman(x.as_ptr(), y.as_ptr(), 2, &mut v) },
        SfStatus::UndefinedMetric
    );
    unsafe { sf_schema_free(s) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/schema_focus.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let mut n = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            n += 1;
        }
    }
    assert!(n >= 20, "only {n} exports found");
    assert!(header.contains("typedef struct SfSchema SfSchema;"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/schema_focus.h");
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler available; skipping");
        return;
    };
    assert!(status.success());
}
