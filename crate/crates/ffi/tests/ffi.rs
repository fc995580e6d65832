use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use clarisim_ffi::*;

fn last_error() -> String {
    let p = clarisim_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(clarisim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn scalar_functions_and_error_codes() {
    let mut label = ClarisimUnderspec::Sufficient;
    unsafe {
        assert_eq!(clarisim_label_underspec(1, 4, &mut label), ClarisimStatus::Ok);
        assert_eq!(label, ClarisimUnderspec::CriticalUnder);
        assert_eq!(clarisim_label_underspec(3, 4, &mut label), ClarisimStatus::Ok);
        assert_eq!(label, ClarisimUnderspec::MinorUnder);
        assert!(clarisim_last_error_message().is_null());
        assert_eq!(clarisim_label_underspec(5, 4, &mut label), ClarisimStatus::InvalidArgument);
        assert!(last_error().contains("label_underspec"));
        assert_eq!(clarisim_label_underspec(1, 4, ptr::null_mut()), ClarisimStatus::NullPointer);

        let text = CString::new("Before I recommend anything:\n1. What genre do you prefer?").unwrap();
        let mut tau = ClarisimStrategy::Misc;
        assert_eq!(clarisim_classify_tau(text.as_ptr(), &mut tau), ClarisimStatus::Ok);
        assert_eq!(tau, ClarisimStrategy::Clarify);
        let mut cost = 0usize;
        assert_eq!(clarisim_cost(text.as_ptr(), &mut cost), ClarisimStatus::Ok);
        assert_eq!(cost, 10);
        assert_eq!(clarisim_cost(ptr::null(), &mut cost), ClarisimStatus::NullPointer);

        let bad = [0xffu8, 0];
        assert_eq!(clarisim_classify_tau(bad.as_ptr().cast(), &mut tau), ClarisimStatus::InvalidUtf8);
    }
}

#[test]
fn corpus_catalog_and_metapolicy_round_trip() {
    unsafe {
        let intent = CString::new("movie_rec").unwrap();
        let mut corpus = ptr::null_mut();
        assert_eq!(clarisim_corpus_generate(intent.as_ptr(), 40, 3, &mut corpus), ClarisimStatus::Ok);
        let mut n = 0;
        assert_eq!(clarisim_corpus_len(corpus, &mut n), ClarisimStatus::Ok);
        assert_eq!(n, 40);

        let mut json = ptr::null_mut();
        assert_eq!(clarisim_corpus_to_json(corpus, &mut json), ClarisimStatus::Ok);
        let parsed: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(parsed["records"].as_array().unwrap().len(), 40);
        clarisim_string_free(json);

        let mut catalog = ptr::null_mut();
        assert_eq!(clarisim_catalog_generate(corpus, 100, 4, &mut catalog), ClarisimStatus::Ok);
        let mut qstar = ptr::null_mut();
        assert_eq!(clarisim_qstar_json(corpus, catalog, 2, 5, &mut qstar), ClarisimStatus::Ok);

        let mut meta = ptr::null_mut();
        assert_eq!(clarisim_metapolicy_from_qstar_json(qstar, 1, 0.0, &mut meta), ClarisimStatus::Ok);
        let records: Vec<serde_json::Value> = serde_json::from_str(CStr::from_ptr(qstar).to_str().unwrap()).unwrap();
        clarisim_string_free(qstar);

        // With k = 1 the selection on a training query is that query's own argmax.
        for i in 0..n {
            let mut tau = ClarisimStrategy::Misc;
            assert_eq!(clarisim_metapolicy_select(meta, corpus, i, &mut tau), ClarisimStatus::Ok);
            let mut label = ClarisimUnderspec::Sufficient;
            assert_eq!(clarisim_corpus_label(corpus, i, &mut label), ClarisimStatus::Ok);
            let suffix = format!("-{i:06}:m");
            let rec = records.iter().find(|r| r["query_id"].as_str().unwrap().ends_with(&suffix)).unwrap();
            let q = &rec["qstar"];
            let best = ["clarify", "direct_response", "hedge", "interrogate"]
                .iter()
                .map(|k| q[k].as_f64().unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let name = match tau {
                ClarisimStrategy::Clarify => "clarify",
                ClarisimStrategy::DirectResponse => "direct_response",
                ClarisimStrategy::Hedge => "hedge",
                ClarisimStrategy::Interrogate => "interrogate",
                other => panic!("unexpected {other:?}"),
            };
            assert_eq!(q[name].as_f64().unwrap(), best);
        }
        let mut tau = ClarisimStrategy::Misc;
        assert_eq!(clarisim_metapolicy_select(meta, corpus, n, &mut tau), ClarisimStatus::InvalidArgument);

        clarisim_metapolicy_free(meta);
        clarisim_catalog_free(catalog);
        clarisim_corpus_free(corpus);
        clarisim_corpus_free(ptr::null_mut());
    }
}

#[test]
fn malformed_inputs_map_to_status_codes() {
    unsafe {
        let mut corpus = ptr::null_mut();
        let unknown = CString::new("no_such_intent").unwrap();
        let status = clarisim_corpus_generate(unknown.as_ptr(), 5, 0, &mut corpus);
        assert_ne!(status, ClarisimStatus::Ok);
        assert!(corpus.is_null());
        assert!(!last_error().is_empty());

        let mut meta = ptr::null_mut();
        let junk = CString::new("{not json").unwrap();
        assert_eq!(clarisim_metapolicy_from_qstar_json(junk.as_ptr(), 1, 0.0, &mut meta), ClarisimStatus::Parse);
        let empty = CString::new("[]").unwrap();
        assert_ne!(clarisim_metapolicy_from_qstar_json(empty.as_ptr(), 1, 0.0, &mut meta), ClarisimStatus::Ok);
        assert!(meta.is_null());
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/clarisim.h")
}

#[test]
fn header_declares_the_exported_symbols() {
    let h = std::fs::read_to_string(header()).unwrap();
    for sym in [
        "clarisim_version",
        "clarisim_last_error_message",
        "clarisim_string_free",
        "clarisim_label_underspec",
        "clarisim_classify_tau",
        "clarisim_cost",
        "clarisim_corpus_generate",
        "clarisim_corpus_len",
        "clarisim_corpus_label",
        "clarisim_corpus_to_json",
        "clarisim_corpus_free",
        "clarisim_catalog_generate",
        "clarisim_catalog_free",
        "clarisim_qstar_json",
        "clarisim_metapolicy_from_qstar_json",
        "clarisim_metapolicy_select",
        "clarisim_metapolicy_free",
        "typedef struct ClarisimCorpus ClarisimCorpus;",
        "CLARISIM_STATUS_OK = 0",
    ] {
        assert!(h.contains(sym), "{sym}");
    }
}

/// Compiles and links a C program against the header and static library.
#[test]
fn c_program_links_against_the_static_library() {
    let target_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target_dir.join("libclarisim_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("no C compiler or static library at {}; skipping link check", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "clarisim.h"

int main(void) {
    ClarisimCorpus *corpus = NULL;
    size_t n = 0;
    ClarisimStrategy tau;
    ClarisimUnderspec label;
    if (clarisim_corpus_generate("gift_rec", 12, 1, &corpus) != CLARISIM_STATUS_OK) return 1;
    if (clarisim_corpus_len(corpus, &n) != CLARISIM_STATUS_OK || n != 12) return 2;
    if (clarisim_classify_tau("- Item #0001", &tau) != CLARISIM_STATUS_OK || tau != CLARISIM_STRATEGY_DIRECT_RESPONSE) return 3;
    if (clarisim_label_underspec(9, 4, &label) != CLARISIM_STATUS_INVALID_ARGUMENT) return 4;
    if (clarisim_last_error_message() == NULL) return 5;
    clarisim_corpus_free(corpus);
    printf("%s\n", clarisim_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
