//! Replays the checked-in fuzz seeds through the same entry points the fuzz
//! targets exercise, so the parsers are covered on stable toolchains too.

use std::fs;
use std::path::PathBuf;

use usc_raman::config::{parse_config, parse_queries, Zoom};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("config_parse") {
        match parse_config(&text) {
            Ok((cfg, _)) => {
                cfg.omega_s_grid().unwrap();
                cfg.omega_l_grid().unwrap();
                accepted += 1;
            }
            Err(e) => assert!(e.is_config(), "{name}: {e}"),
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn zoom_seeds() {
    let results: Vec<_> = seeds("zoom_parse").into_iter().map(|(n, t)| (n, t.parse::<Zoom>())).collect();
    for (name, r) in &results {
        let expect_ok = matches!(name.as_str(), "basic" | "spaces");
        assert_eq!(r.is_ok(), expect_ok, "{name}: {r:?}");
        if let Err(e) = r {
            assert!(e.is_config());
        }
    }
}

#[test]
fn query_seeds() {
    for (name, text) in seeds("classify_queries") {
        let r = parse_queries(&text);
        let expect_ok = matches!(name.as_str(), "two.json" | "empty.json");
        assert_eq!(r.is_ok(), expect_ok, "{name}: {r:?}");
    }
}

#[test]
fn oversized_grid_is_rejected_not_allocated() {
    let err = parse_config(r#"{"grids": {"omega_s": {"start": 0.1, "stop": 1.0, "points": 18446744073709551615}}}"#)
        .unwrap_err();
    assert!(err.is_config(), "{err}");
    assert!(parse_config(r#"{"model": {"n_fock": 100000000}}"#).unwrap_err().is_config());
}
