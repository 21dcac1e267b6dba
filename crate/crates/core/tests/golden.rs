mod common;

use common::{cases, golden_path, run_case};

#[test]
fn every_case_matches_its_golden_file() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut stale = Vec::new();
    for c in cases() {
        let got = run_case(&c);
        let path = golden_path(&c);
        if update {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(want) if want == got => {}
            Ok(_) => stale.push(format!("{} differs", c.name)),
            Err(_) => stale.push(format!("{} missing", c.name)),
        }
    }
    assert!(stale.is_empty(), "{stale:#?}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for c in cases().iter().filter(|c| c.name.starts_with("torus_") || c.name.contains("plane")) {
        assert_eq!(run_case(c), run_case(c), "{}", c.name);
    }
}
