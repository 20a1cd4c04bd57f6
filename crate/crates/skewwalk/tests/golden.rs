//! The bundled example config must reproduce `tests/golden/example.json`.
//!
//! Regenerate with `SKEWWALK_BLESS=1 cargo test -p skewwalk --test golden`.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use skewwalk::report::ExperimentReport;

const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-9;

fn crate_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run_example(out: &Path) -> Vec<ExperimentReport> {
    let status = Command::new(env!("CARGO_BIN_EXE_skewwalk"))
        .arg("run")
        .arg("--config")
        .arg(crate_path("configs/example.toml"))
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    assert_eq!(status.code(), Some(0), "example config should pass");
    let mut reports: Vec<ExperimentReport> = std::fs::read_dir(out)
        .expect("output dir")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| ExperimentReport::load(&p).expect("report parses").replay_view())
        .collect();
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    reports
}

fn close(got: Option<f64>, want: Option<f64>, abs: f64, rel: f64) -> bool {
    match (got, want) {
        (None, None) => true,
        (Some(g), Some(w)) => (g - w).abs() <= abs + rel * w.abs(),
        _ => false,
    }
}

#[test]
fn example_config_reproduces_golden_report() {
    let tmp = tempfile::tempdir().unwrap();
    let got = run_example(tmp.path());
    let golden_path = crate_path("tests/golden/example.json");

    if std::env::var_os("SKEWWALK_BLESS").is_some() {
        let doc = json!({
            "tolerances": { "abs": ABS_TOL, "rel": REL_TOL },
            "reports": got,
        });
        std::fs::write(&golden_path, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
        return;
    }

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&golden_path).expect("golden file present")).unwrap();
    let abs = doc["tolerances"]["abs"].as_f64().unwrap();
    let rel = doc["tolerances"]["rel"].as_f64().unwrap();
    let want: Vec<ExperimentReport> = serde_json::from_value(doc["reports"].clone()).unwrap();

    let ids = |rs: &[ExperimentReport]| rs.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&got), ids(&want));
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g.schema_version, w.schema_version);
        assert_eq!(g.config, w.config, "{}: embedded config", g.id);
        assert_eq!(g.seeds, w.seeds, "{}: seeds", g.id);
        assert_eq!(g.verdict, w.verdict, "{}: verdict", g.id);
        assert_eq!(g.grid.len(), w.grid.len(), "{}: grid size", g.id);
        for (pg, pw) in g.grid.iter().zip(&w.grid) {
            assert_eq!(pg.params, pw.params, "{}: grid params", g.id);
            assert!(
                close(pg.value, pw.value, abs, rel),
                "{} at {:?}: {:?} vs golden {:?}",
                g.id,
                pg.params,
                pg.value,
                pw.value
            );
        }
        assert_eq!(g.criteria.len(), w.criteria.len(), "{}: criteria", g.id);
        for (cg, cw) in g.criteria.iter().zip(&w.criteria) {
            assert_eq!(cg.name, cw.name);
            assert_eq!(cg.verdict, cw.verdict, "{}: {}", g.id, cg.name);
            assert!(close(cg.observed, cw.observed, abs, rel), "{}: {} observed {:?} vs {:?}", g.id, cg.name, cg.observed, cw.observed);
        }
    }
}
