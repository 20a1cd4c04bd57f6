use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use skewwalk::config::{OUTPUT_DIR_ENV, WORKERS_ENV};
use skewwalk::io::read_dump;
use skewwalk::report::{ExperimentReport, ReportBuilder, Verdict};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_skewwalk"));
    c.env_remove(WORKERS_ENV).env_remove(OUTPUT_DIR_ENV);
    c
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

fn files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == ext)).collect())
        .unwrap_or_default();
    v.sort();
    v
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
seed = 11
operation = "experiment"

[[experiment]]
name = "path_decomposition"
n_paths = 8
n_steps = 500

[[experiment]]
name = "poisson_hitting_mc"
n_paths = 2000
"#;

fn report_with(dir: &Path, name: &str, verdicts: &[Verdict]) -> PathBuf {
    let mut b = ReportBuilder::new(name, &serde_json::json!({}));
    b.seed(1);
    for (i, &v) in verdicts.iter().enumerate() {
        b.criterion(format!("c{i}"), Some(1.0), Some(1.0), v, "fixture");
    }
    let p = dir.join(format!("{name}.json"));
    std::fs::write(&p, b.finish().to_json().unwrap()).unwrap();
    p
}

#[test]
fn help_lists_subcommands() {
    let out = run(bin().arg("--help"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["run", "simulate", "transform", "resolvent", "experiment", "report"] {
        assert!(text.lines().any(|l| l.trim_start().starts_with(sub)), "missing {sub} in\n{text}");
    }
    assert_eq!(run(bin().args(["run", "--help"])).status.code(), Some(0));
}

#[test]
fn same_config_and_seed_give_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let mut texts = Vec::new();
    for (dir, workers) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out_dir = tmp.path().join(dir);
        let o = run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_dir).args(["--workers", workers]));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let reports: Vec<String> = files(&out_dir, "json")
            .iter()
            .map(|p| ExperimentReport::load(p).unwrap().replay_view().to_json().unwrap())
            .collect();
        assert_eq!(reports.len(), 2);
        texts.push(reports);
    }
    assert_eq!(texts[0], texts[1]);
    assert_eq!(texts[0], texts[2], "worker count must not change results");
}

#[test]
fn reports_embed_config_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let out_dir = tmp.path().join("o");
    run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_dir).args(["--seed", "99"]));
    for p in files(&out_dir, "json") {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["seeds"][0], 99);
        assert_eq!(v["config"]["run"]["seed"], 99);
        assert!(v["config"]["experiment"].is_object());
        assert!(v["config"]["run"].get("output_dir").is_none());
    }
    assert_eq!(files(&out_dir, "csv").len(), 2);
}

#[test]
fn report_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = run(bin().arg("report"));
    assert_eq!(empty.status.code(), Some(0));

    let pass = report_with(tmp.path(), "p", &[Verdict::Pass]);
    let fail = report_with(tmp.path(), "f", &[Verdict::Pass, Verdict::Fail]);
    let inc = report_with(tmp.path(), "i", &[Verdict::Inconclusive]);

    assert_eq!(run(bin().arg("report").arg(&pass)).status.code(), Some(0));
    assert_eq!(run(bin().arg("report").arg(&pass).arg(&fail)).status.code(), Some(1));
    assert_eq!(run(bin().arg("report").arg(&pass).arg(&inc)).status.code(), Some(2));
    assert_eq!(run(bin().arg("report").arg(&inc).arg(&fail)).status.code(), Some(1));

    let summary_dir = tmp.path().join("nested/summary");
    let o = run(bin().arg("report").arg(&pass).arg(&inc).arg("--out").arg(&summary_dir));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("overall: inconclusive"), "{text}");
    let csv = std::fs::read_to_string(summary_dir.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(!csv.contains('\r'));
}

#[test]
fn schema_mismatch_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let p = report_with(tmp.path(), "old", &[Verdict::Pass]);
    let text = std::fs::read_to_string(&p).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 99");
    std::fs::write(&p, text).unwrap();
    let o = run(bin().arg("report").arg(&p));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        "seed = 1\n[[experiment]]\nname = \"potter_bound\"\ndelta = 0.2\nthetta_min = 0.1\n",
    );
    let o = run(bin().arg("run").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("experiment[0]") && err.contains("thetta_min"), "{err}");

    let cfg = write(tmp.path(), "bad2.toml", "seed = 1\n[xi]\nkind = \"stable\"\nalpha = \"x\"\n");
    let err = String::from_utf8_lossy(&run(bin().arg("run").arg("--config").arg(&cfg)).stderr).into_owned();
    assert!(err.contains("xi"), "{err}");
}

#[test]
fn missing_output_dir_is_created() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("deep/er/out");
    let o = run(bin().args(["experiment", "path_decomposition", "--seed", "3"]).arg("--out").arg(&out_dir));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let js = files(&out_dir, "json");
    assert_eq!(js.len(), 1);
    let name = js[0].file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.starts_with("path_decomposition_") && name.ends_with("Z.json"), "{name}");
}

#[test]
fn environment_overrides_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("from_env");
    let flag_dir = tmp.path().join("from_flag");
    let args = ["experiment", "path_decomposition", "--seed", "3"];

    let o = run(bin().args(args).env(OUTPUT_DIR_ENV, &env_dir).env(WORKERS_ENV, "2"));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(files(&env_dir, "json").len(), 1);

    let o = run(bin().args(args).arg("--out").arg(&flag_dir).env(OUTPUT_DIR_ENV, &env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(files(&flag_dir, "json").len(), 1);
    assert_eq!(files(&env_dir, "json").len(), 1);

    let o = run(bin().args(args).env(WORKERS_ENV, "many").arg("--out").arg(&flag_dir));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(WORKERS_ENV));
}

#[test]
fn seed_is_required_without_config() {
    let o = run(bin().args(["experiment", "path_decomposition"]));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn unknown_experiment_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(bin().args(["experiment", "nope", "--seed", "1"]).arg("--out").arg(tmp.path()));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("potter_bound"));
}

#[test]
fn transform_writes_values_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "t.toml",
        "seed = 1\n[xi]\nkind = \"simple\"\n[transform]\nquantity = \"hit_gf\"\nx = [1.0, 2.0]\ns = 0.6\n",
    );
    let o = run(bin().arg("transform").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csvs: Vec<PathBuf> = files(tmp.path(), "csv")
        .into_iter()
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("transform_values_"))
        .collect();
    assert_eq!(csvs.len(), 1);
    let text = std::fs::read_to_string(&csvs[0]).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,lambda,v,value,err_estimate,method"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let value: f64 = first[3].parse().unwrap();
    assert!((value - 1.0 / 3.0).abs() < 1e-10, "{value}");
    assert!(!text.contains('\r'));
}

#[test]
fn transform_off_lattice_point_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "t.toml",
        "seed = 1\n[transform]\nquantity = \"green\"\nx = [0.5]\ns = 0.5\n",
    );
    let o = run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("transform.x"));
}

#[test]
fn resolvent_writes_values_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "r.toml",
        "seed = 1\n[eta]\nkind = \"two_sided\"\nbeta = 0.3\nc_plus = 0.7\n\
         [resolvent]\nquantity = \"skew_ratio\"\nlambda = 1.0\nv = [1000.0]\n[resolvent.f]\nkind = \"one\"\n",
    );
    let o = run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = files(tmp.path(), "csv")
        .into_iter()
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("resolvent_values_"))
        .expect("values csv");
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,x,lambda,v,value,err,method"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "skew_ratio");
    let value: f64 = row[4].parse().unwrap();
    assert!((value - 1.0).abs() < 1e-12, "λR_λ1 = {value}");
}

#[test]
fn simulate_dump_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.toml",
        "seed = 5\n[eta]\nkind = \"geometric\"\nq = 0.5\n[simulate]\nx0 = 0\nn_steps = 300\nn_paths = 4\n",
    );
    let o = run(bin().arg("simulate").arg("--config").arg(&cfg).arg("--out").arg(tmp.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dumps = files(tmp.path(), "skwk");
    assert_eq!(dumps.len(), 1);
    let recs = read_dump(std::fs::File::open(&dumps[0]).unwrap(), &dumps[0]).unwrap();
    assert_eq!(recs.len(), 4);
    for r in &recs {
        assert_eq!(r.seed, 5);
        assert_eq!(r.x0, 0);
        assert_eq!(r.values.len(), 301);
        assert_eq!(r.values[0], 0);
    }
    let report = ExperimentReport::load(&files(tmp.path(), "json")[0]).unwrap();
    assert_eq!(report.criterion("decomposition_exact").unwrap().verdict, Verdict::Pass);
    let finals: Vec<f64> = report.grid.iter().filter_map(|g| g.value).collect();
    let dumped: Vec<f64> = recs.iter().map(|r| *r.values.last().unwrap() as f64).collect();
    assert_eq!(finals, dumped);
}
