//! Experiment reports, their JSON and CSV forms, and the summary table.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Ordered by severity, so the verdict of a report is the max over its
/// criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        }
    }

    /// Process exit status: pass 0, fail 1, inconclusive 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: BTreeMap<String, Value>,
    pub value: Option<f64>,
    pub err: Option<f64>,
}

/// A recorded check: `observed` compared against `threshold` gives
/// `verdict`; `detail` says how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub observed: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub id: String,
    /// The resolved configuration the report was produced from.
    pub config: Value,
    pub grid: Vec<GridPoint>,
    pub criteria: Vec<Criterion>,
    pub verdict: Verdict,
    pub seeds: Vec<u64>,
    pub runtime_s: f64,
    pub timestamp: String,
}

impl ExperimentReport {
    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Json {
            path: self.id.clone().into(),
            source: e,
        })?;
        s.push('\n');
        Ok(s)
    }

    /// Parse and check the schema version.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        let found = raw.get("schema_version").and_then(Value::as_u64).unwrap_or(0) as u32;
        if found != SCHEMA_VERSION {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                found,
                expected: SCHEMA_VERSION,
            });
        }
        serde_json::from_value(raw).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text, path)
    }

    /// CSV mirror of the grid: one row per point, one column per parameter
    /// name (union over points, sorted), then `value,err`.
    pub fn write_grid_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut keys: Vec<&String> = self.grid.iter().flat_map(|p| p.params.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut out = crate::io::csv_writer(w);
        let mut header: Vec<&str> = keys.iter().map(|k| k.as_str()).collect();
        header.extend(["value", "err"]);
        out.write_record(&header)?;
        for p in &self.grid {
            let mut row: Vec<String> = keys
                .iter()
                .map(|k| p.params.get(*k).map(cell).unwrap_or_default())
                .collect();
            row.push(p.value.map(crate::io::fmt_f64).unwrap_or_default());
            row.push(p.err.map(crate::io::fmt_f64).unwrap_or_default());
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| Error::Io {
            path: self.id.clone().into(),
            source: e,
        })?;
        Ok(())
    }

    /// Copy with the fields that legitimately differ between replays
    /// (`timestamp`, `runtime_s`) blanked.
    pub fn replay_view(&self) -> Self {
        Self {
            runtime_s: 0.0,
            timestamp: String::new(),
            ..self.clone()
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => crate::io::fmt_f64(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Assembles a report; the verdict is derived from the criteria on
/// [`finish`](Self::finish).
#[derive(Debug)]
pub struct ReportBuilder {
    id: String,
    config: Value,
    grid: Vec<GridPoint>,
    criteria: Vec<Criterion>,
    seeds: Vec<u64>,
    started: Instant,
}

/// Grid-point parameters, e.g. `params![("v", 1e3), ("x", 0.5)]`.
#[macro_export]
macro_rules! params {
    ($(($k:expr, $v:expr)),* $(,)?) => {{
        let mut m = ::std::collections::BTreeMap::<String, ::serde_json::Value>::new();
        $(m.insert(String::from($k), ::serde_json::json!($v));)*
        m
    }};
}

impl ReportBuilder {
    pub fn new<C: Serialize>(id: &str, config: &C) -> Self {
        Self {
            id: id.to_string(),
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            grid: Vec::new(),
            criteria: Vec::new(),
            seeds: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        if !self.seeds.contains(&seed) {
            self.seeds.push(seed);
        }
    }

    pub fn point(&mut self, params: BTreeMap<String, Value>, value: Option<f64>, err: Option<f64>) {
        let finite = |x: Option<f64>| x.filter(|v| v.is_finite());
        self.grid.push(GridPoint {
            params,
            value: finite(value),
            err: finite(err),
        });
    }

    pub fn criterion(
        &mut self,
        name: impl Into<String>,
        observed: Option<f64>,
        threshold: Option<f64>,
        verdict: Verdict,
        detail: impl Into<String>,
    ) {
        self.criteria.push(Criterion {
            name: name.into(),
            observed: observed.filter(|v| v.is_finite()),
            threshold,
            verdict,
            detail: detail.into(),
        });
    }

    /// `values` must decrease strictly; a missing value makes the check
    /// inconclusive. `observed` is the largest step `values[i+1] - values[i]`,
    /// which must be below 0.
    pub fn strictly_decreasing(&mut self, name: impl Into<String>, values: &[Option<f64>], what: &str) {
        let name = name.into();
        if values.iter().any(|v| !matches!(v, Some(x) if x.is_finite())) {
            self.criterion(name, None, Some(0.0), Verdict::Inconclusive, format!("{what}: a grid point failed to evaluate"));
            return;
        }
        let xs: Vec<f64> = values.iter().map(|v| v.unwrap()).collect();
        let worst = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let shown: Vec<String> = xs.iter().map(|x| format!("{x:.6e}")).collect();
        self.criterion(
            name,
            Some(worst),
            Some(0.0),
            Verdict::from_bool(worst < 0.0),
            format!("{what} along the grid: [{}]; largest increment must be < 0", shown.join(", ")),
        );
    }

    /// `observed <= threshold`; missing values are inconclusive.
    pub fn at_most(&mut self, name: impl Into<String>, observed: Option<f64>, threshold: f64, what: &str) {
        let verdict = match observed {
            Some(x) if x.is_finite() => Verdict::from_bool(x <= threshold),
            _ => Verdict::Inconclusive,
        };
        self.criterion(name, observed, Some(threshold), verdict, format!("{what} must be <= {threshold}"));
    }

    pub fn at_least(&mut self, name: impl Into<String>, observed: Option<f64>, threshold: f64, what: &str) {
        let verdict = match observed {
            Some(x) if x.is_finite() => Verdict::from_bool(x >= threshold),
            _ => Verdict::Inconclusive,
        };
        self.criterion(name, observed, Some(threshold), verdict, format!("{what} must be >= {threshold}"));
    }

    pub fn finish(self) -> ExperimentReport {
        let verdict = if self.criteria.is_empty() {
            Verdict::Inconclusive
        } else {
            self.criteria.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Inconclusive)
        };
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            id: self.id,
            config: self.config,
            grid: self.grid,
            criteria: self.criteria,
            verdict,
            seeds: self.seeds,
            runtime_s: self.started.elapsed().as_secs_f64(),
            timestamp: chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string(),
        }
    }
}

/// One row of the consolidated table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub source: String,
    pub id: String,
    pub verdict: Verdict,
    pub criteria: usize,
    pub failed: usize,
    pub inconclusive: usize,
    /// First criterion's name and observed value.
    pub headline: String,
    pub runtime_s: f64,
}

impl SummaryRow {
    pub fn of(source: &str, r: &ExperimentReport) -> Self {
        let count = |v: Verdict| r.criteria.iter().filter(|c| c.verdict == v).count();
        let headline = r
            .criteria
            .iter()
            .find(|c| c.verdict != Verdict::Pass)
            .or(r.criteria.first())
            .map(|c| match c.observed {
                Some(x) => format!("{}={}", c.name, crate::io::fmt_f64(x)),
                None => format!("{}=n/a", c.name),
            })
            .unwrap_or_default();
        Self {
            source: source.to_string(),
            id: r.id.clone(),
            verdict: r.verdict,
            criteria: r.criteria.len(),
            failed: count(Verdict::Fail),
            inconclusive: count(Verdict::Inconclusive),
            headline,
            runtime_s: r.runtime_s,
        }
    }
}

/// Worst verdict over the rows; an empty table passes.
pub fn overall(rows: &[SummaryRow]) -> Verdict {
    rows.iter().map(|r| r.verdict).max().unwrap_or(Verdict::Pass)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut out = crate::io::csv_writer(w);
    out.write_record(["source", "id", "verdict", "criteria", "failed", "inconclusive", "headline", "runtime_s"])?;
    for r in rows {
        out.write_record([
            r.source.clone(),
            r.id.clone(),
            r.verdict.as_str().to_string(),
            r.criteria.to_string(),
            r.failed.to_string(),
            r.inconclusive.to_string(),
            r.headline.clone(),
            format!("{:.3}", r.runtime_s),
        ])?;
    }
    out.flush().map_err(|e| Error::Io {
        path: "summary".into(),
        source: e,
    })?;
    Ok(())
}

pub fn summary_text(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let w_id = rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
    s.push_str(&format!("{:<w_id$}  {:<12}  {:>9}  {:>9}  headline\n", "id", "verdict", "criteria", "runtime_s"));
    for r in rows {
        s.push_str(&format!(
            "{:<w_id$}  {:<12}  {:>4}/{:<4}  {:>9.2}  {}\n",
            r.id,
            r.verdict.as_str(),
            r.criteria - r.failed - r.inconclusive,
            r.criteria,
            r.runtime_s,
            r.headline
        ));
    }
    s.push_str(&format!("overall: {}\n", overall(rows).as_str()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(verdicts: &[Verdict]) -> ExperimentReport {
        let mut b = ReportBuilder::new("demo", &serde_json::json!({"seed": 1}));
        b.seed(1);
        b.point(params![("v", 1e3), ("x", "a")], Some(0.5), Some(1e-9));
        b.point(params![("v", 1e4)], Some(f64::NAN), None);
        for (i, &v) in verdicts.iter().enumerate() {
            b.criterion(format!("c{i}"), Some(i as f64), None, v, "");
        }
        b.finish()
    }

    #[test]
    fn verdict_is_worst_criterion() {
        use Verdict::*;
        assert_eq!(sample(&[Pass, Pass]).verdict, Pass);
        assert_eq!(sample(&[Pass, Inconclusive]).verdict, Inconclusive);
        assert_eq!(sample(&[Inconclusive, Fail, Pass]).verdict, Fail);
        assert_eq!(sample(&[]).verdict, Inconclusive);
    }

    #[test]
    fn json_round_trip_and_schema_check() {
        let r = sample(&[Verdict::Pass]);
        let text = r.to_json().unwrap();
        let back = ExperimentReport::from_json(&text, Path::new("r.json")).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.grid[1].value, None);
        let old = text.replace("\"schema_version\": 1", "\"schema_version\": 0");
        let err = ExperimentReport::from_json(&old, Path::new("r.json")).unwrap_err();
        assert!(matches!(err, Error::Schema { found: 0, .. }), "{err}");
    }

    #[test]
    fn decreasing_check() {
        let mut b = ReportBuilder::new("d", &());
        b.strictly_decreasing("ok", &[Some(3.0), Some(2.0), Some(1.0)], "x");
        b.strictly_decreasing("flat", &[Some(3.0), Some(3.0)], "x");
        b.strictly_decreasing("gap", &[Some(3.0), None], "x");
        let r = b.finish();
        assert_eq!(r.criterion("ok").unwrap().verdict, Verdict::Pass);
        assert_eq!(r.criterion("flat").unwrap().verdict, Verdict::Fail);
        assert_eq!(r.criterion("gap").unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn grid_csv_has_header_and_lf() {
        let mut buf = Vec::new();
        sample(&[Verdict::Pass]).write_grid_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("v,x,value,err\n"), "{s}");
        assert!(!s.contains('\r'));
        assert_eq!(s.lines().count(), 3);
    }

    #[test]
    fn summary_precedence() {
        use Verdict::*;
        let rows: Vec<_> = [Pass, Inconclusive].iter().map(|&v| SummaryRow::of("x", &sample(&[v]))).collect();
        assert_eq!(overall(&rows), Inconclusive);
        assert_eq!(overall(&[]), Pass);
        let mut rows = rows;
        rows.push(SummaryRow::of("y", &sample(&[Fail])));
        assert_eq!(overall(&rows).exit_code(), 1);
        assert!(summary_text(&rows).contains("overall: fail"));
    }
}
