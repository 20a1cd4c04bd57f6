//! The `skewwalk` command line.
//!
//! Exit status: 0 when every verdict passes, 2 when the worst verdict is
//! inconclusive, 1 on a failed verdict or any error.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use skewwalk_core::distributions::StepLaw;
use skewwalk_core::quadrature::TransformResult;
use skewwalk_core::resolvent::{killed_resolvent_v, ContinuousResolvent, DiscreteResolvent, EtaStarMeasure, Estimate, KilledMode};
use skewwalk_core::transforms::{hit_gf, poisson_hit_laplace, u_s, ScaledHitting, StableResolvent};
use skewwalk_core::walk::simulate_chain_indexed;

use crate::config::{
    ExperimentConfig, Operation, ResolventConfig, ResolventMode, ResolventQuantity, RunConfig,
    TransformConfig, TransformQuantity,
};
use crate::io::{write_dump, write_resolvent_csv, write_transform_csv, DumpRecord, ResolventRow, TransformRow};
use crate::lab::{self, Context};
use crate::parallel::Pool;
use crate::params;
use crate::report::{self, ExperimentReport, ReportBuilder, SummaryRow, Verdict};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "skewwalk", version, about = "Locally perturbed heavy-tailed lattice walks: simulation, transforms, resolvents and convergence experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the operation selected in the config file.
    Run(Common),
    /// Simulate perturbed paths.
    Simulate(Common),
    /// Evaluate hitting transforms and Green functions.
    Transform(Common),
    /// Evaluate resolvents.
    Resolvent(Common),
    /// Run one named experiment, or `all`.
    Experiment {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize report JSON files.
    Report {
        paths: Vec<PathBuf>,
        /// Also write the table as `summary.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl Common {
    /// Config file, then environment, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::with_seed(self.seed.ok_or_else(|| Error::Config {
                path: "seed".into(),
                message: "no config file given, so --seed is required".into(),
            })?),
        };
        cfg.apply_env()?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        Ok(cfg)
    }
}

/// Parse `args` (including the program name) and run; returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(v) => v.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Verdict> {
    match cmd {
        Command::Report { paths, out } => summarize(paths, out.as_deref()),
        Command::Run(c) => {
            let cfg = c.resolve()?;
            let op = match cfg.operation {
                Some(op) => op,
                None if !cfg.experiments.is_empty() => Operation::Experiment,
                None if cfg.simulate.is_some() => Operation::Simulate,
                None if cfg.transform.is_some() => Operation::Transform,
                None if cfg.resolvent.is_some() => Operation::Resolvent,
                None => {
                    return Err(Error::Config {
                        path: "operation".into(),
                        message: "not set and no operation table present".into(),
                    })
                }
            };
            dispatch(op, &cfg, None)
        }
        Command::Simulate(c) => dispatch(Operation::Simulate, &c.resolve()?, None),
        Command::Transform(c) => dispatch(Operation::Transform, &c.resolve()?, None),
        Command::Resolvent(c) => dispatch(Operation::Resolvent, &c.resolve()?, None),
        Command::Experiment { name, common } => dispatch(Operation::Experiment, &common.resolve()?, Some(name)),
    }
}

fn dispatch(op: Operation, cfg: &RunConfig, name: Option<&str>) -> Result<Verdict> {
    let pool = Pool::new(cfg.workers)?;
    let spec = cfg.quadrature()?;
    let ctx = Context::new(&pool, cfg.seed, spec).with_run(run_json(cfg)?);
    let reports = match op {
        Operation::Simulate => vec![simulate(cfg, &ctx)?],
        Operation::Transform => {
            let t = cfg.transform.as_ref().ok_or_else(|| missing("transform"))?;
            vec![transform(t, cfg, &ctx)?]
        }
        Operation::Resolvent => {
            let r = cfg.resolvent.as_ref().ok_or_else(|| missing("resolvent"))?;
            vec![resolvent(r, cfg, &ctx)?]
        }
        Operation::Experiment => {
            let exps: Vec<ExperimentConfig> = match name {
                Some("all") => ExperimentConfig::NAMES.iter().map(|n| cfg.experiment(n)).collect::<Result<_>>()?,
                Some(n) => vec![cfg.experiment(n)?],
                None if cfg.experiments.is_empty() => return Err(missing("experiment")),
                None => cfg.experiments.clone(),
            };
            let mut out = Vec::new();
            for e in &exps {
                let r = lab::run(e, &ctx)?;
                eprintln!("{}: {} ({:.1} s)", r.id, r.verdict.as_str(), r.runtime_s);
                write_report(&r, &cfg.output_dir)?;
                out.push(r);
            }
            return Ok(out.iter().map(|r| r.verdict).max().unwrap_or(Verdict::Pass));
        }
    };
    for r in &reports {
        write_report(r, &cfg.output_dir)?;
    }
    Ok(reports.iter().map(|r| r.verdict).max().unwrap_or(Verdict::Pass))
}

fn missing(table: &str) -> Error {
    Error::Config {
        path: table.into(),
        message: "this operation needs its table in the config".into(),
    }
}

/// The resolved config as embedded in reports. Worker count and output
/// directory are left out because they do not affect results.
fn run_json(cfg: &RunConfig) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(cfg).map_err(|e| Error::Config {
        path: String::new(),
        message: e.to_string(),
    })?;
    if let Some(m) = v.as_object_mut() {
        m.remove("workers");
        m.remove("output_dir");
    }
    Ok(v)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn stamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%S%3fZ").to_string()
}

/// Write `<id>_<timestamp>.json` and `.csv` into `dir`, creating it.
pub fn write_report(r: &ExperimentReport, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let base = dir.join(format!("{}_{}", r.id, stamp()));
    let json_path = base.with_extension("json");
    std::fs::write(&json_path, r.to_json()?).map_err(io_err(&json_path))?;
    let csv_path = base.with_extension("csv");
    let f = File::create(&csv_path).map_err(io_err(&csv_path))?;
    r.write_grid_csv(BufWriter::new(f))?;
    Ok(json_path)
}

fn summarize(paths: &[PathBuf], out: Option<&Path>) -> Result<Verdict> {
    let mut rows = Vec::new();
    for p in paths {
        let r = ExperimentReport::load(p)?;
        rows.push(SummaryRow::of(&p.display().to_string(), &r));
    }
    print!("{}", report::summary_text(&rows));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("summary.csv");
        let f = File::create(&path).map_err(io_err(&path))?;
        report::write_summary_csv(&rows, BufWriter::new(f))?;
    }
    Ok(report::overall(&rows))
}

fn simulate(cfg: &RunConfig, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let s = cfg.simulate.clone().unwrap_or_default();
    let mut b = ReportBuilder::new("simulate", &json!({ "run": ctx.run, "simulate": s }));
    b.seed(cfg.seed);
    let xi = cfg.step_law()?;
    let eta = cfg.eta_law()?;
    let paths = ctx.pool.map(s.n_paths, |i| simulate_chain_indexed(&xi, eta.as_ref(), s.x0, s.n_steps, cfg.seed, i));
    let paths: Vec<_> = paths.into_iter().collect::<skewwalk_core::Result<_>>()?;
    let mut broken = 0usize;
    for p in &paths {
        let last = *p.values.last().expect("paths start with X(0)");
        let t = *p.zero_count.last().expect("paths start with T(0)");
        b.point(
            params![("path", p.index), ("quantity", "final_position"), ("zero_count", t)],
            Some(last as f64),
            None,
        );
        broken += usize::from(eta.is_some() && p.check_decomposition().is_some());
    }
    if eta.is_some() {
        b.criterion(
            "decomposition_exact",
            Some(broken as f64),
            Some(0.0),
            Verdict::from_bool(broken == 0),
            "integer path decomposition on every simulated path",
        );
    } else {
        b.criterion("simulated", Some(paths.len() as f64), None, Verdict::Pass, "unperturbed paths simulated");
    }
    if s.dump {
        std::fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
        let path = cfg.output_dir.join(format!("simulate_{}.skwk", stamp()));
        let recs: Vec<DumpRecord> = paths.iter().map(DumpRecord::from).collect();
        let f = File::create(&path).map_err(io_err(&path))?;
        write_dump(&recs, BufWriter::new(f)).map_err(io_err(&path))?;
    }
    Ok(b.finish())
}

fn lattice(x: f64) -> Result<i64> {
    if x.fract() == 0.0 && x.abs() < 9e15 {
        Ok(x as i64)
    } else {
        Err(Error::Config {
            path: "transform.x".into(),
            message: format!("{x} is not a lattice point"),
        })
    }
}

fn stable_alpha(xi: &StepLaw) -> Result<f64> {
    xi.as_stable()
        .map(|l| l.alpha())
        .ok_or_else(|| Error::Config {
            path: "xi.kind".into(),
            message: "this quantity needs the stable step law".into(),
        })
}

fn transform(t: &TransformConfig, cfg: &RunConfig, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new("transform", &json!({ "run": ctx.run }));
    b.seed(cfg.seed);
    let xi = cfg.step_law()?;
    let spec = ctx.spec;
    let need_s = || {
        t.s.ok_or_else(|| Error::Config {
            path: "transform.s".into(),
            message: "required for this quantity".into(),
        })
    };
    let mut cells: Vec<(f64, Option<f64>)> = Vec::new();
    match t.quantity {
        TransformQuantity::ScaledHit => {
            for &v in &t.v {
                cells.extend(t.x.iter().map(|&x| (x, Some(v))));
            }
        }
        _ => cells.extend(t.x.iter().map(|&x| (x, None))),
    }
    let eval = |x: f64, v: Option<f64>| -> Result<TransformResult> {
        Ok(match t.quantity {
            TransformQuantity::Green => u_s(lattice(x)?, need_s()?, &xi, &spec)?,
            TransformQuantity::HitGf => hit_gf(lattice(x)?, need_s()?, &xi, &spec)?,
            TransformQuantity::PoissonHit => poisson_hit_laplace(lattice(x)?, t.lambda, t.rho, &xi, &spec)?,
            TransformQuantity::ScaledHit => {
                let law = xi.as_stable().ok_or_else(|| missing("xi"))?;
                ScaledHitting::new(law, t.lambda, v.expect("v set for scaled"), spec)?.value(x)?
            }
            TransformQuantity::StableHit => StableResolvent::new(stable_alpha(&xi)?, t.lambda, spec)?.hit_laplace(x)?,
            TransformQuantity::StableDensity => StableResolvent::new(stable_alpha(&xi)?, t.lambda, spec)?.density(x)?,
        })
    };
    let results = ctx.pool.map_items(&cells, |&(x, v)| eval(x, v));
    let mut rows = Vec::new();
    let mut failed = 0usize;
    for (&(x, v), r) in cells.iter().zip(results) {
        let r = match r {
            Ok(r) => Some(r),
            Err(Error::Config { path, message }) => return Err(Error::Config { path, message }),
            Err(e) => {
                eprintln!("x={x}: {e}");
                failed += 1;
                None
            }
        };
        b.point(params![("x", x), ("v", v)], r.map(|r| r.value), r.map(|r| r.err_estimate));
        rows.push(TransformRow {
            x,
            lambda: t.lambda,
            v,
            value: r.map(|r| r.value),
            err_estimate: r.map(|r| r.err_estimate),
            method: "formula".into(),
        });
    }
    b.criterion(
        "all_points_evaluated",
        Some(failed as f64),
        Some(0.0),
        if failed == 0 { Verdict::Pass } else { Verdict::Inconclusive },
        "grid points whose quadrature failed",
    );
    std::fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let path = cfg.output_dir.join(format!("transform_values_{}.csv", stamp()));
    write_transform_csv(&rows, BufWriter::new(File::create(&path).map_err(io_err(&path))?))?;
    Ok(b.finish())
}

fn resolvent(r: &ResolventConfig, cfg: &RunConfig, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new("resolvent", &json!({ "run": ctx.run }));
    b.seed(cfg.seed);
    let xi = cfg.step_law()?;
    let law = xi.as_stable().ok_or_else(|| Error::Config {
        path: "xi.kind".into(),
        message: "resolvents need the stable step law".into(),
    })?;
    let f = r.f.observable()?;
    let spec = ctx.spec;
    let eta = || {
        cfg.eta_law()?.ok_or_else(|| Error::Config {
            path: "eta".into(),
            message: "this quantity needs an [eta] table".into(),
        })
    };
    let mut cells: Vec<(f64, Option<f64>)> = Vec::new();
    match r.quantity {
        ResolventQuantity::Killed => {
            for &v in &r.v {
                cells.extend(r.x.iter().map(|&x| (x, Some(v))));
            }
        }
        ResolventQuantity::HoldingJumping | ResolventQuantity::SkewRatio => cells.extend(r.v.iter().map(|&v| (0.0, Some(v)))),
        ResolventQuantity::Skew => cells.push((0.0, None)),
    }
    let eval = |x: f64, v: Option<f64>| -> Result<Estimate> {
        Ok(match r.quantity {
            ResolventQuantity::Killed => {
                let mode = match r.mode {
                    ResolventMode::Formula => KilledMode::Formula,
                    ResolventMode::MonteCarlo => KilledMode::MonteCarlo {
                        n_paths: r.n_paths,
                        seed: cfg.seed,
                        step_budget: u64::MAX,
                    },
                };
                killed_resolvent_v(x, r.lambda, v.expect("v set"), law, &f, mode, &spec)?
            }
            ResolventQuantity::HoldingJumping => DiscreteResolvent::new(law, r.lambda, v.expect("v set"), spec)?
                .holding_jumping_at_zero(&f, &eta()?)?
                .into(),
            ResolventQuantity::SkewRatio => DiscreteResolvent::new(law, r.lambda, v.expect("v set"), spec)?
                .skew_ratio(&f, &eta()?)?
                .into(),
            ResolventQuantity::Skew => {
                let m = EtaStarMeasure::for_law(&eta()?)?;
                ContinuousResolvent::new(law.alpha(), r.lambda, spec)?.skew_at_zero(&f, &m)?.into()
            }
        })
    };
    let results = ctx.pool.map_items(&cells, |&(x, v)| eval(x, v));
    let name = serde_json::to_value(r.quantity)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let mut rows = Vec::new();
    let mut failed = 0usize;
    for (&(x, v), e) in cells.iter().zip(results) {
        let e = match e {
            Ok(e) => Some(e),
            Err(Error::Config { path, message }) => return Err(Error::Config { path, message }),
            Err(err) => {
                eprintln!("x={x}: {err}");
                failed += 1;
                None
            }
        };
        b.point(params![("quantity", name.clone()), ("x", x), ("v", v)], e.map(|e| e.value), e.map(|e| e.err));
        rows.push(ResolventRow {
            quantity: name.clone(),
            x,
            lambda: r.lambda,
            v,
            estimate: e,
        });
    }
    b.criterion(
        "all_points_evaluated",
        Some(failed as f64),
        Some(0.0),
        if failed == 0 { Verdict::Pass } else { Verdict::Inconclusive },
        "grid points whose evaluation failed",
    );
    std::fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let path = cfg.output_dir.join(format!("resolvent_values_{}.csv", stamp()));
    write_resolvent_csv(&rows, BufWriter::new(File::create(&path).map_err(io_err(&path))?))?;
    Ok(b.finish())
}
