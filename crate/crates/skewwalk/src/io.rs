//! Artifact formats: CSV tables and the binary path dump.
//!
//! The dump is a sequence of little-endian records
//!
//! ```text
//! "SKWK" | u32 version | u64 n | i64 x0 | u64 seed | n × i64 X(0..n)
//! ```
//!
//! one per path, concatenated.

use std::io::{Read, Write};
use std::path::Path;

use skewwalk_core::resolvent::Estimate;
use skewwalk_core::walk::PathSample;

use crate::{Error, Result};

pub const DUMP_MAGIC: &[u8; 4] = b"SKWK";
pub const DUMP_VERSION: u32 = 1;

/// A CSV writer with `,` separators and LF line endings.
pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Shortest round-tripping decimal form, `.` as separator.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// One evaluated transform: columns `x,lambda,v,value,err_estimate,method`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformRow {
    pub x: f64,
    pub lambda: f64,
    pub v: Option<f64>,
    pub value: Option<f64>,
    pub err_estimate: Option<f64>,
    pub method: String,
}

pub fn write_transform_csv<W: Write>(rows: &[TransformRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["x", "lambda", "v", "value", "err_estimate", "method"])?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        out.write_record([
            fmt_f64(r.x),
            fmt_f64(r.lambda),
            opt(r.v),
            opt(r.value),
            opt(r.err_estimate),
            r.method.clone(),
        ])?;
    }
    flush(out)
}

/// One resolvent evaluation: columns `quantity,x,lambda,v,value,err,method`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventRow {
    pub quantity: String,
    pub x: f64,
    pub lambda: f64,
    pub v: Option<f64>,
    pub estimate: Option<Estimate>,
}

pub fn write_resolvent_csv<W: Write>(rows: &[ResolventRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["quantity", "x", "lambda", "v", "value", "err", "method"])?;
    for r in rows {
        let (value, err, method) = match r.estimate {
            Some(e) => (
                fmt_f64(e.value),
                fmt_f64(e.err),
                format!("{}{}", e.method.as_str(), if e.flagged { "_truncated" } else { "" }),
            ),
            None => (String::new(), String::new(), "failed".to_string()),
        };
        out.write_record([
            r.quantity.clone(),
            fmt_f64(r.x),
            fmt_f64(r.lambda),
            r.v.map(fmt_f64).unwrap_or_default(),
            value,
            err,
            method,
        ])?;
    }
    flush(out)
}

fn flush<W: Write>(mut out: csv::Writer<W>) -> Result<()> {
    out.flush().map_err(|e| Error::Io {
        path: "csv".into(),
        source: e,
    })
}

/// A dumped trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpRecord {
    pub x0: i64,
    pub seed: u64,
    pub values: Vec<i64>,
}

impl From<&PathSample> for DumpRecord {
    fn from(p: &PathSample) -> Self {
        Self {
            x0: p.x0,
            seed: p.seed,
            values: p.values.clone(),
        }
    }
}

pub fn write_dump<W: Write>(records: &[DumpRecord], mut w: W) -> std::io::Result<()> {
    for r in records {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(r.values.len() as u64).to_le_bytes())?;
        w.write_all(&r.x0.to_le_bytes())?;
        w.write_all(&r.seed.to_le_bytes())?;
        for &x in &r.values {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_dump<R: Read>(mut r: R, path: &Path) -> Result<Vec<DumpRecord>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let bad = |reason: String| Error::Dump {
        path: path.to_path_buf(),
        reason,
    };
    let mut out = Vec::new();
    let mut at = 0usize;
    let take = |at: &mut usize, n: usize| -> Result<&[u8]> {
        let s = bytes.get(*at..*at + n).ok_or_else(|| bad(format!("truncated at byte {at}")))?;
        *at += n;
        Ok(s)
    };
    let word = |s: &[u8]| <[u8; 8]>::try_from(s).expect("8 bytes");
    while at < bytes.len() {
        let start = at;
        if take(&mut at, 4)? != DUMP_MAGIC {
            return Err(bad(format!("bad magic at byte {start}")));
        }
        let version = u32::from_le_bytes(take(&mut at, 4)?.try_into().expect("4 bytes"));
        if version != DUMP_VERSION {
            return Err(bad(format!("version {version}, expected {DUMP_VERSION}")));
        }
        let n = u64::from_le_bytes(word(take(&mut at, 8)?));
        let x0 = i64::from_le_bytes(word(take(&mut at, 8)?));
        let seed = u64::from_le_bytes(word(take(&mut at, 8)?));
        let len = usize::try_from(n).ok().and_then(|n| n.checked_mul(8)).ok_or_else(|| bad(format!("length {n}")))?;
        let body = take(&mut at, len)?;
        let values = body.chunks_exact(8).map(|c| i64::from_le_bytes(word(c))).collect();
        out.push(DumpRecord { x0, seed, values });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use skewwalk_core::resolvent::Method;

    #[test]
    fn dump_round_trip() {
        let recs = vec![
            DumpRecord {
                x0: -3,
                seed: 9,
                values: vec![-3, 5, 0, i64::MIN, i64::MAX],
            },
            DumpRecord {
                x0: 0,
                seed: u64::MAX,
                values: vec![0],
            },
        ];
        let mut buf = Vec::new();
        write_dump(&recs, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"SKWK");
        assert_eq!(buf.len(), 2 * 32 + 6 * 8);
        assert_eq!(read_dump(&buf[..], Path::new("m")).unwrap(), recs);
        assert!(read_dump(&buf[..buf.len() - 1], Path::new("m")).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_dump(&bad[..], Path::new("m")).is_err());
    }

    #[test]
    fn csv_layouts() {
        let mut buf = Vec::new();
        let rows = [TransformRow {
            x: 0.5,
            lambda: 1.0,
            v: Some(1e6),
            value: Some(0.25),
            err_estimate: Some(1e-12),
            method: "formula".into(),
        }];
        write_transform_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,lambda,v,value,err_estimate,method\n0.5,1.0,1000000.0,0.25,1e-12,formula\n"
        );
        let mut buf = Vec::new();
        let rows = [ResolventRow {
            quantity: "killed".into(),
            x: -1.0,
            lambda: 2.0,
            v: None,
            estimate: Some(Estimate {
                value: 0.1,
                err: 0.01,
                method: Method::MonteCarlo,
                flagged: true,
            }),
        }];
        write_resolvent_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().nth(1).unwrap(), "killed,-1.0,2.0,,0.1,0.01,monte_carlo_truncated");
    }
}
