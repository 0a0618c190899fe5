//! CSV emission for trajectory records.
//!
//! LF line endings, `.` decimal separator, reals with 17 significant digits
//! (`d.dddddddddddddddde±x`), which round-trips every `f64`.

use std::io::{self, BufRead, Write};

use crate::engine::{TrajectoryRecord, TransitionBins};
use crate::error::{Error, Result};

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns `traj_id,t,x,running_max`, plus `doob_gap` when every record
/// carries Doob data.
pub fn write_records<W: Write>(mut w: W, records: &[TrajectoryRecord]) -> io::Result<()> {
    let with_doob = !records.is_empty() && records.iter().all(|r| r.doob.is_some());
    if with_doob {
        w.write_all(b"traj_id,t,x,running_max,doob_gap\n")?;
    } else {
        w.write_all(b"traj_id,t,x,running_max\n")?;
    }
    for r in records {
        for (k, s) in r.samples.iter().enumerate() {
            write!(w, "{},{},{},{}", r.traj_id, s.t, fmt_real(s.x), fmt_real(s.running_max))?;
            if with_doob {
                let gap = r.doob.as_ref().map(|d| d[k].gap).unwrap_or(f64::NAN);
                write!(w, ",{}", fmt_real(gap))?;
            }
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Full paths as `traj_id,t,x`.
pub fn write_paths<W: Write>(mut w: W, records: &[TrajectoryRecord]) -> io::Result<()> {
    w.write_all(b"traj_id,t,x\n")?;
    for r in records {
        if let Some(path) = &r.path {
            for (t, x) in path.iter().enumerate() {
                writeln!(w, "{},{},{}", r.traj_id, t, fmt_real(*x))?;
            }
        }
    }
    Ok(())
}

/// Reads `x,dx` transition pairs (header required) into bins.
pub fn read_transitions<R: BufRead>(r: R, bins: &mut TransitionBins) -> Result<u64> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::Parse("transitions file is empty".into())),
    };
    let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    if cols != ["x", "dx"] {
        return Err(Error::Parse(format!(
            "transitions header must be 'x,dx', got '{}'",
            header.trim()
        )));
    }
    let mut n = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("line {}: expected two reals, got '{line}'", i + 2)))
        };
        let x = parse(it.next())?;
        let dx = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("line {}: too many columns", i + 2)));
        }
        bins.push(x, dx);
        n += 1;
    }
    Ok(n)
}
