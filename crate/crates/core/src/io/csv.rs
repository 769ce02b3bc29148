//! CSV emitters. UTF-8, LF line endings, floats at 17 significant digits.

use std::fs;
use std::path::Path;

use crate::dynamics::Snapshot;
use crate::error::{Error, Result};
use crate::experiments::{GapRow, SweepRow};
use crate::model::SiteIndex;
use crate::spectral::SpectrumScan;

pub const SPECTRUM_HEADER: &str = "theta,level_index,energy";
pub const SWEEP_HEADER: &str = "preset,n_cells,g0,g0_prime,j_hop,omega,fidelity,norm_drift";
pub const GAP_HEADER: &str = "n_cells,g0,g0_prime,j_hop,gap_width";
pub const PROFILE_HEADER: &str = "site,label,probability,analytic_probability";

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(path: &Path, body: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn spectrum_csv(scan: &SpectrumScan) -> Result<String> {
    if scan.is_empty() {
        return Err(Error::EmptyInput("spectrum scan".into()));
    }
    let mut out = String::with_capacity(48 * scan.len() * scan.spec.dim());
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for (theta, levels) in scan.thetas.iter().zip(&scan.energies) {
        for (i, e) in levels.iter().enumerate() {
            out.push_str(&format!("{},{i},{}\n", fmt_f64(*theta), fmt_f64(*e)));
        }
    }
    Ok(out)
}

pub fn emit_spectrum_csv(scan: &SpectrumScan, path: &Path) -> Result<()> {
    write(path, spectrum_csv(scan)?)
}

/// Parsed row of a spectrum CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRecord {
    pub theta: f64,
    pub level_index: usize,
    pub energy: f64,
}

pub fn parse_spectrum_csv(text: &str) -> Result<Vec<SpectrumRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(SPECTRUM_HEADER) => {}
        other => return Err(Error::Format(format!("unexpected spectrum header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::Format(format!("spectrum CSV line {}: `{line}`", i + 2));
            let mut f = line.split(',');
            let (Some(t), Some(l), Some(e), None) = (f.next(), f.next(), f.next(), f.next()) else {
                return Err(bad());
            };
            Ok(SpectrumRecord {
                theta: t.parse().map_err(|_| bad())?,
                level_index: l.parse().map_err(|_| bad())?,
                energy: e.parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<SpectrumRecord>> {
    parse_spectrum_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn sweep_csv(rows: &[SweepRow], timing: bool) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("sweep rows".into()));
    }
    let mut out = String::from(SWEEP_HEADER);
    if timing {
        out.push_str(",wall_time");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            r.preset,
            r.n_cells,
            fmt_f64(r.g0),
            fmt_f64(r.g0_prime),
            fmt_f64(r.j_hop),
            fmt_f64(r.omega),
            fmt_f64(r.fidelity),
            fmt_f64(r.norm_drift),
        ));
        if timing {
            out.push(',');
            out.push_str(&fmt_f64(r.wall_time));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_sweep_csv(rows: &[SweepRow], timing: bool, path: &Path) -> Result<()> {
    write(path, sweep_csv(rows, timing)?)
}

pub fn gap_csv(rows: &[GapRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("gap rows".into()));
    }
    let mut out = format!("{GAP_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n_cells,
            fmt_f64(r.g0),
            fmt_f64(r.g0_prime),
            fmt_f64(r.j_hop),
            fmt_f64(r.gap_width)
        ));
    }
    Ok(out)
}

pub fn emit_gap_csv(rows: &[GapRow], path: &Path) -> Result<()> {
    write(path, gap_csv(rows)?)
}

/// Population versus time, one column per site: `t,theta,a1,m1,...`.
pub fn snapshots_csv(snapshots: &[Snapshot]) -> Result<String> {
    let Some(first) = snapshots.first() else {
        return Err(Error::EmptyInput("snapshots".into()));
    };
    let mut out = String::from("t,theta");
    for i in 0..first.probabilities.len() {
        out.push_str(&format!(",{}", SiteIndex::from_flat(i)));
    }
    out.push('\n');
    for s in snapshots {
        out.push_str(&fmt_f64(s.t));
        out.push(',');
        out.push_str(&fmt_f64(s.theta));
        for p in &s.probabilities {
            out.push(',');
            out.push_str(&fmt_f64(*p));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_snapshots_csv(snapshots: &[Snapshot], path: &Path) -> Result<()> {
    write(path, snapshots_csv(snapshots)?)
}

/// Site occupation of a state, optionally beside the analytic zero mode.
pub fn profile_csv(probabilities: &[f64], analytic: Option<&[f64]>) -> Result<String> {
    if probabilities.is_empty() {
        return Err(Error::EmptyInput("state profile".into()));
    }
    let mut out = format!("{PROFILE_HEADER}\n");
    for (i, p) in probabilities.iter().enumerate() {
        let a = analytic.and_then(|a| a.get(i)).map(|x| fmt_f64(*x)).unwrap_or_default();
        out.push_str(&format!("{i},{},{},{a}\n", SiteIndex::from_flat(i), fmt_f64(*p)));
    }
    Ok(out)
}

pub fn emit_profile_csv(probabilities: &[f64], analytic: Option<&[f64]>, path: &Path) -> Result<()> {
    write(path, profile_csv(probabilities, analytic)?)
}
