//! Minimal static SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::Snapshot;
use crate::error::{Error, Result};
use crate::experiments::{GapRow, Preset, SweepResult, SweepRow};
use crate::model::SiteIndex;
use crate::spectral::SpectrumScan;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#e377c2", "#000000", "#ff7f0e", "#9467bd", "#8c564b",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: Option<String>,
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub width: f64,
}

impl Series {
    pub fn new(points: Vec<(f64, f64)>, color: &str) -> Self {
        Series {
            label: None,
            points,
            color: color.to_string(),
            width: 1.5,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub vlines: Vec<(f64, String)>,
    pub hlines: Vec<(f64, String)>,
    pub y_range: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64 + 0.5)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

impl LinePlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        LinePlot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    fn bounds(&self) -> Option<((f64, f64), (f64, f64))> {
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        let mut any = false;
        for &(x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            any = true;
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !any {
            return None;
        }
        for (v, _) in &self.vlines {
            x0 = x0.min(*v);
            x1 = x1.max(*v);
        }
        if let Some(r) = self.y_range {
            (y0, y1) = r;
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            let pad = y0.abs().max(1.0) * 0.05;
            y0 -= pad;
            y1 += pad;
        }
        Some(((x0, x1), (y0, y1)))
    }

    pub fn render(&self) -> Result<String> {
        let ((x0, x1), (y0, y1)) = self
            .bounds()
            .ok_or_else(|| Error::EmptyInput(format!("plot `{}` has no data", self.title)))?;
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            w,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_L + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            w,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for t in nice_ticks(x0, x1, 6) {
            let x = sx(t);
            let _ = writeln!(
                w,
                r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle">{}</text>"#,
                trim_num(t),
                b = MARGIN_T + ph,
                b2 = MARGIN_T + ph + 5.0,
                ty = MARGIN_T + ph + 18.0
            );
        }
        for t in nice_ticks(y0, y1, 6) {
            let y = sy(t);
            let _ = writeln!(
                w,
                r#"<line x1="{l2}" y1="{y:.2}" x2="{MARGIN_L}" y2="{y:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{}</text>"#,
                trim_num(t),
                l2 = MARGIN_L - 5.0,
                tx = MARGIN_L - 8.0,
                ty = y + 4.0
            );
        }
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            w,
            r#"<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{}</text>"#,
            escape(&self.y_label),
            cy = MARGIN_T + ph / 2.0
        );
        let _ = writeln!(
            w,
            r#"<clipPath id="plot-area"><rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}"/></clipPath>"#
        );
        for (i, series) in self.series.iter().enumerate() {
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                w,
                r#"<polyline class="series" data-index="{i}" clip-path="url(#plot-area)" fill="none" stroke="{}" stroke-width="{}" points="{}"/>"#,
                series.color,
                series.width,
                pts.join(" ")
            );
        }
        for (v, label) in &self.vlines {
            let x = sx(*v);
            let _ = writeln!(
                w,
                r#"<line class="marker" x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{b}" stroke="gray" stroke-dasharray="5,4"/><text x="{tx:.2}" y="{ty}" fill="gray">{}</text>"#,
                escape(label),
                b = MARGIN_T + ph,
                tx = x + 4.0,
                ty = MARGIN_T + 14.0
            );
        }
        for (v, label) in &self.hlines {
            let y = sy(*v);
            let _ = writeln!(
                w,
                r#"<line class="marker" x1="{MARGIN_L}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="gray" stroke-dasharray="2,3"/><text x="{tx}" y="{ty:.2}" fill="gray">{}</text>"#,
                escape(label),
                r = MARGIN_L + pw,
                tx = MARGIN_L + 4.0,
                ty = y - 4.0
            );
        }
        let mut ly = MARGIN_T + 10.0;
        for series in self.series.iter().filter(|s| s.label.is_some()) {
            let lx = MARGIN_L + pw + 10.0;
            let _ = writeln!(
                w,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 20.0,
                series.color,
                lx + 25.0,
                ly + 4.0,
                escape(series.label.as_deref().unwrap_or_default())
            );
            ly += 16.0;
        }
        s.push_str("</svg>\n");
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let svg = self.render()?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, svg).map_err(|e| Error::io(path, e))
    }
}

fn trim_num(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Every level versus theta, gap level highlighted.
pub fn spectrum_plot(scan: &SpectrumScan) -> LinePlot {
    let mut p = LinePlot::new(
        &format!(
            "Spectrum, N={} g0={} g0'={} J={}",
            scan.spec.n_cells(),
            scan.spec.g0(),
            scan.spec.g0_prime(),
            scan.spec.j_hop()
        ),
        "theta / pi",
        "E / g0'",
    );
    let levels = scan.energies.first().map_or(0, Vec::len);
    for level in 0..levels {
        let pts = scan
            .thetas
            .iter()
            .zip(&scan.energies)
            .map(|(t, e)| (t / std::f64::consts::PI, e[level]))
            .collect();
        let (color, width) = if level == scan.gap_state_index {
            (PALETTE[0], 2.5)
        } else {
            ("#1f77b4", 1.0)
        };
        let mut s = Series::new(pts, color);
        s.width = width;
        p.series.push(s);
    }
    p
}

/// Occupation probability versus site index.
pub fn profile_plot(title: &str, probabilities: &[f64], analytic: Option<&[f64]>) -> LinePlot {
    let mut p = LinePlot::new(title, "site index", "probability");
    p.series.push(
        Series::new(probabilities.iter().enumerate().map(|(i, &x)| (i as f64 + 1.0, x)).collect(), PALETTE[0])
            .labeled("numeric"),
    );
    if let Some(a) = analytic {
        let mut s = Series::new(a.iter().enumerate().map(|(i, &x)| (i as f64 + 1.0, x)).collect(), PALETTE[4])
            .labeled("analytic");
        s.width = 1.0;
        p.series.push(s);
    }
    p
}

/// Fidelity versus log10(omega), one curve per cavity-cavity coupling.
pub fn fidelity_plot(title: &str, rows: &[SweepRow], threshold_log_omega: Option<f64>, level: Option<f64>) -> LinePlot {
    let mut p = LinePlot::new(title, "log10(omega)", "fidelity");
    p.y_range = Some((0.0, 1.02));
    let mut js: Vec<f64> = Vec::new();
    for r in rows {
        if !js.contains(&r.j_hop) {
            js.push(r.j_hop);
        }
    }
    for (k, j) in js.iter().enumerate() {
        let pts = rows
            .iter()
            .filter(|r| r.j_hop == *j)
            .map(|r| (r.omega.log10(), r.fidelity))
            .collect();
        p.series.push(Series::new(pts, PALETTE[k % PALETTE.len()]).labeled(format!("J={j}")));
    }
    if let Some(x) = threshold_log_omega {
        p.vlines.push((x, format!("log10 Ω = {x}")));
    }
    if let Some(y) = level {
        p.hlines.push((y, format!("F = {y}")));
    }
    p
}

/// Population of the selected sites versus time.
pub fn population_plot(title: &str, snapshots: &[Snapshot], sites: &[usize]) -> LinePlot {
    let mut p = LinePlot::new(title, "t · g0'", "population");
    p.y_range = Some((0.0, 1.02));
    for (k, &site) in sites.iter().enumerate() {
        let pts = snapshots
            .iter()
            .filter_map(|s| s.probabilities.get(site).map(|&x| (s.t, x)))
            .collect();
        p.series.push(Series::new(pts, PALETTE[k % PALETTE.len()]).labeled(SiteIndex::from_flat(site).to_string()));
    }
    p
}

pub fn gap_plot(rows: &[GapRow]) -> LinePlot {
    let mut p = LinePlot::new("Gap to lower band versus chain length", "unit cells N", "gap / g0'");
    p.series.push(Series::new(
        rows.iter().map(|r| (r.n_cells as f64, r.gap_width)).collect(),
        PALETTE[1],
    ));
    p
}

/// Data available for plotting after a run; absent fields produce no file.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlotInputs<'a> {
    pub spectrum: Option<&'a SpectrumScan>,
    pub profile: Option<(&'a [f64], Option<&'a [f64]>)>,
    pub sweep: Option<(&'a SweepResult, Preset)>,
    pub populations: Option<(&'a [Snapshot], &'a [usize])>,
}

/// Render every available figure into `dir`. Returns the written paths.
pub fn emit_plots(inputs: &PlotInputs<'_>, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut plots: Vec<(&str, LinePlot)> = Vec::new();
    if let Some(scan) = inputs.spectrum {
        plots.push(("spectrum.svg", spectrum_plot(scan)));
    }
    if let Some((p, a)) = inputs.profile {
        plots.push(("profile.svg", profile_plot("Site occupation", p, a)));
    }
    if let Some((sweep, preset)) = inputs.sweep {
        if !sweep.rows.is_empty() {
            let (level, threshold) = preset.reference_lines();
            plots.push((
                "fidelity.svg",
                fidelity_plot(&format!("Fidelity, {preset}"), &sweep.rows, threshold, level),
            ));
        }
        if !sweep.gaps.is_empty() {
            plots.push(("gap.svg", gap_plot(&sweep.gaps)));
        }
        if sweep.is_empty() {
            return Err(Error::EmptyInput("sweep has no rows".into()));
        }
    }
    if let Some((snaps, sites)) = inputs.populations {
        plots.push(("populations.svg", population_plot("Population versus time", snaps, sites)));
    }
    if plots.is_empty() {
        return Err(Error::EmptyInput("nothing to plot".into()));
    }
    // Render everything before touching the filesystem.
    let rendered: Vec<(&str, String)> = plots
        .iter()
        .map(|(name, p)| Ok((*name, p.render()?)))
        .collect::<Result<_>>()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    rendered
        .into_iter()
        .map(|(name, svg)| {
            let path = dir.join(name);
            fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
