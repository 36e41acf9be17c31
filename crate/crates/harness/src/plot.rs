//! Minimal SVG charts. Every plot is drawn from a CSV already on disk, so
//! plotting can never change the numbers.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::{read_csv, HarnessError, RelaxSummaryRow, SummaryRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Polyline chart with axes, five ticks per axis and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y_lo, y1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let y0 = y_lo.min(0.0);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    );
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (x, y) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            px(x),
            HEIGHT - MARGIN + 16.0,
            trim(x),
            MARGIN - 6.0,
            py(y) + 4.0,
            trim(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text><text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(x_label),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{tx}" y="{ty}">{}</text>"#,
            escape(&s.name),
            x = WIDTH - MARGIN - 110.0,
            x2 = WIDTH - MARGIN - 90.0,
            tx = WIDTH - MARGIN - 84.0,
            ty = ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Mean evacuated count and mean total triage score against asset count.
pub fn grid_plots(dir: &Path) -> Result<(), HarnessError> {
    let rows: Vec<SummaryRow> = read_csv(&dir.join("summary.csv"))?;
    let series_of = |value: fn(&SummaryRow) -> f64| -> Vec<Series> {
        let mut by_method: BTreeMap<_, Vec<(f64, f64)>> = BTreeMap::new();
        for r in &rows {
            if let Some(k) = r.k {
                by_method.entry(r.method).or_default().push((k as f64, value(r)));
            }
        }
        by_method.into_iter().map(|(m, points)| Series { name: m.to_string(), points }).collect()
    };
    fs::write(
        dir.join("evacuated.svg"),
        line_chart("Casualties evacuated", "assets", "mean evacuated", &series_of(|r| r.mean_evacuated)),
    )?;
    fs::write(
        dir.join("total_scr.svg"),
        line_chart("Total triage score evacuated", "assets", "mean total score", &series_of(|r| r.mean_total_scr)),
    )?;
    Ok(())
}

/// Mean chosen threshold against asset count, one chart per family.
pub fn relaxation_plot(dir: &Path) -> Result<(), HarnessError> {
    let rows: Vec<RelaxSummaryRow> = read_csv(&dir.join("relaxation_summary.csv"))?;
    for (family, file, label) in [
        (medevac_core::orchestrator::ThresholdFamily::ScrThreshold, "relaxation_scr.svg", "mean chosen score threshold"),
        (medevac_core::orchestrator::ThresholdFamily::RtdThreshold, "relaxation_rtd.svg", "mean chosen hours threshold"),
    ] {
        let points: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.family == family).map(|r| (r.k as f64, r.mean_chosen_k)).collect();
        if points.is_empty() {
            continue;
        }
        let chart = line_chart("Threshold relaxation", "assets", label, &[Series { name: family.constant().into(), points }]);
        fs::write(dir.join(file), chart)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct ScheduleRow {
    asset: String,
    start: f64,
    end: f64,
    casualty: String,
}

/// One lane per asset, one bar per mission.
pub fn gantt_plot(dir: &Path) -> Result<(), HarnessError> {
    let rows: Vec<ScheduleRow> = read_csv(&dir.join("schedule.csv"))?;
    let assets: Vec<&str> = {
        let mut v: Vec<&str> = rows.iter().map(|r| r.asset.as_str()).collect();
        v.sort();
        v.dedup();
        v
    };
    let t1 = rows.iter().map(|r| r.end).fold(1.0, f64::max);
    let lane = if assets.is_empty() { 0.0 } else { (HEIGHT - 2.0 * MARGIN) / assets.len() as f64 };
    let px = |t: f64| MARGIN + t / t1 * (WIDTH - 2.0 * MARGIN);
    let mut out = String::new();
    header(&mut out, "Mission schedule");
    for (i, a) in assets.iter().enumerate() {
        let y = MARGIN + lane * i as f64;
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 6.0, y + lane / 2.0 + 4.0, escape(a));
        for (j, r) in rows.iter().filter(|r| r.asset == *a).enumerate() {
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{} {:.2}-{:.2} h</title></rect>"#,
                px(r.start),
                y + 2.0,
                (px(r.end) - px(r.start)).max(1.0),
                (lane - 4.0).max(1.0),
                COLORS[j % COLORS.len()],
                escape(&r.casualty),
                r.start,
                r.end
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">hours (0 to {})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        trim(t1)
    );
    out.push_str("</svg>\n");
    fs::write(dir.join("schedule.svg"), out)?;
    Ok(())
}
