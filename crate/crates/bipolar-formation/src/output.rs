//! Run artifacts: RFC-4180 CSV logs, a pretty-printed JSON summary, and
//! self-contained SVG plots (agent paths and per-channel funnel views).

use crate::scenario::Scenario;
use crate::sim::{RunResult, TrajectoryLog};
use crate::vec2::Vec2;
use std::io;
use std::path::{Path, PathBuf};

const CRLF: &str = "\r\n";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Positions, commands and edge lengths, one row per logged step.
pub fn trajectory_csv(log: &TrajectoryLog) -> String {
    let agents = log.rows.first().map_or(0, |r| r.positions.len());
    let mut header = vec!["t".to_string()];
    for a in 1..=agents {
        header.push(format!("p{a}x"));
        header.push(format!("p{a}y"));
    }
    for a in 1..=agents {
        header.push(format!("u{a}x"));
        header.push(format!("u{a}y"));
    }
    for (j, i) in &log.edges {
        header.push(format!("len_{j}_{i}"));
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push_str(CRLF);
    for row in &log.rows {
        let mut fields = vec![row.t.to_string()];
        for p in &row.positions {
            fields.push(p.x.to_string());
            fields.push(p.y.to_string());
        }
        for u in &row.commands {
            fields.push(u.x.to_string());
            fields.push(u.y.to_string());
        }
        for d in &row.edge_lengths {
            fields.push(d.to_string());
        }
        out.push_str(&fields.join(","));
        out.push_str(CRLF);
    }
    out
}

/// Channel errors with their funnel edges and transformed errors.
pub fn errors_csv(log: &TrajectoryLog) -> String {
    let mut header = vec!["t".to_string()];
    for info in &log.channels {
        header.push(info.label.clone());
        header.push(format!("{}_lo", info.label));
        header.push(format!("{}_hi", info.label));
        header.push(format!("{}_sigma", info.label));
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push_str(CRLF);
    for row in &log.rows {
        let mut fields = vec![row.t.to_string()];
        for s in &row.channels {
            fields.push(s.e.to_string());
            fields.push(s.lo.to_string());
            fields.push(s.hi.to_string());
            fields.push(s.sigma.to_string());
        }
        out.push_str(&fields.join(","));
        out.push_str(CRLF);
    }
    out
}

// ---------------------------------------------------------------------------
// SVG plotting

/// Affine data-to-pixel map with an inverted y axis.
struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
    py0: f64,
    px0: f64,
}

impl Frame {
    fn new(xr: (f64, f64), yr: (f64, f64), px: (f64, f64), py: (f64, f64)) -> Frame {
        let dx = (xr.1 - xr.0).max(1e-12);
        let dy = (yr.1 - yr.0).max(1e-12);
        Frame {
            x0: xr.0,
            y0: yr.0,
            sx: (px.1 - px.0) / dx,
            sy: (py.1 - py.0) / dy,
            px0: px.0,
            py0: py.1,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (self.px0 + (x - self.x0) * self.sx, self.py0 - (y - self.y0) * self.sy)
    }
}

fn polyline(frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, style: &str) -> String {
    let coords: Vec<String> = pts
        .map(|(x, y)| {
            let (px, py) = frame.map(x, y);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!("<polyline fill=\"none\" {style} points=\"{}\"/>\n", coords.join(" "))
}

fn text(x: f64, y: f64, size: u32, content: &str) -> String {
    format!("<text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"{size}\" font-family=\"sans-serif\">{content}</text>\n")
}

/// Picks a row stride that keeps plots at a sane number of points.
fn stride(rows: usize) -> usize {
    (rows / 2000).max(1)
}

/// Agent trajectories with formation snapshots (start, end, and any
/// scenario-specified instants).
pub fn paths_svg(result: &RunResult, scenario: &Scenario) -> String {
    let log = &result.log;
    let (w, h) = (840.0, 640.0);
    if log.rows.is_empty() {
        return format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\"/>");
    }
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for row in &log.rows {
        for p in &row.positions {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let pad = 0.06 * ((hi.x - lo.x).max(hi.y - lo.y)).max(1e-9);
    let frame = Frame::new(
        (lo.x - pad, hi.x + pad),
        (lo.y - pad, hi.y + pad),
        (50.0, w - 20.0),
        (h - 40.0, 20.0),
    );
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    // Formation snapshots: straight lines along every edge.
    let dt = if log.rows.len() > 1 { log.rows[1].t - log.rows[0].t } else { 1.0 };
    let mut snap_rows = vec![0usize, log.rows.len() - 1];
    if let Some(times) = &scenario.snapshot_times {
        for t in times {
            let idx = ((t / dt).round() as usize).min(log.rows.len() - 1);
            snap_rows.push(idx);
        }
    }
    snap_rows.sort_unstable();
    snap_rows.dedup();
    for &idx in &snap_rows {
        let row = &log.rows[idx];
        for &(j, i) in &log.edges {
            let a = row.positions[j - 1];
            let b = row.positions[i - 1];
            svg.push_str(&polyline(
                &frame,
                [(a.x, a.y), (b.x, b.y)].into_iter(),
                "stroke=\"#999999\" stroke-width=\"1\"",
            ));
        }
        let t_label = frame.map(row.positions[0].x, row.positions[0].y);
        svg.push_str(&text(t_label.0 + 4.0, t_label.1 - 4.0, 10, &format!("t={:.1}", row.t)));
    }
    // Trails.
    let agents = log.rows[0].positions.len();
    let step = stride(log.rows.len());
    for a in 0..agents {
        let color = PALETTE[a % PALETTE.len()];
        let pts = log
            .rows
            .iter()
            .step_by(step)
            .chain(std::iter::once(log.rows.last().unwrap()))
            .map(|r| (r.positions[a].x, r.positions[a].y));
        svg.push_str(&polyline(
            &frame,
            pts,
            &format!("stroke=\"{color}\" stroke-width=\"1.5\""),
        ));
        let last = log.rows.last().unwrap().positions[a];
        let (cx, cy) = frame.map(last.x, last.y);
        svg.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"4\" fill=\"{color}\"/>\n"
        ));
        svg.push_str(&text(cx + 6.0, cy + 4.0, 12, &format!("{}", a + 1)));
    }
    svg.push_str(&text(
        10.0,
        16.0,
        13,
        &format!("{}: agent paths and formation snapshots", scenario.name),
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Small-multiple funnel plots: each channel's error against its shrinking
/// containment interval.
pub fn funnels_svg(result: &RunResult) -> String {
    let log = &result.log;
    let w = 840.0;
    let panel_h = 120.0;
    let gap = 16.0;
    let n = log.channels.len();
    let h = 30.0 + n as f64 * (panel_h + gap);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    if log.rows.is_empty() || n == 0 {
        svg.push_str("</svg>\n");
        return svg;
    }
    let t_max = log.rows.last().unwrap().t.max(1e-9);
    let step = stride(log.rows.len());
    let series = |idx: usize, f: &dyn Fn(&crate::sim::ChannelSample) -> f64| {
        log.rows
            .iter()
            .step_by(step)
            .chain(std::iter::once(log.rows.last().unwrap()))
            .map(move |r| (r.t, f(&r.channels[idx])))
            .collect::<Vec<_>>()
    };
    for (idx, info) in log.channels.iter().enumerate() {
        let top = 24.0 + idx as f64 * (panel_h + gap);
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for r in log.rows.iter().step_by(step) {
            let s = &r.channels[idx];
            ymin = ymin.min(s.lo).min(s.e);
            ymax = ymax.max(s.hi).max(s.e);
        }
        let pad = 0.08 * (ymax - ymin).max(1e-9);
        let frame = Frame::new(
            (0.0, t_max),
            (ymin - pad, ymax + pad),
            (60.0, w - 20.0),
            (top + panel_h, top),
        );
        // Zero line, funnel edges, error trace.
        if ymin < 0.0 && ymax > 0.0 {
            svg.push_str(&polyline(
                &frame,
                [(0.0, 0.0), (t_max, 0.0)].into_iter(),
                "stroke=\"#dddddd\" stroke-width=\"1\"",
            ));
        }
        for f in [
            (&|s: &crate::sim::ChannelSample| s.lo) as &dyn Fn(&crate::sim::ChannelSample) -> f64,
            &|s| s.hi,
        ] {
            svg.push_str(&polyline(
                &frame,
                series(idx, f).into_iter(),
                "stroke=\"#d62728\" stroke-width=\"1\" stroke-dasharray=\"4 3\"",
            ));
        }
        let color = PALETTE[info.agent % PALETTE.len()];
        svg.push_str(&polyline(
            &frame,
            series(idx, &|s| s.e).into_iter(),
            &format!("stroke=\"{color}\" stroke-width=\"1.5\""),
        ));
        svg.push_str(&text(
            8.0,
            top + 12.0,
            12,
            &format!("{} (agent {}, {})", info.label, info.agent, info.kind),
        ));
    }
    svg.push_str(&text(8.0, 14.0, 13, "channel errors inside their funnels"));
    svg.push_str("</svg>\n");
    svg
}

/// Writes the standard artifact set into `dir` (creating it if needed):
/// `trajectory.csv`, `errors.csv`, `summary.json`, `paths.svg`,
/// `funnels.svg`. Returns the written paths.
pub fn write_run_artifacts(
    dir: &Path,
    result: &RunResult,
    scenario: &Scenario,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, content: String| -> io::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        written.push(path);
        Ok(())
    };
    put("trajectory.csv", trajectory_csv(&result.log))?;
    put("errors.csv", errors_csv(&result.log))?;
    let mut summary = serde_json::to_string_pretty(&result.summary)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    summary.push('\n');
    put("summary.json", summary)?;
    put("paths.svg", paths_svg(result, scenario))?;
    put("funnels.svg", funnels_svg(result))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run;

    fn short_run() -> (Scenario, RunResult) {
        let mut scenario = Scenario::six_agent_maneuver();
        scenario.horizon = 0.05;
        let result = run(&scenario).unwrap();
        (scenario, result)
    }

    #[test]
    fn trajectory_csv_is_rectangular_rfc4180() {
        let (_, result) = short_run();
        let csv = trajectory_csv(&result.log);
        assert!(csv.ends_with(CRLF));
        let lines: Vec<&str> = csv.split(CRLF).filter(|l| !l.is_empty()).collect();
        assert_eq!(lines.len(), result.log.rows.len() + 1);
        let cols = lines[0].split(',').count();
        // t + 12 positions + 12 commands + 9 edge lengths.
        assert_eq!(cols, 1 + 12 + 12 + 9);
        for line in &lines {
            assert_eq!(line.split(',').count(), cols);
        }
        // Values parse back to finite floats.
        let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert!(first.is_finite());
        assert!(lines[0].starts_with("t,p1x,p1y"));
    }

    #[test]
    fn errors_csv_lists_every_channel_with_band() {
        let (_, result) = short_run();
        let csv = errors_csv(&result.log);
        let header = csv.split(CRLF).next().unwrap();
        assert!(header.contains("e_d,e_d_lo,e_d_hi,e_d_sigma"));
        assert!(header.contains("e_beta"));
        assert!(header.contains("e_r3"));
        assert!(header.contains("e_alpha6"));
        assert_eq!(header.split(',').count(), 1 + 4 * result.log.channels.len());
    }

    #[test]
    fn svg_plots_are_well_formed() {
        let (scenario, result) = short_run();
        let paths = paths_svg(&result, &scenario);
        assert!(paths.starts_with("<svg"));
        assert!(paths.ends_with("</svg>\n"));
        assert!(paths.matches("<circle").count() == 6);
        assert!(paths.contains("polyline"));
        let funnels = funnels_svg(&result);
        assert!(funnels.starts_with("<svg"));
        // error + two band edges per channel, plus zero lines.
        assert!(funnels.matches("polyline").count() >= 3 * result.log.channels.len());
    }

    #[test]
    fn artifacts_land_on_disk() {
        let (scenario, result) = short_run();
        let dir = tempfile::tempdir().unwrap();
        let written = write_run_artifacts(dir.path(), &result, &scenario).unwrap();
        assert_eq!(written.len(), 5);
        for path in &written {
            assert!(path.exists(), "{path:?} missing");
            assert!(std::fs::metadata(path).unwrap().len() > 0);
        }
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["scenario"], "six_agent_maneuver");
        assert_eq!(summary["agents"], 6);
        assert!(summary["channels"].as_array().unwrap().len() == 10);
    }

    #[test]
    fn identical_runs_produce_identical_bytes() {
        let (_, a) = short_run();
        let (_, b) = short_run();
        assert_eq!(trajectory_csv(&a.log), trajectory_csv(&b.log));
        assert_eq!(errors_csv(&a.log), errors_csv(&b.log));
    }
}
