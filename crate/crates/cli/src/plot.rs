use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tshc_core::checkpoint::write_atomic;
use tshc_core::{Checkpoint, EnvKind, Trajectory};

use crate::replay::{replay_task, VEHICLE_HEADER};

pub struct Track {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub goal: Option<(f64, f64)>,
}

pub fn read_csv(path: &Path) -> Result<Track> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(VEHICLE_HEADER) {
        bail!("{}: expected header `{VEHICLE_HEADER}`", path.display());
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let num = |k: usize| -> Result<f64> {
            cols.get(k)
                .and_then(|c| c.trim().parse().ok())
                .with_context(|| format!("{}:{}: bad row `{line}`", path.display(), i + 2))
        };
        points.push((num(1)?, num(2)?));
    }
    if points.is_empty() {
        bail!("{}: no rows", path.display());
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Track {
        label,
        points,
        goal: None,
    })
}

fn checkpoint_tracks(path: &Path) -> Result<Vec<Track>> {
    let ck = Checkpoint::load(path)
        .with_context(|| format!("cannot load checkpoint {}", path.display()))?;
    let mut out = Vec::new();
    for task in &ck.tasks {
        if task.env != EnvKind::Vehicle {
            bail!(
                "task `{}` is not a vehicle task; only vehicle trajectories can be plotted",
                task.id
            );
        }
        let result = replay_task(&ck, task, false)?;
        let Some(Trajectory::Vehicle(states)) = result.trajectory else {
            unreachable!("vehicle rollout records vehicle states")
        };
        out.push(Track {
            label: task.id.clone(),
            points: states.iter().map(|s| (s.x, s.y)).collect(),
            goal: Some((task.z_goal[0], task.z_goal[1])),
        });
    }
    Ok(out)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

fn color(i: usize, n: usize) -> String {
    let hue = 360.0 * i as f64 / n.max(1) as f64;
    format!("hsl({hue:.1},70%,42%)")
}

/// Renders tracks with a shared, aspect-preserving scale.
pub fn render(tracks: &[Track]) -> Result<String> {
    if tracks.is_empty() {
        bail!("nothing to plot");
    }
    let all = tracks
        .iter()
        .flat_map(|t| t.points.iter().copied().chain(t.goal));
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
        bail!("trajectories contain non-finite coordinates");
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1.0);
    let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
    let scale = ((WIDTH - 2.0 * MARGIN) / (x1 - x0)).min((HEIGHT - 2.0 * MARGIN) / (y1 - y0));
    let px = |x: f64| MARGIN + (x - x0) * scale;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ax0, ay0) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{ax0}" y1="{ay0}" x2="{}" y2="{ay0}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{ax0}" y1="{ay0}" x2="{ax0}" y2="{MARGIN}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">x [m]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">y [m]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (v, x) in [(x0, px(x0)), (x1, px(x1))] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{v:.2}</text>"#,
            ay0 + 18.0
        );
    }
    for (v, y) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y:.2}" text-anchor="end">{v:.2}</text>"#,
            ax0 - 6.0
        );
    }

    for (i, t) in tracks.iter().enumerate() {
        let c = color(i, tracks.len());
        let pts: Vec<String> = t
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<g class="track" data-label="{}">"#, escape(&t.label));
        let (first, last) = (t.points[0], t.points[t.points.len() - 1]);
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" data-start="{},{}" data-end="{},{}" points="{}"/>"#,
            first.0,
            first.1,
            last.0,
            last.1,
            pts.join(" ")
        );
        let (sx, sy) = t.points[0];
        let _ = writeln!(
            s,
            r#"<circle class="start" cx="{:.3}" cy="{:.3}" r="4" fill="{c}"/>"#,
            px(sx),
            py(sy)
        );
        let (gx, gy) = t
            .goal
            .unwrap_or(*t.points.last().expect("tracks are non-empty"));
        let _ = writeln!(
            s,
            r#"<rect class="goal" x="{:.3}" y="{:.3}" width="8" height="8" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            px(gx) - 4.0,
            py(gy) - 4.0
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn run(inputs: &[PathBuf], checkpoint: Option<&Path>, output: &Path) -> Result<()> {
    let mut tracks = Vec::new();
    for path in inputs {
        tracks.push(read_csv(path)?);
    }
    if let Some(ck) = checkpoint {
        tracks.extend(checkpoint_tracks(ck)?);
    }
    if tracks.is_empty() {
        bail!("no trajectories given; pass replay CSV files or --checkpoint");
    }
    let svg = render(&tracks)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_atomic(output, svg.as_bytes())?;
    eprintln!(
        "plotted {} trajectories to {}",
        tracks.len(),
        output.display()
    );
    Ok(())
}
