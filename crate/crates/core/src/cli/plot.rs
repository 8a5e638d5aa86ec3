//! Static SVG plots of one episode.
//!
//! The upper panel shows obstacles, the dotted reference, sampled and
//! optimal rollouts of the snapshot step (if any) and the executed
//! trajectory; the lower panel shows the exploration rate over time.

use std::fmt::Write as _;
use std::path::Path;

use super::output::atomic_write;
use crate::error::Result;
use crate::sim::{EpisodeResult, MissionSpec};
use crate::world::Vec2;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const MAP_MAX_HEIGHT: f64 = 420.0;
const CURVE_HEIGHT: f64 = 140.0;

pub fn emit_plot(episode: &EpisodeResult, mission: &MissionSpec, path: &Path) -> Result<()> {
    atomic_write(path, render_svg(episode, mission).as_bytes())
}

struct Frame {
    min: Vec2,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Vec2>) -> Frame {
        let mut min = Vec2::repeat(f64::INFINITY);
        let mut max = Vec2::repeat(f64::NEG_INFINITY);
        for p in points {
            min = min.inf(&p);
            max = max.sup(&p);
        }
        if !min.x.is_finite() {
            min = Vec2::zeros();
            max = Vec2::new(1.0, 1.0);
        }
        let pad = 0.05 * (max - min).max().max(1.0);
        min -= Vec2::repeat(pad);
        max += Vec2::repeat(pad);
        let span = max - min;
        let scale = ((WIDTH - 2.0 * MARGIN) / span.x).min(MAP_MAX_HEIGHT / span.y);
        Frame {
            min,
            scale,
            height: span.y * scale,
        }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            MARGIN + self.height - (p.y - self.min.y) * self.scale,
        )
    }

    fn points(&self, ps: &[Vec2]) -> String {
        let mut s = String::new();
        for (i, p) in ps.iter().enumerate() {
            let (x, y) = self.map(*p);
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{x:.2},{y:.2}").unwrap();
        }
        s
    }
}

pub fn render_svg(episode: &EpisodeResult, mission: &MissionSpec) -> String {
    let executed = episode.positions();
    let reference = mission.reference.waypoints();
    let world = &mission.world;

    let mut extent: Vec<Vec2> = executed.iter().chain(reference).copied().collect();
    for o in &world.obstacles {
        extent.push(o.center - Vec2::repeat(o.radius));
        extent.push(o.center + Vec2::repeat(o.radius));
    }
    if let Some(b) = &world.bounds {
        extent.push(b.min);
        extent.push(b.max);
    }
    let frame = Frame::fit(extent.into_iter());
    let curve_top = 2.0 * MARGIN + frame.height;
    let height = curve_top + CURVE_HEIGHT + 2.0 * MARGIN;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        "<title>{} / seed {} / {}</title>",
        mission.name,
        episode.seed,
        if episode.success { "success" } else { "failure" }
    )
    .unwrap();

    svg.push_str("<g id=\"map\">\n");
    for o in &world.obstacles {
        let (cx, cy) = frame.map(o.center);
        writeln!(
            svg,
            r##"<circle class="obstacle" cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="#222" fill-opacity="0.85"/>"##,
            o.radius * frame.scale
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<polyline class="reference" points="{}" fill="none" stroke="black" stroke-width="1" stroke-dasharray="2 3"/>"#,
        frame.points(reference)
    )
    .unwrap();
    if let Some((_, snap)) = &episode.snapshot {
        for s in &snap.sampled {
            writeln!(
                svg,
                r##"<polyline class="sampled" points="{}" fill="none" stroke="#999" stroke-width="0.5" stroke-opacity="0.6"/>"##,
                frame.points(s)
            )
            .unwrap();
        }
        writeln!(
            svg,
            r#"<polyline class="optimal" points="{}" fill="none" stroke="purple" stroke-width="1.5"/>"#,
            frame.points(&snap.optimal)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<polyline class="executed" points="{}" fill="none" stroke="red" stroke-width="1.5"/>"#,
        frame.points(&executed)
    )
    .unwrap();
    let (gx, gy) = frame.map(mission.goal());
    writeln!(
        svg,
        r#"<circle class="goal" cx="{gx:.2}" cy="{gy:.2}" r="{:.2}" fill="none" stroke="red" stroke-dasharray="3 2"/>"#,
        mission.goal_radius() * frame.scale
    )
    .unwrap();
    svg.push_str("</g>\n");

    exploration_panel(&mut svg, episode, curve_top);
    svg.push_str("</svg>\n");
    svg
}

fn exploration_panel(svg: &mut String, episode: &EpisodeResult, top: f64) {
    let w = WIDTH - 2.0 * MARGIN;
    let rates: Vec<(f64, f64)> = episode.log.iter().map(|r| (r.t, r.exploration_rate)).collect();
    let t_max = rates.last().map_or(1.0, |r| r.0).max(1e-9);
    let s_max = rates.iter().map(|r| r.1).fold(0.0, f64::max).max(1e-9) * 1.1;

    svg.push_str("<g id=\"exploration\">\n");
    writeln!(
        svg,
        r##"<rect x="{MARGIN:.2}" y="{top:.2}" width="{w:.2}" height="{CURVE_HEIGHT:.2}" fill="none" stroke="#888"/>"##
    )
    .unwrap();
    let mut points = String::new();
    for (i, (t, s)) in rates.iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        let x = MARGIN + t / t_max * w;
        let y = top + CURVE_HEIGHT - s / s_max * CURVE_HEIGHT;
        write!(points, "{x:.2},{y:.2}").unwrap();
    }
    writeln!(
        svg,
        r#"<polyline class="exploration-rate" points="{points}" fill="none" stroke="steelblue" stroke-width="1.2"/>"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}">S_e (max {:.3}) over {:.2} s</text>"#,
        MARGIN + 4.0,
        top + 12.0,
        s_max / 1.1,
        t_max
    )
    .unwrap();
    svg.push_str("</g>\n");
}
