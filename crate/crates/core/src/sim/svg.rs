use std::fmt::Write;

use super::{EnvironmentSpec, RobotState};
use crate::belief::HierarchicalBelief;
use crate::geometry::Rect;

const SCALE: f64 = 50.0;

fn rect(out: &mut String, r: &Rect, height: f64, style: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" {style}/>"#,
        r.min.x * SCALE,
        (height - r.max.y) * SCALE,
        r.width() * SCALE,
        r.height() * SCALE
    );
}

/// Debug snapshot of an environment with optional particle and robot
/// overlays. Y points up in world coordinates and down in the image.
pub fn render_svg(env: &EnvironmentSpec, belief: Option<&HierarchicalBelief>, robot: Option<&RobotState>) -> String {
    let (w, h) = env.rooms.iter().fold((0.0f64, 0.0f64), |(w, h), r| {
        (w.max(r.footprint.max.x), h.max(r.footprint.max.y))
    });
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
        w * SCALE,
        h * SCALE
    );
    for room in &env.rooms {
        rect(&mut out, &room.footprint, h, r##"fill="#f7f7f7""##);
        let c = room.footprint.center();
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            c.x * SCALE,
            (h - c.y) * SCALE,
            room.label
        );
    }
    for s in &env.surfaces {
        rect(&mut out, &s.footprint, h, r##"fill="#9ec5fe" stroke="#1d4ed8""##);
    }
    for o in &env.occluders {
        rect(&mut out, o, h, r##"fill="#facc15""##);
    }
    for wall in &env.walls {
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="3"/>"#,
            wall.a.x * SCALE,
            (h - wall.a.y) * SCALE,
            wall.b.x * SCALE,
            (h - wall.b.y) * SCALE
        );
    }
    if let Some(b) = belief {
        for set in b.all_particles() {
            for p in set {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="1.5" fill="red" fill-opacity="0.5"/>"#,
                    p.pose.x * SCALE,
                    (h - p.pose.y) * SCALE
                );
            }
        }
    }
    for o in &env.objects {
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="6" height="6" fill="gray"><title>{}</title></rect>"#,
            o.pose.x * SCALE - 3.0,
            (h - o.pose.y) * SCALE - 3.0,
            o.label
        );
    }
    if let Some(r) = robot {
        let p = r.base.position();
        let g = r.gaze();
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="8" fill="green"/><line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="green" stroke-width="2"/>"#,
            p.x * SCALE,
            (h - p.y) * SCALE,
            p.x * SCALE,
            (h - p.y) * SCALE,
            (p.x + 0.5 * g.cos()) * SCALE,
            (h - p.y - 0.5 * g.sin()) * SCALE
        );
    }
    out.push_str("</svg>\n");
    out
}
