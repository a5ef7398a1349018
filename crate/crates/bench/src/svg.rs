//! SVG drawings of the first two dimensions of an environment.
//!
//! Higher-dimensional worlds are cut by the plane through the start state
//! spanned by dimensions 0 and 1; obstacles missing that plane are omitted.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dit_core::world::{Environment, HyperRect};
use dit_core::StateVec;

use crate::error::{io_at, Result};

const SIZE: f64 = 600.0;

/// Page coordinates of a state, clamped to the unit square. The y axis
/// points up.
fn page(x: &[f64]) -> (f64, f64) {
    let c = |v: f64| v.clamp(0.0, 1.0);
    (c(x[0]) * SIZE, (1.0 - c(x[1])) * SIZE)
}

fn in_slice(o: &HyperRect, at: &[f64]) -> bool {
    (2..at.len()).all(|k| o.lower[k] <= at[k] && at[k] <= o.upper[k])
}

pub fn svg_document(
    env: &Environment,
    tree: Option<&[(StateVec, StateVec)]>,
    path: Option<&[StateVec]>,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff" stroke="#000000"/>"##
    );
    let at = env.start().coords();
    for o in env.obstacles().iter().filter(|o| in_slice(o, at)) {
        let (x0, y1) = page(&o.lower);
        let (x1, y0) = page(&o.upper);
        let _ = writeln!(
            s,
            r##"<rect class="obstacle" x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="#555555"/>"##,
            x1 - x0,
            y1 - y0
        );
    }
    if let Some(edges) = tree {
        let _ = writeln!(s, r##"<g class="tree" stroke="#7fa7d9" stroke-width="1">"##);
        for (a, b) in edges {
            let (ax, ay) = page(a.coords());
            let (bx, by) = page(b.coords());
            let _ = writeln!(
                s,
                r#"<line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{by:.3}"/>"#
            );
        }
        s.push_str("</g>\n");
    }
    if let Some(p) = path.filter(|p| !p.is_empty()) {
        let points: Vec<String> = p
            .iter()
            .map(|x| {
                let (px, py) = page(x.coords());
                format!("{px:.3},{py:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="solution" points="{}" fill="none" stroke="#d62728" stroke-width="3"/>"##,
            points.join(" ")
        );
    }
    for (class, x, colour) in [
        ("start", env.start(), "#2ca02c"),
        ("goal", env.goal(), "#ff7f0e"),
    ] {
        let (cx, cy) = page(x.coords());
        let _ = writeln!(
            s,
            r#"<circle class="{class}" cx="{cx:.3}" cy="{cy:.3}" r="6" fill="{colour}"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_svg(
    env: &Environment,
    tree: Option<&[(StateVec, StateVec)]>,
    path: Option<&[StateVec]>,
    out: &Path,
) -> Result<()> {
    fs::write(out, svg_document(env, tree, path)).map_err(io_at(out))
}
