//! Deterministic SVG output, hand-rolled on purpose: the figures are plain
//! (heatmap panels and point maps), and plotting crates tend to embed
//! timestamps or environment-dependent font metrics, which would break the
//! byte-identical rerun guarantee.

use std::fmt::Write as _;
use std::path::Path;

use stpat::pattern::PointPattern;
use stpat::secondorder::{GridSpec, KSurface};
use stpat::Result;

const PANEL: f64 = 240.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 46.0;
const GAP: f64 = 44.0;

pub struct Panel<'a> {
    pub title: &'a str,
    pub values: &'a [Vec<f64>],
    /// Symmetric blue-white-red scale centered at zero, for difference
    /// surfaces; plain sequential otherwise.
    pub diverging: bool,
}

/// The three-panel comparison figure of a global K surface: the estimate,
/// its benchmark, and their difference.
pub fn k_panels(path: &Path, surface: &KSurface) -> Result<()> {
    let diff: Vec<Vec<f64>> = surface
        .values
        .iter()
        .zip(&surface.theo)
        .map(|(v, t)| v.iter().zip(t).map(|(a, b)| a - b).collect())
        .collect();
    surface_panels(
        path,
        &surface.grid,
        &[
            Panel { title: "estimated", values: &surface.values, diverging: false },
            Panel { title: "theoretical", values: &surface.theo, diverging: false },
            Panel { title: "difference", values: &diff, diverging: true },
        ],
    )
}

/// Heatmap panels over a shared (r, h) grid; r runs rightward, h upward.
pub fn surface_panels(path: &Path, grid: &GridSpec, panels: &[Panel]) -> Result<()> {
    let nr = grid.r_values().len();
    let nh = grid.h_values().len();
    let k = panels.len() as f64;
    let width = MARGIN_LEFT + k * PANEL + (k - 1.0) * GAP + 20.0;
    let height = MARGIN_TOP + PANEL + MARGIN_BOTTOM;

    let mut svg = header(width, height);
    for (p, panel) in panels.iter().enumerate() {
        let x0 = MARGIN_LEFT + p as f64 * (PANEL + GAP);
        let y0 = MARGIN_TOP;
        let (lo, hi) = range(panel.values);
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="13" font-family="sans-serif" font-weight="bold">{}</text>"##,
            x0,
            y0 - 18.0,
            esc(panel.title)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="10" font-family="sans-serif" fill="#555">[{}, {}]</text>"##,
            x0,
            y0 - 6.0,
            sig(lo),
            sig(hi)
        );
        let cw = PANEL / nr as f64;
        let ch = PANEL / nh as f64;
        for a in 0..nr {
            for b in 0..nh {
                let v = panel.values[a][b];
                let u = if panel.diverging {
                    let m = lo.abs().max(hi.abs());
                    if m == 0.0 {
                        0.5
                    } else {
                        (v + m) / (2.0 * m)
                    }
                } else if hi > lo {
                    (v - lo) / (hi - lo)
                } else {
                    0.0
                };
                let color = if panel.diverging { diverging(u) } else { sequential(u) };
                let _ = writeln!(
                    svg,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"##,
                    x0 + a as f64 * cw,
                    y0 + (nh - 1 - b) as f64 * ch,
                    cw + 0.5, // overdraw hides hairline seams between cells
                    ch + 0.5,
                );
            }
        }
        let _ = writeln!(
            svg,
            r##"<rect x="{x0:.1}" y="{y0:.1}" width="{PANEL:.1}" height="{PANEL:.1}" fill="none" stroke="#333" stroke-width="1"/>"##
        );
        axis_labels(&mut svg, x0, y0, grid, p == 0);
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}

fn axis_labels(svg: &mut String, x0: f64, y0: f64, grid: &GridSpec, first: bool) {
    let r_lo = grid.r_values()[0];
    let h_lo = grid.h_values()[0];
    let tick = |svg: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(
            svg,
            r##"<text x="{x:.1}" y="{y:.1}" font-size="10" font-family="sans-serif" text-anchor="{anchor}">{text}</text>"##
        );
    };
    tick(svg, x0, y0 + PANEL + 14.0, "start", sig(r_lo));
    tick(svg, x0 + PANEL, y0 + PANEL + 14.0, "end", sig(grid.r_max()));
    tick(svg, x0 + PANEL / 2.0, y0 + PANEL + 28.0, "middle", "r".into());
    if first {
        tick(svg, x0 - 6.0, y0 + PANEL, "end", sig(h_lo));
        tick(svg, x0 - 6.0, y0 + 10.0, "end", sig(grid.h_max()));
        tick(svg, x0 - 32.0, y0 + PANEL / 2.0, "middle", "h".into());
    }
}

/// Point map of a pattern, with `highlight` drawn larger and in red on top,
/// the network (if any) underneath, and a caption line below. An empty
/// pattern still produces a frame and the caption — just no points.
pub fn pattern_plot(
    path: &Path,
    p: &PointPattern,
    highlight: &[usize],
    title: &str,
    caption: &str,
) -> Result<()> {
    let frame = 480.0;
    let margin = 34.0;
    let width = frame + 2.0 * margin;
    let height = frame + 2.0 * margin + 18.0;

    let window = match p.window() {
        Some(w) => w,
        None => p.network().expect("patterns are planar or on a network").bounding_box(),
    };
    let pad_x = 0.04 * (window.x_max - window.x_min);
    let pad_y = 0.04 * (window.y_max - window.y_min);
    let (wx0, wx1) = (window.x_min - pad_x, window.x_max + pad_x);
    let (wy0, wy1) = (window.y_min - pad_y, window.y_max + pad_y);
    let scale = (frame / (wx1 - wx0)).min(frame / (wy1 - wy0));
    let sx = |x: f64| margin + (x - wx0) * scale;
    let sy = |y: f64| margin + frame - (y - wy0) * scale; // svg y grows downward

    let mut svg = header(width, height);
    let _ = writeln!(
        svg,
        r##"<text x="{margin:.1}" y="{:.1}" font-size="13" font-family="sans-serif" font-weight="bold">{}</text>"##,
        margin - 12.0,
        esc(title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333" stroke-width="1"/>"##,
        sx(window.x_min),
        sy(window.y_max),
        (window.x_max - window.x_min) * scale,
        (window.y_max - window.y_min) * scale,
    );
    if let Some(net) = p.network() {
        let vertices = net.vertices();
        for seg in net.segments() {
            let (a, b) = (vertices[seg.a], vertices[seg.b]);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-width="1.2"/>"##,
                sx(a[0]),
                sy(a[1]),
                sx(b[0]),
                sy(b[1]),
            );
        }
    }
    for (i, pt) in p.points().iter().enumerate() {
        if highlight.contains(&i) {
            continue; // drawn after, so they sit on top
        }
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.6" fill="#3a6ea5" fill-opacity="0.75"/>"##,
            sx(pt[0]),
            sy(pt[1]),
        );
    }
    for &i in highlight {
        let pt = p.points()[i];
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4.2" fill="#c23b22" stroke="#5d1008" stroke-width="1"/>"##,
            sx(pt[0]),
            sy(pt[1]),
        );
    }
    if p.n() == 0 {
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="12" font-family="sans-serif" fill="#777" text-anchor="middle">no points</text>"##,
            margin + frame / 2.0,
            margin + frame / 2.0,
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{margin:.1}" y="{:.1}" font-size="11" font-family="sans-serif">{}</text>"##,
        margin + frame + 24.0,
        esc(caption)
    );
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}

fn header(width: f64, height: f64) -> String {
    format!(
        concat!(
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" "##,
            r##"viewBox="0 0 {w:.0} {h:.0}">"##,
            "\n",
            r##"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"##,
            "\n"
        ),
        w = width,
        h = height
    )
}

fn range(values: &[Vec<f64>]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.iter().flatten() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

fn lerp(a: [f64; 3], b: [f64; 3], u: f64) -> [f64; 3] {
    [a[0] + (b[0] - a[0]) * u, a[1] + (b[1] - a[1]) * u, a[2] + (b[2] - a[2]) * u]
}

fn rgb(c: [f64; 3]) -> String {
    let ch = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("rgb({},{},{})", ch(c[0]), ch(c[1]), ch(c[2]))
}

/// Dark violet → teal → yellow, light end = large values.
fn sequential(u: f64) -> String {
    let u = u.clamp(0.0, 1.0);
    let (a, b, t) = if u < 0.5 {
        ([0.267, 0.005, 0.329], [0.128, 0.567, 0.551], u * 2.0)
    } else {
        ([0.128, 0.567, 0.551], [0.993, 0.906, 0.144], u * 2.0 - 1.0)
    };
    rgb(lerp(a, b, t))
}

/// Blue → white → red, white pinned at zero.
fn diverging(u: f64) -> String {
    let u = u.clamp(0.0, 1.0);
    let (a, b, t) = if u < 0.5 {
        ([0.129, 0.400, 0.675], [1.0, 1.0, 1.0], u * 2.0)
    } else {
        ([1.0, 1.0, 1.0], [0.698, 0.106, 0.106], u * 2.0 - 1.0)
    };
    rgb(lerp(a, b, t))
}

/// Four significant digits: compact and stable tick text.
fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 4 - 1 - x.abs().log10().floor() as i32;
    let f = 10f64.powi(digits);
    format!("{}", (x * f).round() / f)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
