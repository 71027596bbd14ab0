//! Zero-level-set polylines: extraction, length filtering and export.
//!
//! Extraction is marching squares over the pixel grid. Exact zeros are
//! nudged to `+ZERO_NUDGE` first so every corner has a strict sign, and
//! saddle cells are resolved by the sign of the cell-centre average.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{LevelSet, ScalarField};
use crate::io::write_atomic;
use crate::raster::RasterImage;

pub const ZERO_NUDGE: f64 = 1e-12;
/// Length threshold below which contours are treated as spurious.
pub const DEFAULT_MIN_LEN: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    pub vertices: Vec<(f64, f64)>,
    /// Closed contours do not repeat their first vertex.
    pub closed: bool,
}

/// A crossing sits on a grid edge: horizontal edges join `(x, y)`-`(x+1, y)`,
/// vertical ones `(x, y)`-`(x, y+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeId {
    H(usize, usize),
    V(usize, usize),
}

fn crossing(phi: &ScalarField, e: EdgeId) -> (f64, f64) {
    let (a, b, x0, y0, horizontal) = match e {
        EdgeId::H(x, y) => (phi[(x, y)], phi[(x + 1, y)], x, y, true),
        EdgeId::V(x, y) => (phi[(x, y)], phi[(x, y + 1)], x, y, false),
    };
    let t = a / (a - b);
    if horizontal {
        (x0 as f64 + t, y0 as f64)
    } else {
        (x0 as f64, y0 as f64 + t)
    }
}

/// Segments of one cell, as pairs of edge ids.
fn cell_segments(phi: &ScalarField, x: usize, y: usize, out: &mut Vec<(EdgeId, EdgeId)>) {
    let v = [
        phi[(x, y)],
        phi[(x + 1, y)],
        phi[(x + 1, y + 1)],
        phi[(x, y + 1)],
    ];
    let neg = v.map(|c| c < 0.0);
    // edges in corner order: top (0-1), right (1-2), bottom (3-2), left (0-3)
    let edges = [
        EdgeId::H(x, y),
        EdgeId::V(x + 1, y),
        EdgeId::H(x, y + 1),
        EdgeId::V(x, y),
    ];
    let cut: Vec<usize> = (0..4).filter(|&i| neg[i] != neg[(i + 1) % 4]).collect();
    match cut.len() {
        0 => {}
        2 => out.push((edges[cut[0]], edges[cut[1]])),
        4 => {
            let centre_neg = v.iter().sum::<f64>() / 4.0 < 0.0;
            // the centre joins the diagonal pair sharing its sign; cut off the
            // other two corners individually
            let (c1, c2) = if neg[0] == centre_neg { (1, 3) } else { (0, 2) };
            // corner k is bounded by edges k-1 and k
            let around = |k: usize| (edges[(k + 3) % 4], edges[k]);
            out.push(around(c1));
            out.push(around(c2));
        }
        _ => unreachable!("a cycle of four signs changes an even number of times"),
    }
}

pub fn extract_zero_set(phi: &LevelSet) -> Vec<Contour> {
    let (w, h) = phi.dims();
    if w < 2 || h < 2 {
        return Vec::new();
    }
    let phi = phi.map(|v| if v == 0.0 { ZERO_NUDGE } else { v });
    let mut segments = Vec::new();
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            cell_segments(&phi, x, y, &mut segments);
        }
    }
    let mut adj: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
    for &(a, b) in &segments {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }

    let mut visited: BTreeMap<EdgeId, bool> = adj.keys().map(|&k| (k, false)).collect();
    let mut chains = Vec::new();
    let walk = |start: EdgeId, visited: &mut BTreeMap<EdgeId, bool>| {
        let mut chain = vec![start];
        visited.insert(start, true);
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|n| !visited[n]);
            match next {
                Some(n) => {
                    visited.insert(n, true);
                    chain.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        let closed = chain.len() > 2 && adj[&cur].contains(&start);
        (chain, closed)
    };
    // open chains start at border crossings, which have a single neighbour
    let ends: Vec<EdgeId> = adj
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(&k, _)| k)
        .collect();
    for e in ends {
        if !visited[&e] {
            chains.push(walk(e, &mut visited));
        }
    }
    let rest: Vec<EdgeId> = adj.keys().copied().collect();
    for e in rest {
        if !visited[&e] {
            chains.push(walk(e, &mut visited));
        }
    }
    chains
        .into_iter()
        .map(|(ids, closed)| Contour {
            vertices: ids.into_iter().map(|e| crossing(&phi, e)).collect(),
            closed,
        })
        .collect()
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

pub fn contour_length(c: &Contour) -> f64 {
    let open: f64 = c.vertices.windows(2).map(|p| dist(p[0], p[1])).sum();
    match (c.closed, c.vertices.first(), c.vertices.last()) {
        (true, Some(&a), Some(&b)) => open + dist(a, b),
        _ => open,
    }
}

pub fn filter_by_length(cs: &[Contour], min_len: f64) -> Vec<Contour> {
    cs.iter()
        .filter(|c| contour_length(c) >= min_len)
        .cloned()
        .collect()
}

/// Integer pixels of the segment from `a` to `b`, endpoints included.
pub fn bresenham(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let (dx, dy) = ((b.0 - a.0).abs(), -(b.1 - a.1).abs());
    let (sx, sy) = ((b.0 - a.0).signum(), (b.1 - a.1).signum());
    let mut err = dx + dy;
    let mut out = vec![(x, y)];
    while (x, y) != b {
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
        out.push((x, y));
    }
    out
}

/// Grayscale image in RGB with contour pixels painted pure red.
pub fn render_overlay(image: &ScalarField, cs: &[Contour]) -> RasterImage {
    let (w, h) = image.dims();
    let gray = RasterImage::from_unit_field(image);
    let mut samples: Vec<u16> = gray.samples().iter().flat_map(|&s| [s, s, s]).collect();
    let maxval = gray.maxval();
    let mut paint = |(x, y): (i64, i64)| {
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            let k = 3 * (y as usize * w + x as usize);
            samples[k..k + 3].copy_from_slice(&[maxval, 0, 0]);
        }
    };
    for c in cs {
        let pts: Vec<(i64, i64)> = c
            .vertices
            .iter()
            .map(|&(x, y)| (x.round() as i64, y.round() as i64))
            .collect();
        for &p in &pts {
            paint(p);
        }
        let closing = (c.closed && pts.len() > 2).then(|| (pts[pts.len() - 1], pts[0]));
        for (a, b) in pts.windows(2).map(|p| (p[0], p[1])).chain(closing) {
            bresenham(a, b).into_iter().for_each(&mut paint);
        }
    }
    RasterImage::new(w, h, 3, maxval, samples).expect("overlay samples are consistent")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourFormat {
    Csv,
    Svg,
}

impl FromStr for ContourFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ContourFormat::Csv),
            "svg" => Ok(ContourFormat::Svg),
            _ => Err(Error::Format(format!("unknown contour format '{s}'"))),
        }
    }
}

pub fn contours_to_csv(cs: &[Contour]) -> String {
    let mut out = String::from("contour_id,vertex_index,x,y\n");
    for (id, c) in cs.iter().enumerate() {
        for (i, (x, y)) in c.vertices.iter().enumerate() {
            writeln!(out, "{id},{i},{x:.6},{y:.6}").unwrap();
        }
    }
    out
}

pub fn contours_to_svg(cs: &[Contour], width: usize, height: usize) -> String {
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<g fill=\"none\" stroke=\"red\" stroke-width=\"0.5\">\n"
    );
    for c in cs {
        let points: Vec<String> = c
            .vertices
            .iter()
            .map(|(x, y)| format!("{x:.6},{y:.6}"))
            .collect();
        let tag = if c.closed { "polygon" } else { "polyline" };
        writeln!(out, "<{tag} points=\"{}\"/>", points.join(" ")).unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Write contours atomically; the SVG view box spans `width x height`.
pub fn export_contours(
    cs: &[Contour],
    format: ContourFormat,
    path: impl AsRef<Path>,
    (width, height): (usize, usize),
) -> Result<()> {
    let text = match format {
        ContourFormat::Csv => contours_to_csv(cs),
        ContourFormat::Svg => contours_to_svg(cs, width, height),
    };
    write_atomic(path.as_ref(), text.as_bytes())
}
