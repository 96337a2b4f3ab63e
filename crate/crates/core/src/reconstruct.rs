//! Geometric realization of a primitive cycle from interval midpoints, and
//! SVG / JSON export.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::glp::{MaximalPrimitive, PrimitiveKind, Witness};
use crate::igrid::ConstraintCycle;
use crate::mindss::PrimitiveCycle;
use crate::mscale::{to_f64, Cell};

/// Above this radius (relative to the span extent) a circle fit is treated
/// as a straight line.
const MAX_RADIUS_RATIO: f64 = 1e5;

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("span {0} has fewer than 2 midpoints")]
    TooFewMidpoints(usize),
    #[error("a closed chain needs at least 2 segments")]
    SingleSegment,
    #[error("cycle does not match the constraint list")]
    Inconsistent,
    #[error("empty reconstruction")]
    Empty,
    #[error("cannot write {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid reconstruction json")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeomPrimitive {
    Segment {
        from: [f64; 2],
        to: [f64; 2],
        /// Arc requested but the midpoints were collinear.
        #[serde(default)]
        degenerate_line_arc: bool,
    },
    Arc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        /// Signed sweep; positive follows increasing image-frame angle.
        sweep: f64,
    },
}

impl GeomPrimitive {
    pub fn kind(&self) -> PrimitiveKind {
        match self {
            GeomPrimitive::Segment { .. } => PrimitiveKind::Segment,
            GeomPrimitive::Arc { .. } => PrimitiveKind::Arc,
        }
    }

    pub fn start(&self) -> [f64; 2] {
        match *self {
            GeomPrimitive::Segment { from, .. } => from,
            GeomPrimitive::Arc {
                center,
                radius,
                start_angle,
                ..
            } => polar(center, radius, start_angle),
        }
    }

    pub fn end(&self) -> [f64; 2] {
        match *self {
            GeomPrimitive::Segment { to, .. } => to,
            GeomPrimitive::Arc {
                center,
                radius,
                end_angle,
                ..
            } => polar(center, radius, end_angle),
        }
    }

    /// Whether the primitive meets the closed segment `p`–`q`.
    pub fn crosses(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        match *self {
            GeomPrimitive::Segment { from, to, .. } => segments_meet(from, to, p, q),
            GeomPrimitive::Arc {
                center,
                radius,
                start_angle,
                sweep,
                ..
            } => {
                // points of the circle on the segment, then angular range
                let d = sub(q, p);
                let f = sub(p, center);
                let a = dot(d, d);
                let b = 2.0 * dot(f, d);
                let c = dot(f, f) - radius * radius;
                let tol = 1e-9 * (1.0 + radius);
                if a == 0.0 {
                    return c.abs() <= tol * radius && in_sweep(angle(center, p), start_angle, sweep);
                }
                let disc = b * b - 4.0 * a * c;
                if disc < -tol * a.sqrt() * radius * 4.0 {
                    return false;
                }
                let s = disc.max(0.0).sqrt();
                [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)].iter().any(|&t| {
                    let t_tol = 1e-9;
                    (-t_tol..=1.0 + t_tol).contains(&t)
                        && in_sweep(angle(center, add(p, scale(d, t))), start_angle, sweep)
                })
            }
        }
    }
}

fn in_sweep(theta: f64, start: f64, sweep: f64) -> bool {
    if sweep.abs() >= TAU - 1e-12 {
        return true;
    }
    let off = if sweep >= 0.0 {
        (theta - start).rem_euclid(TAU)
    } else {
        (start - theta).rem_euclid(TAU)
    };
    off <= sweep.abs() + 1e-9 || off >= TAU - 1e-9
}

fn polar(c: [f64; 2], r: f64, a: f64) -> [f64; 2] {
    [c[0] + r * a.cos(), c[1] + r * a.sin()]
}

fn angle(c: [f64; 2], p: [f64; 2]) -> f64 {
    (p[1] - c[1]).atan2(p[0] - c[0])
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = sub(a, b);
    dot(d, d).sqrt()
}

fn segments_meet(a: [f64; 2], b: [f64; 2], p: [f64; 2], q: [f64; 2]) -> bool {
    let tol = 1e-9;
    let r = sub(b, a);
    let s = sub(q, p);
    let denom = cross(r, s);
    let ap = sub(p, a);
    if denom.abs() < 1e-15 {
        // parallel: meet only when collinear and overlapping
        if cross(ap, r).abs() > tol * (1.0 + dot(r, r).sqrt()) {
            return false;
        }
        let rr = dot(r, r).max(1e-300);
        let t0 = dot(ap, r) / rr;
        let t1 = dot(sub(q, a), r) / rr;
        return t0.min(t1) <= 1.0 + tol && t0.max(t1) >= -tol;
    }
    let t = cross(ap, s) / denom;
    let u = cross(ap, r) / denom;
    (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&u)
}

/// Total least squares line: a point on it and a unit direction.
pub fn fit_line(pts: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let n = pts.len() as f64;
    let c = [
        pts.iter().map(|p| p[0]).sum::<f64>() / n,
        pts.iter().map(|p| p[1]).sum::<f64>() / n,
    ];
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = sub(*p, c);
        sxx += d[0] * d[0];
        sxy += d[0] * d[1];
        syy += d[1] * d[1];
    }
    // principal axis of the scatter matrix
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    (c, [theta.cos(), theta.sin()])
}

/// Algebraic (Kåsa) circle fit; `None` for (near-)collinear input.
pub fn fit_circle(pts: &[[f64; 2]]) -> Option<([f64; 2], f64)> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let c = [
        pts.iter().map(|p| p[0]).sum::<f64>() / n,
        pts.iter().map(|p| p[1]).sum::<f64>() / n,
    ];
    // minimize sum (D x + E y + F + x² + y²)² in centred coordinates
    let mut m = [[0.0f64; 4]; 3];
    let mut extent: f64 = 0.0;
    for p in pts {
        let d = sub(*p, c);
        extent = extent.max(dot(d, d).sqrt());
        let row = [d[0], d[1], 1.0];
        let z = -(d[0] * d[0] + d[1] * d[1]);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            m[i][3] += row[i] * z;
        }
    }
    if extent == 0.0 {
        return None;
    }
    let sol = solve3(m)?;
    let center = [-sol[0] / 2.0, -sol[1] / 2.0];
    let r2 = dot(center, center) - sol[2];
    if r2 <= 0.0 {
        return None;
    }
    let r = r2.sqrt();
    if r > MAX_RADIUS_RATIO * extent {
        return None;
    }
    Some((add(center, c), r))
}

fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    let scale = m
        .iter()
        .flat_map(|r| r[..3].iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..4 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

#[derive(Clone, Copy, Debug)]
enum Fit {
    Line { point: [f64; 2], dir: [f64; 2] },
    Circle { center: [f64; 2], radius: f64 },
}

impl Fit {
    fn project(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            Fit::Line { point, dir } => add(point, scale(dir, dot(sub(p, point), dir))),
            Fit::Circle { center, radius } => {
                let d = sub(p, center);
                let l = dot(d, d).sqrt();
                if l == 0.0 {
                    add(center, [radius, 0.0])
                } else {
                    add(center, scale(d, radius / l))
                }
            }
        }
    }
}

/// Closure report for one junction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JoinReport {
    /// Distance between the projections onto the two neighbouring fits.
    pub gap: f64,
    pub tau_join: f64,
}

impl JoinReport {
    pub fn within_tolerance(&self) -> bool {
        self.gap <= self.tau_join
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reconstruction {
    pub primitives: Vec<GeomPrimitive>,
    pub junctions: Vec<[f64; 2]>,
    pub missed: Vec<usize>,
    #[serde(skip)]
    pub joins: Vec<JoinReport>,
}

impl Reconstruction {
    pub fn max_join_gap(&self) -> f64 {
        self.joins.iter().map(|j| j.gap).fold(0.0, f64::max)
    }

    pub fn is_closed(&self) -> bool {
        self.joins.iter().all(JoinReport::within_tolerance)
    }

    pub fn to_json(&self) -> Result<String, ReconstructError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, ReconstructError> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Cyclic index range `[from; to]` over `n`, listed in order; a full turn
/// when `from == to`.
fn range(from: usize, to: usize, n: usize) -> Vec<usize> {
    let len = if from == to { n } else { (to + n - from) % n + 1 };
    (0..len).map(|t| (from + t) % n).collect()
}

/// Fits one primitive per chosen span on the interval midpoints and joins
/// them into a closed chain.
pub fn realize(
    cycle: &PrimitiveCycle,
    constraints: &ConstraintCycle,
    kind: PrimitiveKind,
) -> Result<Reconstruction, ReconstructError> {
    let l = cycle.length;
    let n = constraints.n;
    if l == 0 || cycle.breakpoints.len() != l || cycle.breakpoints.iter().any(|&b| b >= n) {
        return Err(ReconstructError::Inconsistent);
    }
    if kind == PrimitiveKind::Segment && l == 1 {
        return Err(ReconstructError::SingleSegment);
    }
    let mid: Vec<[f64; 2]> = constraints.constraints.iter().map(|c| c.midpoint()).collect();
    // span p runs from junction p (at breakpoints[p-1]) to junction p+1
    let ranges: Vec<Vec<usize>> = (0..l)
        .map(|p| range(cycle.breakpoints[(p + l - 1) % l], cycle.breakpoints[p], n))
        .collect();

    let mut fits = Vec::with_capacity(l);
    let mut degenerate = vec![false; l];
    for (p, r) in ranges.iter().enumerate() {
        let pts: Vec<[f64; 2]> = r.iter().map(|&k| mid[k]).collect();
        if pts.len() < 2 {
            return Err(ReconstructError::TooFewMidpoints(p));
        }
        let fit = match kind {
            PrimitiveKind::Segment => None,
            PrimitiveKind::Arc => fit_circle(&pts).map(|(center, radius)| Fit::Circle { center, radius }),
        };
        let fit = fit.unwrap_or_else(|| {
            degenerate[p] = kind == PrimitiveKind::Arc;
            let (point, dir) = fit_line(&pts);
            Fit::Line { point, dir }
        });
        fits.push(fit);
    }

    let span_cell = |p: usize| {
        ranges[p]
            .iter()
            .map(|&k| constraints.constraints[k].cell_size)
            .fold(0.0, f64::max)
    };
    let mut junctions = Vec::with_capacity(l);
    let mut joins = Vec::with_capacity(l);
    for p in 0..l {
        let prev = (p + l - 1) % l;
        let m = mid[cycle.breakpoints[prev]];
        let a = fits[prev].project(m);
        let b = fits[p].project(m);
        junctions.push(scale(add(a, b), 0.5));
        joins.push(JoinReport {
            gap: dist(a, b),
            tau_join: 2.0 * span_cell(prev).max(span_cell(p)),
        });
    }

    let mut primitives = Vec::with_capacity(l);
    for p in 0..l {
        let (j0, j1) = (junctions[p], junctions[(p + 1) % l]);
        let prim = match fits[p] {
            Fit::Line { .. } => GeomPrimitive::Segment {
                from: j0,
                to: j1,
                degenerate_line_arc: degenerate[p],
            },
            Fit::Circle { center, radius } => {
                let r = &ranges[p];
                let mut pts = vec![j0];
                pts.extend(r[1..r.len() - 1].iter().map(|&k| mid[k]));
                pts.push(j1);
                let mut sweep = 0.0;
                for w in pts.windows(2) {
                    let d = angle(center, w[1]) - angle(center, w[0]);
                    sweep += (d + PI).rem_euclid(TAU) - PI;
                }
                if l == 1 {
                    sweep = TAU.copysign(sweep);
                }
                let start_angle = angle(center, j0);
                GeomPrimitive::Arc {
                    center,
                    radius,
                    start_angle,
                    end_angle: start_angle + sweep,
                    sweep,
                }
            }
        };
        primitives.push(prim);
    }

    let mut missed = Vec::new();
    for k in 0..n {
        let c = &constraints.constraints[k];
        let hit = ranges
            .iter()
            .zip(&primitives)
            .filter(|(r, _)| r.contains(&k))
            .any(|(_, prim)| prim.crosses(c.internal, c.external));
        if !hit {
            missed.push(k);
        }
    }

    Ok(Reconstruction {
        primitives,
        junctions,
        missed,
        joins,
    })
}

pub fn export_json(rec: &Reconstruction, path: &Path) -> Result<(), ReconstructError> {
    if rec.primitives.is_empty() {
        return Err(ReconstructError::Empty);
    }
    write_file(path, rec.to_json()?.as_bytes())
}

pub fn import_json(path: &Path) -> Result<Reconstruction, ReconstructError> {
    let s = std::fs::read_to_string(path).map_err(|source| ReconstructError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Reconstruction::from_json(&s)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ReconstructError> {
    std::fs::write(path, bytes).map_err(|source| ReconstructError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Extra layers drawn under the reconstruction.
#[derive(Clone, Debug, Default)]
pub struct Overlay {
    pub boxes: Vec<Cell>,
    pub constraints: Option<ConstraintCycle>,
    pub maximal: Vec<MaximalPrimitive>,
}

/// Drawing area of the SVG.
#[derive(Clone, Copy, Debug)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
}

fn path_data(prim: &GeomPrimitive) -> String {
    let mut d = String::new();
    let s = prim.start();
    write!(d, "M {:.3} {:.3}", s[0], s[1]).unwrap();
    match *prim {
        GeomPrimitive::Segment { to, .. } => {
            write!(d, " L {:.3} {:.3}", to[0], to[1]).unwrap();
        }
        GeomPrimitive::Arc {
            center,
            radius,
            start_angle,
            sweep,
            ..
        } => {
            let flag = u8::from(sweep > 0.0);
            if sweep.abs() >= TAU - 1e-9 {
                // a full turn needs two half arcs
                let m = polar(center, radius, start_angle + sweep / 2.0);
                write!(d, " A {r:.3} {r:.3} 0 0 {flag} {:.3} {:.3}", m[0], m[1], r = radius).unwrap();
                write!(d, " A {r:.3} {r:.3} 0 0 {flag} {:.3} {:.3}", s[0], s[1], r = radius).unwrap();
            } else {
                let e = prim.end();
                let large = u8::from(sweep.abs() > PI);
                write!(d, " A {r:.3} {r:.3} 0 {large} {flag} {:.3} {:.3}", e[0], e[1], r = radius).unwrap();
            }
        }
    }
    d
}

/// SVG text for several reconstructions over one canvas.
pub fn render_svg(
    recs: &[&Reconstruction],
    overlays: &[&Overlay],
    canvas: Canvas,
) -> Result<String, ReconstructError> {
    if recs.is_empty() || recs.iter().any(|r| r.primitives.is_empty()) {
        return Err(ReconstructError::Empty);
    }
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = canvas.width,
        h = canvas.height
    )
    .unwrap();
    for ov in overlays {
        if !ov.boxes.is_empty() {
            writeln!(s, r#"<g id="boxes" fill="none" stroke="gray" stroke-width="0.1">"#).unwrap();
            for c in &ov.boxes {
                writeln!(
                    s,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
                    to_f64(c.lo(0)),
                    to_f64(c.lo(1)),
                    to_f64(c.size.0),
                    to_f64(c.size.1)
                )
                .unwrap();
            }
            writeln!(s, "</g>").unwrap();
        }
        if let Some(cyc) = &ov.constraints {
            writeln!(s, r#"<g id="intervals" stroke-width="0.15">"#).unwrap();
            for c in &cyc.constraints {
                writeln!(
                    s,
                    r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="green"/>"#,
                    c.internal[0], c.internal[1], c.external[0], c.external[1]
                )
                .unwrap();
            }
            writeln!(s, "</g>").unwrap();
        }
        if !ov.maximal.is_empty() {
            writeln!(s, r#"<g id="maximal" fill="none" stroke-width="0.1" stroke="orange">"#).unwrap();
            for m in &ov.maximal {
                match m.witness {
                    Witness::Circle(c) => writeln!(
                        s,
                        r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}"/>"#,
                        c.center[0], c.center[1], c.radius
                    )
                    .unwrap(),
                    Witness::Line(l) => {
                        // clip the witness line to the canvas diagonal length
                        let len = (canvas.width + canvas.height) as f64;
                        let p0 = [l.a * l.c, l.b * l.c];
                        let dir = [-l.b, l.a];
                        let (a, b) = (add(p0, scale(dir, -len)), add(p0, scale(dir, len)));
                        writeln!(
                            s,
                            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                            a[0], a[1], b[0], b[1]
                        )
                        .unwrap();
                    }
                }
            }
            writeln!(s, "</g>").unwrap();
        }
    }
    writeln!(s, r#"<g id="reconstruction" fill="none" stroke="blue" stroke-width="0.3">"#).unwrap();
    for rec in recs {
        for prim in &rec.primitives {
            writeln!(s, r#"<path d="{}"/>"#, path_data(prim)).unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, "</svg>").unwrap();
    Ok(s)
}

/// Writes one reconstruction as SVG, sized to its bounding box.
pub fn export_svg(rec: &Reconstruction, path: &Path) -> Result<(), ReconstructError> {
    if rec.primitives.is_empty() {
        return Err(ReconstructError::Empty);
    }
    let mut hi: [f64; 2] = [1.0, 1.0];
    for j in &rec.junctions {
        hi = [hi[0].max(j[0]), hi[1].max(j[1])];
    }
    for p in &rec.primitives {
        if let GeomPrimitive::Arc { center, radius, .. } = p {
            hi = [hi[0].max(center[0] + radius), hi[1].max(center[1] + radius)];
        }
    }
    let canvas = Canvas {
        width: hi[0].ceil() as usize + 1,
        height: hi[1].ceil() as usize + 1,
    };
    write_file(path, render_svg(&[rec], &[], canvas)?.as_bytes())
}
