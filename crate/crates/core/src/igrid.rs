//! Irregular isothetic curves built from meaningful boxes, and the cyclic
//! list of axis-aligned interval constraints extracted from them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mscale::{to_f64, Cell, Q};
use crate::raster::{BinaryImage, DigitalContour, Orientation};

/// Distance by which the external endpoint of a corner-contact constraint is
/// pushed away from the contact point.
pub const DEGENERATE_INFLATION: f64 = 1e-6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IgridError {
    #[error("need at least 3 cells, got {0}")]
    TooFewCells(usize),
    #[error("constraint cells carry no contour indices")]
    MissingIndices,
}

pub fn ve_adjacent(r1: &Cell, r2: &Cell) -> bool {
    let (dx, dy, sx, sy) = gaps(r1, r2);
    (dx == sx && dy <= sy) || (dy == sy && dx <= sx)
}

pub fn e_adjacent(r1: &Cell, r2: &Cell) -> bool {
    let (dx, dy, sx, sy) = gaps(r1, r2);
    (dx == sx && dy < sy) ^ (dy == sy && dx < sx)
}

fn qabs(q: Q) -> Q {
    if q < Q::from_integer(0) {
        -q
    } else {
        q
    }
}

/// `|Δx|, |Δy|` between centres and the half-size sums along each axis.
fn gaps(r1: &Cell, r2: &Cell) -> (Q, Q, Q, Q) {
    let dx = qabs(r1.center.0 - r2.center.0);
    let dy = qabs(r1.center.1 - r2.center.1);
    let sx = (r1.size.0 + r2.size.0) / 2;
    let sy = (r1.size.1 + r2.size.1) / 2;
    (dx, dy, sx, sy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjacency {
    Ve,
    E,
}

/// Cells (by index into the cell list) in one of the two lexicographic
/// orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KCurve {
    pub order: Vec<usize>,
    pub adjacency: Adjacency,
}

/// X-ordered curve (by left edge, then top edge) and Y-ordered curve (by top
/// edge, then left edge).
pub fn build_k_curves(cells: &[Cell]) -> Result<(KCurve, KCurve), IgridError> {
    if cells.len() < 3 {
        return Err(IgridError::TooFewCells(cells.len()));
    }
    let mut by_x: Vec<usize> = (0..cells.len()).collect();
    by_x.sort_by(|&a, &b| {
        (cells[a].lo(0), cells[a].lo(1), a).cmp(&(cells[b].lo(0), cells[b].lo(1), b))
    });
    let mut by_y: Vec<usize> = (0..cells.len()).collect();
    by_y.sort_by(|&a, &b| {
        (cells[a].lo(1), cells[a].lo(0), a).cmp(&(cells[b].lo(1), cells[b].lo(0), b))
    });
    Ok((
        KCurve {
            order: by_x,
            adjacency: Adjacency::Ve,
        },
        KCurve {
            order: by_y,
            adjacency: Adjacency::Ve,
        },
    ))
}

/// Direction of an interval. Vertical intervals separate cells adjacent
/// along x; horizontal ones separate cells adjacent along y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalAxis {
    Vertical,
    Horizontal,
}

/// Shared face of two ve-adjacent cells, exact and not yet oriented.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interface {
    pub axis: IntervalAxis,
    /// Fixed coordinate: x for vertical faces, y for horizontal ones.
    pub at: Q,
    pub lo: Q,
    pub hi: Q,
    /// Source cells, smaller index first.
    pub source: (usize, usize),
    /// Pure corner contact (`lo == hi`).
    pub degenerate: bool,
}

impl Interface {
    pub fn endpoints(&self) -> ((Q, Q), (Q, Q)) {
        match self.axis {
            IntervalAxis::Vertical => ((self.at, self.lo), (self.at, self.hi)),
            IntervalAxis::Horizontal => ((self.lo, self.at), (self.hi, self.at)),
        }
    }
}

/// Face shared by two ve-adjacent cells, or `None` when they are not.
pub fn interface_between(cells: &[Cell], i: usize, j: usize) -> Option<Interface> {
    let (a, b) = (&cells[i], &cells[j]);
    if !ve_adjacent(a, b) {
        return None;
    }
    let (dx, dy, sx, sy) = gaps(a, b);
    let source = (i.min(j), i.max(j));
    let (axis, fixed_axis) = if dx == sx && dy < sy {
        (IntervalAxis::Vertical, 0)
    } else if dy == sy && dx < sx {
        (IntervalAxis::Horizontal, 1)
    } else {
        // corner contact: both clauses hold with equality
        let at_x = if a.center.0 < b.center.0 { a.hi(0) } else { a.lo(0) };
        let at_y = if a.center.1 < b.center.1 { a.hi(1) } else { a.lo(1) };
        return Some(Interface {
            axis: IntervalAxis::Vertical,
            at: at_x,
            lo: at_y,
            hi: at_y,
            source,
            degenerate: true,
        });
    };
    let other = 1 - fixed_axis;
    let at = if a.center_on(fixed_axis) < b.center_on(fixed_axis) {
        a.hi(fixed_axis)
    } else {
        a.lo(fixed_axis)
    };
    let lo = a.lo(other).max(b.lo(other));
    let hi = a.hi(other).min(b.hi(other));
    Some(Interface {
        axis,
        at,
        lo,
        hi,
        source,
        degenerate: lo == hi,
    })
}

impl Cell {
    fn center_on(&self, axis: usize) -> Q {
        if axis == 0 {
            self.center.0
        } else {
            self.center.1
        }
    }
}

/// Faces between consecutive ve-adjacent cells of the curve (cyclically);
/// non-adjacent consecutive pairs are skipped.
pub fn extract_interfaces(curve: &KCurve, cells: &[Cell]) -> Vec<Interface> {
    let m = curve.order.len();
    (0..m)
        .filter_map(|k| interface_between(cells, curve.order[k], curve.order[(k + 1) % m]))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalConstraint {
    pub axis: IntervalAxis,
    pub internal: [f64; 2],
    pub external: [f64; 2],
    /// Mean covered contour index, used for cyclic ordering.
    pub abscissa: f64,
    pub source: (usize, usize),
    pub degenerate: bool,
    /// Largest side of the two source cells.
    pub cell_size: f64,
}

impl IntervalConstraint {
    pub fn midpoint(&self) -> [f64; 2] {
        [
            (self.internal[0] + self.external[0]) / 2.0,
            (self.internal[1] + self.external[1]) / 2.0,
        ]
    }
}

/// Cyclic constraint list ordered by curvilinear abscissa.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCycle {
    pub constraints: Vec<IntervalConstraint>,
    pub n: usize,
}

impl ConstraintCycle {
    pub fn new(constraints: Vec<IntervalConstraint>) -> Self {
        let n = constraints.len();
        Self { constraints, n }
    }

    pub fn get(&self, k: usize) -> &IntervalConstraint {
        &self.constraints[k % self.n]
    }

    /// Constraints `start, start+1, ..., start+len-1` (cyclic).
    pub fn slice(&self, start: usize, len: usize) -> Vec<&IntervalConstraint> {
        (0..len).map(|k| self.get(start + k)).collect()
    }

    pub fn to_dump(&self) -> Vec<SxyEntry> {
        self.constraints
            .iter()
            .map(|c| SxyEntry {
                axis: c.axis,
                internal: c.internal,
                external: c.external,
                abscissa: c.abscissa,
            })
            .collect()
    }
}

/// JSON form of one constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SxyEntry {
    pub axis: IntervalAxis,
    pub internal: [f64; 2],
    pub external: [f64; 2],
    pub abscissa: f64,
}

/// Mean of a set of cyclic indices in `0..n`: the run is cut at its largest
/// gap and averaged there.
pub fn cyclic_mean(indices: &[usize], n: usize) -> f64 {
    let mut v: Vec<usize> = indices.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        return 0.0;
    }
    let m = v.len();
    // gap after v[k] towards v[k+1] (cyclically)
    let (cut, _) = (0..m)
        .map(|k| {
            let gap = if k + 1 < m { v[k + 1] - v[k] } else { v[0] + n - v[k] };
            (k, gap)
        })
        .max_by_key(|&(k, gap)| (gap, std::cmp::Reverse(k)))
        .unwrap();
    let start = (cut + 1) % m;
    let base = v[start];
    let sum: f64 = (0..m)
        .map(|k| {
            let idx = v[(start + k) % m];
            let unwrapped = if idx >= base { idx } else { idx + n };
            unwrapped as f64
        })
        .sum();
    (sum / m as f64).rem_euclid(n as f64)
}

/// Foreground side of a point, decided from the point alone so that every
/// constraint sharing it agrees: the polygon through pixel centres, or the
/// pixels touching the point when it lies on that polygon.
fn is_internal(p: [f64; 2], img: &BinaryImage, contour: &DigitalContour) -> bool {
    if !contour.on_boundary(p[0], p[1]) {
        let fg_inside = contour.orientation() == Orientation::CounterClockwise;
        return contour.contains_point(p[0], p[1]) == fg_inside;
    }
    let fg = CORNERS
        .iter()
        .filter(|(ox, oy)| img.is_fg((p[0] + ox).floor() as i64, (p[1] + oy).floor() as i64))
        .count();
    fg >= 3
}

const CORNERS: [(f64, f64); 4] = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)];

/// Orients an interface as `(internal, external)`; `None` when both ends
/// lie on the same side, so the face says nothing about the curve.
fn classify(
    iface: &Interface,
    img: &BinaryImage,
    contour: &DigitalContour,
) -> Option<([f64; 2], [f64; 2])> {
    let ((ax, ay), (bx, by)) = iface.endpoints();
    let a = [to_f64(ax), to_f64(ay)];
    let b = [to_f64(bx), to_f64(by)];
    let inside = is_internal(a, img, contour);
    if iface.degenerate {
        // twin of the contact point, pushed away from (or into) the
        // foreground pixels around it
        let mut v = [0.0f64; 2];
        for (ox, oy) in CORNERS {
            let s = if img.is_fg((a[0] + ox).floor() as i64, (a[1] + oy).floor() as i64) {
                -1.0
            } else {
                1.0
            };
            v[0] += s * ox;
            v[1] += s * oy;
        }
        if v == [0.0, 0.0] {
            // uniform or checkerboard neighbourhood: no direction to push
            return None;
        }
        let sgn = |x: f64| if x == 0.0 { 0.0 } else { x.signum() };
        let d = [DEGENERATE_INFLATION * sgn(v[0]), DEGENERATE_INFLATION * sgn(v[1])];
        return Some(if inside {
            (a, [a[0] + d[0], a[1] + d[1]])
        } else {
            ([a[0] - d[0], a[1] - d[1]], a)
        });
    }
    match (inside, is_internal(b, img, contour)) {
        (true, false) => Some((a, b)),
        (false, true) => Some((b, a)),
        _ => None,
    }
}

/// What to do with pure corner contacts between consecutive cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CornerContacts {
    /// Keep them as point constraints with an inflated twin endpoint. They
    /// pin the curve to a lattice corner, which staircases rarely honour.
    Keep,
    #[default]
    Drop,
}

/// Merges the two interface lists into one cycle ordered by curvilinear
/// abscissa, orienting each interval from its foreground end (internal) to
/// its background end (external).
pub fn build_sxy(
    sx: &[Interface],
    sy: &[Interface],
    cells: &[Cell],
    contour: &DigitalContour,
    img: &BinaryImage,
    corners: CornerContacts,
) -> Result<ConstraintCycle, IgridError> {
    let n = contour.len();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(sx.len() + sy.len());
    for iface in sx.iter().chain(sy) {
        if !seen.insert(iface.source) || (iface.degenerate && corners == CornerContacts::Drop) {
            continue;
        }
        let (i, j) = iface.source;
        let mut idx = cells[i].indices.clone();
        idx.extend_from_slice(&cells[j].indices);
        if idx.is_empty() {
            return Err(IgridError::MissingIndices);
        }
        let Some((internal, external)) = classify(iface, img, contour) else {
            log::trace!("interface {:?} does not straddle the contour", iface.source);
            continue;
        };
        out.push(IntervalConstraint {
            axis: iface.axis,
            internal,
            external,
            abscissa: cyclic_mean(&idx, n),
            source: iface.source,
            degenerate: iface.degenerate,
            cell_size: cells[i].max_size_f64().max(cells[j].max_size_f64()),
        });
    }
    out.sort_by(|a, b| {
        a.abscissa
            .total_cmp(&b.abscissa)
            .then_with(|| a.source.cmp(&b.source))
    });
    Ok(ConstraintCycle::new(out))
}

/// Whole conversion: curves, interfaces and the ordered cycle.
pub fn constraints_from_cells(
    cells: &[Cell],
    contour: &DigitalContour,
    img: &BinaryImage,
) -> Result<ConstraintCycle, IgridError> {
    constraints_from_cells_with(cells, contour, img, CornerContacts::default())
}

pub fn constraints_from_cells_with(
    cells: &[Cell],
    contour: &DigitalContour,
    img: &BinaryImage,
    corners: CornerContacts,
) -> Result<ConstraintCycle, IgridError> {
    let (cx, cy) = build_k_curves(cells)?;
    let fx = extract_interfaces(&cx, cells);
    let fy = extract_interfaces(&cy, cells);
    let (mut vertical, mut horizontal): (Vec<Interface>, Vec<Interface>) = fx
        .into_iter()
        .chain(fy)
        .partition(|f| f.axis == IntervalAxis::Vertical);
    vertical.sort_by_key(|f| f.source);
    horizontal.sort_by_key(|f| f.source);
    build_sxy(&vertical, &horizontal, cells, contour, img, corners)
}
