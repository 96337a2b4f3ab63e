//! Piercing-primitive recognition over interval constraints: linear and
//! circular separability of internal from external endpoints, and the
//! sweep enumerating maximal primitives along the constraint cycle.

pub mod seidel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::igrid::{ConstraintCycle, IntervalConstraint};
use seidel::Row;

/// Separation tolerance on the optimal margin.
pub const EPSILON: f64 = 1e-9;

/// Bound on the intercept of chart lines, in local coordinates.
pub const LINE_INTERCEPT_BOUND: f64 = 1e6;
/// Bounds on the lifted plane `z = αx + βy + γ`, in local coordinates.
pub const LIFT_SLOPE_BOUND: f64 = 1e4;
pub const LIFT_OFFSET_BOUND: f64 = 1e6;
/// Cap on the margin variable; large enough never to bind in practice.
pub const MARGIN_BOUND: f64 = 1e9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GlpError {
    #[error("need at least 3 constraints, got {0}")]
    TooFewConstraints(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Segment,
    Arc,
}

impl std::fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrimitiveKind::Segment => "segment",
            PrimitiveKind::Arc => "arc",
        })
    }
}

/// Line `a x + b y = c` with `a² + b² = 1`; internal points on the `<=` side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineWitness {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineWitness {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.a * p[0] + self.b * p[1] - self.c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleOrientation {
    InternalInside,
    InternalOutside,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleWitness {
    pub center: [f64; 2],
    pub radius: f64,
    pub orientation: CircleOrientation,
}

impl CircleWitness {
    /// Signed power of `p`: negative inside the circle.
    pub fn power(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        dx * dx + dy * dy - self.radius * self.radius
    }
}

/// Either kind of separator. Arc mode may fall back to a line, read as a
/// circle of infinite radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Witness {
    Line(LineWitness),
    Circle(CircleWitness),
}

impl Witness {
    /// Whether the witness separates every pair at tolerance `eps`:
    /// internal points on the closed side, external ones strictly across.
    pub fn separates(&self, internal: &[[f64; 2]], external: &[[f64; 2]], eps: f64) -> bool {
        match self {
            Witness::Line(l) => {
                internal.iter().all(|&p| l.eval(p) <= eps) && external.iter().all(|&q| l.eval(q) > 0.0)
            }
            Witness::Circle(c) => {
                let s = match c.orientation {
                    CircleOrientation::InternalInside => 1.0,
                    CircleOrientation::InternalOutside => -1.0,
                };
                internal.iter().all(|&p| s * c.power(p) <= eps)
                    && external.iter().all(|&q| s * c.power(q) > 0.0)
            }
        }
    }
}

fn fnv_seed(internal: &[[f64; 2]], external: &[[f64; 2]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in internal.iter().chain(external) {
        for v in p {
            h ^= v.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Integer origin near the slice, used to keep lifted values small.
pub fn local_origin(internal: &[[f64; 2]]) -> [f64; 2] {
    [internal[0][0].floor(), internal[0][1].floor()]
}

fn shift(pts: &[[f64; 2]], o: [f64; 2]) -> Vec<[f64; 2]> {
    pts.iter().map(|p| [p[0] - o[0], p[1] - o[1]]).collect()
}

/// Rows of the chart LP over `(m, t, δ)` for the line `v = m u + t`, where
/// `(u, v)` is `(x, y)` or `(y, x)`, and internal points lie on the side
/// given by `sign`.
pub fn line_chart_rows(
    internal: &[[f64; 2]],
    external: &[[f64; 2]],
    swap: bool,
    sign: f64,
) -> Vec<Row> {
    let uv = |p: &[f64; 2]| if swap { (p[1], p[0]) } else { (p[0], p[1]) };
    // sign * (m u + t - v) >= δ for internal, the mirror for external
    let mut rows = Vec::with_capacity(internal.len() + external.len());
    for p in internal {
        let (u, v) = uv(p);
        rows.push(Row::new(vec![-sign * u, -sign, 1.0], -sign * v));
    }
    for q in external {
        let (u, v) = uv(q);
        rows.push(Row::new(vec![sign * u, sign, 1.0], sign * v));
    }
    rows
}

pub const LINE_LO: [f64; 3] = [-1.0, -LINE_INTERCEPT_BOUND, -1.0];
pub const LINE_HI: [f64; 3] = [1.0, LINE_INTERCEPT_BOUND, MARGIN_BOUND];

/// Rows of the lifted LP over `(α, β, γ, δ)`; `sign = 1` puts internal
/// points inside the circle.
pub fn lifted_rows(internal: &[[f64; 2]], external: &[[f64; 2]], sign: f64) -> Vec<Row> {
    let mut rows = Vec::with_capacity(internal.len() + external.len());
    // sign * (α x + β y + γ - z) >= δ for internal
    for p in internal {
        let z = p[0] * p[0] + p[1] * p[1];
        rows.push(Row::new(vec![-sign * p[0], -sign * p[1], -sign, 1.0], -sign * z));
    }
    for q in external {
        let z = q[0] * q[0] + q[1] * q[1];
        rows.push(Row::new(vec![sign * q[0], sign * q[1], sign, 1.0], sign * z));
    }
    rows
}

pub const LIFT_LO: [f64; 4] = [-LIFT_SLOPE_BOUND, -LIFT_SLOPE_BOUND, -LIFT_OFFSET_BOUND, -1.0];
pub const LIFT_HI: [f64; 4] = [LIFT_SLOPE_BOUND, LIFT_SLOPE_BOUND, LIFT_OFFSET_BOUND, MARGIN_BOUND];

/// Linear separation of the two point sets.
pub fn separating_line(internal: &[[f64; 2]], external: &[[f64; 2]]) -> Option<LineWitness> {
    if internal.is_empty() {
        return None;
    }
    let o = local_origin(internal);
    let (pi, pe) = (shift(internal, o), shift(external, o));
    let seed = fnv_seed(internal, external);
    for swap in [false, true] {
        for sign in [1.0, -1.0] {
            let rows = line_chart_rows(&pi, &pe, swap, sign);
            let Some(x) = seidel::maximize(&[0.0, 0.0, 1.0], &rows, &LINE_LO, &LINE_HI, seed) else {
                continue;
            };
            if x[2] <= EPSILON {
                continue;
            }
            // sign (m u + t - v) >= 0 on the internal side
            let (m, t) = (x[0], x[1]);
            let (mut a, mut b, mut c) = if swap {
                (sign, -sign * m, sign * t)
            } else {
                (-sign * m, sign, sign * t)
            };
            // in (x, y): internal satisfies a x + b y <= c after the sign flip
            let norm = (a * a + b * b).sqrt();
            a /= norm;
            b /= norm;
            c /= norm;
            c += a * o[0] + b * o[1];
            return Some(LineWitness { a, b, c });
        }
    }
    None
}

/// Circular separation, either orientation, falling back to a line.
pub fn separating_circle(internal: &[[f64; 2]], external: &[[f64; 2]]) -> Option<Witness> {
    if internal.is_empty() {
        return None;
    }
    let o = local_origin(internal);
    let (pi, pe) = (shift(internal, o), shift(external, o));
    let seed = fnv_seed(internal, external);
    for (sign, orientation) in [
        (1.0, CircleOrientation::InternalInside),
        (-1.0, CircleOrientation::InternalOutside),
    ] {
        let rows = lifted_rows(&pi, &pe, sign);
        let Some(x) = seidel::maximize(&[0.0, 0.0, 0.0, 1.0], &rows, &LIFT_LO, &LIFT_HI, seed) else {
            continue;
        };
        if x[3] <= EPSILON {
            continue;
        }
        let (cx, cy) = (x[0] / 2.0, x[1] / 2.0);
        let r2 = x[2] + cx * cx + cy * cy;
        if r2 <= 0.0 {
            continue;
        }
        return Some(Witness::Circle(CircleWitness {
            center: [cx + o[0], cy + o[1]],
            radius: r2.sqrt(),
            orientation,
        }));
    }
    separating_line(internal, external).map(Witness::Line)
}

fn endpoints(cs: &[IntervalConstraint]) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    (
        cs.iter().map(|c| c.internal).collect(),
        cs.iter().map(|c| c.external).collect(),
    )
}

/// Line piercing every interval of the slice, internal endpoints on the
/// closed side and external ones strictly on the other.
pub fn line_feasible(cs: &[IntervalConstraint]) -> Option<LineWitness> {
    let (i, e) = endpoints(cs);
    separating_line(&i, &e)
}

/// Circle (or line, as an infinite circle) piercing every interval.
pub fn circle_feasible(cs: &[IntervalConstraint]) -> Option<Witness> {
    let (i, e) = endpoints(cs);
    separating_circle(&i, &e)
}

/// Feasibility test for one kind on raw endpoint lists.
pub fn feasible(kind: PrimitiveKind, internal: &[[f64; 2]], external: &[[f64; 2]]) -> Option<Witness> {
    match kind {
        PrimitiveKind::Segment => separating_line(internal, external).map(Witness::Line),
        PrimitiveKind::Arc => separating_circle(internal, external),
    }
}

/// Span `[start; start + len - 1]` (cyclic) of a maximal primitive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalPrimitive {
    pub start: usize,
    pub len: usize,
    pub kind: PrimitiveKind,
    pub witness: Witness,
}

impl MaximalPrimitive {
    /// Last index of the span, reduced modulo `n`.
    pub fn end(&self, n: usize) -> usize {
        (self.start + self.len - 1) % n
    }
}

/// JSON form of a maximal primitive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalDump {
    pub kind: PrimitiveKind,
    pub i: usize,
    pub j: usize,
    pub witness: Witness,
}

pub fn dump_maximal(prims: &[MaximalPrimitive], n: usize) -> Vec<MaximalDump> {
    prims
        .iter()
        .map(|p| MaximalDump {
            kind: p.kind,
            i: p.start,
            j: p.end(n),
            witness: p.witness,
        })
        .collect()
}

/// Maximal feasible spans of the cyclic constraint list, ordered by start.
pub fn maximal_primitives(
    cycle: &ConstraintCycle,
    kind: PrimitiveKind,
) -> Result<Vec<MaximalPrimitive>, GlpError> {
    let n = cycle.n;
    if n < 3 {
        return Err(GlpError::TooFewConstraints(n));
    }
    // doubled so every cyclic slice is contiguous
    let (mut pi, mut pe) = endpoints(&cycle.constraints);
    pi.extend_from_within(..);
    pe.extend_from_within(..);
    let test = |s: usize, l: usize| feasible(kind, &pi[s..s + l], &pe[s..s + l]);

    let mut lens = vec![0usize; n];
    let mut l = 0usize;
    for i in 0..n {
        l = l.saturating_sub(1).max(1);
        if test(i, l).is_none() {
            // a single interval with coincident endpoints; nothing pierces it
            lens[i] = 0;
            l = 0;
            continue;
        }
        while l < n && test(i, l + 1).is_some() {
            l += 1;
        }
        if i == 0 && l == n {
            let witness = test(0, n).unwrap();
            return Ok(vec![MaximalPrimitive {
                start: 0,
                len: n,
                kind,
                witness,
            }]);
        }
        lens[i] = l;
    }
    // unwrapped (exclusive) ends are non-decreasing; keep strict increases
    let end = |i: usize| i + lens[i];
    let mut out = Vec::new();
    for i in 0..n {
        if lens[i] == 0 {
            continue;
        }
        let prev = if i == 0 { end(n - 1) as i64 - n as i64 } else { end(i - 1) as i64 };
        if end(i) as i64 > prev {
            out.push(MaximalPrimitive {
                start: i,
                len: lens[i],
                kind,
                witness: test(i, lens[i]).unwrap(),
            });
        }
    }
    Ok(out)
}
