//! Multi-scale noise detection: maximal digital straight segments on
//! subsampled contours, per-point length profiles and meaningful boxes.

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{DigitalContour, Pixel};

pub type Q = Rational64;

pub const DEFAULT_MAX_SCALE: u32 = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MscaleError {
    #[error("contour too short: {0} points, need at least 4")]
    ContourTooShort(usize),
    #[error("profile needs at least 2 scales, got {0}")]
    ProfileTooShort(usize),
    #[error("max scale must be at least 2, got {0}")]
    MaxScaleTooSmall(u32),
    #[error("subsampling degenerates at scale 1")]
    DegenerateAtScaleOne,
}

/// Naive digital straight segment `0 <= a*x - b*y + mu < max(|a|, |b|)` over
/// the contour indices `first..=last` (cyclic, `last` may wrap below `first`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalStraightSegment {
    pub a: i64,
    pub b: i64,
    pub mu: i64,
    pub first: usize,
    pub last: usize,
    /// Number of contour points in the segment.
    pub len: usize,
}

impl DigitalStraightSegment {
    pub fn contains_point(&self, p: Pixel) -> bool {
        let r = self.a * p.x - self.b * p.y + self.mu;
        r >= 0 && r < self.a.abs().max(self.b.abs())
    }

    /// Contour indices covered, in order.
    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |k| (self.first + k) % n)
    }
}

/// Signed permutation of the axes mapping an axis step to `(1, 0)` and the
/// adjacent diagonal step to `(1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frame {
    swap: bool,
    sx: i64,
    sy: i64,
}

impl Frame {
    fn from_steps(axis: (i64, i64), diag: (i64, i64)) -> Self {
        if axis.1 == 0 {
            Frame {
                swap: false,
                sx: axis.0,
                sy: diag.1,
            }
        } else {
            Frame {
                swap: true,
                sx: axis.1,
                sy: diag.0,
            }
        }
    }

    fn apply(&self, p: Pixel) -> (i64, i64) {
        if self.swap {
            (self.sx * p.y, self.sy * p.x)
        } else {
            (self.sx * p.x, self.sy * p.y)
        }
    }

    /// Rewrites `mu <= a*X - b*Y < mu + b` in original coordinates.
    fn to_original(&self, a: i64, b: i64, mu: i64) -> (i64, i64, i64) {
        if self.swap {
            (-b * self.sy, -a * self.sx, -mu)
        } else {
            (a * self.sx, b * self.sy, -mu)
        }
    }
}

/// Incremental arithmetic recognition in the first octant (steps `(1,0)` and
/// `(1,1)`), tracking upper and lower leaning points.
#[derive(Clone, Debug)]
struct Recognizer {
    a: i64,
    b: i64,
    mu: i64,
    uf: (i64, i64),
    ul: (i64, i64),
    lf: (i64, i64),
    ll: (i64, i64),
}

impl Recognizer {
    fn new(p: (i64, i64)) -> Self {
        Self {
            a: 0,
            b: 1,
            mu: -p.1,
            uf: p,
            ul: p,
            lf: p,
            ll: p,
        }
    }

    fn add(&mut self, m: (i64, i64)) -> bool {
        let r = self.a * m.0 - self.b * m.1;
        if r >= self.mu && r < self.mu + self.b {
            if r == self.mu {
                self.ul = m;
            }
            if r == self.mu + self.b - 1 {
                self.ll = m;
            }
            true
        } else if r == self.mu - 1 {
            self.ul = m;
            self.lf = self.ll;
            self.a = m.1 - self.uf.1;
            self.b = m.0 - self.uf.0;
            self.mu = self.a * m.0 - self.b * m.1;
            true
        } else if r == self.mu + self.b {
            self.ll = m;
            self.uf = self.ul;
            self.a = m.1 - self.lf.1;
            self.b = m.0 - self.lf.0;
            self.mu = self.a * m.0 - self.b * m.1 - self.b + 1;
            true
        } else {
            false
        }
    }
}

fn is_axis(s: (i64, i64)) -> bool {
    s.0.abs() + s.1.abs() == 1
}

fn is_diag(s: (i64, i64)) -> bool {
    s.0.abs() == 1 && s.1.abs() == 1
}

/// Longest DSS starting at `start`, capped at `cap` points.
fn longest_from(pts: &[Pixel], start: usize, cap: usize) -> DigitalStraightSegment {
    let n = pts.len();
    let p0 = pts[start];
    let mut axis: Option<(i64, i64)> = None;
    let mut diag: Option<(i64, i64)> = None;
    let mut frame = Frame {
        swap: false,
        sx: 1,
        sy: 1,
    };
    let mut rec = Recognizer::new(frame.apply(p0));
    let mut len = 1;
    let mut prev = p0;
    while len < cap {
        let q = pts[(start + len) % n];
        let step = (q.x - prev.x, q.y - prev.y);
        if is_axis(step) {
            match axis {
                Some(s) if s != step => break,
                _ => axis = Some(step),
            }
        } else if is_diag(step) {
            match diag {
                Some(s) if s != step => break,
                _ => diag = Some(step),
            }
        } else {
            break;
        }
        let (ax, dg) = match (axis, diag) {
            (Some(a), Some(d)) => {
                if a.0 * d.0 + a.1 * d.1 != 1 {
                    break;
                }
                (a, d)
            }
            (Some(a), None) => (a, if a.1 == 0 { (a.0, 1) } else { (1, a.1) }),
            (None, Some(d)) => ((d.0, 0), d),
            (None, None) => unreachable!(),
        };
        let f = Frame::from_steps(ax, dg);
        if f != frame {
            frame = f;
            rec = Recognizer::new(frame.apply(p0));
            for k in 1..len {
                let ok = rec.add(frame.apply(pts[(start + k) % n]));
                debug_assert!(ok, "single-step run must stay recognizable");
            }
        }
        if !rec.add(frame.apply(q)) {
            break;
        }
        prev = q;
        len += 1;
    }
    let (a, b, mu) = frame.to_original(rec.a, rec.b, rec.mu);
    DigitalStraightSegment {
        a,
        b,
        mu,
        first: start,
        last: (start + len - 1) % n,
        len,
    }
}

/// All maximal DSS of the closed point sequence, ordered by first index.
///
/// A segment `[i, e(i)]` built by extending forward from `i` is maximal
/// exactly when the forward extension from `i - 1` ends strictly before it.
pub(crate) fn maximal_segments_of(pts: &[Pixel]) -> Vec<DigitalStraightSegment> {
    let n = pts.len();
    let longest: Vec<DigitalStraightSegment> = (0..n).map(|i| longest_from(pts, i, n)).collect();
    let end = |i: usize| i + longest[i].len - 1;
    (0..n)
        .filter(|&i| {
            let prev_end = if i == 0 {
                end(n - 1) as i64 - n as i64
            } else {
                end(i - 1) as i64
            };
            end(i) as i64 > prev_end
        })
        .map(|i| longest[i])
        .collect()
}

pub fn maximal_segments(
    contour: &DigitalContour,
) -> Result<Vec<DigitalStraightSegment>, MscaleError> {
    if contour.len() < 4 {
        return Err(MscaleError::ContourTooShort(contour.len()));
    }
    Ok(maximal_segments_of(contour.points()))
}

/// Floor-maps the points to the grid of size `h`, collapsing consecutive
/// duplicates. Returns the subsampled closed sequence and, for each input
/// index, its image index; `None` when fewer than 4 distinct points remain.
pub(crate) fn subsample_map(pts: &[Pixel], h: u32) -> Option<(Vec<Pixel>, Vec<usize>)> {
    coarse_map(pts, h, (0, 0), false)
}

/// Like [`subsample_map`] on the grid with origin `-shift`; with `thin`,
/// spikes `(a, b, a)` and detours `b` between 8-neighbours `a, q` are folded
/// so the coarse curve is a thin 8-path that DSS recognition can follow.
fn coarse_map(pts: &[Pixel], h: u32, shift: (i64, i64), thin: bool) -> Option<(Vec<Pixel>, Vec<usize>)> {
    let h = h as i64;
    let mut out: Vec<Pixel> = Vec::new();
    let mut map = Vec::with_capacity(pts.len());
    for p in pts {
        let q = Pixel::new((p.x + shift.0).div_euclid(h), (p.y + shift.1).div_euclid(h));
        if out.last() == Some(&q) {
            map.push(out.len() - 1);
            continue;
        }
        let m = out.len();
        if thin && m >= 2 && (out[m - 2] == q || out[m - 2].is_8_adjacent(q)) {
            out.pop();
            for k in map.iter_mut().filter(|k| **k == m - 1) {
                *k = m - 2;
            }
            if out[m - 2] != q {
                out.push(q);
            }
        } else {
            out.push(q);
        }
        map.push(out.len() - 1);
    }
    while out.len() > 1 && out.first() == out.last() {
        let last = out.len() - 1;
        out.pop();
        for m in map.iter_mut().filter(|m| **m == last) {
            *m = 0;
        }
    }
    let mut distinct = out.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 4 {
        return None;
    }
    Some((out, map))
}

pub fn subsample(contour: &DigitalContour, h: u32) -> DigitalContour {
    assert!(h >= 1, "subsampling scale must be positive");
    if h == 1 {
        return contour.clone();
    }
    match subsample_map(contour.points(), h) {
        Some((pts, _)) => DigitalContour::from_raw(pts, contour.orientation()),
        None => DigitalContour::degenerate(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiScaleProfile {
    pub point_index: usize,
    pub scales: Vec<u32>,
    pub mean_lengths: Vec<f64>,
}

/// Mean length of the maximal segments covering each point of `pts`.
fn mean_cover_lengths(pts: &[Pixel]) -> Vec<f64> {
    let n = pts.len();
    let mut sum = vec![0.0; n];
    let mut count = vec![0u32; n];
    for s in maximal_segments_of(pts) {
        for k in s.indices(n) {
            sum[k] += s.len as f64;
            count[k] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c == 0 { 1.0 } else { s / c as f64 })
        .collect()
}

/// Profiles of every contour point over scales `1..=max_scale`, truncated at
/// the first scale where subsampling degenerates. Scale `h` averages the
/// `h * h` grid origins; coarse curves are thinned (see [`coarse_map`]).
pub fn profiles(
    contour: &DigitalContour,
    max_scale: u32,
) -> Result<Vec<MultiScaleProfile>, MscaleError> {
    if max_scale < 2 {
        return Err(MscaleError::MaxScaleTooSmall(max_scale));
    }
    if contour.len() < 4 {
        return Err(MscaleError::DegenerateAtScaleOne);
    }
    let per_scale: Vec<Option<Vec<f64>>> = (1..=max_scale)
        .into_par_iter()
        .map(|h| {
            let hi = h as i64;
            let mut acc = vec![0.0; contour.len()];
            for dy in 0..hi {
                for dx in 0..hi {
                    let (sub, map) = coarse_map(contour.points(), h, (dx, dy), h > 1)?;
                    let lens = mean_cover_lengths(&sub);
                    for (a, &m) in acc.iter_mut().zip(&map) {
                        *a += lens[m];
                    }
                }
            }
            let k = (hi * hi) as f64;
            Some(acc.into_iter().map(|a| a / k).collect())
        })
        .collect();
    if per_scale[0].is_none() {
        return Err(MscaleError::DegenerateAtScaleOne);
    }
    let usable: Vec<&Vec<f64>> = per_scale.iter().map_while(|s| s.as_ref()).collect();
    let scales: Vec<u32> = (1..=usable.len() as u32).collect();
    Ok((0..contour.len())
        .map(|i| MultiScaleProfile {
            point_index: i,
            scales: scales.clone(),
            mean_lengths: usable.iter().map(|l| l[i]).collect(),
        })
        .collect())
}

/// How a per-point profile is turned into a noise level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseRule {
    /// First scale followed by any strict decrease.
    #[default]
    FirstDecrease,
    /// First scale from which the profile strictly decreases up to the last
    /// scale. Ignores the chance dips of very ragged contours, at the price
    /// of coarser boxes on small curved shapes.
    DecreasingTail,
}

/// First scale after which the profile decreases; the last scale when it
/// never does.
pub fn noise_level(profile: &MultiScaleProfile) -> Result<u32, MscaleError> {
    noise_level_with(profile, NoiseRule::FirstDecrease)
}

pub fn noise_level_with(profile: &MultiScaleProfile, rule: NoiseRule) -> Result<u32, MscaleError> {
    let l = &profile.mean_lengths;
    if l.len() < 2 || profile.scales.len() != l.len() {
        return Err(MscaleError::ProfileTooShort(l.len().min(profile.scales.len())));
    }
    let last = l.len() - 1;
    let decreasing_from = |i: usize| match rule {
        NoiseRule::FirstDecrease => l[i + 1] < l[i],
        NoiseRule::DecreasingTail => (i..last).all(|j| l[j + 1] < l[j]),
    };
    Ok((0..last)
        .find(|&i| decreasing_from(i))
        .map(|i| profile.scales[i])
        .unwrap_or(profile.scales[last]))
}

/// Axis-aligned rectangle of an irregular isothetic grid, with the contour
/// indices it accounts for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub center: (Q, Q),
    pub size: (Q, Q),
    /// Sorted contour indices covered by the cell.
    pub indices: Vec<usize>,
}

impl Cell {
    pub fn new(center: (Q, Q), size: (Q, Q)) -> Self {
        assert!(
            size.0 > Q::from_integer(0) && size.1 > Q::from_integer(0),
            "cell sizes must be positive"
        );
        Self {
            center,
            size,
            indices: Vec::new(),
        }
    }

    pub fn from_ints(cx2: i64, cy2: i64, lx: i64, ly: i64) -> Self {
        Self::new(
            (Q::new(cx2, 2), Q::new(cy2, 2)),
            (Q::from_integer(lx), Q::from_integer(ly)),
        )
    }

    pub fn with_indices(mut self, indices: Vec<usize>) -> Self {
        self.indices = indices;
        self
    }

    pub fn lo(&self, axis: usize) -> Q {
        let (c, l) = self.axis(axis);
        c - l / 2
    }

    pub fn hi(&self, axis: usize) -> Q {
        let (c, l) = self.axis(axis);
        c + l / 2
    }

    fn axis(&self, axis: usize) -> (Q, Q) {
        if axis == 0 {
            (self.center.0, self.size.0)
        } else {
            (self.center.1, self.size.1)
        }
    }

    fn set_extent(&mut self, axis: usize, lo: Q, hi: Q) {
        let c = (lo + hi) / 2;
        let l = hi - lo;
        if axis == 0 {
            self.center.0 = c;
            self.size.0 = l;
        } else {
            self.center.1 = c;
            self.size.1 = l;
        }
    }

    pub fn contains(&self, other: &Cell) -> bool {
        (0..2).all(|a| self.lo(a) <= other.lo(a) && other.hi(a) <= self.hi(a))
    }

    pub fn interiors_overlap(&self, other: &Cell) -> bool {
        (0..2).all(|a| self.lo(a) < other.hi(a) && other.lo(a) < self.hi(a))
    }

    pub fn area(&self) -> Q {
        self.size.0 * self.size.1
    }

    pub fn max_size_f64(&self) -> f64 {
        to_f64(self.size.0.max(self.size.1))
    }

    pub fn to_dump(&self) -> CellDump {
        CellDump {
            cx: to_f64(self.center.0),
            cy: to_f64(self.center.1),
            lx: to_f64(self.size.0),
            ly: to_f64(self.size.1),
            indices: self.indices.clone(),
        }
    }
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// JSON form of a cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDump {
    pub cx: f64,
    pub cy: f64,
    pub lx: f64,
    pub ly: f64,
    pub indices: Vec<usize>,
}

fn merge_indices(into: &mut Vec<usize>, from: &[usize]) {
    into.extend_from_slice(from);
    into.sort_unstable();
    into.dedup();
}

/// Cells on each point's own noise-level grid, merged and made
/// interior-disjoint.
pub fn meaningful_boxes(
    contour: &DigitalContour,
    max_scale: u32,
) -> Result<Vec<Cell>, MscaleError> {
    meaningful_boxes_with(contour, max_scale, NoiseRule::default())
}

pub fn meaningful_boxes_with(
    contour: &DigitalContour,
    max_scale: u32,
    rule: NoiseRule,
) -> Result<Vec<Cell>, MscaleError> {
    let levels: Vec<u32> = profiles(contour, max_scale)?
        .iter()
        .map(|p| noise_level_with(p, rule).unwrap_or(1))
        .collect();
    Ok(boxes_from_levels(contour.points(), &levels))
}

pub(crate) fn boxes_from_levels(pts: &[Pixel], levels: &[u32]) -> Vec<Cell> {
    // (cell, first occurrence rank)
    let mut cells: Vec<(Cell, usize)> = Vec::new();
    let mut by_key = std::collections::HashMap::new();
    for (i, (p, &eta)) in pts.iter().zip(levels).enumerate() {
        let e = eta as i64;
        let key = (p.x.div_euclid(e), p.y.div_euclid(e), e);
        let slot = *by_key.entry(key).or_insert_with(|| {
            let cell = Cell::new(
                (Q::new((2 * key.0 + 1) * e, 2), Q::new((2 * key.1 + 1) * e, 2)),
                (Q::from_integer(e), Q::from_integer(e)),
            );
            cells.push((cell, i));
            cells.len() - 1
        });
        cells[slot].0.indices.push(i);
    }
    resolve_overlaps(cells)
}

/// Absorbs contained cells into their containers, then shrinks partial
/// overlaps symmetrically along the shallower partially overlapping axis.
fn resolve_overlaps(mut cells: Vec<(Cell, usize)>) -> Vec<Cell> {
    // largest first so containers are kept before what they contain
    cells.sort_by(|a, b| b.0.area().cmp(&a.0.area()).then(a.1.cmp(&b.1)));
    let mut kept: Vec<(Cell, usize)> = Vec::with_capacity(cells.len());
    for (cell, rank) in cells {
        if let Some(host) = kept.iter_mut().find(|(k, _)| k.contains(&cell)) {
            merge_indices(&mut host.0.indices, &cell.indices);
            host.1 = host.1.min(rank);
        } else {
            kept.push((cell, rank));
        }
    }
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < kept.len() {
            let mut j = i + 1;
            while j < kept.len() {
                if !kept[i].0.interiors_overlap(&kept[j].0) {
                    j += 1;
                    continue;
                }
                changed = true;
                let (a, b) = (&kept[i].0, &kept[j].0);
                let mut best: Option<(usize, Q)> = None;
                for axis in 0..2 {
                    let (alo, ahi, blo, bhi) = (a.lo(axis), a.hi(axis), b.lo(axis), b.hi(axis));
                    let partial = !(alo <= blo && bhi <= ahi) && !(blo <= alo && ahi <= bhi);
                    if partial {
                        let depth = ahi.min(bhi) - alo.max(blo);
                        if best.is_none_or(|(_, d)| depth < d) {
                            best = Some((axis, depth));
                        }
                    }
                }
                match best {
                    Some((axis, depth)) => {
                        let half = depth / 2;
                        let (lo_idx, hi_idx) = if kept[i].0.lo(axis) < kept[j].0.lo(axis) {
                            (i, j)
                        } else {
                            (j, i)
                        };
                        let c = &mut kept[lo_idx].0;
                        let (lo, hi) = (c.lo(axis), c.hi(axis) - half);
                        c.set_extent(axis, lo, hi);
                        let c = &mut kept[hi_idx].0;
                        let (lo, hi) = (c.lo(axis) + half, c.hi(axis));
                        c.set_extent(axis, lo, hi);
                        j += 1;
                    }
                    None => {
                        // containment or a cross: the larger cell takes over
                        let (big, small) = if kept[i].0.area() >= kept[j].0.area() {
                            (i, j)
                        } else {
                            (j, i)
                        };
                        let (small_cell, small_rank) = kept[small].clone();
                        merge_indices(&mut kept[big].0.indices, &small_cell.indices);
                        kept[big].1 = kept[big].1.min(small_rank);
                        kept.remove(small);
                        if small == i {
                            j = i + 1;
                            continue;
                        }
                    }
                }
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
    kept.sort_by_key(|(_, rank)| *rank);
    kept.into_iter().map(|(c, _)| c).collect()
}
