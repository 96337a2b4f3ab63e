//! Robustness harness: synthetic shapes, Kanungo-style boundary noise, the
//! primitive-count quality measure and the Lipschitz robustness score.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::glp::PrimitiveKind;
use crate::pipeline::{run_contour, PipelineConfig, PipelineError};
use crate::raster::{foreground_components, holes, trace_contours, BinaryImage, Orientation};

/// Room left between a shape and the image border.
pub const SHAPE_MARGIN: f64 = 10.0;
/// Holes smaller than this many pixels are filled after noising.
pub const MIN_HOLE: usize = 9;
/// Divisor mapping a noise scale to the per-step flip probability.
pub const DEFAULT_SCALE_DIVISOR: f64 = 20.0;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("shape does not fit in a {size}x{size} image")]
    ShapeExceedsImage { size: usize },
    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),
    #[error("flip probability {0} must be below 1")]
    ProbabilityTooLarge(f64),
    #[error("noise removed every foreground pixel")]
    EmptyAfterNoise,
    #[error("p* must be positive")]
    ZeroPStar,
    #[error("need at least one count")]
    NoCounts,
    #[error("need at least 2 scales, got {0}")]
    TooFewScales(usize),
    #[error("{0} quality values for {1} scales")]
    LengthMismatch(usize, usize),
    #[error("noise scales must be strictly increasing")]
    LadderNotIncreasing,
    #[error("scale {k} angle {t}")]
    Run {
        k: usize,
        t: usize,
        #[source]
        source: PipelineError,
    },
    #[error("scale {k} angle {t}: no outer contour")]
    NoOuterContour { k: usize, t: usize },
    #[error(transparent)]
    Raster(#[from] crate::raster::RasterError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseLadder {
    pub scales: Vec<f64>,
}

impl NoiseLadder {
    pub fn new(scales: Vec<f64>) -> Result<Self, BenchError> {
        if scales.is_empty() {
            return Err(BenchError::TooFewScales(0));
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::LadderNotIncreasing);
        }
        Ok(Self { scales })
    }
}

impl Default for NoiseLadder {
    fn default() -> Self {
        Self {
            scales: vec![1.0, 3.0, 5.0, 7.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSet {
    pub angles: Vec<f64>,
}

impl Default for RotationSet {
    fn default() -> Self {
        Self {
            angles: (0..5).map(|t| t as f64 * PI / 8.0).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Hexagon,
    Ellipse,
}

impl Shape {
    /// Expected primitive count.
    pub fn p_star(self) -> usize {
        match self {
            Shape::Hexagon => 6,
            Shape::Ellipse => 4,
        }
    }
}

/// Geometry used by the experiment for each shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub hexagon_radius: f64,
    pub ellipse_axes: (f64, f64),
    pub image_size: usize,
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self {
            hexagon_radius: 60.0,
            ellipse_axes: (60.0, 40.0),
            image_size: 160,
        }
    }
}

fn fill_convex(size: usize, inside: impl Fn(f64, f64) -> bool) -> Result<BinaryImage, BenchError> {
    Ok(BinaryImage::from_fn(size, size, |x, y| {
        inside(x as f64 + 0.5, y as f64 + 0.5)
    })?)
}

/// Regular hexagon of circumradius `radius`, rotated by `angle`, centred in
/// a `size`×`size` image; pixels are kept when their centre is inside.
pub fn make_hexagon(radius: f64, angle: f64, size: usize) -> Result<BinaryImage, BenchError> {
    if !(radius > 0.0) {
        return Err(BenchError::InvalidShape(format!("radius {radius}")));
    }
    if radius + SHAPE_MARGIN > size as f64 / 2.0 {
        return Err(BenchError::ShapeExceedsImage { size });
    }
    let c = size as f64 / 2.0;
    let verts: Vec<(f64, f64)> = (0..6)
        .map(|k| {
            let a = angle + k as f64 * PI / 3.0;
            (c + radius * a.cos(), c + radius * a.sin())
        })
        .collect();
    fill_convex(size, |x, y| {
        (0..6).all(|k| {
            let (ax, ay) = verts[k];
            let (bx, by) = verts[(k + 1) % 6];
            (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= 0.0
        })
    })
}

/// Ellipse with semi-axes `a` (along the rotated x axis) and `b`.
pub fn make_ellipse(a: f64, b: f64, angle: f64, size: usize) -> Result<BinaryImage, BenchError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(BenchError::InvalidShape(format!("axes {a}, {b}")));
    }
    if a.max(b) + SHAPE_MARGIN > size as f64 / 2.0 {
        return Err(BenchError::ShapeExceedsImage { size });
    }
    let c = size as f64 / 2.0;
    let (s, co) = angle.sin_cos();
    fill_convex(size, |x, y| {
        let (dx, dy) = (x - c, y - c);
        let u = co * dx + s * dy;
        let v = -s * dx + co * dy;
        (u / a).powi(2) + (v / b).powi(2) <= 1.0
    })
}

/// Chebyshev distance of every pixel to the nearest pixel of the other
/// colour; outside the image counts as background.
pub fn boundary_distance(img: &BinaryImage) -> Vec<u32> {
    let (w, h) = (img.width(), img.height());
    let big = (w + h) as u32 + 2;
    let mut to_bg = vec![big; w * h];
    let mut to_fg = vec![big; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if img.get(x, y) {
                to_fg[i] = 0;
                // pixels on the border touch outside background
                if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                    to_bg[i] = 1;
                }
            } else {
                to_bg[i] = 0;
            }
        }
    }
    for d in [&mut to_bg, &mut to_fg] {
        chessboard_pass(d, w, h);
    }
    (0..w * h).map(|i| to_bg[i].max(to_fg[i])).collect()
}

fn chessboard_pass(d: &mut [u32], w: usize, h: usize) {
    let at = |x: i64, y: i64| -> Option<usize> {
        (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h).then(|| y as usize * w + x as usize)
    };
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = at(x, y).unwrap();
            for (dx, dy) in [(-1, -1), (0, -1), (1, -1), (-1, 0)] {
                if let Some(j) = at(x + dx, y + dy) {
                    d[i] = d[i].min(d[j] + 1);
                }
            }
        }
    }
    for y in (0..h as i64).rev() {
        for x in (0..w as i64).rev() {
            let i = at(x, y).unwrap();
            for (dx, dy) in [(1, 1), (0, 1), (-1, 1), (1, 0)] {
                if let Some(j) = at(x + dx, y + dy) {
                    d[i] = d[i].min(d[j] + 1);
                }
            }
        }
    }
}

/// Flips each pixel with probability `q^d`, `d` its boundary distance. One
/// uniform draw per pixel in raster order.
pub fn flip_pixels(img: &BinaryImage, q: f64, rng: &mut impl Rng) -> BinaryImage {
    let dist = boundary_distance(img);
    let mut out = img.clone();
    let w = img.width();
    for y in 0..img.height() {
        for x in 0..w {
            let u: f64 = rng.gen();
            let d = dist[y * w + x];
            if d >= 1 && u < q.powi(d as i32) {
                out.set(x, y, !img.get(x, y));
            }
        }
    }
    out
}

/// Keeps the largest 8-connected component and fills holes smaller than
/// [`MIN_HOLE`] pixels.
pub fn clean(img: &BinaryImage) -> Result<BinaryImage, BenchError> {
    let comps = foreground_components(img);
    let best = comps
        .iter()
        .enumerate()
        .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
        .map(|(_, c)| c)
        .ok_or(BenchError::EmptyAfterNoise)?;
    let mut out = BinaryImage::new(img.width(), img.height())?;
    for p in best {
        out.set(p.x as usize, p.y as usize, true);
    }
    for hole in holes(&out) {
        if hole.len() < MIN_HOLE {
            for p in hole {
                out.set(p.x as usize, p.y as usize, true);
            }
        }
    }
    Ok(out)
}

/// Noise at `scale` with the default mapping `q = scale / 20`, followed by
/// cleaning.
pub fn kanungo_noise(img: &BinaryImage, scale: f64, seed: u64) -> Result<BinaryImage, BenchError> {
    kanungo_noise_with(img, scale / DEFAULT_SCALE_DIVISOR, seed)
}

pub fn kanungo_noise_with(img: &BinaryImage, q: f64, seed: u64) -> Result<BinaryImage, BenchError> {
    if !(0.0..1.0).contains(&q) {
        return Err(BenchError::ProbabilityTooLarge(q));
    }
    if q == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    clean(&flip_pixels(img, q, &mut rng))
}

/// Mean primitive count over the rotations, relative to `p_star`.
pub fn q_measure(counts: &[usize], p_star: usize) -> Result<f64, BenchError> {
    if p_star == 0 {
        return Err(BenchError::ZeroPStar);
    }
    if counts.is_empty() {
        return Err(BenchError::NoCounts);
    }
    let sum: usize = counts.iter().sum();
    Ok(sum as f64 / (counts.len() * p_star) as f64)
}

/// Largest slope of `Q` between consecutive scales, and the scale where it
/// starts. `absolute` takes `|ΔQ|` instead of the signed difference.
pub fn robustness(q: &[f64], ladder: &NoiseLadder, absolute: bool) -> Result<(f64, f64), BenchError> {
    let s = &ladder.scales;
    if q.len() != s.len() {
        return Err(BenchError::LengthMismatch(q.len(), s.len()));
    }
    if s.len() < 2 {
        return Err(BenchError::TooFewScales(s.len()));
    }
    let mut best = (f64::NEG_INFINITY, s[0]);
    for k in 0..s.len() - 1 {
        let dy = q[k + 1] - q[k];
        let dy = if absolute { dy.abs() } else { dy };
        let a = dy / (s[k + 1] - s[k]).abs();
        if a > best.0 {
            best = (a, s[k]);
        }
    }
    Ok(best)
}

/// Published `(α, σ)` of a method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub name: String,
    pub alpha: f64,
    pub sigma: f64,
}

const SEGMENT_REFERENCE: [(&str, f64, f64); 5] = [
    ("DLL (segments)", 9.472, 3.0),
    ("Frechet distance (d=5)", 1.111, 5.0),
    ("Visual curvature", 0.278, 3.0),
    ("Frechet distance (d=30)", 0.111, 1.0),
    ("Ours", 0.063, 1.0),
];

const ARC_REFERENCE: [(&str, f64, f64); 8] = [
    ("DLL (arcs)", 6.8, 5.0),
    ("GMC (w=1)", 4.5, 1.0),
    ("BCCA (w=1)", 4.025, 1.0),
    ("Ours", 0.05, 1.0),
    ("BCCA (w=30)", 0.05, 7.0),
    ("GMC (w=30)", 0.025, 1.0),
    ("BCCA (w=10)", 0.0, 1.0),
    ("GMC (w=10)", 0.0, 1.0),
];

pub fn reference_table(kind: PrimitiveKind) -> Vec<ReferenceEntry> {
    let rows: &[(&str, f64, f64)] = match kind {
        PrimitiveKind::Segment => &SEGMENT_REFERENCE,
        PrimitiveKind::Arc => &ARC_REFERENCE,
    };
    rows.iter()
        .map(|&(name, alpha, sigma)| ReferenceEntry {
            name: name.to_string(),
            alpha,
            sigma,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub shape: Shape,
    pub kind: PrimitiveKind,
    pub seed: u64,
    pub scales: Vec<f64>,
    pub angles: Vec<f64>,
    /// `primitive_counts[k][t]` for scale `k` and angle `t`.
    pub primitive_counts: Vec<Vec<usize>>,
    pub q_values: Vec<f64>,
    pub p_star: usize,
    /// Absent for single-scale ladders.
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub reference: Vec<ReferenceEntry>,
}

impl RobustnessReport {
    /// Rows `scale,angle,count`, then `Q_k` lines and the score.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,angle,count\n");
        for (k, row) in self.primitive_counts.iter().enumerate() {
            for (t, c) in row.iter().enumerate() {
                writeln!(s, "{},{},{}", self.scales[k], self.angles[t], c).unwrap();
            }
        }
        for (k, q) in self.q_values.iter().enumerate() {
            writeln!(s, "# Q,{},{}", self.scales[k], q).unwrap();
        }
        match (self.alpha, self.sigma) {
            (Some(a), Some(sg)) => writeln!(s, "# alpha,{a}\n# sigma,{sg}").unwrap(),
            _ => writeln!(s, "# alpha,\n# sigma,").unwrap(),
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub shape: Shape,
    pub kind: PrimitiveKind,
    pub ladder: NoiseLadder,
    pub rotations: RotationSet,
    pub seed: u64,
    pub params: ShapeParams,
    pub max_scale: u32,
    /// Take `|ΔQ|` in the robustness score.
    pub absolute: bool,
}

impl ExperimentConfig {
    pub fn new(shape: Shape, kind: PrimitiveKind, seed: u64) -> Self {
        Self {
            shape,
            kind,
            ladder: NoiseLadder::default(),
            rotations: RotationSet::default(),
            seed,
            params: ShapeParams::default(),
            max_scale: crate::mscale::DEFAULT_MAX_SCALE,
            absolute: false,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Noise seed of cell `(k, t)`.
pub fn cell_seed(seed: u64, k: usize, t: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ k as u64) ^ t as u64)
}

pub fn make_shape(shape: Shape, params: &ShapeParams, angle: f64) -> Result<BinaryImage, BenchError> {
    match shape {
        Shape::Hexagon => make_hexagon(params.hexagon_radius, angle, params.image_size),
        Shape::Ellipse => {
            let (a, b) = params.ellipse_axes;
            make_ellipse(a, b, angle, params.image_size)
        }
    }
}

/// Primitive count of the outer contour of one noisy shape.
fn count_primitives(cfg: &ExperimentConfig, k: usize, t: usize) -> Result<usize, BenchError> {
    let angle = cfg.rotations.angles[t];
    let img = make_shape(cfg.shape, &cfg.params, angle)?;
    let noisy = kanungo_noise(&img, cfg.ladder.scales[k], cell_seed(cfg.seed, k, t))?;
    let outer = trace_contours(&noisy)
        .into_iter()
        .find(|c| c.orientation() == Orientation::CounterClockwise)
        .ok_or(BenchError::NoOuterContour { k, t })?;
    let pc = PipelineConfig {
        kind: cfg.kind,
        max_scale: cfg.max_scale,
        ..PipelineConfig::default()
    };
    let run = run_contour(&noisy, outer, 0, pc).map_err(|source| BenchError::Run { k, t, source })?;
    Ok(run.reconstruction.primitives.len())
}

/// Runs every (scale, angle) cell in parallel and assembles the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RobustnessReport, BenchError> {
    let (ks, ts) = (cfg.ladder.scales.len(), cfg.rotations.angles.len());
    if ts == 0 {
        return Err(BenchError::NoCounts);
    }
    let flat: Vec<usize> = (0..ks * ts)
        .into_par_iter()
        .map(|i| count_primitives(cfg, i / ts, i % ts))
        .collect::<Result<_, _>>()?;
    let primitive_counts: Vec<Vec<usize>> = flat.chunks(ts).map(<[usize]>::to_vec).collect();
    let p_star = cfg.shape.p_star();
    let q_values = primitive_counts
        .iter()
        .map(|c| q_measure(c, p_star))
        .collect::<Result<Vec<_>, _>>()?;
    let (alpha, sigma) = if ks >= 2 {
        let (a, s) = robustness(&q_values, &cfg.ladder, cfg.absolute)?;
        (Some(a), Some(s))
    } else {
        (None, None)
    };
    Ok(RobustnessReport {
        shape: cfg.shape,
        kind: cfg.kind,
        seed: cfg.seed,
        scales: cfg.ladder.scales.clone(),
        angles: cfg.rotations.angles.clone(),
        primitive_counts,
        q_values,
        p_star,
        alpha,
        sigma,
        reference: reference_table(cfg.kind),
    })
}
