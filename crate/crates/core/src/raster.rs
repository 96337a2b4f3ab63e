//! Binary images, Netpbm I/O and closed boundary extraction.
//!
//! Pixel `(x, y)` is the unit square `[x, x+1] × [y, y+1]`, with `y` growing
//! downwards as in the file raster. Orientation of contours is measured with
//! the shoelace formula on the raw `(x, y)` coordinates: a positive signed
//! area is reported as [`Orientation::CounterClockwise`].

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("cannot open {path}")]
    Open {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("zero image dimensions")]
    ZeroDimensions,
    #[error("invalid contour: {0}")]
    InvalidContour(String),
}

/// Integer lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: i64,
    pub y: i64,
}

impl Pixel {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn is_8_adjacent(self, other: Pixel) -> bool {
        let dx = (self.x - other.x).abs();
        let dy = (self.y - other.y).abs();
        dx <= 1 && dy <= 1 && (dx, dy) != (0, 0)
    }
}

/// Row-major bit grid; `true` is foreground.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    /// All-background image.
    pub fn new(width: usize, height: usize) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimensions);
        }
        Ok(Self {
            width,
            height,
            bits: vec![false; width * height],
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, RasterError> {
        let mut img = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                img.bits[y * width + x] = f(x, y);
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) out of bounds");
        self.bits[y * self.width + x]
    }

    /// Foreground test that treats everything outside the image as background.
    pub fn is_fg(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) out of bounds");
        self.bits[y * self.width + x] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Encodes the image as binary PBM (P4), MSB-first, rows padded to bytes.
    pub fn to_pbm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P4\n{} {}\n", self.width, self.height).into_bytes();
        let row_bytes = self.width.div_ceil(8);
        for y in 0..self.height {
            let mut row = vec![0u8; row_bytes];
            for x in 0..self.width {
                if self.bits[y * self.width + x] {
                    row[x / 8] |= 0x80 >> (x % 8);
                }
            }
            out.extend_from_slice(&row);
        }
        out
    }

    pub fn save_pbm(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        let path = path.as_ref();
        fs::write(path, self.to_pbm_bytes()).map_err(|source| RasterError::Write {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Reads a PBM (P1/P4) or PGM (P2/P5) file. PGM pixels darker than mid-grey
/// (value < 128 on a 0..=255 scale) are foreground.
pub fn load_image(path: impl AsRef<Path>) -> Result<BinaryImage, RasterError> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|source| RasterError::Open {
        path: path.display().to_string(),
        source,
    })?;
    parse_netpbm(&data)
}

struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let c = self.data[self.pos];
            if c == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, RasterError> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(RasterError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| RasterError::MalformedHeader(format!("{what} out of range")))
    }
}

pub fn parse_netpbm(data: &[u8]) -> Result<BinaryImage, RasterError> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(RasterError::MalformedHeader("missing magic number".into()));
    }
    let magic = data[1];
    if !matches!(magic, b'1' | b'2' | b'4' | b'5') {
        return Err(RasterError::MalformedHeader(format!(
            "unsupported format P{}",
            magic as char
        )));
    }
    let mut rd = HeaderReader { data, pos: 2 };
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(RasterError::ZeroDimensions);
    }
    let maxval = if matches!(magic, b'2' | b'5') {
        let m = rd.number("maxval")?;
        if m == 0 || m > 65535 {
            return Err(RasterError::MalformedHeader(format!("invalid maxval {m}")));
        }
        m
    } else {
        1
    };
    let mut img = BinaryImage::new(width, height)?;
    let n = width * height;
    let dark = |v: u64| v * 255 < 128 * maxval;

    match magic {
        b'1' => {
            let mut k = 0;
            while k < n {
                rd.skip_ws_and_comments();
                match data.get(rd.pos) {
                    Some(b'0') => img.bits[k] = false,
                    Some(b'1') => img.bits[k] = true,
                    Some(c) => {
                        return Err(RasterError::MalformedPayload(format!(
                            "unexpected byte {c:#04x} in plain bitmap"
                        )))
                    }
                    None => {
                        return Err(RasterError::MalformedPayload(format!(
                            "expected {n} pixels, found {k}"
                        )))
                    }
                }
                rd.pos += 1;
                k += 1;
            }
        }
        b'2' => {
            for k in 0..n {
                let v = rd.number("pixel").map_err(|_| {
                    RasterError::MalformedPayload(format!("expected {n} pixels, found {k}"))
                })?;
                if v > maxval {
                    return Err(RasterError::MalformedPayload(format!(
                        "pixel value {v} exceeds maxval {maxval}"
                    )));
                }
                img.bits[k] = dark(v);
            }
        }
        b'4' | b'5' => {
            // exactly one whitespace byte separates header and raster
            match data.get(rd.pos) {
                Some(c) if c.is_ascii_whitespace() => rd.pos += 1,
                _ => return Err(RasterError::MalformedHeader("missing raster separator".into())),
            }
            let raster = &data[rd.pos..];
            if magic == b'4' {
                let row_bytes = width.div_ceil(8);
                if raster.len() < row_bytes * height {
                    return Err(RasterError::MalformedPayload(format!(
                        "expected {} bytes, found {}",
                        row_bytes * height,
                        raster.len()
                    )));
                }
                for y in 0..height {
                    for x in 0..width {
                        let byte = raster[y * row_bytes + x / 8];
                        img.bits[y * width + x] = byte & (0x80 >> (x % 8)) != 0;
                    }
                }
            } else {
                let bpp = if maxval < 256 { 1 } else { 2 };
                if raster.len() < n * bpp {
                    return Err(RasterError::MalformedPayload(format!(
                        "expected {} bytes, found {}",
                        n * bpp,
                        raster.len()
                    )));
                }
                for k in 0..n {
                    let v = if bpp == 1 {
                        raster[k] as u64
                    } else {
                        u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as u64
                    };
                    img.bits[k] = dark(v);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(img)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

/// Closed 8-connected pixel boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalContour {
    points: Vec<Pixel>,
    orientation: Orientation,
}

impl DigitalContour {
    /// Validates closure, 8-adjacency, uniqueness and minimal length.
    pub fn new(points: Vec<Pixel>, orientation: Orientation) -> Result<Self, RasterError> {
        if points.len() < 4 {
            return Err(RasterError::InvalidContour(format!(
                "{} points, need at least 4",
                points.len()
            )));
        }
        let n = points.len();
        for i in 0..n {
            let (a, b) = (points[i], points[(i + 1) % n]);
            if !a.is_8_adjacent(b) {
                return Err(RasterError::InvalidContour(format!(
                    "points {i} and {} are not 8-adjacent",
                    (i + 1) % n
                )));
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(n);
        if let Some(p) = points.iter().find(|p| !seen.insert(**p)) {
            return Err(RasterError::InvalidContour(format!(
                "point ({}, {}) repeats",
                p.x, p.y
            )));
        }
        Ok(Self {
            points,
            orientation,
        })
    }

    /// Skips the uniqueness check. Used for subsampled curves, which may
    /// revisit cells but stay closed and 8-connected.
    pub(crate) fn from_raw(points: Vec<Pixel>, orientation: Orientation) -> Self {
        Self {
            points,
            orientation,
        }
    }

    /// The "scale exhausted" marker returned by subsampling.
    pub fn degenerate() -> Self {
        Self {
            points: Vec::new(),
            orientation: Orientation::CounterClockwise,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Pixel] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Twice the signed shoelace area of the polygon through the points.
    pub fn signed_area2(&self) -> i64 {
        signed_area2(&self.points)
    }

    /// Same point set traversed in the opposite direction, starting at the
    /// same point.
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        if points.len() > 1 {
            points[1..].reverse();
        }
        let orientation = match self.orientation {
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::CounterClockwise,
        };
        Self {
            points,
            orientation,
        }
    }

    /// Whether a real point lies on the polygon through pixel centres.
    pub fn on_boundary(&self, px: f64, py: f64) -> bool {
        let n = self.points.len();
        (0..n).any(|i| {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            let (ax, ay) = (a.x as f64 + 0.5, a.y as f64 + 0.5);
            let (bx, by) = (b.x as f64 + 0.5, b.y as f64 + 0.5);
            let cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
            cross == 0.0
                && px >= ax.min(bx)
                && px <= ax.max(bx)
                && py >= ay.min(by)
                && py <= ay.max(by)
        })
    }

    /// Even-odd test of a real point against the polygon through pixel centres.
    pub fn contains_point(&self, px: f64, py: f64) -> bool {
        let n = self.points.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            let (ax, ay) = (a.x as f64 + 0.5, a.y as f64 + 0.5);
            let (bx, by) = (b.x as f64 + 0.5, b.y as f64 + 0.5);
            if (ay > py) != (by > py) {
                let xi = ax + (py - ay) * (bx - ax) / (by - ay);
                if px < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn signed_area2(points: &[Pixel]) -> i64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum()
}

// Clockwise on screen (y down): E, SE, S, SW, W, NW, N, NE.
const DIRS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];
const DIR_W: usize = 4;
const DIR_S: usize = 2;

fn dir_index(dx: i64, dy: i64) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("not a unit neighbour offset")
}

/// One Moore-neighbour step from `p` whose last examined background
/// neighbour lies in direction `back`. Returns the next boundary pixel and
/// the direction, seen from it, of the background pixel examined just before.
fn moore_step(img: &BinaryImage, p: Pixel, back: usize) -> Option<(Pixel, usize)> {
    for k in 1..=8 {
        let d = (back + k) % 8;
        let c = Pixel::new(p.x + DIRS[d].0, p.y + DIRS[d].1);
        if img.is_fg(c.x, c.y) {
            let prev = (back + k - 1) % 8;
            let b = Pixel::new(p.x + DIRS[prev].0, p.y + DIRS[prev].1);
            return Some((c, dir_index(b.x - c.x, b.y - c.y)));
        }
    }
    None
}

/// Moore-neighbour tracing with Jacob's stopping criterion: stop when the
/// start pixel is about to be left the same way it was left the first time.
fn moore_trace(img: &BinaryImage, start: Pixel, back: usize) -> Vec<Pixel> {
    let mut points = vec![start];
    let (mut cur, mut bd) = (start, back);
    let mut first_move: Option<Pixel> = None;
    let cap = 4 * img.width * img.height + 16;
    while points.len() <= cap {
        let Some((next, nbd)) = moore_step(img, cur, bd) else {
            break;
        };
        match first_move {
            None => first_move = Some(next),
            Some(f) if cur == start && next == f => {
                points.pop();
                break;
            }
            Some(_) => {}
        }
        cur = next;
        bd = nbd;
        points.push(cur);
    }
    points
}

/// Removes revisits from a closed trace by cutting each repeated loop and
/// keeping the longer of the two resulting closed pieces.
fn erase_loops(mut pts: Vec<Pixel>) -> Vec<Pixel> {
    loop {
        let mut first: HashMap<Pixel, usize> = HashMap::with_capacity(pts.len());
        let mut cut = None;
        for (j, p) in pts.iter().enumerate() {
            if let Some(&i) = first.get(p) {
                cut = Some((i, j));
                break;
            }
            first.insert(*p, j);
        }
        let Some((i, j)) = cut else {
            return pts;
        };
        let loop_len = j - i;
        if loop_len * 2 >= pts.len() {
            pts = pts[i..j].to_vec();
        } else {
            pts.drain(i + 1..=j);
        }
    }
}

fn finish_contour(mut pts: Vec<Pixel>, want: Orientation) -> Option<DigitalContour> {
    pts = erase_loops(pts);
    if pts.len() < 4 {
        return None;
    }
    let area = signed_area2(&pts);
    let is_ccw = area > 0;
    if (want == Orientation::CounterClockwise && area < 0)
        || (want == Orientation::Clockwise && is_ccw)
    {
        pts.reverse();
    }
    let s = pts
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| (p.y, p.x))
        .map(|(i, _)| i)
        .unwrap_or(0);
    pts.rotate_left(s);
    DigitalContour::new(pts, want).ok()
}

fn label_components(
    img: &BinaryImage,
    foreground: bool,
    neighbours: &[(i64, i64)],
) -> (Vec<usize>, Vec<Vec<Pixel>>) {
    let (w, h) = (img.width, img.height);
    let mut label = vec![usize::MAX; w * h];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if img.bits[idx] != foreground || label[idx] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = Vec::new();
            label[idx] = id;
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                members.push(Pixel::new(cx as i64, cy as i64));
                for &(dx, dy) in neighbours {
                    let nx = cx as i64 + dx;
                    let ny = cy as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let nidx = ny as usize * w + nx as usize;
                    if img.bits[nidx] == foreground && label[nidx] == usize::MAX {
                        label[nidx] = id;
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
            comps.push(members);
        }
    }
    (label, comps)
}

pub(crate) const N8: [(i64, i64); 8] = DIRS;
pub(crate) const N4: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// 8-connected foreground components, each listed in raster order.
pub fn foreground_components(img: &BinaryImage) -> Vec<Vec<Pixel>> {
    label_components(img, true, &N8).1
}

/// 4-connected background components that do not touch the image border.
pub fn holes(img: &BinaryImage) -> Vec<Vec<Pixel>> {
    let (w, h) = (img.width as i64, img.height as i64);
    label_components(img, false, &N4)
        .1
        .into_iter()
        .filter(|c| {
            c.iter()
                .all(|p| p.x > 0 && p.y > 0 && p.x < w - 1 && p.y < h - 1)
        })
        .collect()
}

/// Extracts every closed boundary: outer boundaries counterclockwise, hole
/// boundaries clockwise, each starting at its lowest row then lowest column.
/// Contours are returned in order of their start point.
pub fn trace_contours(img: &BinaryImage) -> Vec<DigitalContour> {
    let mut out: Vec<(Pixel, u8, DigitalContour)> = Vec::new();
    for comp in foreground_components(img) {
        // raster order: first member is the topmost-leftmost pixel
        let start = comp[0];
        let trace = moore_trace(img, start, DIR_W);
        if let Some(c) = finish_contour(trace, Orientation::CounterClockwise) {
            out.push((c.points[0], 0, c));
        }
    }
    for hole in holes(img) {
        let h = hole[0];
        let start = Pixel::new(h.x, h.y - 1);
        debug_assert!(img.is_fg(start.x, start.y));
        let trace = moore_trace(img, start, DIR_S);
        if let Some(c) = finish_contour(trace, Orientation::Clockwise) {
            out.push((c.points[0], 1, c));
        }
    }
    out.sort_by_key(|(p, kind, _)| (p.y, p.x, *kind));
    out.into_iter().map(|(_, _, c)| c).collect()
}
