//! Visual attributes of an object: average colour, turning-function shape
//! and a three-axis texture vector (coarseness, contrast, directionality).
//!
//! Rasters are row-major with row 0 at the top. Pixel `(col, row)` has its
//! centre at model point `(col + 0.5, height - row - 0.5)`, so polygons in
//! model space (+y up) can be laid directly over the image.

use core::f64::consts::PI;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{resample_boundary, Point, Polygon};
use crate::math;
use crate::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation("raster must be non-empty".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Validation(format!(
                "raster {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(col, row));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, col: usize, row: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn pixel_center(&self, col: usize, row: usize) -> Point {
        Point::new(col as f64 + 0.5, self.height as f64 - row as f64 - 0.5)
    }

    fn gray(&self, col: usize, row: usize) -> f64 {
        let [r, g, b] = self.get(col, row);
        (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)) / 255.0
    }

    /// `(col, row)` of every pixel whose centre lies inside `mask`.
    pub fn mask_pixels(&self, mask: &Polygon) -> Vec<(usize, usize)> {
        let (min, max) = mask.bounds();
        let h = self.height as f64;
        let col_lo = math::floor(min.x - 0.5).max(0.0) as usize;
        let col_hi = ((math::floor(max.x + 0.5)).max(0.0) as usize).min(self.width);
        let row_lo = math::floor(h - max.y - 0.5).max(0.0) as usize;
        let row_hi = ((math::floor(h - min.y + 0.5)).max(0.0) as usize).min(self.height);
        let mut out = Vec::new();
        for row in row_lo..row_hi {
            for col in col_lo..col_hi {
                if mask.contains_point(self.pixel_center(col, row)) {
                    out.push((col, row));
                }
            }
        }
        out
    }
}

/// Colour in `[0, 1]^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgb([f64; 3]);

impl Rgb {
    pub fn new(r: f64, g: f64, b: f64) -> Result<Self> {
        Ok(Self(unit_triple([r, g, b], "colour")?))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn to_u8(&self) -> [u8; 3] {
        self.0.map(|c| math::round(c * 255.0) as u8)
    }
}

/// Texture vector: coarseness, contrast, directionality, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Texture([f64; 3]);

impl Texture {
    pub fn new(coarseness: f64, contrast: f64, directionality: f64) -> Result<Self> {
        Ok(Self(unit_triple([coarseness, contrast, directionality], "texture")?))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn coarseness(&self) -> f64 {
        self.0[0]
    }

    pub fn contrast(&self) -> f64 {
        self.0[1]
    }

    pub fn directionality(&self) -> f64 {
        self.0[2]
    }
}

fn unit_triple(v: [f64; 3], what: &str) -> Result<[f64; 3]> {
    if v.iter().all(|c| c.is_finite() && (0.0..=1.0).contains(c)) {
        Ok(v)
    } else {
        Err(Error::Validation(format!("{what} components must lie in [0, 1]: {v:?}")))
    }
}

fn diagonal_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let s: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    (math::sqrt(s) / SQRT3).min(1.0)
}

pub fn color_distance(a: &Rgb, b: &Rgb) -> f64 {
    diagonal_distance(a.0, b.0)
}

pub fn texture_distance(a: &Texture, b: &Texture) -> f64 {
    diagonal_distance(a.0, b.0)
}

/// Mean colour over pixels whose centres fall inside `mask`.
pub fn average_color(raster: &Raster, mask: &Polygon) -> Result<Rgb> {
    let pixels = raster.mask_pixels(mask);
    if pixels.is_empty() {
        return Err(Error::DegenerateRegion("mask covers no pixel centres".into()));
    }
    let mut sum = [0u64; 3];
    for &(c, r) in &pixels {
        let px = raster.get(c, r);
        for k in 0..3 {
            sum[k] += u64::from(px[k]);
        }
    }
    let n = pixels.len() as f64 * 255.0;
    Rgb::new(sum[0] as f64 / n, sum[1] as f64 / n, sum[2] as f64 / n)
}

/// Largest window exponent used for coarseness (windows 2^1 .. 2^5).
const COARSENESS_SCALES: usize = 5;
const ORIENTATION_BINS: usize = 16;
const MIN_REGION_SIDE: usize = 8;
const MIN_GRADIENT: f64 = 1e-3;

struct Integral {
    width: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(raster: &Raster) -> Self {
        let (w, h) = (raster.width, raster.height);
        let mut sums = vec![0.0; (w + 1) * (h + 1)];
        for r in 0..h {
            let mut row_sum = 0.0;
            for c in 0..w {
                row_sum += raster.gray(c, r);
                sums[(r + 1) * (w + 1) + c + 1] = sums[r * (w + 1) + c + 1] + row_sum;
            }
        }
        Self { width: w, sums }
    }

    /// Mean over columns `[c0, c1)` and rows `[r0, r1)`.
    fn mean(&self, c0: usize, c1: usize, r0: usize, r1: usize) -> f64 {
        let w = self.width + 1;
        let s = self.sums[r1 * w + c1] - self.sums[r0 * w + c1] - self.sums[r1 * w + c0] + self.sums[r0 * w + c0];
        s / ((c1 - c0) * (r1 - r0)) as f64
    }
}

/// Window mean of side `2 * half` centred between pixels, clipped to the raster.
fn window_mean(ii: &Integral, w: usize, h: usize, col: isize, row: isize, half: isize) -> Option<f64> {
    let c0 = (col - half).max(0);
    let c1 = (col + half).min(w as isize);
    let r0 = (row - half).max(0);
    let r1 = (row + half).min(h as isize);
    if c0 >= c1 || r0 >= r1 {
        return None;
    }
    Some(ii.mean(c0 as usize, c1 as usize, r0 as usize, r1 as usize))
}

/// Texture vector over the masked region.
///
/// * contrast: grey-level standard deviation divided by 0.5;
/// * coarseness: per pixel, the window exponent `k` in 1..=5 maximising the
///   difference of opposite `2^k` window means, averaged and mapped to `[0, 1]`;
/// * directionality: one minus the normalised entropy of the
///   magnitude-weighted 16-bin gradient orientation histogram (0 when the
///   region has no gradient at all).
pub fn texture_descriptor(raster: &Raster, mask: &Polygon) -> Result<Texture> {
    let pixels = raster.mask_pixels(mask);
    if pixels.is_empty() {
        return Err(Error::DegenerateRegion("mask covers no pixel centres".into()));
    }
    let (mut cmin, mut cmax, mut rmin, mut rmax) = (usize::MAX, 0, usize::MAX, 0);
    for &(c, r) in &pixels {
        cmin = cmin.min(c);
        cmax = cmax.max(c);
        rmin = rmin.min(r);
        rmax = rmax.max(r);
    }
    if cmax - cmin + 1 < MIN_REGION_SIDE || rmax - rmin + 1 < MIN_REGION_SIDE {
        return Err(Error::InsufficientData(format!(
            "texture region {}x{} is smaller than {MIN_REGION_SIDE}x{MIN_REGION_SIDE}",
            cmax - cmin + 1,
            rmax - rmin + 1
        )));
    }

    let n = pixels.len() as f64;
    let mean = pixels.iter().map(|&(c, r)| raster.gray(c, r)).sum::<f64>() / n;
    let var = pixels
        .iter()
        .map(|&(c, r)| {
            let d = raster.gray(c, r) - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    // Rounding in the mean leaves ~1e-15 on flat regions.
    let contrast = if var < 1e-18 { 0.0 } else { (math::sqrt(var) / 0.5).clamp(0.0, 1.0) };

    let (w, h) = (raster.width, raster.height);
    let ii = Integral::new(raster);
    let mut best_sum = 0.0;
    for &(c, r) in &pixels {
        let (c, r) = (c as isize, r as isize);
        let mut best_k = 1;
        let mut best_e = f64::NEG_INFINITY;
        for k in 1..=COARSENESS_SCALES {
            let half = 1isize << (k - 1);
            let horizontal = match (
                window_mean(&ii, w, h, c + half, r, half),
                window_mean(&ii, w, h, c - half, r, half),
            ) {
                (Some(a), Some(b)) => (a - b).abs(),
                _ => 0.0,
            };
            let vertical = match (
                window_mean(&ii, w, h, c, r + half, half),
                window_mean(&ii, w, h, c, r - half, half),
            ) {
                (Some(a), Some(b)) => (a - b).abs(),
                _ => 0.0,
            };
            let e = horizontal.max(vertical);
            if e > best_e + 1e-12 {
                best_e = e;
                best_k = k;
            }
        }
        best_sum += best_k as f64;
    }
    let coarseness = ((best_sum / n - 1.0) / (COARSENESS_SCALES - 1) as f64).clamp(0.0, 1.0);

    let mut hist = [0.0f64; ORIENTATION_BINS];
    let at = |c: usize, r: usize| raster.gray(c, r);
    for &(c, r) in &pixels {
        if c == 0 || r == 0 || c + 1 >= w || r + 1 >= h {
            continue;
        }
        // Sobel; rows grow downwards so flip gy into +y-up.
        let gx = (at(c + 1, r - 1) + 2.0 * at(c + 1, r) + at(c + 1, r + 1))
            - (at(c - 1, r - 1) + 2.0 * at(c - 1, r) + at(c - 1, r + 1));
        let gy = (at(c - 1, r - 1) + 2.0 * at(c, r - 1) + at(c + 1, r - 1))
            - (at(c - 1, r + 1) + 2.0 * at(c, r + 1) + at(c + 1, r + 1));
        let mag = math::hypot(gx, gy);
        if mag < MIN_GRADIENT {
            continue;
        }
        let mut theta = math::atan2(gy, gx);
        if theta < 0.0 {
            theta += PI;
        }
        if theta >= PI {
            theta -= PI;
        }
        let bin = ((theta / PI * ORIENTATION_BINS as f64) as usize).min(ORIENTATION_BINS - 1);
        hist[bin] += mag;
    }
    let total: f64 = hist.iter().sum();
    let directionality = if total <= 0.0 {
        0.0
    } else {
        let entropy: f64 = hist
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| {
                let p = v / total;
                -p * math::ln(p)
            })
            .sum();
        (1.0 - entropy / math::ln(ORIENTATION_BINS as f64)).clamp(0.0, 1.0)
    };

    Texture::new(coarseness, contrast, directionality)
}

pub const DEFAULT_SHAPE_SAMPLES: usize = 64;
const MIN_SHAPE_SAMPLES: usize = 8;
const START_TOLERANCE: f64 = 1e-9;

/// Turning function sampled at `N` equal arc-length steps. Sample `i` sits
/// at arc fraction `i / N` and holds the cumulative tangent angle (radians)
/// of the chord leaving that sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDescriptor {
    turning: Vec<f64>,
}

impl ShapeDescriptor {
    pub fn from_polygon(p: &Polygon) -> Result<Self> {
        Self::with_samples(p, DEFAULT_SHAPE_SAMPLES)
    }

    /// Resamples the boundary from a canonical vertex chosen from intrinsic
    /// geometry (turn angles and relative edge lengths), so the result does
    /// not depend on where the vertex list starts, on scale, or on rotation.
    pub fn with_samples(p: &Polygon, n: usize) -> Result<Self> {
        if n < MIN_SHAPE_SAMPLES {
            return Err(Error::Config(format!("shape descriptor needs at least {MIN_SHAPE_SAMPLES} samples")));
        }
        let perimeter = p.perimeter();
        if !perimeter.is_finite() || perimeter <= 0.0 {
            return Err(Error::DegenerateGeometry("boundary has zero length".into()));
        }
        let start = canonical_start(p, perimeter);
        let pts = resample_boundary(p, start, n);
        let mut turning = Vec::with_capacity(n);
        let mut prev_angle = 0.0;
        let mut acc = 0.0;
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let angle = math::atan2(b.y - a.y, b.x - a.x);
            acc = if i == 0 { angle } else { acc + wrap_angle(angle - prev_angle) };
            prev_angle = angle;
            turning.push(acc);
        }
        Ok(Self { turning })
    }

    /// Builds a descriptor from stored cumulative angles.
    pub fn from_turning(turning: Vec<f64>) -> Result<Self> {
        if turning.len() < MIN_SHAPE_SAMPLES || turning.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "shape descriptor needs at least {MIN_SHAPE_SAMPLES} finite samples"
            )));
        }
        Ok(Self { turning })
    }

    pub fn len(&self) -> usize {
        self.turning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turning.is_empty()
    }

    pub fn turning(&self) -> &[f64] {
        &self.turning
    }

    /// `(arc fraction, cumulative angle)` pairs.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.turning.len() as f64;
        self.turning.iter().enumerate().map(move |(i, &t)| (i as f64 / n, t))
    }

    /// Net turning once around the boundary, closing chord included.
    pub fn total_turning(&self) -> f64 {
        let first = self.turning[0];
        let last = self.turning[self.turning.len() - 1];
        (last - first) + wrap_angle(first - last)
    }
}

fn wrap_angle(d: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut d = d - two_pi * math::floor(d / two_pi);
    if d > PI {
        d -= two_pi;
    }
    d
}

/// Index of the vertex whose cyclic sequence of (turn, relative edge length)
/// is lexicographically largest; ties within tolerance keep the lowest index.
fn canonical_start(p: &Polygon, perimeter: f64) -> usize {
    let v = p.vertices();
    let n = v.len();
    let keys: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let prev = v[(i + n - 1) % n];
            let cur = v[i];
            let next = v[(i + 1) % n];
            let a_in = math::atan2(cur.y - prev.y, cur.x - prev.x);
            let a_out = math::atan2(next.y - cur.y, next.x - cur.x);
            (wrap_angle(a_out - a_in), cur.distance(&next) / perimeter)
        })
        .collect();
    let cmp = |x: f64, y: f64| {
        if (x - y).abs() <= START_TOLERANCE {
            core::cmp::Ordering::Equal
        } else if x < y {
            core::cmp::Ordering::Less
        } else {
            core::cmp::Ordering::Greater
        }
    };
    let mut best = 0;
    for cand in 1..n {
        for k in 0..n {
            let a = keys[(cand + k) % n];
            let b = keys[(best + k) % n];
            match cmp(a.0, b.0).then(cmp(a.1, b.1)) {
                core::cmp::Ordering::Greater => {
                    best = cand;
                    break;
                }
                core::cmp::Ordering::Less => break,
                core::cmp::Ordering::Equal => {}
            }
        }
    }
    best
}

/// Mean-centred L2 distance between turning functions, minimised over
/// cyclic shifts of the second argument and normalised by π (clamped to 1).
pub fn shape_distance(a: &ShapeDescriptor, b: &ShapeDescriptor) -> Result<f64> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::Config(format!("shape descriptors differ in sample count: {n} vs {}", b.len())));
    }
    let total_b = b.total_turning();
    let mut best = f64::INFINITY;
    let mut diff = vec![0.0; n];
    for shift in 0..n {
        let mut mean = 0.0;
        for (i, d) in diff.iter_mut().enumerate() {
            let j = i + shift;
            let wrapped = if j >= n { b.turning[j - n] + total_b } else { b.turning[j] };
            *d = a.turning[i] - wrapped;
            mean += *d;
        }
        mean /= n as f64;
        let ss: f64 = diff.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
        if ss < best {
            best = ss;
        }
    }
    Ok((math::sqrt(best.max(0.0)) / PI).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::rect(x0, y0, x1, y1).unwrap()
    }

    /// Cyclic jumps between consecutive samples (closing step included).
    fn jumps(s: &ShapeDescriptor) -> Vec<(usize, f64)> {
        let t = s.turning();
        let n = t.len();
        let mut out = Vec::new();
        for i in 0..n {
            let d = if i + 1 < n { t[i + 1] - t[i] } else { wrap_angle(t[0] - t[n - 1]) };
            if d.abs() > 1e-9 {
                out.push((i + 1, d));
            }
        }
        out
    }

    #[test]
    fn color_distance_examples() {
        let black = Rgb::new(0.0, 0.0, 0.0).unwrap();
        let white = Rgb::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(color_distance(&black, &black), 0.0);
        assert_eq!(color_distance(&black, &white), 1.0);
        let r = Rgb::new(1.0, 0.0, 0.0).unwrap();
        let g = Rgb::new(0.0, 1.0, 0.0).unwrap();
        assert!((color_distance(&r, &g) - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(Rgb::new(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn average_color_uniform_and_split() {
        let red = Raster::from_fn(10, 10, |_, _| [255, 0, 0]).unwrap();
        assert_eq!(average_color(&red, &sq(0.0, 0.0, 10.0, 10.0)).unwrap(), Rgb::new(1.0, 0.0, 0.0).unwrap());

        let split = Raster::from_fn(10, 10, |c, _| if c < 5 { [0, 0, 0] } else { [255, 255, 255] }).unwrap();
        let c = average_color(&split, &sq(0.0, 0.0, 10.0, 10.0)).unwrap().components();
        assert!(c.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn average_color_gradient_matches_summation() {
        let ramp = Raster::from_fn(20, 10, |c, r| [(c * 12) as u8, (r * 20) as u8, 7]).unwrap();
        // Region x in [2, 9], y in [1, 6]: columns 2..9, rows with centres 1.5..5.5 => rows 4..8.
        let mask = sq(2.0, 1.0, 9.0, 6.0);
        let mut sum = [0.0; 3];
        let mut count = 0.0;
        for row in 0..10 {
            for col in 0..20 {
                let (x, y) = (col as f64 + 0.5, 10.0 - row as f64 - 0.5);
                if x > 2.0 && x < 9.0 && y > 1.0 && y < 6.0 {
                    let px = ramp.get(col, row);
                    for k in 0..3 {
                        sum[k] += f64::from(px[k]) / 255.0;
                    }
                    count += 1.0;
                }
            }
        }
        assert_eq!(count, 35.0);
        let got = average_color(&ramp, &mask).unwrap().components();
        for k in 0..3 {
            assert!((got[k] - sum[k] / count).abs() < 1e-12);
        }
    }

    #[test]
    fn average_color_empty_mask() {
        let r = Raster::from_fn(4, 4, |_, _| [1, 2, 3]).unwrap();
        let off = sq(10.0, 10.0, 12.0, 12.0);
        assert!(matches!(average_color(&r, &off), Err(Error::DegenerateRegion(_))));
    }

    #[test]
    fn square_turning_steps() {
        let s = ShapeDescriptor::from_polygon(&sq(0.0, 0.0, 4.0, 4.0)).unwrap();
        assert_eq!(s.len(), 64);
        let j = jumps(&s);
        assert_eq!(j.len(), 4);
        for (k, &(at, d)) in j.iter().enumerate() {
            assert_eq!(at, 16 * (k + 1));
            assert!((d - PI / 2.0).abs() < 1e-12);
        }
        assert!((s.total_turning() - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn l_hexagon_turning_steps() {
        let l = Polygon::from_coords(&[[0.0, 0.0], [4.0, 0.0], [4.0, 2.0], [2.0, 2.0], [2.0, 4.0], [0.0, 4.0]]).unwrap();
        let s = ShapeDescriptor::from_polygon(&l).unwrap();
        let j = jumps(&s);
        let pos = j.iter().filter(|(_, d)| (d - PI / 2.0).abs() < 1e-9).count();
        let neg = j.iter().filter(|(_, d)| (d + PI / 2.0).abs() < 1e-9).count();
        assert_eq!((pos, neg, j.len()), (5, 1, 6));
        assert!((s.total_turning() - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn shape_scale_and_start_invariance() {
        let l = Polygon::from_coords(&[[0.0, 0.0], [4.0, 0.0], [4.0, 2.0], [2.0, 2.0], [2.0, 4.0], [0.0, 4.0]]).unwrap();
        let base = ShapeDescriptor::from_polygon(&l).unwrap();
        assert_eq!(ShapeDescriptor::from_polygon(&l.scale(2.0)).unwrap(), base);
        let rotated_list = Polygon::from_coords(&[[2.0, 2.0], [2.0, 4.0], [0.0, 4.0], [0.0, 0.0], [4.0, 0.0], [4.0, 2.0]]).unwrap();
        assert_eq!(ShapeDescriptor::from_polygon(&rotated_list).unwrap(), base);
    }

    #[test]
    fn shape_distance_examples() {
        let square = sq(0.0, 0.0, 4.0, 4.0);
        let s = ShapeDescriptor::from_polygon(&square).unwrap();
        assert_eq!(shape_distance(&s, &s).unwrap(), 0.0);

        let h = 2.0 * core::f64::consts::SQRT_2;
        let diamond = Polygon::from_coords(&[[0.0, -h], [h, 0.0], [0.0, h], [-h, 0.0]]).unwrap();
        let d = ShapeDescriptor::from_polygon(&diamond).unwrap();
        assert!(shape_distance(&s, &d).unwrap() <= 1e-6);

        let circle: Vec<Point> = (0..64)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 64.0;
                Point::new(libm::cos(t), libm::sin(t))
            })
            .collect();
        let c = ShapeDescriptor::from_polygon(&Polygon::new(circle).unwrap()).unwrap();
        assert!(shape_distance(&s, &c).unwrap() > 0.1);

        let short = ShapeDescriptor::with_samples(&square, 32).unwrap();
        assert!(matches!(shape_distance(&s, &short), Err(Error::Config(_))));
    }

    #[test]
    fn texture_constant_region() {
        let flat = Raster::from_fn(16, 16, |_, _| [90, 90, 90]).unwrap();
        let t = texture_descriptor(&flat, &sq(0.0, 0.0, 16.0, 16.0)).unwrap();
        assert_eq!(t.contrast(), 0.0);
        assert_eq!(t.directionality(), 0.0);
    }

    #[test]
    fn texture_small_region_rejected() {
        let flat = Raster::from_fn(16, 16, |_, _| [90, 90, 90]).unwrap();
        assert!(matches!(texture_descriptor(&flat, &sq(0.0, 0.0, 5.0, 16.0)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn texture_stripes_and_noise() {
        let stripes = Raster::from_fn(32, 32, |c, _| if (c / 2) % 2 == 0 { [0, 0, 0] } else { [255, 255, 255] }).unwrap();
        let t = texture_descriptor(&stripes, &sq(0.0, 0.0, 32.0, 32.0)).unwrap();
        assert!(t.directionality() > 0.95, "{t:?}");
        assert!(t.contrast() > 0.9);

        // xorshift noise, independent of any crate RNG.
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut noise = Vec::new();
        for _ in 0..64 * 64 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let v = (state >> 56) as u8;
            noise.push([v, v, v]);
        }
        let noisy = Raster::new(64, 64, noise).unwrap();
        let t = texture_descriptor(&noisy, &sq(0.0, 0.0, 64.0, 64.0)).unwrap();
        assert!(t.directionality() < 0.05, "{t:?}");
    }
}
