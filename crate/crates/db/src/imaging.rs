//! PNG rasters and thumbnails.

use std::io::Cursor;
use std::path::Path;

use image::imageops::FilterType;
use image::{ImageFormat, Rgb as Px, RgbImage};

use pir_core::model::BiList;
use pir_core::{Point, Raster};

use crate::error::{DbError, Result};

pub const DEFAULT_THUMBNAIL_SIZE: u32 = 128;

pub fn decode_png(bytes: &[u8]) -> Result<Raster> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| DbError::Image(e.to_string()))?;
    from_image(&img.to_rgb8())
}

pub fn load_png(path: &Path) -> Result<Raster> {
    let bytes = std::fs::read(path).map_err(|e| DbError::io(path, e))?;
    decode_png(&bytes).map_err(|e| DbError::Image(format!("{}: {e}", path.display())))
}

pub fn from_image(img: &RgbImage) -> Result<Raster> {
    let (w, h) = img.dimensions();
    Ok(Raster::new(w as usize, h as usize, img.pixels().map(|p| p.0).collect())?)
}

pub fn to_image(raster: &Raster) -> RgbImage {
    RgbImage::from_fn(raster.width() as u32, raster.height() as u32, |x, y| Px(raster.get(x as usize, y as usize)))
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(|e| DbError::Image(e.to_string()))?;
    Ok(out.into_inner())
}

/// Dimensions after fitting `(w, h)` into a `max_dim` square; never enlarges.
pub fn fit(w: u32, h: u32, max_dim: u32) -> (u32, u32) {
    let longest = w.max(h);
    if longest <= max_dim {
        return (w, h);
    }
    let scale = f64::from(max_dim) / f64::from(longest);
    let side = |v: u32| ((f64::from(v) * scale).round() as u32).clamp(1, max_dim);
    (side(w), side(h))
}

/// Downscaled raster when one is given, otherwise a schematic drawing of
/// the objects.
pub fn make_thumbnail(raster: Option<&Raster>, bilist: &BiList, max_dim: u32) -> RgbImage {
    match raster {
        Some(r) => {
            let img = to_image(r);
            let (w, h) = fit(img.width(), img.height(), max_dim);
            if (w, h) == img.dimensions() {
                img
            } else {
                image::imageops::resize(&img, w, h, FilterType::Triangle)
            }
        }
        None => schematic(bilist, max_dim.max(8)),
    }
}

const WHITE: [u8; 3] = [255, 255, 255];
const GRAY: [u8; 3] = [160, 160, 160];

fn schematic(bilist: &BiList, size: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(size, size, Px(WHITE));
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for o in bilist.objects() {
        let (a, b) = o.boundary.bounds();
        lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    let margin = 4.0;
    let usable = f64::from(size) - 2.0 * margin;
    let scale = usable / (hi.x - lo.x).max(hi.y - lo.y);
    // Centre the drawing; image rows grow downwards.
    let ox = margin + (usable - (hi.x - lo.x) * scale) / 2.0;
    let oy = margin + (usable - (hi.y - lo.y) * scale) / 2.0;
    let to_model = |col: u32, row: u32| {
        let px = f64::from(col) + 0.5;
        let py = f64::from(size - row) - 0.5;
        Point::new(lo.x + (px - ox) / scale, lo.y + (py - oy) / scale)
    };
    let to_pixel = |p: Point| ((ox + (p.x - lo.x) * scale) as i64, (f64::from(size) - oy - (p.y - lo.y) * scale) as i64);

    // Larger objects first so small ones stay visible.
    let mut order: Vec<usize> = (0..bilist.len()).collect();
    order.sort_by(|&a, &b| bilist.objects()[b].boundary.area().total_cmp(&bilist.objects()[a].boundary.area()));
    for &k in &order {
        let o = &bilist.objects()[k];
        let fill = o.color.map_or(GRAY, |c| c.to_u8());
        let outline = fill.map(|v| v / 2);
        let (a, b) = o.boundary.bounds();
        let ((c0, r1), (c1, r0)) = (to_pixel(a), to_pixel(b));
        let clamp = |v: i64| v.clamp(0, i64::from(size) - 1) as u32;
        for row in clamp(r0 - 1)..=clamp(r1 + 1) {
            for col in clamp(c0 - 1)..=clamp(c1 + 1) {
                if o.boundary.contains_point(to_model(col, row)) {
                    img.put_pixel(col, row, Px(fill));
                }
            }
        }
        for (a, b) in o.boundary.vertices().iter().zip(o.boundary.vertices().iter().cycle().skip(1)) {
            draw_line(&mut img, to_pixel(*a), to_pixel(*b), outline);
        }
    }
    for &k in &order {
        let o = &bilist.objects()[k];
        let (x, y) = to_pixel(o.boundary.centroid());
        let ink = o.color.map_or([0, 0, 0], |c| if c.components().iter().sum::<f64>() > 1.5 { [0, 0, 0] } else { [255, 255, 255] });
        draw_label(&mut img, &o.name, x, y, ink);
    }
    img
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, Px(c));
    }
}

fn draw_line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: [u8; 3]) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        put(img, x, y, c);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// 3×5 glyphs, one row per 3-bit group, top row first.
fn glyph(c: char) -> [u8; 5] {
    match c.to_ascii_uppercase() {
        'A' => [0b010, 0b101, 0b111, 0b101, 0b101],
        'B' => [0b110, 0b101, 0b110, 0b101, 0b110],
        'C' => [0b011, 0b100, 0b100, 0b100, 0b011],
        'D' => [0b110, 0b101, 0b101, 0b101, 0b110],
        'E' => [0b111, 0b100, 0b110, 0b100, 0b111],
        'F' => [0b111, 0b100, 0b110, 0b100, 0b100],
        'G' => [0b011, 0b100, 0b101, 0b101, 0b011],
        'H' => [0b101, 0b101, 0b111, 0b101, 0b101],
        'I' => [0b111, 0b010, 0b010, 0b010, 0b111],
        'J' => [0b001, 0b001, 0b001, 0b101, 0b010],
        'K' => [0b101, 0b101, 0b110, 0b101, 0b101],
        'L' => [0b100, 0b100, 0b100, 0b100, 0b111],
        'M' => [0b101, 0b111, 0b111, 0b101, 0b101],
        'N' => [0b110, 0b101, 0b101, 0b101, 0b101],
        'O' => [0b010, 0b101, 0b101, 0b101, 0b010],
        'P' => [0b110, 0b101, 0b110, 0b100, 0b100],
        'Q' => [0b010, 0b101, 0b101, 0b110, 0b011],
        'R' => [0b110, 0b101, 0b110, 0b101, 0b101],
        'S' => [0b011, 0b100, 0b010, 0b001, 0b110],
        'T' => [0b111, 0b010, 0b010, 0b010, 0b010],
        'U' => [0b101, 0b101, 0b101, 0b101, 0b111],
        'V' => [0b101, 0b101, 0b101, 0b101, 0b010],
        'W' => [0b101, 0b101, 0b111, 0b111, 0b101],
        'X' => [0b101, 0b101, 0b010, 0b101, 0b101],
        'Y' => [0b101, 0b101, 0b010, 0b010, 0b010],
        'Z' => [0b111, 0b001, 0b010, 0b100, 0b111],
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b110, 0b001, 0b010, 0b100, 0b111],
        '3' => [0b110, 0b001, 0b010, 0b001, 0b110],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b110, 0b001, 0b110],
        '6' => [0b011, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b110],
        '-' | '_' => [0, 0, 0b111, 0, 0],
        ' ' => [0; 5],
        _ => [0b111, 0b101, 0b101, 0b101, 0b111],
    }
}

/// Draws up to six characters centred on `(cx, cy)`.
fn draw_label(img: &mut RgbImage, text: &str, cx: i64, cy: i64, ink: [u8; 3]) {
    let chars: Vec<char> = text.chars().take(6).collect();
    let width = chars.len() as i64 * 4 - 1;
    let (x0, y0) = (cx - width / 2, cy - 2);
    for (k, c) in chars.iter().enumerate() {
        for (row, bits) in glyph(*c).iter().enumerate() {
            for col in 0..3 {
                if bits & (0b100 >> col) != 0 {
                    put(img, x0 + k as i64 * 4 + col, y0 + row as i64, ink);
                }
            }
        }
    }
}
