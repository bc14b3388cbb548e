#![allow(dead_code)]

use std::collections::BTreeMap;

use textseg::morphology::{label_components, Component};
use textseg::raster::{BinaryMask, GrayImage, Point};

pub const FG: u8 = 220;
pub const BG: u8 = 30;

/// Direct 3x3 Sobel in f64 with clamped borders.
pub fn oracle_sobel(img: &GrayImage) -> Vec<(f64, f64)> {
    let (w, h) = img.dims();
    let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    let ky = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..3i64 {
                for i in 0..3i64 {
                    let sx = (x + i - 1).clamp(0, w as i64 - 1) as usize;
                    let sy = (y + j - 1).clamp(0, h as i64 - 1) as usize;
                    let v = img.get(sx, sy) as f64;
                    gx += kx[j as usize][i as usize] * v;
                    gy += ky[j as usize][i as usize] * v;
                }
            }
            out.push((gx, gy));
        }
    }
    out
}

/// The compass step whose unit direction best aligns with the gradient.
pub fn oracle_step(gx: f64, gy: f64) -> (i64, i64) {
    let steps = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
    *steps
        .iter()
        .max_by(|a, b| {
            let da = (gx * a.0 as f64 + gy * a.1 as f64) / ((a.0 * a.0 + a.1 * a.1) as f64).sqrt();
            let db = (gx * b.0 as f64 + gy * b.1 as f64) / ((b.0 * b.0 + b.1 * b.1) as f64).sqrt();
            da.total_cmp(&db)
        })
        .unwrap()
}

/// Counts consecutive foreground pixels from `p` along its gradient step.
pub fn oracle_width(
    p: Point,
    grads: &[(f64, f64)],
    mask: &BinaryMask,
    max_ray: usize,
) -> Option<(u32, Point)> {
    let (w, h) = mask.dims();
    let (gx, gy) = grads[p.y * w + p.x];
    if !mask.get(p.x, p.y) || (gx == 0.0 && gy == 0.0) {
        return None;
    }
    let (dx, dy) = oracle_step(gx, gy);
    let mut n = 0i64;
    loop {
        let x = p.x as i64 + (n + 1) * dx;
        let y = p.y as i64 + (n + 1) * dy;
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 || !mask.get(x as usize, y as usize) {
            break;
        }
        n += 1;
    }
    let width = n as usize + 1;
    if width > max_ray {
        return None;
    }
    let end = Point::new((p.x as i64 + n * dx) as usize, (p.y as i64 + n * dy) as usize);
    Some((width as u32, end))
}

/// Most frequent value, smallest on ties.
pub fn oracle_mode(values: &[u32]) -> Option<u32> {
    let mut counts = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|&(_, n)| n == best).map(|(v, _)| v)
}

pub fn mask_image(mask: &BinaryMask) -> GrayImage {
    let data = mask.as_bits().iter().map(|&b| if b { FG } else { BG }).collect();
    GrayImage::from_raw(mask.width(), mask.height(), data).unwrap()
}

pub fn mask_from_fn(w: usize, h: usize, f: impl Fn(i64, i64) -> bool) -> BinaryMask {
    let bits = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| f(x as i64, y as i64))
        .collect();
    BinaryMask::from_bits(w, h, bits).unwrap()
}

pub fn single_component(mask: &BinaryMask) -> Component {
    let mut cs = label_components(mask);
    assert_eq!(cs.len(), 1, "shape must be one component");
    cs.pop().unwrap()
}

/// Bar of stroke `width`: 0 and 90 degrees are axis-aligned rectangles, 45
/// and 135 degrees are diagonal bands `width` pixels thick along an axis.
pub fn bar(width: i64, orientation: u32) -> BinaryMask {
    let (n, len) = (48usize, 24i64);
    let c = n as i64 / 2;
    mask_from_fn(n, n, |x, y| {
        let (u, v) = (x - c, y - c);
        match orientation {
            0 => (0..width).contains(&(v + width / 2)) && u.abs() <= len / 2,
            90 => (0..width).contains(&(u + width / 2)) && v.abs() <= len / 2,
            45 => (0..width).contains(&(u - v + width / 2)) && (u + v).abs() <= len / 2,
            135 => (0..width).contains(&(u + v + width / 2)) && (u - v).abs() <= len / 2,
            _ => unreachable!(),
        }
    })
}

/// Closed rectangular ring with wall thickness `width`, unequal sides, turned
/// to the given orientation. Diagonal orientations measure the wall in
/// `u + v` / `u - v` units.
pub fn ring(width: i64, orientation: u32) -> BinaryMask {
    let n = 72usize;
    let c = n as i64 / 2;
    mask_from_fn(n, n, |x, y| {
        let (u, v) = (x - c, y - c);
        let (p, q, a, b) = match orientation {
            0 => (u, v, 18, 12),
            90 => (v, u, 18, 12),
            45 => (u + v, u - v, 30, 20),
            135 => (u - v, u + v, 30, 20),
            _ => unreachable!(),
        };
        let outer = p.abs() <= a && q.abs() <= b;
        let inner = p.abs() <= a - width && q.abs() <= b - width;
        outer && !inner
    })
}

/// Horizontal stroke whose thickness grows linearly from 2 to 14 pixels:
/// flat top edge, sloped bottom edge.
pub fn wedge() -> BinaryMask {
    let (n, len) = (48i64, 25i64);
    let x0 = 10;
    mask_from_fn(n as usize, n as usize, |x, y| {
        let i = x - x0;
        if !(0..len).contains(&i) {
            return false;
        }
        let thickness = 2 + (12 * i + (len - 1) / 2) / (len - 1);
        (10..10 + thickness).contains(&y)
    })
}
