//! Max-Min grouping of color channels and of neighbourhood values.
//!
//! Both steps use the same rule: given the extremes of a small value group,
//! every member is snapped to whichever extreme it is closer to, ties going
//! to the maximum.

use crate::error::{Error, Result};
use crate::raster::{GrayImage, RgbFrame};

/// Snaps `v` to `hi` or `lo`; equidistant values go to `hi`.
#[inline]
fn snap(v: u8, lo: u8, hi: u8) -> u8 {
    if hi - v <= v - lo {
        hi
    } else {
        lo
    }
}

/// Fuses R, G, B into one plane. Per pixel the median channel is compared
/// against the max and min channels, and the pixel takes the extreme the
/// median sits closer to.
pub fn channel_fuse(frame: &RgbFrame) -> GrayImage {
    let data = frame
        .pixels()
        .map(|[r, g, b]| {
            let hi = r.max(g).max(b);
            let lo = r.min(g).min(b);
            let mid = r as u16 + g as u16 + b as u16 - hi as u16 - lo as u16;
            snap(mid as u8, lo, hi)
        })
        .collect();
    GrayImage::from_raw(frame.width(), frame.height(), data)
        .expect("dimensions carried over from a valid frame")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharpenParams {
    /// Odd window side, at least 3.
    pub window: usize,
    /// Number of full raster sweeps.
    pub passes: usize,
}

impl Default for SharpenParams {
    fn default() -> Self {
        SharpenParams {
            window: 3,
            passes: 1,
        }
    }
}

impl SharpenParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "window side must be odd and >= 3, got {}",
                self.window
            )));
        }
        if self.passes == 0 {
            return Err(Error::InvalidParameter("passes must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sharpened {
    pub image: GrayImage,
    /// Set when the image is smaller than the window and was returned as is.
    pub undersized: bool,
}

/// Position of a window's top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPos {
    pub x: usize,
    pub y: usize,
}

/// Sharpens in place: a `window`-sided square sweeps the image in raster
/// order, and every pixel under it is snapped to the window's current
/// max or min. Writes are visible to later window positions.
pub fn sharpen(img: &GrayImage, params: SharpenParams) -> Result<Sharpened> {
    sharpen_with(img, params, |_, _| {})
}

/// As [`sharpen`], calling `observe` with the working image after every
/// window position.
pub fn sharpen_with<F>(img: &GrayImage, params: SharpenParams, mut observe: F) -> Result<Sharpened>
where
    F: FnMut(WindowPos, &GrayImage),
{
    params.validate()?;
    let mut work = img.clone();
    let (w, h) = work.dims();
    let win = params.window;
    if w < win || h < win {
        return Ok(Sharpened {
            image: work,
            undersized: true,
        });
    }
    for _ in 0..params.passes {
        for y in 0..=h - win {
            for x in 0..=w - win {
                sweep_window(&mut work, x, y, win);
                observe(WindowPos { x, y }, &work);
            }
        }
    }
    Ok(Sharpened {
        image: work,
        undersized: false,
    })
}

fn sweep_window(work: &mut GrayImage, x0: usize, y0: usize, win: usize) {
    let w = work.width();
    let data = work.as_raw_mut();
    let (mut lo, mut hi) = (u8::MAX, u8::MIN);
    for y in y0..y0 + win {
        for &v in &data[y * w + x0..y * w + x0 + win] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo == hi {
        return;
    }
    for y in y0..y0 + win {
        for v in &mut data[y * w + x0..y * w + x0 + win] {
            *v = snap(*v, lo, hi);
        }
    }
}

/// Every intermediate state of a sharpen run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpenTrace {
    pub snapshots: Vec<GrayImage>,
    pub positions: Vec<WindowPos>,
    pub undersized: bool,
}

impl SharpenTrace {
    pub fn last(&self) -> Option<&GrayImage> {
        self.snapshots.last()
    }
}

pub fn sharpen_trace(img: &GrayImage, params: SharpenParams) -> Result<SharpenTrace> {
    let mut snapshots = Vec::new();
    let mut positions = Vec::new();
    let out = sharpen_with(img, params, |pos, state| {
        positions.push(pos);
        snapshots.push(state.clone());
    })?;
    Ok(SharpenTrace {
        snapshots,
        positions,
        undersized: out.undersized,
    })
}
