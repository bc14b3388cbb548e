//! Gradient field, stroke-width rays and the two-sided dominant-width
//! symmetry check that promotes text candidates to text representatives.

use std::collections::BTreeMap;
use std::f32::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::morphology::{CandidateSet, Component, Labeling};
use crate::raster::{BinaryMask, GrayImage, Point};

/// Share of a component's gradient magnitudes that sits below the sampling
/// floor.
pub const SAMPLE_FLOOR_PERCENTILE: f64 = 0.25;

/// Signed 3x3 Sobel responses with per-pixel magnitude and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    gx: Vec<i32>,
    gy: Vec<i32>,
    magnitude: Vec<f32>,
    direction: Vec<f32>,
}

impl GradientField {
    /// Builds a field from precomputed responses; magnitude and direction
    /// are derived.
    pub fn from_responses(width: usize, height: usize, gx: Vec<i32>, gy: Vec<i32>) -> Result<Self> {
        if gx.len() != width * height || gy.len() != width * height {
            return Err(Error::InvalidParameter(
                "gradient planes do not match the field size".into(),
            ));
        }
        let magnitude = gx
            .iter()
            .zip(&gy)
            .map(|(&x, &y)| ((x as f32).powi(2) + (y as f32).powi(2)).sqrt())
            .collect();
        let direction = gx
            .iter()
            .zip(&gy)
            .map(|(&x, &y)| {
                let a = (y as f32).atan2(x as f32);
                if a <= -PI {
                    PI
                } else {
                    a
                }
            })
            .collect();
        Ok(GradientField {
            width,
            height,
            gx,
            gy,
            magnitude,
            direction,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn gx(&self) -> &[i32] {
        &self.gx
    }

    pub fn gy(&self) -> &[i32] {
        &self.gy
    }

    pub fn magnitudes(&self) -> &[f32] {
        &self.magnitude
    }

    #[inline]
    pub fn magnitude(&self, p: Point) -> f32 {
        self.magnitude[p.y * self.width + p.x]
    }

    /// Radians in `(-pi, pi]`, measured with y pointing down.
    #[inline]
    pub fn direction(&self, p: Point) -> f32 {
        self.direction[p.y * self.width + p.x]
    }

    /// Magnitude rendered as a gray image, scaled so the strongest response
    /// maps to 255.
    pub fn magnitude_image(&self) -> GrayImage {
        let peak = self.magnitude.iter().copied().fold(0.0f32, f32::max);
        let data = self
            .magnitude
            .iter()
            .map(|&m| {
                if peak > 0.0 {
                    (m / peak * 255.0).round() as u8
                } else {
                    0
                }
            })
            .collect();
        GrayImage::from_raw(self.width, self.height, data).expect("field dimensions are valid")
    }
}

/// Horizontal and vertical 3x3 Sobel masks with replicated-edge padding.
pub fn sobel(img: &GrayImage) -> Result<GradientField> {
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min: 3,
        });
    }
    let px = |x: isize, y: isize| -> i32 {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        img.get(x, y) as i32
    };
    let mut gx = vec![0i32; w * h];
    let mut gy = vec![0i32; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (a, b, c) = (px(x - 1, y - 1), px(x, y - 1), px(x + 1, y - 1));
            let (d, f) = (px(x - 1, y), px(x + 1, y));
            let (g, hh, i) = (px(x - 1, y + 1), px(x, y + 1), px(x + 1, y + 1));
            let k = y as usize * w + x as usize;
            gx[k] = (c + 2 * f + i) - (a + 2 * d + g);
            gy[k] = (g + 2 * hh + i) - (a + 2 * b + c);
        }
    }
    GradientField::from_responses(w, h, gx, gy)
}

/// Which way a stroke ray travels relative to the local gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RayMode {
    /// Along the gradient direction, crossing the stroke.
    #[default]
    AlongGradient,
    /// Rotated a quarter turn from the gradient direction.
    Perpendicular,
}

/// Unit chessboard steps, indexed by direction octant counter-clockwise from
/// +x in image coordinates (y down).
const COMPASS: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Quantizes an angle to the nearest of the 8 compass steps.
pub fn compass_step(angle: f32, mode: RayMode) -> (isize, isize) {
    let octant = (angle / FRAC_PI_4).round() as i32;
    let octant = match mode {
        RayMode::AlongGradient => octant,
        RayMode::Perpendicular => octant + 2,
    };
    COMPASS[octant.rem_euclid(8) as usize]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrokeSample {
    pub origin: Point,
    pub reached: Point,
    /// Foreground pixels on the ray, origin and reached pixel included.
    pub width: u32,
}

/// Marches one pixel at a time from `p` until the next step would leave the
/// foreground or the image. Returns `None` when `p` is background, has no
/// gradient, or the ray grows longer than `max_ray`.
pub fn stroke_width(
    p: Point,
    grad: &GradientField,
    mask: &BinaryMask,
    max_ray: usize,
    mode: RayMode,
) -> Option<StrokeSample> {
    if !mask.get(p.x, p.y) || grad.magnitude(p) <= 0.0 {
        return None;
    }
    let (dx, dy) = compass_step(grad.direction(p), mode);
    let (w, h) = mask.dims();
    let mut cur = p;
    let mut width = 1usize;
    while let Some(next) = cur.offset(dx, dy, w, h) {
        if !mask.get(next.x, next.y) {
            break;
        }
        cur = next;
        width += 1;
        if width > max_ray {
            return None;
        }
    }
    if width > max_ray {
        return None;
    }
    Some(StrokeSample {
        origin: p,
        reached: cur,
        width: width as u32,
    })
}

/// Unit-width histogram of stroke widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidthHistogram {
    pub bins: BTreeMap<u32, usize>,
    /// Modal width; ties go to the smaller width.
    pub dominant: u32,
}

impl WidthHistogram {
    pub fn from_widths(widths: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut bins = BTreeMap::new();
        for w in widths {
            *bins.entry(w).or_insert(0usize) += 1;
        }
        // BTreeMap iterates in ascending width, so the first maximum wins
        let dominant = bins
            .iter()
            .fold(None::<(u32, usize)>, |best, (&w, &n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((w, n)),
            })
            .map(|(w, _)| w)
            .ok_or(Error::Empty("stroke width samples"))?;
        Ok(WidthHistogram { bins, dominant })
    }

    pub fn total(&self) -> usize {
        self.bins.values().sum()
    }
}

pub fn dominant_width(samples: &[StrokeSample]) -> Result<WidthHistogram> {
    WidthHistogram::from_widths(samples.iter().map(|s| s.width))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrokeParams {
    /// Largest accepted `|D1 - D2|`.
    pub tol: u32,
    /// Longest ray; `None` means a quarter of the larger image side.
    pub max_ray: Option<usize>,
    pub mode: RayMode,
}

impl Default for StrokeParams {
    fn default() -> Self {
        StrokeParams {
            tol: 0,
            max_ray: None,
            mode: RayMode::AlongGradient,
        }
    }
}

impl StrokeParams {
    pub fn max_ray_for(&self, width: usize, height: usize) -> usize {
        self.max_ray.unwrap_or(width.max(height) / 4).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryVerdict {
    pub origin_samples: Vec<StrokeSample>,
    pub reached_samples: Vec<StrokeSample>,
    /// Dominant width over rays cast from the component's pixels.
    pub d1: Option<u32>,
    /// Dominant width over rays cast back from the reached pixels.
    pub d2: Option<u32>,
    pub passed: bool,
}

impl SymmetryVerdict {
    /// True when either side produced no usable ray.
    pub fn starved(&self) -> bool {
        self.d1.is_none() || self.d2.is_none()
    }
}

/// Pixels of `c` whose gradient magnitude is positive and not below the
/// component's sampling floor.
pub fn sample_origins(c: &Component, grad: &GradientField) -> Vec<Point> {
    let mut mags: Vec<f32> = c.pixels.iter().map(|&p| grad.magnitude(p)).collect();
    if mags.is_empty() {
        return Vec::new();
    }
    mags.sort_by(f32::total_cmp);
    let rank = ((mags.len() as f64 * SAMPLE_FLOOR_PERCENTILE).ceil() as usize).max(1) - 1;
    let floor = mags[rank];
    c.pixels
        .iter()
        .copied()
        .filter(|&p| {
            let m = grad.magnitude(p);
            m > 0.0 && m >= floor
        })
        .collect()
}

/// Compares the dominant stroke width seen from the component's pixels with
/// the one seen from the pixels those rays reach.
pub fn symmetry_verify(
    c: &Component,
    grad: &GradientField,
    mask: &BinaryMask,
    params: &StrokeParams,
) -> SymmetryVerdict {
    let (w, h) = mask.dims();
    let max_ray = params.max_ray_for(w, h);
    let origin_samples: Vec<StrokeSample> = sample_origins(c, grad)
        .into_iter()
        .filter_map(|p| stroke_width(p, grad, mask, max_ray, params.mode))
        .collect();
    let reached_samples: Vec<StrokeSample> = origin_samples
        .iter()
        .filter_map(|s| stroke_width(s.reached, grad, mask, max_ray, params.mode))
        .collect();
    let d1 = dominant_width(&origin_samples).ok().map(|hst| hst.dominant);
    let d2 = dominant_width(&reached_samples).ok().map(|hst| hst.dominant);
    let passed = match (d1, d2) {
        (Some(a), Some(b)) => a.abs_diff(b) <= params.tol,
        _ => false,
    };
    SymmetryVerdict {
        origin_samples,
        reached_samples,
        d1,
        d2,
        passed,
    }
}

/// Outcome of verifying one skeleton candidate.
#[derive(Debug, Clone)]
pub struct CandidateVerdict {
    pub candidate: Component,
    /// The text-cluster component underneath the candidate's skeleton; rays
    /// are cast from its pixels.
    pub support: Component,
    pub verdict: SymmetryVerdict,
}

/// Runs the symmetry check on every candidate. Skeleton pixels sit on the
/// stroke medial axis where the gradient vanishes, so rays start from the
/// text-cluster region that carries each skeleton.
pub fn verify_candidates(
    cands: &CandidateSet,
    enhanced: &GrayImage,
    params: &StrokeParams,
) -> Result<Vec<CandidateVerdict>> {
    let grad = sobel(enhanced)?;
    verify_with_gradient(cands, &grad, params)
}

pub fn verify_with_gradient(
    cands: &CandidateSet,
    grad: &GradientField,
    params: &StrokeParams,
) -> Result<Vec<CandidateVerdict>> {
    if grad.dims() != cands.mask.dims() {
        return Err(Error::InvalidParameter(
            "gradient field and text mask differ in size".into(),
        ));
    }
    let regions = Labeling::new(&cands.mask);
    let mut out = Vec::with_capacity(cands.candidates.len());
    for cand in &cands.candidates {
        let Some(&first) = cand.pixels.first() else {
            continue;
        };
        let support = regions
            .component(regions.label_at(first.x, first.y))
            .cloned()
            .ok_or_else(|| {
                Error::InvalidParameter("candidate skeleton lies outside the text mask".into())
            })?;
        let verdict = symmetry_verify(&support, grad, &cands.mask, params);
        out.push(CandidateVerdict {
            candidate: cand.clone(),
            support,
            verdict,
        });
    }
    Ok(out)
}

/// Candidates whose two dominant widths agree within `params.tol`.
pub fn text_representatives(
    cands: &CandidateSet,
    enhanced: &GrayImage,
    params: &StrokeParams,
) -> Result<Vec<Component>> {
    Ok(verify_candidates(cands, enhanced, params)?
        .into_iter()
        .filter(|v| v.verdict.passed)
        .map(|v| v.candidate)
        .collect())
}

/// `id,d1,d2,pass` rows, one per candidate.
pub fn verdicts_csv(verdicts: &[CandidateVerdict]) -> String {
    let mut out = String::from("id,d1,d2,pass\n");
    let fmt = |d: Option<u32>| d.map_or_else(String::new, |v| v.to_string());
    for v in verdicts {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            v.candidate.id,
            fmt(v.verdict.d1),
            fmt(v.verdict.d2),
            v.verdict.passed
        );
    }
    out
}
