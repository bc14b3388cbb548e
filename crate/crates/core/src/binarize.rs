//! Two-cluster k-means over pixel intensities.

use crate::raster::{BinaryMask, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub max_iters: usize,
    /// Stop once neither centroid moves by this much (intensity units).
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            max_iters: 100,
            tol: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// `true` marks the higher-mean (text) cluster.
    pub mask: BinaryMask,
    pub centroid_text: f64,
    pub centroid_bg: f64,
    pub iterations: usize,
    /// Pixels with intensity strictly above this value are text.
    pub threshold: u8,
    /// Set for constant images, where no split exists.
    pub degenerate: bool,
}

/// Splits intensities into two clusters. Centroids start at the global min
/// and max; a value equidistant from both centroids joins the lower one.
pub fn kmeans2(img: &GrayImage, params: KMeansParams) -> ClusterResult {
    let mut hist = [0u64; 256];
    for &v in img.as_raw() {
        hist[v as usize] += 1;
    }
    let (lo, hi) = img.min_max();
    let (w, h) = img.dims();
    if lo == hi {
        return ClusterResult {
            mask: BinaryMask::new(w, h),
            centroid_text: lo as f64,
            centroid_bg: lo as f64,
            iterations: 0,
            threshold: hi,
            degenerate: true,
        };
    }

    let mut c_lo = lo as f64;
    let mut c_hi = hi as f64;
    // values <= split belong to the low cluster
    let mut split = assign(c_lo, c_hi);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (m_lo, m_hi) = cluster_means(&hist, split);
        let shift = (m_lo - c_lo).abs().max((m_hi - c_hi).abs());
        c_lo = m_lo;
        c_hi = m_hi;
        if shift < params.tol || iterations >= params.max_iters {
            break;
        }
        let next = assign(c_lo, c_hi);
        if next == split {
            break;
        }
        split = next;
    }

    let mask = BinaryMask::from_bits(w, h, img.as_raw().iter().map(|&v| v > split).collect())
        .expect("same dimensions as the input");
    ClusterResult {
        mask,
        centroid_text: c_hi,
        centroid_bg: c_lo,
        iterations,
        threshold: split,
        degenerate: false,
    }
}

/// Largest intensity still nearer (or equal) to `c_lo`.
fn assign(c_lo: f64, c_hi: f64) -> u8 {
    (0u8..=255)
        .rev()
        .find(|&v| (v as f64 - c_lo).abs() <= (v as f64 - c_hi).abs())
        .unwrap_or(0)
}

fn cluster_means(hist: &[u64; 256], split: u8) -> (f64, f64) {
    let (mut n_lo, mut s_lo, mut n_hi, mut s_hi) = (0u64, 0u64, 0u64, 0u64);
    for (v, &n) in hist.iter().enumerate() {
        if v <= split as usize {
            n_lo += n;
            s_lo += n * v as u64;
        } else {
            n_hi += n;
            s_hi += n * v as u64;
        }
    }
    // the global min always lands low and the global max high, so neither is empty
    debug_assert!(n_lo > 0 && n_hi > 0);
    (s_lo as f64 / n_lo as f64, s_hi as f64 / n_hi as f64)
}
