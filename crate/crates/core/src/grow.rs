//! Seeded region growing over the Sobel edge map.
//!
//! Growth works on edge components rather than single pixels: starting from
//! the components under a seed, every edge component within the gap
//! threshold of the absorbed set is pulled in until none is left.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::morphology::{Component, Labeling};
use crate::raster::{BBox, BinaryMask, GrayImage, Point};
use crate::stroke::{sobel, GradientField};

/// How candidate components are restricted during growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionMode {
    /// Only components sharing rows with the seed.
    Horizontal,
    /// Any component, in any direction.
    #[default]
    NearestNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EdgeThreshold {
    /// Otsu's threshold over the magnitude histogram.
    #[default]
    Otsu,
    Fixed(f32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowParams {
    /// Gap threshold as a multiple of the seed height.
    pub spacing_factor: f64,
    pub direction: DirectionMode,
    pub edge_threshold: EdgeThreshold,
}

impl Default for GrowParams {
    fn default() -> Self {
        GrowParams {
            spacing_factor: 1.0,
            direction: DirectionMode::NearestNeighbor,
            edge_threshold: EdgeThreshold::Otsu,
        }
    }
}

impl GrowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing_factor > 0.0 && self.spacing_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spacing factor must be positive, got {}",
                self.spacing_factor
            )));
        }
        Ok(())
    }

    /// Largest chessboard gap bridged when growing from `seed`.
    pub fn gap_threshold(&self, seed: &BBox) -> usize {
        (self.spacing_factor * seed.h as f64).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub mask: BinaryMask,
    /// Magnitude cut actually applied.
    pub threshold: f32,
}

/// Binary edge map: a pixel is an edge when its Sobel magnitude is nonzero
/// and at least the threshold.
pub fn edge_map(enhanced: &GrayImage, threshold: EdgeThreshold) -> Result<EdgeMap> {
    Ok(edge_map_from_gradient(&sobel(enhanced)?, threshold))
}

pub fn edge_map_from_gradient(grad: &GradientField, threshold: EdgeThreshold) -> EdgeMap {
    let (w, h) = grad.dims();
    let cut = match threshold {
        EdgeThreshold::Otsu => otsu_threshold(grad.magnitudes()),
        EdgeThreshold::Fixed(t) => t,
    };
    let bits = grad
        .magnitudes()
        .iter()
        .map(|&m| m > 0.0 && m >= cut)
        .collect();
    EdgeMap {
        mask: BinaryMask::from_bits(w, h, bits).expect("field dimensions are valid"),
        threshold: cut,
    }
}

/// Otsu's method over unit-wide magnitude bins. Returns the lowest magnitude
/// of the upper class.
pub fn otsu_threshold(magnitudes: &[f32]) -> f32 {
    let top = magnitudes.iter().copied().fold(0.0f32, f32::max).floor() as usize;
    let mut hist = vec![0u64; top + 1];
    for &m in magnitudes {
        hist[m.floor() as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &n)| v as f64 * n as f64).sum();
    let (mut w0, mut sum0) = (0u64, 0f64);
    let mut best: Option<(usize, f64)> = None;
    for (k, &n) in hist.iter().enumerate().take(top) {
        w0 += n;
        sum0 += k as f64 * n as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let mu0 = sum0 / w0 as f64;
        let mu1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (mu0 - mu1).powi(2);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((k, between));
        }
    }
    match best {
        Some((k, _)) => (k + 1) as f32,
        // a single occupied bin: nothing to separate
        None => top as f32,
    }
}

/// Labeled edge map shared by every seed of a frame.
#[derive(Debug, Clone)]
pub struct EdgeLayer {
    pub mask: BinaryMask,
    pub labeling: Labeling,
}

impl EdgeLayer {
    pub fn new(mask: BinaryMask) -> Self {
        let labeling = Labeling::new(&mask);
        EdgeLayer { mask, labeling }
    }

    pub fn components(&self) -> &[Component] {
        &self.labeling.components
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextBlock {
    pub bbox: BBox,
    /// Edge component ids, ascending.
    pub member_components: Vec<u32>,
    pub seed_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrownBlock {
    pub block: TextBlock,
    /// The seed touched no edge component; the block is the seed box alone.
    pub isolated: bool,
}

pub fn region_grow(seed: &Component, edges: &EdgeLayer, params: &GrowParams) -> GrownBlock {
    let labeling = &edges.labeling;
    let (w, h) = labeling.dims();
    let n = labeling.components.len();
    let mut absorbed = vec![false; n + 1];
    let mut members = Vec::new();
    for y in seed.bbox.y..seed.bbox.bottom() {
        for x in seed.bbox.x..seed.bbox.right() {
            let l = labeling.label_at(x, y) as usize;
            if l != 0 && !absorbed[l] {
                absorbed[l] = true;
                members.push(l as u32);
            }
        }
    }
    if members.is_empty() {
        return GrownBlock {
            block: TextBlock {
                bbox: seed.bbox,
                member_components: Vec::new(),
                seed_id: seed.id,
            },
            isolated: true,
        };
    }

    let gap = params.gap_threshold(&seed.bbox);
    let band = (seed.bbox.y, seed.bbox.bottom());
    let qualifies = |c: &Component| match params.direction {
        DirectionMode::NearestNeighbor => true,
        DirectionMode::Horizontal => c.bbox.y < band.1 && c.bbox.bottom() > band.0,
    };

    let mut bbox = bound(labeling, &members);
    let mut dist = Vec::new();
    let mut queue = VecDeque::new();
    loop {
        // absorbing in nearest-first order or all at once yields the same
        // closure, so each pass takes every component within the gap
        let window = bbox.expand(gap, w, h);
        dist.clear();
        dist.resize(window.area(), u32::MAX);
        queue.clear();
        let local = |p: Point| (p.y - window.y) * window.w + (p.x - window.x);
        for &id in &members {
            for &p in &labeling.component(id).expect("valid member id").pixels {
                let i = local(p);
                if dist[i] != 0 {
                    dist[i] = 0;
                    queue.push_back(p);
                }
            }
        }
        let mut found = Vec::new();
        while let Some(p) = queue.pop_front() {
            let d = dist[local(p)];
            if d as usize >= gap {
                continue;
            }
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let Some(q) = p.offset(dx, dy, w, h) else {
                        continue;
                    };
                    if !window.contains(q) {
                        continue;
                    }
                    let j = local(q);
                    if dist[j] != u32::MAX {
                        continue;
                    }
                    dist[j] = d + 1;
                    queue.push_back(q);
                    let l = labeling.label_at(q.x, q.y) as usize;
                    if l != 0 && !absorbed[l] {
                        let c = &labeling.components[l - 1];
                        if qualifies(c) {
                            absorbed[l] = true;
                            found.push(l as u32);
                        }
                    }
                }
            }
        }
        if found.is_empty() {
            break;
        }
        for &id in &found {
            bbox = bbox.union(&labeling.component(id).expect("valid id").bbox);
        }
        members.extend_from_slice(&found);
    }
    members.sort_unstable();
    GrownBlock {
        block: TextBlock {
            bbox,
            member_components: members,
            seed_id: seed.id,
        },
        isolated: false,
    }
}

fn bound(labeling: &Labeling, ids: &[u32]) -> BBox {
    ids.iter()
        .map(|&id| labeling.component(id).expect("valid id").bbox)
        .reduce(|a, b| a.union(&b))
        .expect("at least one id")
}

/// Block list plus the seeds that found no edge component.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Segmentation {
    pub blocks: Vec<TextBlock>,
    pub isolated_seeds: Vec<u32>,
}

/// Grows every representative, merges blocks overlapping by more than half
/// of the smaller one, and sorts top-to-bottom then left-to-right.
pub fn segment(reps: &[Component], edges: &EdgeLayer, params: &GrowParams) -> Vec<TextBlock> {
    segment_detailed(reps, edges, params).blocks
}

pub fn segment_detailed(
    reps: &[Component],
    edges: &EdgeLayer,
    params: &GrowParams,
) -> Segmentation {
    let mut isolated_seeds = Vec::new();
    let mut blocks: Vec<TextBlock> = reps
        .iter()
        .map(|seed| {
            let grown = region_grow(seed, edges, params);
            if grown.isolated {
                isolated_seeds.push(seed.id);
            }
            grown.block
        })
        .collect();
    merge_overlapping(&mut blocks);
    blocks.sort_by_key(|b| (b.bbox.y, b.bbox.x, b.bbox.h, b.bbox.w));
    Segmentation {
        blocks,
        isolated_seeds,
    }
}

/// True when the shared area exceeds half of the smaller box.
pub fn overlaps_heavily(a: &BBox, b: &BBox) -> bool {
    2 * a.intersection_area(b) > a.area().min(b.area())
}

fn merge_overlapping(blocks: &mut Vec<TextBlock>) {
    'outer: loop {
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if overlaps_heavily(&blocks[i].bbox, &blocks[j].bbox) {
                    let other = blocks.remove(j);
                    let keep = &mut blocks[i];
                    keep.bbox = keep.bbox.union(&other.bbox);
                    keep.member_components.extend(other.member_components);
                    keep.member_components.sort_unstable();
                    keep.member_components.dedup();
                    keep.seed_id = keep.seed_id.min(other.seed_id);
                    continue 'outer;
                }
            }
        }
        break;
    }
}
