//! Thinning, connected-component labeling and the closed-contour test that
//! turns the text cluster into text candidates.

use std::collections::VecDeque;

use crate::raster::{BBox, BinaryMask, Point};

/// Smallest component that can enclose a hole.
pub const MIN_CANDIDATE_PIXELS: usize = 4;

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// One 8-connected foreground region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// 1-based label, unique within one labeling.
    pub id: u32,
    /// Pixels in raster order.
    pub pixels: Vec<Point>,
    pub bbox: BBox,
    /// Number of 4-connected background regions the component encloses.
    pub hole_count: usize,
}

impl Component {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Label raster plus the components it indexes. Label 0 is background,
/// label `i` belongs to `components[i - 1]`.
#[derive(Debug, Clone)]
pub struct Labeling {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    pub components: Vec<Component>,
}

impl Labeling {
    pub fn new(mask: &BinaryMask) -> Self {
        let (w, h) = mask.dims();
        let mut labels = vec![0u32; w * h];
        let mut components = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..w * h {
            if !mask.as_bits()[start] || labels[start] != 0 {
                continue;
            }
            let id = components.len() as u32 + 1;
            labels[start] = id;
            queue.push_back(start);
            let mut pixels = Vec::new();
            while let Some(i) = queue.pop_front() {
                let p = Point::new(i % w, i / w);
                pixels.push(p);
                for (dx, dy) in NEIGHBORS_8 {
                    if let Some(q) = p.offset(dx, dy, w, h) {
                        let j = q.y * w + q.x;
                        if mask.as_bits()[j] && labels[j] == 0 {
                            labels[j] = id;
                            queue.push_back(j);
                        }
                    }
                }
            }
            pixels.sort_unstable_by_key(|p| (p.y, p.x));
            let bbox = BBox::from_points(&pixels).expect("component has a seed pixel");
            let hole_count = count_holes(&pixels, bbox);
            components.push(Component {
                id,
                pixels,
                bbox,
                hole_count,
            });
        }
        Labeling {
            width: w,
            height: h,
            labels,
            components,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn component(&self, id: u32) -> Option<&Component> {
        id.checked_sub(1)
            .and_then(|i| self.components.get(i as usize))
    }
}

/// Maximal 8-connected foreground regions, in raster order of their first
/// pixel.
pub fn label_components(mask: &BinaryMask) -> Vec<Component> {
    Labeling::new(mask).components
}

/// Counts background regions enclosed by `pixels`. Background inside the
/// box padded by one pixel is flood-filled from the padding with
/// 4-connectivity (the dual of the 8-connected foreground); each remaining
/// 4-connected background region is a hole.
pub fn count_holes(pixels: &[Point], bbox: BBox) -> usize {
    let (gw, gh) = (bbox.w + 2, bbox.h + 2);
    // 0 = background, 1 = foreground, 2 = visited background
    let mut grid = vec![0u8; gw * gh];
    for p in pixels {
        grid[(p.y - bbox.y + 1) * gw + (p.x - bbox.x + 1)] = 1;
    }
    let mut queue = VecDeque::new();
    let mut fill = |grid: &mut Vec<u8>, start: usize| {
        grid[start] = 2;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % gw, i / gw);
            let mut visit = |j: usize| {
                if grid[j] == 0 {
                    grid[j] = 2;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < gw {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - gw);
            }
            if y + 1 < gh {
                visit(i + gw);
            }
        }
    };
    fill(&mut grid, 0);
    let mut holes = 0;
    for i in 0..grid.len() {
        if grid[i] == 0 {
            holes += 1;
            fill(&mut grid, i);
        }
    }
    holes
}

/// A component qualifies when its contour closes on itself, i.e. it
/// encloses at least one background hole. Components too small to enclose
/// anything are rejected without the fill.
pub fn is_fully_connected(c: &Component) -> bool {
    c.pixels.len() >= MIN_CANDIDATE_PIXELS && c.hole_count >= 1
}

/// Zhang-Suen thinning. Pixels outside the mask count as background.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let pw = w + 2;
    let mut grid = vec![0u8; pw * (h + 2)];
    for p in mask.foreground() {
        grid[(p.y + 1) * pw + p.x + 1] = 1;
    }
    let mut fg: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] == 1).collect();
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for first in [true, false] {
            doomed.clear();
            for &i in &fg {
                if grid[i] == 1 && deletable(&grid, i, pw, first) {
                    doomed.push(i);
                }
            }
            for &i in &doomed {
                grid[i] = 0;
            }
            changed |= !doomed.is_empty();
        }
        fg.retain(|&i| grid[i] == 1);
        if !changed {
            break;
        }
    }
    let mut out = BinaryMask::new(w, h);
    for &i in &fg {
        out.set(i % pw - 1, i / pw - 1, true);
    }
    out
}

#[inline]
fn deletable(grid: &[u8], i: usize, pw: usize, first: bool) -> bool {
    // P2..P9 clockwise from north
    let n = [
        grid[i - pw],
        grid[i - pw + 1],
        grid[i + 1],
        grid[i + pw + 1],
        grid[i + pw],
        grid[i + pw - 1],
        grid[i - 1],
        grid[i - pw - 1],
    ];
    let b: u8 = n.iter().sum();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&k| n[k] == 0 && n[(k + 1) % 8] == 1).count();
    if a != 1 {
        return false;
    }
    let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
    if first {
        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
    } else {
        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
    }
}

/// Skeleton components split by the closed-contour test.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    /// The text-cluster mask the skeleton was computed from.
    pub mask: BinaryMask,
    pub skeleton: BinaryMask,
    pub candidates: Vec<Component>,
    pub rejected: Vec<Component>,
}

impl CandidateSet {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Mask holding only candidate skeleton pixels.
    pub fn candidate_mask(&self) -> BinaryMask {
        let (w, h) = self.skeleton.dims();
        let mut m = BinaryMask::new(w, h);
        for p in self.candidates.iter().flat_map(|c| &c.pixels) {
            m.set(p.x, p.y, true);
        }
        m
    }
}

pub fn text_candidates(mask: &BinaryMask) -> CandidateSet {
    let skeleton = skeletonize(mask);
    let (candidates, rejected) = label_components(&skeleton)
        .into_iter()
        .partition(is_fully_connected);
    CandidateSet {
        mask: mask.clone(),
        skeleton,
        candidates,
        rejected,
    }
}
