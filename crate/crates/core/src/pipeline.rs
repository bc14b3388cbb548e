//! Frame-level orchestration and batch processing.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::binarize::{kmeans2, ClusterResult};
use crate::config::PipelineConfig;
use crate::enhance::{channel_fuse, sharpen};
use crate::error::{Error, Result};
use crate::eval::format_boxes;
use crate::grow::{edge_map_from_gradient, segment_detailed, EdgeLayer, EdgeMap, TextBlock};
use crate::morphology::{text_candidates, CandidateSet, Component};
use crate::raster::{load_image, save_gray, save_mask, save_png_rgb, BBox, BinaryMask, GrayImage, RgbFrame};
use crate::stroke::{sobel, verify_with_gradient, CandidateVerdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The frame is smaller than the sharpening window and was left as is.
    UndersizedSharpen,
    /// The sharpened frame is constant, so the text cluster is empty.
    DegenerateClusters,
    NoCandidates,
    NoRepresentatives,
    /// Seeds that touched no edge component.
    IsolatedSeeds(Vec<u32>),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UndersizedSharpen => write!(f, "frame smaller than the sharpening window"),
            Diagnostic::DegenerateClusters => write!(f, "constant frame, no text cluster"),
            Diagnostic::NoCandidates => write!(f, "no closed-contour text candidates"),
            Diagnostic::NoRepresentatives => write!(f, "no candidate passed symmetry verification"),
            Diagnostic::IsolatedSeeds(ids) => write!(f, "seeds without edge support: {ids:?}"),
        }
    }
}

/// Every intermediate of one run.
#[derive(Debug, Clone)]
pub struct Stages {
    pub enhanced: GrayImage,
    pub sharpened: GrayImage,
    pub clusters: ClusterResult,
    pub candidates: CandidateSet,
    pub verdicts: Vec<CandidateVerdict>,
    pub representatives: Vec<Component>,
    pub edges: EdgeMap,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub blocks: Vec<TextBlock>,
    pub diagnostics: Vec<Diagnostic>,
    pub stages: Stages,
}

impl PipelineOutput {
    pub fn boxes(&self) -> Vec<BBox> {
        self.blocks.iter().map(|b| b.bbox).collect()
    }
}

/// Runs every stage on an in-memory frame.
pub fn process_frame(frame: &RgbFrame, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let mut diagnostics = Vec::new();

    let enhanced = channel_fuse(frame);
    let sharp = sharpen(&enhanced, config.sharpen).map_err(|e| e.in_stage("sharpen"))?;
    if sharp.undersized {
        diagnostics.push(Diagnostic::UndersizedSharpen);
    }
    let sharpened = sharp.image;

    let clusters = kmeans2(&sharpened, config.kmeans);
    if clusters.degenerate {
        diagnostics.push(Diagnostic::DegenerateClusters);
    }
    let candidates = text_candidates(&clusters.mask);
    if candidates.is_empty() {
        diagnostics.push(Diagnostic::NoCandidates);
    }

    let grad = sobel(&enhanced).map_err(|e| e.in_stage("sobel"))?;
    let verdicts =
        verify_with_gradient(&candidates, &grad, &config.stroke).map_err(|e| e.in_stage("verify"))?;
    let representatives: Vec<Component> = verdicts
        .iter()
        .filter(|v| v.verdict.passed)
        .map(|v| v.candidate.clone())
        .collect();
    if !candidates.is_empty() && representatives.is_empty() {
        diagnostics.push(Diagnostic::NoRepresentatives);
    }

    let edges = edge_map_from_gradient(&grad, config.grow.edge_threshold);
    let layer = EdgeLayer::new(edges.mask.clone());
    let seg = segment_detailed(&representatives, &layer, &config.grow);
    if !seg.isolated_seeds.is_empty() {
        diagnostics.push(Diagnostic::IsolatedSeeds(seg.isolated_seeds.clone()));
    }

    Ok(PipelineOutput {
        blocks: seg.blocks,
        diagnostics,
        stages: Stages {
            enhanced,
            sharpened,
            clusters,
            candidates,
            verdicts,
            representatives,
            edges,
        },
    })
}

/// Loads `path`, runs the pipeline, and when `dump` is set writes every
/// intermediate there.
pub fn run_pipeline(
    path: impl AsRef<Path>,
    config: &PipelineConfig,
    dump: Option<&Path>,
) -> Result<PipelineOutput> {
    let frame = load_image(path.as_ref()).map_err(|e| e.in_stage("load"))?;
    let out = process_frame(&frame, config)?;
    if let Some(dir) = dump {
        write_dump(dir, &frame, &out).map_err(|e| e.in_stage("dump"))?;
    }
    Ok(out)
}

pub const DUMP_FILES: &[&str] = &[
    "enhanced.pgm",
    "sharpened.pgm",
    "mask.pgm",
    "skeleton.pgm",
    "candidates.pgm",
    "representatives.pgm",
    "edges.pgm",
    "overlay.png",
];

pub fn write_dump(dir: &Path, frame: &RgbFrame, out: &PipelineOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let s = &out.stages;
    let (w, h) = s.enhanced.dims();
    save_gray(&s.enhanced, dir.join("enhanced.pgm"))?;
    save_gray(&s.sharpened, dir.join("sharpened.pgm"))?;
    save_mask(&s.clusters.mask, dir.join("mask.pgm"))?;
    save_mask(&s.candidates.skeleton, dir.join("skeleton.pgm"))?;
    save_mask(&s.candidates.candidate_mask(), dir.join("candidates.pgm"))?;
    let reps = BinaryMask::from_points(
        w,
        h,
        &s.representatives
            .iter()
            .flat_map(|c| c.pixels.iter().copied())
            .collect::<Vec<_>>(),
    );
    save_mask(&reps, dir.join("representatives.pgm"))?;
    save_mask(&s.edges.mask, dir.join("edges.pgm"))?;
    save_png_rgb(&overlay(frame, &out.boxes()), dir.join("overlay.png"))
}

/// Copy of `frame` with each box outlined in red.
pub fn overlay(frame: &RgbFrame, boxes: &[BBox]) -> RgbFrame {
    let mut out = frame.clone();
    const RED: [u8; 3] = [255, 0, 0];
    for b in boxes {
        for x in b.x..b.right() {
            out.set(x, b.y, RED);
            out.set(x, b.bottom() - 1, RED);
        }
        for y in b.y..b.bottom() {
            out.set(b.x, y, RED);
            out.set(b.right() - 1, y, RED);
        }
    }
    out
}

/// Frame id used for sidecar and detection names.
pub fn frame_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameResult {
    pub frame_id: String,
    pub input: PathBuf,
    pub detection_file: PathBuf,
    pub blocks: Vec<BBox>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Processes `inputs` on up to `jobs` threads and writes
/// `<out_dir>/<id>.det.txt` for each. Results come back in input order.
/// With `dump` set, intermediates go to `<dump>/<id>/`.
pub fn run_batch(
    inputs: &[PathBuf],
    config: &PipelineConfig,
    out_dir: &Path,
    dump: Option<&Path>,
    jobs: usize,
) -> Result<Vec<FrameResult>> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let slots: Vec<Mutex<Option<Result<FrameResult>>>> =
        inputs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let jobs = jobs.clamp(1, inputs.len().max(1));

    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(input) = inputs.get(i) else {
            break;
        };
        let r = run_one(input, config, out_dir, dump);
        *slots[i].lock().expect("slot lock") = Some(r);
    };
    if jobs == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(work);
            }
        });
    }

    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every slot filled"))
        .collect()
}

fn run_one(
    input: &Path,
    config: &PipelineConfig,
    out_dir: &Path,
    dump: Option<&Path>,
) -> Result<FrameResult> {
    let id = frame_id(input);
    let dump_dir = dump.map(|d| d.join(&id));
    let out = run_pipeline(input, config, dump_dir.as_deref())?;
    let boxes = out.boxes();
    let detection_file = out_dir.join(format!("{id}.det.txt"));
    fs::write(&detection_file, format_boxes(&boxes)).map_err(|e| Error::io(&detection_file, e))?;
    Ok(FrameResult {
        frame_id: id,
        input: input.to_path_buf(),
        detection_file,
        blocks: boxes,
        diagnostics: out.diagnostics,
    })
}

/// Image files (`.ppm`, `.pgm`, `.pnm`, `.png`) directly inside `dir`,
/// sorted by path.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "ppm" | "pgm" | "pnm" | "png"))
        })
        .collect();
    out.sort();
    Ok(out)
}
