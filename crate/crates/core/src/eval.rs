//! Block-level recall, precision and f-measure.
//!
//! A detected block counts as truly detected when it covers at least
//! `coverage` of the area of some ground-truth block. Blocks are counted,
//! not matches: one ground-truth block may certify several detections.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::BBox;

pub const DEFAULT_COVERAGE: f64 = 0.9;

/// Printed with the metrics help text.
pub const FMEASURE_NOTE: &str = "F is the harmonic mean 2RP/(R+P). For R=0.85 and P=0.84 this \
gives F=0.8450 (1.428/1.69). The F=0.82 published beside those two values does not follow \
from the formula, and neither does the often-quoted 0.8447; this tool always reports the \
formula's value.";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    pub frame_id: String,
    pub blocks: Vec<BBox>,
}

impl GroundTruth {
    pub fn atb(&self) -> usize {
        self.blocks.len()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let frame_id = frame_id_of(path);
        let blocks = parse_boxes(&text, &path.display().to_string())?;
        Ok(GroundTruth { frame_id, blocks })
    }
}

/// File stem with the `.gt` / `.det` sidecar suffix removed.
pub fn frame_id_of(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    for suffix in [".gt.txt", ".det.txt"] {
        if let Some(stem) = name.strip_suffix(suffix) {
            return stem.to_string();
        }
    }
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(name)
}

/// Parses `x y w h` lines. Blank lines and `#` comments are skipped.
pub fn parse_boxes(text: &str, origin: &str) -> Result<Vec<BBox>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |detail: String| Error::Config {
            origin: origin.to_string(),
            line: n + 1,
            detail,
        };
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("not a non-negative integer: {t:?}"))))
            .collect::<Result<_>>()?;
        let [x, y, w, h] = nums[..] else {
            return Err(bad(format!("expected 4 fields, got {}", nums.len())));
        };
        out.push(BBox::new(x, y, w, h).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

pub fn format_boxes(boxes: &[BBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        let _ = writeln!(out, "{} {} {} {}", b.x, b.y, b.w, b.h);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockVerdict {
    pub bbox: BBox,
    /// Best covered fraction of any ground-truth block.
    pub best_coverage: f64,
    /// Index of the ground-truth block achieving `best_coverage`.
    pub best_gt: Option<usize>,
    pub truly_detected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub tdb: usize,
    pub fdb: usize,
    pub verdicts: Vec<BlockVerdict>,
}

pub fn match_blocks(detected: &[BBox], gt: &GroundTruth, coverage: f64) -> Result<MatchOutcome> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coverage must lie in (0, 1], got {coverage}"
        )));
    }
    let verdicts: Vec<BlockVerdict> = detected
        .iter()
        .map(|d| {
            let (best_gt, best_coverage) = gt
                .blocks
                .iter()
                .enumerate()
                .map(|(i, g)| (i, d.intersection_area(g) as f64 / g.area() as f64))
                .fold((None, 0.0), |(bi, bc), (i, c)| {
                    if c > bc {
                        (Some(i), c)
                    } else {
                        (bi, bc)
                    }
                });
            BlockVerdict {
                bbox: *d,
                best_coverage,
                best_gt,
                truly_detected: best_gt.is_some() && best_coverage >= coverage,
            }
        })
        .collect();
    let tdb = verdicts.iter().filter(|v| v.truly_detected).count();
    Ok(MatchOutcome {
        tdb,
        fdb: verdicts.len() - tdb,
        verdicts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub atb: usize,
    pub tdb: usize,
    pub fdb: usize,
    pub recall: f64,
    pub precision: f64,
    pub fmeasure: f64,
}

/// Counts to ratios, with every zero denominator mapped to 0.
pub fn metrics(tdb: usize, fdb: usize, atb: usize) -> Metrics {
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let recall = ratio(tdb, atb);
    let precision = ratio(tdb, tdb + fdb);
    // 2RP/(R+P) rewritten over the counts keeps exact ratios exact
    let fmeasure = if recall + precision == 0.0 {
        0.0
    } else {
        ratio(2 * tdb, atb + tdb + fdb)
    };
    Metrics {
        atb,
        tdb,
        fdb,
        recall,
        precision,
        fmeasure,
    }
}

/// Harmonic mean of recall and precision.
pub fn f_measure(recall: f64, precision: f64) -> f64 {
    if recall + precision == 0.0 {
        0.0
    } else {
        2.0 * recall * precision / (recall + precision)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub frame_id: String,
    pub metrics: Metrics,
}

/// Micro-averaged totals over frames.
pub fn aggregate(reports: &[FrameReport]) -> Metrics {
    let (tdb, fdb, atb) = reports.iter().fold((0, 0, 0), |(t, f, a), r| {
        (t + r.metrics.tdb, f + r.metrics.fdb, a + r.metrics.atb)
    });
    metrics(tdb, fdb, atb)
}

/// Fixed-column table with one row per frame and a closing `TOTAL` row.
pub fn format_table(reports: &[FrameReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.frame_id.len())
        .max()
        .unwrap_or(0)
        .max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$} {:>5} {:>5} {:>5} {:>7} {:>7} {:>7}",
        "frame", "ATB", "TDB", "FDB", "R", "P", "F"
    );
    let row = |out: &mut String, id: &str, m: &Metrics| {
        let _ = writeln!(
            out,
            "{:<width$} {:>5} {:>5} {:>5} {:>7.4} {:>7.4} {:>7.4}",
            id, m.atb, m.tdb, m.fdb, m.recall, m.precision, m.fmeasure
        );
    };
    for r in reports {
        row(&mut out, &r.frame_id, &r.metrics);
    }
    row(&mut out, "TOTAL", &aggregate(reports));
    out
}

pub fn format_csv(reports: &[FrameReport]) -> String {
    let mut out = String::from("frame,atb,tdb,fdb,recall,precision,fmeasure\n");
    let mut row = |id: &str, m: &Metrics| {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            id, m.atb, m.tdb, m.fdb, m.recall, m.precision, m.fmeasure
        );
    };
    for r in reports {
        row(&r.frame_id, &r.metrics);
    }
    row("TOTAL", &aggregate(reports));
    out
}

/// Scores every `<id>.gt.txt` in `gt_dir` against `<id>.det.txt` in
/// `det_dir`. A missing detection file means no detections for that frame.
pub fn evaluate_dirs(det_dir: &Path, gt_dir: &Path, coverage: f64) -> Result<Vec<FrameReport>> {
    let mut gt_files: Vec<_> = fs::read_dir(gt_dir)
        .map_err(|e| Error::io(gt_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".gt.txt"))
        .collect();
    gt_files.sort();
    let mut reports = Vec::with_capacity(gt_files.len());
    for gt_path in gt_files {
        let gt = GroundTruth::load(&gt_path)?;
        let det_path = det_dir.join(format!("{}.det.txt", gt.frame_id));
        let detected = if det_path.exists() {
            let text = fs::read_to_string(&det_path).map_err(|e| Error::io(&det_path, e))?;
            parse_boxes(&text, &det_path.display().to_string())?
        } else {
            Vec::new()
        };
        let m = match_blocks(&detected, &gt, coverage)?;
        reports.push(FrameReport {
            frame_id: gt.frame_id.clone(),
            metrics: metrics(m.tdb, m.fdb, gt.atb()),
        });
    }
    Ok(reports)
}
