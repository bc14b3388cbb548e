//! Deterministic synthetic frames: bitmap-font text lines over smooth
//! textured backgrounds, each with a ground-truth sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::format_boxes;
use crate::raster::{encode_ppm, BBox, RgbFrame};

pub const GLYPH_W: usize = 5;
pub const GLYPH_H: usize = 7;
pub const FRAME_W: usize = 640;
pub const FRAME_H: usize = 480;

/// Glyphs whose outline encloses a hole.
pub const LOOP_GLYPHS: &[char] = &['A', 'B', 'D', 'O', 'P', 'Q', 'R', '0', '4', '6', '8', '9'];

const FONT: &[(char, [&str; GLYPH_H])] = &[
    ('A', [" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"]),
    ('B', ["#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "]),
    ('C', [" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "]),
    ('D', ["#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "]),
    ('E', ["#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"]),
    ('F', ["#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "]),
    ('G', [" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"]),
    ('H', ["#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"]),
    ('I', [" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "]),
    ('J', ["  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "]),
    ('K', ["#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"]),
    ('L', ["#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"]),
    ('M', ["#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"]),
    ('N', ["#   #", "#   #", "##  #", "# # #", "#  ##", "#   #", "#   #"]),
    ('O', [" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "]),
    ('P', ["#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "]),
    ('Q', [" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"]),
    ('R', ["#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"]),
    ('S', [" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "]),
    ('T', ["#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "]),
    ('U', ["#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "]),
    ('V', ["#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "]),
    ('W', ["#   #", "#   #", "#   #", "# # #", "# # #", "# # #", " # # "]),
    ('X', ["#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"]),
    ('Y', ["#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "]),
    ('Z', ["#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"]),
    ('0', [" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "]),
    ('1', ["  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "]),
    ('2', [" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"]),
    ('3', ["#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "]),
    ('4', ["   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "]),
    ('5', ["#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "]),
    ('6', ["  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "]),
    ('7', ["#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "]),
    ('8', [" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "]),
    ('9', [" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "]),
];

/// Bitmap rows of `c`, or `None` outside A-Z and 0-9.
pub fn glyph(c: char) -> Option<&'static [&'static str; GLYPH_H]> {
    FONT.iter().find(|(g, _)| *g == c).map(|(_, rows)| rows)
}

/// Renders `text` at integer `scale` as foreground coordinates relative to
/// the top-left corner. Glyphs are separated by one scaled column; a space
/// advances by three.
pub fn render_text(text: &str, scale: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut pen = 0;
    for c in text.chars() {
        if c == ' ' {
            pen += 3 * scale;
            continue;
        }
        let rows = glyph(c).ok_or_else(|| Error::InvalidParameter(format!("no glyph for {c:?}")))?;
        for (gy, row) in rows.iter().enumerate() {
            for (gx, _) in row.bytes().enumerate().filter(|&(_, b)| b == b'#') {
                for sy in 0..scale {
                    for sx in 0..scale {
                        out.push((pen + gx * scale + sx, gy * scale + sy));
                    }
                }
            }
        }
        pen += (GLYPH_W + 1) * scale;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextLine {
    pub text: String,
    pub scale: usize,
    /// Tight bound of the rendered pixels.
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFrame {
    pub frame: RgbFrame,
    pub lines: Vec<TextLine>,
}

impl SyntheticFrame {
    pub fn ground_truth(&self) -> Vec<BBox> {
        self.lines.iter().map(|l| l.bbox).collect()
    }
}

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> String {
    let all: Vec<char> = FONT.iter().map(|(c, _)| *c).collect();
    let mut w: Vec<char> = (0..len).map(|_| *all.choose(rng).expect("font non-empty")).collect();
    let slot = rng.gen_range(0..len);
    w[slot] = *LOOP_GLYPHS.choose(rng).expect("loop set non-empty");
    w.into_iter().collect()
}

fn random_line(rng: &mut ChaCha8Rng) -> String {
    let words = rng.gen_range(1..=2);
    (0..words)
        .map(|_| {
            let len = rng.gen_range(2..=5);
            random_word(rng, len)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Smooth value noise: random lattice values blended bilinearly.
fn texture(rng: &mut ChaCha8Rng, w: usize, h: usize, cell: usize, lo: u8, hi: u8) -> Vec<f32> {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let lattice: Vec<f32> = (0..gw * gh)
        .map(|_| rng.gen_range(lo as f32..=hi as f32))
        .collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let (cy, fy) = (y / cell, (y % cell) as f32 / cell as f32);
        for x in 0..w {
            let (cx, fx) = (x / cell, (x % cell) as f32 / cell as f32);
            let at = |i: usize, j: usize| lattice[j * gw + i];
            let top = at(cx, cy) * (1.0 - fx) + at(cx + 1, cy) * fx;
            let bot = at(cx, cy + 1) * (1.0 - fx) + at(cx + 1, cy + 1) * fx;
            out.push(top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

fn clamp_u8(v: f32) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

const TEXT_COLORS: &[[f32; 3]] = &[
    [1.0, 1.0, 1.0],
    [1.0, 1.0, 0.3],
    [0.4, 1.0, 1.0],
    [1.0, 0.85, 0.6],
];

/// Draws one frame. Lines are stacked with vertical gaps of at least twice
/// the taller neighbour, so a height-relative growth threshold separates
/// them.
pub fn synth_frame(rng: &mut ChaCha8Rng) -> Result<SyntheticFrame> {
    let (w, h) = (FRAME_W, FRAME_H);
    let tint = [
        rng.gen_range(0.7f32..1.0),
        rng.gen_range(0.7f32..1.0),
        rng.gen_range(0.7f32..1.0),
    ];
    let base_lo = rng.gen_range(10u8..40);
    let base_hi = base_lo + rng.gen_range(25u8..55);
    let cell = *[24usize, 32, 48].choose(rng).expect("non-empty");
    let tex = texture(rng, w, h, cell, base_lo, base_hi);
    let mut data = Vec::with_capacity(w * h * 3);
    for &t in &tex {
        for c in tint {
            data.push(clamp_u8(t * c + rng.gen_range(-3.0f32..=3.0)));
        }
    }
    let mut frame = RgbFrame::from_raw(w, h, data)?;

    let n_lines = rng.gen_range(1..=3);
    let mut lines = Vec::new();
    let mut y = rng.gen_range(20..60);
    for _ in 0..n_lines {
        let scale = rng.gen_range(2..=4);
        let text = random_line(rng);
        let pixels = render_text(&text, scale)?;
        let tw = pixels.iter().map(|p| p.0).max().unwrap_or(0) + 1;
        let th = GLYPH_H * scale;
        if y + th + 10 > h || tw + 20 > w {
            break;
        }
        let x = rng.gen_range(10..w - tw - 10);
        let color = TEXT_COLORS.choose(rng).expect("non-empty");
        let level = rng.gen_range(200f32..=255.0);
        for &(px, py) in &pixels {
            let rgb = [0, 1, 2].map(|c| clamp_u8(level * color[c] + rng.gen_range(-3.0f32..=3.0)));
            frame.set(x + px, y + py, rgb);
        }
        let bbox = BBox::from_points(
            &pixels
                .iter()
                .map(|&(px, py)| crate::raster::Point::new(x + px, y + py))
                .collect::<Vec<_>>(),
        )
        .expect("rendered text is non-empty");
        lines.push(TextLine { text, scale, bbox });
        y += th + 2 * th.max(4 * 7) + rng.gen_range(0..40);
    }
    add_distractors(rng, &mut frame, &lines);
    Ok(SyntheticFrame { frame, lines })
}

/// Bright solid bars and blocks with no enclosed hole, kept well clear of
/// the text lines.
fn add_distractors(rng: &mut ChaCha8Rng, frame: &mut RgbFrame, lines: &[TextLine]) {
    let (w, h) = frame.dims();
    let clearance = lines.iter().map(|l| l.bbox.h).max().unwrap_or(0) * 3;
    let count = rng.gen_range(0..=3);
    for _ in 0..count {
        let (bw, bh) = if rng.gen_bool(0.5) {
            (rng.gen_range(20..120), rng.gen_range(2..6))
        } else {
            (rng.gen_range(6..30), rng.gen_range(6..30))
        };
        for _attempt in 0..20 {
            let x = rng.gen_range(0..w - bw);
            let y = rng.gen_range(0..h - bh);
            let b = BBox { x, y, w: bw, h: bh };
            let near = lines
                .iter()
                .any(|l| l.bbox.expand(clearance, w, h).intersection(&b).is_some());
            if near {
                continue;
            }
            let level = rng.gen_range(180f32..=255.0);
            for yy in y..y + bh {
                for xx in x..x + bw {
                    let v = clamp_u8(level + rng.gen_range(-3.0f32..=3.0));
                    frame.set(xx, yy, [v, v, v]);
                }
            }
            break;
        }
    }
}

/// Frames from one seed, in order.
pub fn synth_frames(n: usize, seed: u64) -> Result<Vec<SyntheticFrame>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| synth_frame(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub frame: PathBuf,
    pub ground_truth: PathBuf,
    pub lines: usize,
}

/// Writes `frame_NNN.ppm` and `frame_NNN.gt.txt` for `n` frames.
pub fn gen_corpus(out: &Path, n: usize, seed: u64) -> Result<Vec<CorpusEntry>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut entries = Vec::with_capacity(n);
    for (i, f) in synth_frames(n, seed)?.into_iter().enumerate() {
        let stem = format!("frame_{i:03}");
        let frame = out.join(format!("{stem}.ppm"));
        let ground_truth = out.join(format!("{stem}.gt.txt"));
        fs::write(&frame, encode_ppm(&f.frame)).map_err(|e| Error::io(&frame, e))?;
        let mut gt = String::new();
        for l in &f.lines {
            gt.push_str(&format!("# {} scale {}\n", l.text, l.scale));
        }
        gt.push_str(&format_boxes(&f.ground_truth()));
        fs::write(&ground_truth, gt).map_err(|e| Error::io(&ground_truth, e))?;
        entries.push(CorpusEntry {
            frame,
            ground_truth,
            lines: f.lines.len(),
        });
    }
    Ok(entries)
}
