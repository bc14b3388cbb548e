use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use textseg::binarize::kmeans2;
use textseg::config::PipelineConfig;
use textseg::corpus::gen_corpus;
use textseg::enhance::{channel_fuse, sharpen, sharpen_trace};
use textseg::eval::{evaluate_dirs, format_csv, format_table, FMEASURE_NOTE};
use textseg::morphology::text_candidates;
use textseg::pipeline::{list_frames, overlay, run_batch};
use textseg::raster::{load_gray, load_image, load_mask, save_gray, save_mask, save_png_rgb, BinaryMask};
use textseg::stroke::{sobel, verdicts_csv, verify_with_gradient};
use textseg::Error;

#[derive(Parser)]
#[command(name = "textseg", version, about = "Text block segmentation for video frames")]
struct Cli {
    #[command(flatten)]
    tunables: Tunables,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Tunables {
    /// Flat `key = value` file applied over the defaults.
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,
    /// Sharpening window side (odd, at least 3).
    #[arg(long, global = true)]
    window: Option<String>,
    /// Number of sharpening passes.
    #[arg(long, global = true)]
    passes: Option<String>,
    /// Largest accepted difference between the two dominant stroke widths.
    #[arg(long = "sym-tol", global = true)]
    sym_tol: Option<String>,
    /// Longest stroke ray in pixels, or `auto`.
    #[arg(long = "max-ray", global = true)]
    max_ray: Option<String>,
    /// Ray direction relative to the gradient: `along` or `perp`.
    #[arg(long, global = true)]
    ray: Option<String>,
    /// Growth gap as a multiple of the seed height.
    #[arg(long, global = true)]
    spacing: Option<String>,
    /// Growth direction: `h` or `nn`.
    #[arg(long, global = true)]
    direction: Option<String>,
    /// Sobel magnitude cut for the edge map, or `otsu`.
    #[arg(long = "edge-threshold", global = true)]
    edge_threshold: Option<String>,
    /// Fraction of a ground-truth block a detection must cover.
    #[arg(long, global = true)]
    coverage: Option<String>,
}

impl Tunables {
    fn resolve(&self) -> Result<PipelineConfig, Failure> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p).map_err(Failure::Usage)?,
            None => PipelineConfig::default(),
        };
        let flags = [
            ("window", &self.window),
            ("passes", &self.passes),
            ("sym_tol", &self.sym_tol),
            ("max_ray", &self.max_ray),
            ("ray", &self.ray),
            ("spacing", &self.spacing),
            ("direction", &self.direction),
            ("edge_threshold", &self.edge_threshold),
            ("coverage", &self.coverage),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                c.set(key, v)
                    .map_err(|d| Failure::Usage(Error::InvalidParameter(d)))?;
            }
        }
        c.validate().map_err(Failure::Usage)?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fuse the color channels of a frame into one gray image.
    Enhance {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Sharpen an enhanced gray image.
    Sharpen {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write one snapshot per window position here.
        #[arg(long, value_name = "DIR")]
        trace_dir: Option<PathBuf>,
    },
    /// Split a sharpened image into text and background clusters.
    Binarize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Skeletonize a text mask and keep the closed-contour components.
    Candidates {
        mask: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_name = "FILE")]
        skeleton: Option<PathBuf>,
    },
    /// Symmetry-verify the candidates of a text mask.
    Verify {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        enhanced: PathBuf,
        /// Mask of the skeleton pixels of accepted representatives.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Run the full pipeline and write `<id>.det.txt` per frame.
    Detect {
        /// Frame files or directories of frames.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Write every intermediate to `<DIR>/<id>/`.
        #[arg(long, value_name = "DIR")]
        dump: Option<PathBuf>,
        /// Also write `<out>/<id>.overlay.png`.
        #[arg(long)]
        overlay: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Score detection files against ground-truth sidecars.
    #[command(after_help = FMEASURE_NOTE)]
    Evaluate {
        #[arg(long)]
        det: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with ground-truth sidecars.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

enum Failure {
    Usage(Error),
    Stage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Stage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, &cli.tunables) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("textseg: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("textseg: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| {
        Failure::Stage(Error::Io {
            path: path.into(),
            source: e,
        })
    })
}

fn run(cmd: Command, t: &Tunables) -> Result<(), Failure> {
    let config = t.resolve()?;
    match cmd {
        Command::Enhance { input, output } => {
            save_gray(&channel_fuse(&load_image(&input)?), &output)?;
        }
        Command::Sharpen {
            input,
            output,
            trace_dir,
        } => {
            let img = load_gray(&input)?;
            match trace_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| Error::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    let tr = sharpen_trace(&img, config.sharpen)?;
                    for (i, snap) in tr.snapshots.iter().enumerate() {
                        save_gray(snap, dir.join(format!("step_{:04}.pgm", i + 1)))?;
                    }
                    save_gray(tr.last().unwrap_or(&img), &output)?;
                }
                None => save_gray(&sharpen(&img, config.sharpen)?.image, &output)?,
            }
        }
        Command::Binarize { input, output } => {
            let r = kmeans2(&load_gray(&input)?, config.kmeans);
            save_mask(&r.mask, &output)?;
            println!(
                "threshold {} text {:.3} background {:.3} iterations {}",
                r.threshold, r.centroid_text, r.centroid_bg, r.iterations
            );
        }
        Command::Candidates {
            mask,
            output,
            skeleton,
        } => {
            let set = text_candidates(&load_mask(&mask)?);
            save_mask(&set.candidate_mask(), &output)?;
            if let Some(p) = skeleton {
                save_mask(&set.skeleton, &p)?;
            }
            println!(
                "{} candidates, {} rejected",
                set.candidates.len(),
                set.rejected.len()
            );
        }
        Command::Verify {
            mask,
            enhanced,
            output,
            csv,
        } => {
            let set = text_candidates(&load_mask(&mask)?);
            let grad = sobel(&load_gray(&enhanced)?).map_err(|e| Error::Stage {
                stage: "sobel",
                source: Box::new(e),
            })?;
            let verdicts = verify_with_gradient(&set, &grad, &config.stroke)?;
            let (w, h) = set.mask.dims();
            let pts: Vec<_> = verdicts
                .iter()
                .filter(|v| v.verdict.passed)
                .flat_map(|v| v.candidate.pixels.iter().copied())
                .collect();
            save_mask(&BinaryMask::from_points(w, h, &pts), &output)?;
            let table = verdicts_csv(&verdicts);
            match csv {
                Some(p) => write_text(&p, &table)?,
                None => print!("{table}"),
            }
        }
        Command::Detect {
            inputs,
            out,
            dump,
            overlay: want_overlay,
            jobs,
        } => {
            if jobs == 0 {
                return Err(Failure::Usage(Error::InvalidParameter(
                    "--jobs must be at least 1".into(),
                )));
            }
            let mut frames = Vec::new();
            for p in inputs {
                if p.is_dir() {
                    frames.extend(list_frames(&p)?);
                } else {
                    frames.push(p);
                }
            }
            let results = run_batch(&frames, &config, &out, dump.as_deref(), jobs)?;
            for r in &results {
                println!("{} {} blocks", r.frame_id, r.blocks.len());
                for d in &r.diagnostics {
                    eprintln!("{}: {d}", r.frame_id);
                }
                if want_overlay {
                    let frame = load_image(&r.input)?;
                    save_png_rgb(
                        &overlay(&frame, &r.blocks),
                        out.join(format!("{}.overlay.png", r.frame_id)),
                    )?;
                }
            }
        }
        Command::Evaluate { det, gt, csv } => {
            let reports = evaluate_dirs(&det, &gt, config.coverage)?;
            print!("{}", format_table(&reports));
            if let Some(p) = csv {
                write_text(&p, &format_csv(&reports))?;
            }
        }
        Command::GenCorpus { out, n, seed } => {
            let entries = gen_corpus(&out, n, seed)?;
            let lines: usize = entries.iter().map(|e| e.lines).sum();
            println!("{} frames, {lines} text lines", entries.len());
        }
    }
    Ok(())
}
