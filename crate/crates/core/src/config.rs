//! Every pipeline tunable in one place, loadable from flat `key = value` text.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::binarize::KMeansParams;
use crate::enhance::SharpenParams;
use crate::error::{Error, Result};
use crate::eval::DEFAULT_COVERAGE;
use crate::grow::{DirectionMode, EdgeThreshold, GrowParams};
use crate::stroke::{RayMode, StrokeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub sharpen: SharpenParams,
    pub kmeans: KMeansParams,
    pub stroke: StrokeParams,
    pub grow: GrowParams,
    pub coverage: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sharpen: SharpenParams::default(),
            kmeans: KMeansParams::default(),
            stroke: StrokeParams::default(),
            grow: GrowParams::default(),
            coverage: DEFAULT_COVERAGE,
        }
    }
}

pub const KEYS: &[&str] = &[
    "window",
    "passes",
    "kmeans_max_iters",
    "kmeans_tol",
    "sym_tol",
    "max_ray",
    "ray",
    "spacing",
    "direction",
    "edge_threshold",
    "coverage",
];

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.sharpen.validate()?;
        self.grow.validate()?;
        if self.kmeans.max_iters == 0 {
            return Err(Error::InvalidParameter("kmeans_max_iters must be at least 1".into()));
        }
        if !(self.kmeans.tol >= 0.0 && self.kmeans.tol.is_finite()) {
            return Err(Error::InvalidParameter("kmeans_tol must be non-negative".into()));
        }
        if self.stroke.max_ray == Some(0) {
            return Err(Error::InvalidParameter("max_ray must be at least 1".into()));
        }
        if let EdgeThreshold::Fixed(t) = self.grow.edge_threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter("edge_threshold must be non-negative".into()));
            }
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "coverage must lie in (0, 1], got {}",
                self.coverage
            )));
        }
        Ok(())
    }

    /// Sets one key from its textual value. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value for {key}: {v:?}"))
        }
        match key {
            "window" => self.sharpen.window = num(key, value)?,
            "passes" => self.sharpen.passes = num(key, value)?,
            "kmeans_max_iters" => self.kmeans.max_iters = num(key, value)?,
            "kmeans_tol" => self.kmeans.tol = num(key, value)?,
            "sym_tol" => self.stroke.tol = num(key, value)?,
            "max_ray" => {
                self.stroke.max_ray = match value {
                    "auto" => None,
                    v => Some(num(key, v)?),
                }
            }
            "ray" => self.stroke.mode = parse_ray(value)?,
            "spacing" => self.grow.spacing_factor = num(key, value)?,
            "direction" => self.grow.direction = parse_direction(value)?,
            "edge_threshold" => {
                self.grow.edge_threshold = match value {
                    "otsu" => EdgeThreshold::Otsu,
                    v => EdgeThreshold::Fixed(num(key, v)?),
                }
            }
            "coverage" => self.coverage = num(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |detail: String| Error::Config {
                origin: origin.to_string(),
                line: n + 1,
                detail,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            self.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply_text(text, origin)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }

    /// Serializes every key; `from_text` reads it back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("window", self.sharpen.window.to_string());
        kv("passes", self.sharpen.passes.to_string());
        kv("kmeans_max_iters", self.kmeans.max_iters.to_string());
        kv("kmeans_tol", self.kmeans.tol.to_string());
        kv("sym_tol", self.stroke.tol.to_string());
        kv(
            "max_ray",
            self.stroke.max_ray.map_or("auto".into(), |r| r.to_string()),
        );
        kv(
            "ray",
            match self.stroke.mode {
                RayMode::AlongGradient => "along",
                RayMode::Perpendicular => "perp",
            }
            .into(),
        );
        kv("spacing", self.grow.spacing_factor.to_string());
        kv(
            "direction",
            match self.grow.direction {
                DirectionMode::Horizontal => "h",
                DirectionMode::NearestNeighbor => "nn",
            }
            .into(),
        );
        kv(
            "edge_threshold",
            match self.grow.edge_threshold {
                EdgeThreshold::Otsu => "otsu".into(),
                EdgeThreshold::Fixed(t) => t.to_string(),
            },
        );
        kv("coverage", self.coverage.to_string());
        out
    }
}

pub fn parse_direction(v: &str) -> std::result::Result<DirectionMode, String> {
    match v {
        "h" | "horizontal" => Ok(DirectionMode::Horizontal),
        "nn" | "nearest" => Ok(DirectionMode::NearestNeighbor),
        _ => Err(format!("direction must be h or nn, got {v:?}")),
    }
}

pub fn parse_ray(v: &str) -> std::result::Result<RayMode, String> {
    match v {
        "along" => Ok(RayMode::AlongGradient),
        "perp" => Ok(RayMode::Perpendicular),
        _ => Err(format!("ray must be along or perp, got {v:?}")),
    }
}
