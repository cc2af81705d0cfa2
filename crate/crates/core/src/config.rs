//! Run configuration shared by the command line and JSON config files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::flow::FlowOptions;
use crate::shapes::{off, Mesh, StarShape, StarShapeDocument};
use crate::{Body, Error, Result, Vec3};

/// Body description as it appears in config files:
/// `{"kind": "ball", "radius": 1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        semi_axes: [f64; 3],
    },
    /// Either a StarShape JSON file or an inline document.
    Star {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<StarShapeDocument>,
    },
    /// Closed triangle mesh from an OFF file.
    Mesh {
        file: PathBuf,
    },
    /// Axis-aligned cube mesh centred at the origin.
    Cube {
        side: f64,
        #[serde(default)]
        subdivisions: usize,
    },
    TwoBalls {
        radii: [f64; 2],
        separation: f64,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<Body> {
        match self {
            BodySpec::Ball { radius } => Body::ball(*radius),
            BodySpec::Ellipsoid { semi_axes: [a, b, c] } => Body::ellipsoid(*a, *b, *c),
            BodySpec::Star { file, shape } => match (file, shape) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(path)?;
                    Ok(Body::StarShape(StarShape::from_json(&text)?))
                }
                (None, Some(doc)) => Ok(Body::StarShape(doc.to_shape()?)),
                _ => Err(Error::InvalidBody(
                    "body.star needs exactly one of `file` and `shape`".into(),
                )),
            },
            BodySpec::Mesh { file } => Ok(Body::Mesh(off::read_off(file)?)),
            BodySpec::Cube { side, subdivisions } => Ok(Body::Mesh(Mesh::cube(Vec3::zeros(), *side, *subdivisions)?)),
            BodySpec::TwoBalls { radii, separation } => Body::two_balls(radii[0], radii[1], *separation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Inclusive range `start:end:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Range {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, s] = parts.as_slice() else {
            return Err(Error::Parse(format!("range `{text}` is not start:end:step")));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("range `{text}`: `{x}` is not a number")))
        };
        let r = Self {
            start: num(a)?,
            end: num(b)?,
            step: num(s)?,
        };
        if r.values().is_empty() {
            return Err(Error::Domain(format!("range `{text}` is empty")));
        }
        Ok(r)
    }

    /// `start + k·step` for every `k` with the value at most `end` (up to
    /// round-off).
    pub fn values(&self) -> Vec<f64> {
        if !(self.step > 0.0 && self.start.is_finite() && self.end.is_finite()) || self.end < self.start {
            return Vec::new();
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub volume: f64,
    pub max_steps: usize,
    pub tolerance: f64,
    pub resolution: usize,
    pub initial_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        let o = FlowOptions::default();
        Self {
            volume: 1.0,
            max_steps: 500,
            tolerance: 1e-9,
            resolution: o.resolution,
            initial_step: o.initial_step,
            max_step: o.max_step,
        }
    }
}

impl FlowConfig {
    pub fn options(&self) -> FlowOptions {
        FlowOptions {
            resolution: self.resolution,
            initial_step: self.initial_step,
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Chord-moment exponents for `santalo`.
    pub alphas: Vec<f64>,
    /// Samples for the Jacobian check in `santalo`; 0 disables it.
    pub jacobian_samples: usize,
    /// `energy`: `"auto"` or `"quadrature"`.
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volumes: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<String>,
    /// Volume for `proofcheck` chains.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    /// Standard-error multiple for verdicts.
    pub sigma: f64,
    pub flow: FlowConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            body: None,
            samples: 100_000,
            seed: 0,
            workers: None,
            output: None,
            format: OutputFormat::Json,
            alphas: vec![0.0, 1.0, 2.0],
            jacobian_samples: 1000,
            method: "auto".into(),
            check: None,
            volumes: None,
            chain: None,
            volume: None,
            sigma: 3.0,
            flow: FlowConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
    }

    /// Rejects values no command can use, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::Domain(format!("config field `{field}`: {why}")));
        if self.samples == 0 {
            return bad("samples", "must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers", "must be positive".into());
        }
        if !(self.sigma > 0.0) {
            return bad("sigma", format!("must be positive, got {}", self.sigma));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > -1.0)) {
            return bad("alphas", format!("exponents must exceed -1, got {a}"));
        }
        if !matches!(self.method.as_str(), "auto" | "quadrature") {
            return bad(
                "method",
                format!("expected `auto` or `quadrature`, got `{}`", self.method),
            );
        }
        let f = &self.flow;
        if !(f.volume > 0.0) {
            return bad("flow.volume", format!("must be positive, got {}", f.volume));
        }
        if !(f.tolerance > 0.0) {
            return bad("flow.tolerance", format!("must be positive, got {}", f.tolerance));
        }
        if f.resolution < 8 {
            return bad("flow.resolution", format!("must be at least 8, got {}", f.resolution));
        }
        if !(f.initial_step > 0.0) {
            return bad("flow.initial_step", format!("must be positive, got {}", f.initial_step));
        }
        if let Some(v) = &self.volumes {
            if let Err(e) = Range::parse(v) {
                return bad("volumes", e.to_string());
            }
        }
        Ok(())
    }

    pub fn body(&self) -> Result<Body> {
        self.body
            .as_ref()
            .ok_or_else(|| Error::Domain("config field `body`: required by this command".into()))?
            .build()
    }
}
