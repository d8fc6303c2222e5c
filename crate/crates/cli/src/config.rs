//! Run configuration: a TOML file, command-line overrides on top, then validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tamed_core::report::{to_value, ReportMeta};
use tamed_core::tone::{DeltaChoice, MassKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub surface: SurfaceConfig,
    pub mesh: MeshConfig,
    pub radii: RadiiConfig,
    pub analysis: AnalysisConfig,
    pub flow: FlowConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    /// Catalog name with parameters, e.g. `helicoid(1)`.
    pub name: String,
    /// Explicit parameter window `[u0, u1, v0, v1]`; sized from the radii when absent.
    pub window: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub resolution: usize,
    /// Window margin beyond the largest radius.
    pub margin: f64,
    pub mass: MassChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiiConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub c: f64,
    pub delta: DeltaSetting,
    pub tail_fraction: f64,
    /// Euler characteristic for the sandwich; the mesh value of the largest ball when absent.
    pub chi: Option<i64>,
    /// Gauss-Bonnet annulus `[r1, r2]`; the first and last radii when absent.
    pub annulus: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub trajectories: usize,
    /// Starting extrinsic radius; the core radius `t_c` when absent.
    pub r0: Option<f64>,
    pub length: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Exponent tolerance of the growth verdicts.
    pub growth: f64,
    /// Relative slack of the Chern-Osserman sandwich.
    pub sandwich: f64,
    pub shiohama: f64,
    pub gauss_bonnet: f64,
    pub flow: f64,
    pub eigen: f64,
    pub tamed_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSetting {
    Zero,
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassChoice {
    Consistent,
    Lumped,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_917,
            surface: SurfaceConfig::default(),
            mesh: MeshConfig::default(),
            radii: RadiiConfig::default(),
            analysis: AnalysisConfig::default(),
            flow: FlowConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            name: "catenoid".into(),
            window: None,
        }
    }
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            resolution: 256,
            margin: 1.05,
            mass: MassChoice::Consistent,
        }
    }
}

impl Default for RadiiConfig {
    fn default() -> Self {
        Self {
            start: 4.0,
            stop: 32.0,
            count: 8,
            log: false,
        }
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            c: 0.5,
            delta: DeltaSetting::Measured,
            tail_fraction: 0.5,
            chi: None,
            annulus: None,
        }
    }
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            trajectories: 20,
            r0: None,
            length: 16.0,
            step: 0.05,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            growth: 0.1,
            sandwich: 0.05,
            shiohama: 0.1,
            gauss_bonnet: 2e-2,
            flow: 1e-9,
            eigen: 1e-8,
            tamed_slack: 0.05,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl From<DeltaSetting> for DeltaChoice {
    fn from(d: DeltaSetting) -> Self {
        match d {
            DeltaSetting::Zero => DeltaChoice::Zero,
            DeltaSetting::Measured => DeltaChoice::Measured,
        }
    }
}

impl From<MassChoice> for MassKind {
    fn from(m: MassChoice) -> Self {
        match m {
            MassChoice::Consistent => MassKind::Consistent,
            MassChoice::Lumped => MassKind::Lumped,
        }
    }
}

/// Invalid configuration: TOML syntax, unknown or mistyped fields, or a value
/// outside its admissible range.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.source, self.message.trim_end())
    }
}

impl std::error::Error for ConfigError {}

impl RadiiConfig {
    /// `START:STOP:COUNT[:log]`.
    pub fn parse_spec(spec: &str) -> Result<Self, String> {
        let parts: Vec<&str> = spec.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected START:STOP:COUNT[:log], got `{spec}`"));
        }
        let num = |s: &str, what: &str| s.trim().parse::<f64>().map_err(|_| format!("bad {what} `{s}`"));
        let log = match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") | Some("linear") => false,
            Some("log") => true,
            Some(other) => return Err(format!("spacing must be `log` or `lin`, got `{other}`")),
        };
        Ok(Self {
            start: num(parts[0], "START")?,
            stop: num(parts[1], "STOP")?,
            count: parts[2]
                .trim()
                .parse()
                .map_err(|_| format!("bad COUNT `{}`", parts[2]))?,
            log,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                if k == 0 {
                    self.start
                } else if k == n - 1 {
                    self.stop
                } else if self.log {
                    (self.start.ln() + s * (self.stop / self.start).ln()).exp()
                } else {
                    self.start + s * (self.stop - self.start)
                }
            })
            .collect()
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, source: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError {
            source: source.into(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Range checks, reported as `field: problem`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, msg: String| {
            Err(ConfigError {
                source: format!("field `{field}`"),
                message: msg,
            })
        };
        let r = &self.radii;
        if r.count < 2 {
            return bad("radii.count", format!("need at least 2 radii, got {}", r.count));
        }
        if !(r.start > 0.0 && r.stop > r.start && r.stop.is_finite()) {
            return bad(
                "radii",
                format!("need 0 < start < stop, got start = {}, stop = {}", r.start, r.stop),
            );
        }
        if self.mesh.resolution < 16 {
            return bad(
                "mesh.resolution",
                format!("must be at least 16, got {}", self.mesh.resolution),
            );
        }
        if !(self.mesh.margin >= 1.0) {
            return bad("mesh.margin", format!("must be at least 1, got {}", self.mesh.margin));
        }
        let c = self.analysis.c;
        if !(c > 0.0 && c < 1.0) {
            return bad("analysis.c", format!("must lie in (0, 1), got {c}"));
        }
        let tf = self.analysis.tail_fraction;
        if !(tf > 0.0 && tf <= 1.0) {
            return bad("analysis.tail_fraction", format!("must lie in (0, 1], got {tf}"));
        }
        if let Some([a, b]) = self.analysis.annulus {
            if !(a >= 0.0 && b > a) {
                return bad("analysis.annulus", format!("need 0 <= r1 < r2, got [{a}, {b}]"));
            }
        }
        if let Some([u0, u1, v0, v1]) = self.surface.window {
            if !(u1 > u0 && v1 > v0) {
                return bad("surface.window", "need u0 < u1 and v0 < v1".into());
            }
        }
        let f = &self.flow;
        if f.trajectories == 0 || !(f.length > 0.0) || !(f.step > 0.0 && f.step < f.length) {
            return bad("flow", "need trajectories >= 1 and 0 < step < length".into());
        }
        for (name, v) in self.tolerance_map() {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("tolerances.{name}"), format!("must be positive, got {v}"));
            }
        }
        tamed_core::surface::catalog::<f64>(&self.surface.name).map_err(|e| ConfigError {
            source: "field `surface.name`".into(),
            message: e.to_string(),
        })?;
        Ok(())
    }

    pub fn tolerance_map(&self) -> BTreeMap<String, f64> {
        let t = &self.tolerances;
        [
            ("growth", t.growth),
            ("sandwich", t.sandwich),
            ("shiohama", t.shiohama),
            ("gauss_bonnet", t.gauss_bonnet),
            ("flow", t.flow),
            ("eigen", t.eigen),
            ("tamed_slack", t.tamed_slack),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// SHA-256 of the canonical JSON form (sorted keys, 17-digit floats). The
    /// output location is excluded so the same analysis hashes the same anywhere.
    pub fn hash(&self) -> String {
        let mut cfg = self.clone();
        cfg.output.dir = PathBuf::new();
        let canonical = to_value(&cfg).map(|v| v.to_string()).unwrap_or_default();
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn meta(&self) -> ReportMeta {
        ReportMeta {
            config_hash: self.hash(),
            tolerances: self.tolerance_map(),
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_matches_builtin() {
        let text = include_str!("../../../configs/default.toml");
        let cfg = RunConfig::from_toml(text, "default.toml").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_located() {
        let err = RunConfig::from_toml("[mesh]\nresolution = 64\nrezolution = 3\n", "x.toml").unwrap_err();
        assert!(err.message.contains("line 3"), "{err}");
        assert!(err.message.contains("rezolution"), "{err}");
        let err = RunConfig::from_toml("[radii]\ncount = \"eight\"\n", "x.toml").unwrap_err();
        assert!(err.message.contains("line 2"), "{err}");
    }

    #[test]
    fn ranges_are_enforced() {
        let mut cfg = RunConfig::default();
        cfg.analysis.c = 1.0;
        assert!(cfg.validate().unwrap_err().source.contains("analysis.c"));
        let mut cfg = RunConfig::default();
        cfg.mesh.resolution = 8;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.radii.stop = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.surface.name = "torus".into();
        assert!(cfg.validate().unwrap_err().source.contains("surface.name"));
    }

    #[test]
    fn radii_specs_parse() {
        let r = RadiiConfig::parse_spec("1:100:3:log").unwrap();
        let v = r.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(RadiiConfig::parse_spec("1:8:8").unwrap().values()[7], 8.0);
        assert!(RadiiConfig::parse_spec("1:8").is_err());
        assert!(RadiiConfig::parse_spec("1:8:3:cubic").is_err());
    }

    #[test]
    fn hash_tracks_analysis_not_output() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output.dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.analysis.c = 0.4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
