//! Versioned JSON run configuration.

use gapspec_core::certify::{DEFAULT_IM_CUTOFF_1D, DEFAULT_IM_CUTOFF_2D};
use gapspec_core::fem::{DiscretizationSpec, DEFAULT_QUADRATURE_ORDER, MIN_QUADRATURE_ORDER};
use gapspec_core::matpoly::{CompanionForm, CompanionVariant, Scaling};
use gapspec_core::potentials::{builtin, Builtin, PotentialSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// The only schema version this build reads.
pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable that overrides `outputs.dir`.
pub const OUT_DIR_ENV: &str = "GAPSPEC_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialRef {
    Builtin {
        builtin: String,
        #[serde(default)]
        c: f64,
    },
    Custom {
        custom: PotentialSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub half_width: f64,
    pub elements_per_axis: usize,
    #[serde(default = "default_quadrature")]
    pub quadrature_order: usize,
}

fn default_quadrature() -> usize {
    DEFAULT_QUADRATURE_ORDER
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScalingChoice {
    #[default]
    Identity,
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CompanionConfig {
    #[serde(default)]
    pub form: CompanionVariant,
    #[serde(default)]
    pub scaling: ScalingChoice,
}

impl CompanionConfig {
    pub fn to_form(self) -> CompanionForm {
        let scaling = match self.scaling {
            ScalingChoice::Identity => Scaling::Identity,
            ScalingChoice::Mass => Scaling::Mass,
        };
        CompanionForm::new(self.form, scaling)
    }
}

/// Fourier truncation of the 1D band computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    pub n_bands: usize,
    pub modes: usize,
}

impl Default for BandsConfig {
    fn default() -> Self {
        Self { n_bands: 5, modes: 32 }
    }
}

/// Rectangle `[re₀, re₁] × [im₀, im₁]` of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Window {
    pub fn contains(&self, re: f64, im: f64) -> bool {
        (self.re[0]..=self.re[1]).contains(&re) && (self.im[0]..=self.im[1]).contains(&im)
    }

    pub fn is_valid(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite()) && self.re[0] < self.re[1] && self.im[0] < self.im[1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_points")]
    pub points: String,
    #[serde(default = "default_enclosures")]
    pub enclosures: String,
    #[serde(default = "default_bands")]
    pub bands: String,
    #[serde(default = "default_scatter")]
    pub scatter: String,
    #[serde(default = "default_report")]
    pub report: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_points() -> String {
    "points.csv".into()
}
fn default_enclosures() -> String {
    "enclosures.json".into()
}
fn default_bands() -> String {
    "bands.json".into()
}
fn default_scatter() -> String {
    "scatter.svg".into()
}
fn default_report() -> String {
    "report.json".into()
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            points: default_points(),
            enclosures: default_enclosures(),
            bands: default_bands(),
            scatter: default_scatter(),
            report: default_report(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub potential: PotentialRef,
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub companion: CompanionConfig,
    /// `|Im μ|` cutoff for enclosures; defaults by dimension.
    #[serde(default)]
    pub im_cutoff: Option<f64>,
    #[serde(default)]
    pub bands: BandsConfig,
    /// Values of `s` for the Galerkin pollution report.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    /// Plot window of the scatter; defaults by dimension.
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

/// A configuration that passed validation, with names resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub raw: RunConfig,
    pub potential: PotentialSpec,
    pub discretization: DiscretizationSpec,
    pub companion: CompanionConfig,
    pub im_cutoff: f64,
    pub window: Window,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    /// Canonical JSON text, the input of the run digest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Output directory, honouring the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.outputs.dir.clone(),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        let potential = match &self.potential {
            PotentialRef::Builtin { builtin: name, c } => {
                let b: Builtin = name.parse().map_err(|e: gapspec_core::potentials::PotentialError| invalid("potential.builtin", e.to_string()))?;
                builtin(b, *c).map_err(|e| invalid("potential.c", e.to_string()))?
            }
            PotentialRef::Custom { custom } => {
                custom.validate().map_err(|e| invalid("potential.custom", e.to_string()))?;
                custom.clone()
            }
        };

        let d = &self.discretization;
        if !(d.half_width > 0.0) || !d.half_width.is_finite() {
            return Err(invalid("discretization.half_width", format!("must be positive and finite, got {}", d.half_width)));
        }
        if d.elements_per_axis < 2 {
            return Err(invalid("discretization.elements_per_axis", format!("must be at least 2, got {}", d.elements_per_axis)));
        }
        if d.quadrature_order < MIN_QUADRATURE_ORDER {
            return Err(invalid(
                "discretization.quadrature_order",
                format!("must be at least {MIN_QUADRATURE_ORDER}, got {}", d.quadrature_order),
            ));
        }
        let discretization = DiscretizationSpec::new(potential.dimension, d.half_width, d.elements_per_axis)
            .map_err(|e| invalid("discretization", e.to_string()))?
            .with_quadrature_order(d.quadrature_order);

        let im_cutoff = self.im_cutoff.unwrap_or(if potential.dimension == 1 { DEFAULT_IM_CUTOFF_1D } else { DEFAULT_IM_CUTOFF_2D });
        if !(im_cutoff > 0.0) || !im_cutoff.is_finite() {
            return Err(invalid("im_cutoff", format!("must be positive and finite, got {im_cutoff}")));
        }

        if self.bands.n_bands == 0 || self.bands.modes < 4 * self.bands.n_bands {
            return Err(invalid(
                "bands",
                format!("need n_bands ≥ 1 and modes ≥ 4·n_bands, got {} and {}", self.bands.n_bands, self.bands.modes),
            ));
        }

        if let Some(sweep) = &self.sweep {
            if sweep.len() < 3 {
                return Err(invalid("sweep", format!("needs at least 3 values of s, got {}", sweep.len())));
            }
            if let Some(s) = sweep.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
                return Err(invalid("sweep", format!("values must be positive and finite, got {s}")));
            }
        }

        let window = self.window.unwrap_or(if potential.dimension == 1 {
            Window { re: [-1.0, 2.0], im: [-0.25, 0.25] }
        } else {
            Window { re: [-1.0, 0.5], im: [-1.5, 1.5] }
        });
        if !window.is_valid() {
            return Err(invalid("window", "needs finite bounds with re[0] < re[1] and im[0] < im[1]"));
        }

        let outputs = &self.outputs;
        for (field, name) in [
            ("outputs.points", &outputs.points),
            ("outputs.enclosures", &outputs.enclosures),
            ("outputs.bands", &outputs.bands),
            ("outputs.scatter", &outputs.scatter),
            ("outputs.report", &outputs.report),
        ] {
            let p = Path::new(name);
            if name.is_empty() || p.file_name().map(|f| f != p.as_os_str()).unwrap_or(true) {
                return Err(invalid(field, format!("must be a plain file name, got {name:?}")));
            }
        }

        Ok(ResolvedConfig {
            raw: self.clone(),
            potential,
            discretization,
            companion: self.companion,
            im_cutoff,
            window,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "potential": {"builtin": "mathieu_gaussian"},
        "discretization": {"half_width": 10, "elements_per_axis": 40}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(MINIMAL).unwrap().resolve().unwrap();
        assert_eq!(c.im_cutoff, DEFAULT_IM_CUTOFF_1D);
        assert_eq!(c.discretization.quadrature_order, DEFAULT_QUADRATURE_ORDER);
        assert_eq!(c.raw.outputs.points, "points.csv");
        assert_eq!(c.companion, CompanionConfig::default());
        assert_eq!(c.companion.to_form().variant, CompanionVariant::Form1);
    }

    #[test]
    fn custom_potential() {
        let text = r#"{
            "schema": 1,
            "potential": {"custom": {"dimension": 2, "periodic": [{"amplitude": 1, "axis": 0}],
                                     "decaying": {"kind": "x_gaussian", "c": 3}}},
            "discretization": {"half_width": 3, "elements_per_axis": 6}
        }"#;
        let c = RunConfig::from_json(text).unwrap().resolve().unwrap();
        assert_eq!(c.potential.dimension, 2);
        assert_eq!(c.im_cutoff, DEFAULT_IM_CUTOFF_2D);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (MINIMAL.replace("\"half_width\": 10", "\"half_width\": -1"), "discretization.half_width"),
            (MINIMAL.replace("\"elements_per_axis\": 40", "\"elements_per_axis\": 1"), "discretization.elements_per_axis"),
            (MINIMAL.replace("mathieu_gaussian", "nope"), "potential.builtin"),
            (MINIMAL.replace("\"schema\": 1", "\"schema\": 9"), "schema"),
            (MINIMAL.replace("}\n    }", "},\n \"sweep\": [1, 2]}"), "sweep"),
        ];
        for (text, field) in cases {
            match RunConfig::from_json(&text).unwrap().resolve() {
                Err(ConfigError::Invalid { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected error on {field}, got {other:?}"),
            }
        }
        assert!(matches!(RunConfig::from_json("{\"schema\": 1}"), Err(ConfigError::Parse(_))));
    }
}
