//! End-to-end run: bands → assemble → pencil → spectrum → classify →
//! refine → (optional) pollution report.

use crate::config::{ConfigError, ResolvedConfig, RunConfig};
use gapspec_core::bands::{mathieu_band_edges, sum_bands, BandError, BandStructure};
use gapspec_core::certify::{classify, pollution_report, refine_all, CertifyError, Enclosure, PollutionReport, Refinement};
use gapspec_core::fem::{assemble, FemError};
use gapspec_core::matpoly::{make_pencil, pencil_spectrum, PencilError, SpectrumPoint};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Bands,
    Assemble,
    Pencil,
    Spectrum,
    Classify,
    Sweep,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Bands => "bands",
            Stage::Assemble => "assemble",
            Stage::Pencil => "pencil",
            Stage::Spectrum => "spectrum",
            Stage::Classify => "classify",
            Stage::Sweep => "sweep",
            Stage::Write => "write",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Bands(#[from] BandError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A failed run: which stage, for which input, and why.
#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed (config digest {digest}): {source}")]
pub struct RunError {
    pub stage: Stage,
    pub digest: String,
    #[source]
    pub source: StageError,
}

impl RunError {
    pub fn new(stage: Stage, digest: &str, source: impl Into<StageError>) -> Self {
        Self { stage, digest: digest.to_owned(), source: source.into() }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match &self.source {
            StageError::Config(ConfigError::Read { .. }) | StageError::Io(_) => 1,
            StageError::Config(_) | StageError::Bands(BandError::TooFewModes { .. } | BandError::BeyondResolved { .. }) => 2,
            _ => 3,
        }
    }
}

/// Short SHA-256 digest of the canonical configuration.
pub fn config_digest(config: &RunConfig) -> String {
    let hash = Sha256::digest(config.canonical_json().as_bytes());
    hex::encode(&hash[..8])
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub bands: Duration,
    pub assemble: Duration,
    pub spectrum: Duration,
    pub certify: Duration,
    pub sweep: Duration,
}

/// Numerical health of the run.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub asymmetry_defect: f64,
    pub bending_min_eigenvalue: f64,
    pub bending_norm: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ResolvedConfig,
    pub digest: String,
    pub bands: BandStructure,
    /// Dimension `n` of the trial space; there are `2n` spectrum points.
    pub n: usize,
    pub points: Vec<SpectrumPoint>,
    pub enclosures: Vec<Enclosure>,
    pub refined: Vec<Refinement>,
    pub pollution: Option<PollutionReport>,
    pub diagnostics: Diagnostics,
    pub timings: Timings,
}

/// Essential spectrum of the periodic part: Mathieu bands per axis, summed
/// over axes.
pub fn band_structure(config: &ResolvedConfig) -> Result<BandStructure, BandError> {
    let b = config.raw.bands;
    let mut total: Option<BandStructure> = None;
    for amplitude in config.potential.axis_amplitudes() {
        let axis = mathieu_band_edges(amplitude, b.n_bands, b.modes)?;
        total = Some(match total {
            None => axis,
            Some(t) => sum_bands(&t, &axis),
        });
    }
    Ok(total.expect("dimension is at least 1"))
}

/// Runs the pipeline. With `force_sweep` a missing `sweep` list is a
/// configuration error; otherwise the report is produced only if requested.
pub fn run(config: &RunConfig, force_sweep: bool) -> Result<RunResult, RunError> {
    let digest = config_digest(config);
    let fail = |stage: Stage| {
        let digest = digest.clone();
        move |e: StageError| RunError { stage, digest, source: e }
    };
    let resolved = config.resolve().map_err(|e| fail(Stage::Config)(e.into()))?;
    if force_sweep && config.sweep.is_none() {
        let e = ConfigError::Invalid { field: "sweep", reason: "required by the sweep command".into() };
        return Err(fail(Stage::Config)(e.into()));
    }
    let mut timings = Timings::default();

    let t = Instant::now();
    let bands = band_structure(&resolved).map_err(|e| fail(Stage::Bands)(e.into()))?;
    timings.bands = t.elapsed();

    let t = Instant::now();
    let mats = assemble(&resolved.discretization, &resolved.potential).map_err(|e| fail(Stage::Assemble)(e.into()))?;
    timings.assemble = t.elapsed();

    let t = Instant::now();
    let pencil = make_pencil(mats.bending.as_ref(), mats.stiffness.as_ref(), mats.mass.as_ref())
        .map_err(|e| fail(Stage::Pencil)(e.into()))?;
    let spectrum = pencil_spectrum(&pencil, &resolved.companion.to_form()).map_err(|e| fail(Stage::Spectrum)(e.into()))?;
    let (bending_min_eigenvalue, bending_norm) = pencil.bending_min_eigenvalue();
    let diagnostics = Diagnostics {
        asymmetry_defect: pencil.asymmetry_defect(),
        bending_min_eigenvalue,
        bending_norm,
        max_residual: spectrum.max_residual(),
    };
    timings.spectrum = t.elapsed();

    let t = Instant::now();
    let enclosures = classify(&spectrum.points, &bands, resolved.im_cutoff).map_err(|e| fail(Stage::Classify)(e.into()))?;
    let refined = refine_all(&enclosures, &bands);
    timings.certify = t.elapsed();

    let t = Instant::now();
    let pollution = match &config.sweep {
        Some(values) => Some(
            pollution_report(values, &resolved.discretization, &resolved.potential, &bands, &enclosures)
                .map_err(|e| fail(Stage::Sweep)(e.into()))?,
        ),
        None => None,
    };
    timings.sweep = t.elapsed();

    Ok(RunResult {
        n: pencil.n(),
        config: resolved,
        digest,
        bands,
        points: spectrum.points,
        enclosures,
        refined,
        pollution,
        diagnostics,
        timings,
    })
}
