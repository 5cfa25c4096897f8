//! Certified eigenvalue enclosures from the second-order spectrum.
//!
//! Every non-real point `μ` of the quadratic pencil spectrum certifies that
//! `[Re μ − |Im μ|, Re μ + |Im μ|]` meets `Spec(H)`. When that interval lies
//! inside a spectral gap the point of `Spec(H)` it finds must be a discrete
//! eigenvalue. If in addition the eigenvalue is known to be isolated by some
//! `δ`, the half-width tightens to `2(Im μ)²/δ`.
//!
//! The Galerkin pollution report is a heuristic comparison, not a certificate.

use crate::bands::{BandStructure, Gap};
use crate::fem::{assemble, DiscretizationSpec, FemError};
use crate::matpoly::{galerkin_spectrum, PencilError, SpectrumPoint};
use crate::potentials::PotentialSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default `|Im μ|` cutoff for one-dimensional runs.
pub const DEFAULT_IM_CUTOFF_1D: f64 = 0.05;
/// Default `|Im μ|` cutoff for two-dimensional runs.
pub const DEFAULT_IM_CUTOFF_2D: f64 = 0.15;
/// Fraction of the measured isolation distance used as `δ`; leaves room
/// for the truncation error in computed band edges.
pub const DELTA_SAFETY: f64 = 0.9;
/// Inflation of certified enclosures before a Galerkin value counts as
/// unexplained. A reporting heuristic only.
pub const SPURIOUS_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertifyError {
    #[error("imaginary-part cutoff must be positive and finite, got {0}")]
    BadCutoff(f64),
    #[error("a pollution sweep needs at least 3 values of s, got {0}")]
    TooFewSweepValues(usize),
    #[error("sweep value s = {0} is not a positive finite number")]
    BadSweepValue(f64),
    #[error("assembly failed at s = {s}: {source}")]
    Assembly { s: f64, source: FemError },
    #[error("Galerkin solve failed at s = {s}: {source}")]
    Galerkin { s: f64, source: PencilError },
}

/// Real interval `[center − half_width, center + half_width]` known to
/// contain a point of `Spec(H)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub center: f64,
    pub half_width: f64,
    pub source_point: SpectrumPoint,
    /// Gap (numbered by the count of bands below it) containing the whole
    /// closed interval; `None` if it touches or crosses a band.
    pub gap_index: Option<usize>,
    pub refined: bool,
    /// Isolation bound used by the refinement, if any.
    pub delta: Option<f64>,
}

impl Enclosure {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() <= self.half_width
    }

    /// Half-width of the first-order interval, `|Im μ|`.
    pub fn est1_half_width(&self) -> f64 {
        self.source_point.mu.im.abs()
    }

    /// Distance from `x` to the interval, `0` inside it.
    pub fn distance_to(&self, x: f64) -> f64 {
        ((x - self.center).abs() - self.half_width).max(0.0)
    }

    fn est1_bounds(&self) -> (f64, f64) {
        let w = self.est1_half_width();
        (self.center - w, self.center + w)
    }
}

/// First-order enclosure `[Re μ − |Im μ|, Re μ + |Im μ|]`.
pub fn enclose(mu: &SpectrumPoint) -> Enclosure {
    Enclosure {
        center: mu.mu.re,
        half_width: mu.mu.im.abs(),
        source_point: *mu,
        gap_index: None,
        refined: false,
        delta: None,
    }
}

/// Why a refinement was not applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RefineRefusal {
    #[error("isolation bound δ = {delta} is not a positive finite number")]
    InvalidDelta { delta: f64 },
    #[error("first-order interval of width {width} is not below δ/2 = {}", delta / 2.0)]
    TooWide { width: f64, delta: f64 },
    #[error("interval is only {distance} away from the rest of the spectrum, less than δ = {delta}")]
    NotIsolated { distance: f64, delta: f64 },
    #[error("enclosure does not lie inside a spectral gap")]
    NotInGap,
}

/// Result of a refinement attempt: the enclosure (unchanged when refused)
/// and the reason for any refusal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub enclosure: Enclosure,
    pub refusal: Option<RefineRefusal>,
}

/// Quadratic refinement with a caller-verified isolation bound `delta`.
///
/// Requires the full first-order interval to be narrower than `δ/2`, which
/// guarantees `|μ − λ| < δ/2`. On success the half-width becomes
/// `min(|Im μ|, 2(Im μ)²/δ)`. The result depends only on the source point
/// and `delta`, so refining twice is the same as refining once.
pub fn refine(e: &Enclosure, delta: f64) -> Refinement {
    if !(delta > 0.0) || !delta.is_finite() {
        return refused(e, RefineRefusal::InvalidDelta { delta });
    }
    let im = e.est1_half_width();
    let width = 2.0 * im;
    if width >= delta / 2.0 {
        return refused(e, RefineRefusal::TooWide { width, delta });
    }
    let half_width = (2.0 * im * im / delta).min(im).min(e.half_width);
    Refinement {
        enclosure: Enclosure { half_width, refined: true, delta: Some(delta), ..*e },
        refusal: None,
    }
}

fn refused(e: &Enclosure, why: RefineRefusal) -> Refinement {
    Refinement { enclosure: *e, refusal: Some(why) }
}

/// Distance from the first-order interval of `e` to the bands and to the
/// first-order intervals of `others` (entries equal to `e` are skipped).
pub fn isolation_distance(e: &Enclosure, bs: &BandStructure, others: &[Enclosure]) -> f64 {
    let (lo, hi) = e.est1_bounds();
    let to_bands = bs.distance_to_bands(lo).min(bs.distance_to_bands(hi));
    let crosses_band = bs.bands().iter().any(|b| b.lower <= hi && b.upper.map_or(true, |u| u >= lo));
    if crosses_band {
        return 0.0;
    }
    others
        .iter()
        .filter(|o| *o != e)
        .map(|o| {
            let (a, b) = o.est1_bounds();
            (a - hi).max(lo - b).max(0.0)
        })
        .fold(to_bands, f64::min)
}

/// Refinement that checks isolation itself: `delta` must not exceed the
/// distance from the enclosure to the bands and to every other enclosure.
pub fn refine_isolated(e: &Enclosure, delta: f64, bs: &BandStructure, others: &[Enclosure]) -> Refinement {
    if e.gap_index.is_none() {
        return refused(e, RefineRefusal::NotInGap);
    }
    let distance = isolation_distance(e, bs, others);
    if delta.is_finite() && delta > distance {
        return refused(e, RefineRefusal::NotIsolated { distance, delta });
    }
    refine(e, delta)
}

/// Refines every enclosure with `δ = 0.9 ×` its isolation distance.
pub fn refine_all(enclosures: &[Enclosure], bs: &BandStructure) -> Vec<Refinement> {
    enclosures
        .iter()
        .map(|e| {
            let delta = DELTA_SAFETY * isolation_distance(e, bs, enclosures);
            refine_isolated(e, delta, bs, enclosures)
        })
        .collect()
}

/// Keeps the spectrum points whose first-order enclosure lies strictly
/// inside a gap of `bs` (finite, or below the first band), merges
/// overlapping enclosures within each gap keeping the tightest, and tags
/// the survivors with their gap index. Output is sorted by center.
pub fn classify(points: &[SpectrumPoint], bs: &BandStructure, im_cutoff: f64) -> Result<Vec<Enclosure>, CertifyError> {
    if !(im_cutoff > 0.0) || !im_cutoff.is_finite() {
        return Err(CertifyError::BadCutoff(im_cutoff));
    }
    let gaps = bs.all_gaps();
    let mut kept: Vec<Enclosure> = points
        .iter()
        .filter(|p| p.mu.re.is_finite() && p.mu.im.is_finite() && p.mu.im.abs() <= im_cutoff)
        .filter_map(|p| {
            let e = enclose(p);
            let gap = gaps.iter().find(|g| g.contains_interval(e.lower(), e.upper()))?;
            Some(Enclosure { gap_index: Some(gap.index), ..e })
        })
        .collect();
    kept.sort_by(|a, b| {
        a.gap_index
            .cmp(&b.gap_index)
            .then(a.lower().total_cmp(&b.lower()))
            .then(a.half_width.total_cmp(&b.half_width))
    });

    let mut out: Vec<Enclosure> = Vec::new();
    let mut cluster_end = f64::NEG_INFINITY;
    let mut cluster_gap = None;
    for e in kept {
        let joins = cluster_gap == e.gap_index && e.lower() <= cluster_end && !out.is_empty();
        if joins {
            cluster_end = cluster_end.max(e.upper());
            let rep = out.last_mut().expect("cluster has a representative");
            if e.half_width < rep.half_width {
                *rep = e;
            }
        } else {
            cluster_end = e.upper();
            cluster_gap = e.gap_index;
            out.push(e);
        }
    }
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(out)
}

/// Galerkin eigenvalues at one truncation size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub s: f64,
    pub elements_per_axis: usize,
    pub eigenvalues: Vec<f64>,
}

/// A Galerkin eigenvalue in a finite gap that no certified enclosure explains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpuriousCandidate {
    pub s: f64,
    pub value: f64,
    pub gap_index: usize,
    /// Distance to the nearest certified enclosure, if there is any.
    pub distance: Option<f64>,
    /// Spread `max − min` across the sweep of the nearest Galerkin value not
    /// explained by a certified enclosure. A value that exists only for some
    /// `s` is tracked onto whatever lies nearest elsewhere, so appearing and
    /// vanishing shows up as large drift.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollutionReport {
    pub sweep: Vec<SweepEntry>,
    pub certified: Vec<Enclosure>,
    pub spurious_candidates: Vec<SpuriousCandidate>,
    /// For each certified enclosure, spread of the nearest Galerkin
    /// eigenvalue across the sweep.
    pub certified_drift: Vec<f64>,
    pub margin: f64,
}

impl PollutionReport {
    pub fn max_certified_drift(&self) -> f64 {
        self.certified_drift.iter().copied().fold(0.0, f64::max)
    }
}

/// Discretization for truncation size `s`, keeping the template's mesh
/// width so every run of a sweep has the same resolution.
pub fn sweep_discretization(template: &DiscretizationSpec, s: f64) -> DiscretizationSpec {
    let h = template.mesh_size();
    let m = ((2.0 * s / h).round() as usize).max(2);
    DiscretizationSpec { half_width: s, elements_per_axis: m, ..template.clone() }
}

/// Runs the Galerkin method for each `s` and flags eigenvalues that sit in
/// a finite gap but outside every certified enclosure inflated by
/// [`SPURIOUS_MARGIN`].
pub fn pollution_report(
    sweep_values: &[f64],
    template: &DiscretizationSpec,
    pot: &PotentialSpec,
    bs: &BandStructure,
    certified: &[Enclosure],
) -> Result<PollutionReport, CertifyError> {
    if sweep_values.len() < 3 {
        return Err(CertifyError::TooFewSweepValues(sweep_values.len()));
    }
    if let Some(&s) = sweep_values.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(CertifyError::BadSweepValue(s));
    }
    let sweep = sweep_values
        .par_iter()
        .map(|&s| {
            let spec = sweep_discretization(template, s);
            let m = assemble(&spec, pot).map_err(|source| CertifyError::Assembly { s, source })?;
            let eigenvalues = galerkin_spectrum(m.stiffness.as_ref(), m.mass.as_ref())
                .map_err(|source| CertifyError::Galerkin { s, source })?;
            Ok(SweepEntry { s, elements_per_axis: spec.elements_per_axis, eigenvalues })
        })
        .collect::<Result<Vec<_>, CertifyError>>()?;
    Ok(pollution_from_sweep(sweep, bs, certified))
}

/// Analysis half of [`pollution_report`] for precomputed Galerkin spectra.
pub fn pollution_from_sweep(sweep: Vec<SweepEntry>, bs: &BandStructure, certified: &[Enclosure]) -> PollutionReport {
    let finite_gaps: Vec<Gap> = bs.all_gaps().into_iter().filter(Gap::is_finite).collect();
    let unexplained = |x: f64| certified.iter().all(|e| e.distance_to(x) > SPURIOUS_MARGIN);
    let gap_of = |x: f64| finite_gaps.iter().find(|g| g.contains(x)).map(|g| g.index);

    let mut spurious = Vec::new();
    for entry in &sweep {
        for &value in &entry.eigenvalues {
            let Some(gap_index) = gap_of(value) else { continue };
            if !unexplained(value) {
                continue;
            }
            let tracked: Vec<f64> = sweep
                .iter()
                .filter_map(|other| {
                    other
                        .eigenvalues
                        .iter()
                        .copied()
                        .filter(|&x| unexplained(x))
                        .min_by(|a, b| (a - value).abs().total_cmp(&(b - value).abs()))
                })
                .collect();
            let distance = certified.iter().map(|e| e.distance_to(value)).reduce(f64::min);
            spurious.push(SpuriousCandidate { s: entry.s, value, gap_index, distance, drift: spread(&tracked) });
        }
    }

    let certified_drift = certified
        .iter()
        .map(|e| {
            let nearest: Vec<f64> = sweep
                .iter()
                .filter_map(|entry| {
                    entry
                        .eigenvalues
                        .iter()
                        .copied()
                        .min_by(|a, b| (a - e.center).abs().total_cmp(&(b - e.center).abs()))
                })
                .collect();
            spread(&nearest)
        })
        .collect();

    PollutionReport {
        sweep,
        certified: certified.to_vec(),
        spurious_candidates: spurious,
        certified_drift,
        margin: SPURIOUS_MARGIN,
    }
}

fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if xs.is_empty() {
        0.0
    } else {
        max - min
    }
}
