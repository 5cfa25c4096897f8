//! Essential spectrum of the unperturbed periodic operator.
//!
//! In 1D the band edges of `−u″ + a·cos(x)·u` sit at the periodic and
//! antiperiodic eigenvalues on one `2π` cell, obtained here from Fourier
//! truncations of the Hill matrix. Separable 2D lattices are handled by
//! Minkowski sums of the 1D band sets.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BandError {
    #[error("need at least 4 Fourier modes per requested band: {modes} modes for {n_bands} bands")]
    TooFewModes { modes: usize, n_bands: usize },
    #[error("requested {requested} bands but only {resolved} are resolved")]
    BeyondResolved { requested: usize, resolved: usize },
    #[error("band {index} is malformed: lower {lower}, upper {upper:?}")]
    Malformed { index: usize, lower: f64, upper: Option<f64> },
    #[error("bands {index} and {next} overlap or are out of order")]
    Overlap { index: usize, next: usize },
    #[error("only the last band may be unbounded")]
    InteriorInfinite,
    #[error("amplitude must be finite")]
    NonFiniteAmplitude,
    #[error("eigensolver failed on the Hill matrix")]
    Eigensolver,
}

/// Closed interval `[lower, upper]`; `upper = None` means `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Band {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper: Some(upper) }
    }

    pub fn unbounded(lower: f64) -> Self {
        Self { lower, upper: None }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && self.upper.map_or(true, |u| x <= u)
    }
}

/// Open interval `(lower, upper)` of the resolvent set; `lower = None` is `−∞`.
///
/// `index` is the number of bands below the gap, so index 0 is the
/// semi-infinite gap under the first band and index `k` lies between bands
/// `k` and `k + 1` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub index: usize,
    pub lower: Option<f64>,
    pub upper: f64,
}

impl Gap {
    pub fn is_finite(&self) -> bool {
        self.lower.is_some()
    }

    pub fn contains(&self, x: f64) -> bool {
        x < self.upper && self.lower.map_or(true, |l| x > l)
    }

    /// Whether the closed interval `[a, b]` lies strictly inside the gap.
    pub fn contains_interval(&self, a: f64, b: f64) -> bool {
        self.contains(a) && self.contains(b)
    }

    pub fn width(&self) -> f64 {
        self.lower.map_or(f64::INFINITY, |l| self.upper - l)
    }
}

/// Sorted bands of essential spectrum.
///
/// `known_up_to` marks a truncated description: above that energy the
/// structure says nothing (e.g. the first `n` Mathieu bands). `None` means
/// the listed bands are the whole essential spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    bands: Vec<Band>,
    known_up_to: Option<f64>,
}

impl BandStructure {
    pub fn new(bands: Vec<Band>, known_up_to: Option<f64>) -> Result<Self, BandError> {
        for (i, b) in bands.iter().enumerate() {
            let bad = !b.lower.is_finite() || b.upper.is_some_and(|u| !u.is_finite() || u < b.lower);
            if bad {
                return Err(BandError::Malformed { index: i, lower: b.lower, upper: b.upper });
            }
        }
        for (i, w) in bands.windows(2).enumerate() {
            match w[0].upper {
                None => return Err(BandError::InteriorInfinite),
                Some(u) if u > w[1].lower => return Err(BandError::Overlap { index: i, next: i + 1 }),
                _ => {}
            }
        }
        let known_up_to = match bands.last() {
            Some(Band { upper: None, .. }) => None,
            _ => known_up_to,
        };
        Ok(Self { bands, known_up_to })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn known_up_to(&self) -> Option<f64> {
        self.known_up_to
    }

    pub fn bottom(&self) -> Option<f64> {
        self.bands.first().map(|b| b.lower)
    }

    /// Every nonempty gap, including the semi-infinite one below the bottom.
    /// Touching bands produce no gap.
    pub fn all_gaps(&self) -> Vec<Gap> {
        let Some(first) = self.bands.first() else {
            return vec![];
        };
        let mut out = vec![Gap { index: 0, lower: None, upper: first.lower }];
        for (k, w) in self.bands.windows(2).enumerate() {
            let lo = w[0].upper.expect("interior bands are bounded");
            if lo < w[1].lower {
                out.push(Gap { index: k + 1, lower: Some(lo), upper: w[1].lower });
            }
        }
        out
    }

    /// Gap containing `x`, if any.
    pub fn gap_of(&self, x: f64) -> Option<Gap> {
        self.all_gaps().into_iter().find(|g| g.contains(x))
    }

    /// Whether `x` lies on a band.
    pub fn in_spectrum(&self, x: f64) -> bool {
        self.bands.iter().any(|b| b.contains(x))
    }

    /// Distance from `x` to the nearest band, `0` on a band.
    pub fn distance_to_bands(&self, x: f64) -> f64 {
        self.bands
            .iter()
            .map(|b| {
                if b.contains(x) {
                    0.0
                } else if x < b.lower {
                    b.lower - x
                } else {
                    x - b.upper.unwrap_or(f64::INFINITY)
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Finite gaps clipped to `window`, plus the semi-infinite gap below the
/// first band when it reaches into the window.
pub fn gaps(b: &BandStructure, window: (f64, f64)) -> Vec<Gap> {
    let (lo, hi) = window;
    let mut out = Vec::new();
    for g in b.all_gaps() {
        match g.lower {
            None => {
                if g.upper > lo {
                    out.push(g);
                }
            }
            Some(l) => {
                let (a, c) = (l.max(lo), g.upper.min(hi));
                if a < c {
                    out.push(Gap { index: g.index, lower: Some(a), upper: c });
                }
            }
        }
    }
    out
}

/// Eigenvalues of the Hill matrix of `−u″ + a·cos(x)·u` over the Fourier
/// modes `k + offset`, `|k| ≤ modes` (`offset` 0: periodic, ½: antiperiodic).
fn hill_eigenvalues(amplitude: f64, modes: usize, antiperiodic: bool) -> Result<Vec<f64>, BandError> {
    let ks: Vec<f64> = if antiperiodic {
        (-(modes as i64) - 1..=modes as i64).map(|j| j as f64 + 0.5).collect()
    } else {
        (-(modes as i64)..=modes as i64).map(|j| j as f64).collect()
    };
    let n = ks.len();
    let h = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            ks[i] * ks[i]
        } else if i.abs_diff(j) == 1 {
            0.5 * amplitude
        } else {
            0.0
        }
    });
    let mut ev = h.self_adjoint_eigenvalues(Side::Lower).map_err(|_| BandError::Eigensolver)?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// First `n_bands` bands of `−u″ + amplitude·cos(x)·u`.
///
/// With sorted periodic eigenvalues `p₀ < p₁ ≤ p₂ < …` and antiperiodic
/// ones `a₀ ≤ a₁ < a₂ ≤ …`, band `k` (0-based) is `[min(p_k, a_k), max(p_k, a_k)]`.
pub fn mathieu_band_edges(amplitude: f64, n_bands: usize, modes: usize) -> Result<BandStructure, BandError> {
    if !amplitude.is_finite() {
        return Err(BandError::NonFiniteAmplitude);
    }
    if n_bands == 0 || modes < 4 * n_bands {
        return Err(BandError::TooFewModes { modes, n_bands });
    }
    let periodic = hill_eigenvalues(amplitude, modes, false)?;
    let antiperiodic = hill_eigenvalues(amplitude, modes, true)?;
    // upper half of a truncated spectrum is polluted by the cut-off
    let resolved = modes;
    if n_bands > resolved {
        return Err(BandError::BeyondResolved { requested: n_bands, resolved });
    }
    let bands: Vec<Band> = (0..n_bands)
        .map(|k| {
            let (p, a) = (periodic[k], antiperiodic[k]);
            Band::new(p.min(a), p.max(a))
        })
        .collect();
    let top = bands.last().and_then(|b| b.upper);
    BandStructure::new(bands, top)
}

/// Minkowski sum `{λ + μ}` of two band structures, merged into maximal
/// disjoint intervals.
///
/// If either input is truncated the sum is only meaningful below
/// `E* = min(known_up_to₁ + bottom₂, known_up_to₂ + bottom₁)`; a merged band
/// reaching `E*` is taken to continue to `+∞` (overlaps have become
/// permanent), and anything starting above `E*` is discarded.
pub fn sum_bands(b1: &BandStructure, b2: &BandStructure) -> BandStructure {
    let mut sums: Vec<Band> = Vec::with_capacity(b1.bands.len() * b2.bands.len());
    for x in &b1.bands {
        for y in &b2.bands {
            let upper = match (x.upper, y.upper) {
                (Some(u), Some(v)) => Some(u + v),
                _ => None,
            };
            sums.push(Band { lower: x.lower + y.lower, upper });
        }
    }
    sums.sort_by(|a, b| a.lower.total_cmp(&b.lower));

    let mut merged: Vec<Band> = Vec::new();
    for band in sums {
        match merged.last_mut() {
            Some(last) if last.upper.map_or(true, |u| band.lower <= u) => {
                last.upper = match (last.upper, band.upper) {
                    (Some(u), Some(v)) => Some(u.max(v)),
                    _ => None,
                };
            }
            _ => merged.push(band),
        }
    }

    let horizon = [
        b1.known_up_to.zip(b2.bottom()).map(|(k, b)| k + b),
        b2.known_up_to.zip(b1.bottom()).map(|(k, b)| k + b),
    ]
    .into_iter()
    .flatten()
    .reduce(f64::min);

    let known_up_to = match horizon {
        None => None,
        Some(e) => {
            merged.retain(|b| b.lower < e);
            match merged.last_mut() {
                Some(last) if last.upper.map_or(true, |u| u >= e) => {
                    last.upper = None;
                    None
                }
                _ => Some(e),
            }
        }
    };
    BandStructure::new(merged, known_up_to).expect("merged bands are sorted and disjoint")
}
