//! Closed-form potentials `V = V_p + V_d` on the square lattice `(2πℤ)^N`.
//!
//! The periodic part is a sum of cosines along coordinate axes; the
//! decaying part is one of a small catalog of Gaussian-type perturbations.
//! New shapes are added by extending [`DecayingPart`] and its `eval` arm.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("unknown builtin potential '{0}'")]
    UnknownName(String),
    #[error("coupling constant must be positive for {name}, got {c}")]
    NonPositiveCoupling { name: &'static str, c: f64 },
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("cosine term on axis {axis} does not exist in dimension {dimension}")]
    BadAxis { axis: usize, dimension: usize },
    #[error("non-finite parameter in potential")]
    NonFinite,
}

/// `amplitude · cos(x_axis)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineTerm {
    pub amplitude: f64,
    pub axis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayingPart {
    None,
    /// `−c · exp(−|x|²)`
    Gaussian { c: f64 },
    /// `−c · x₁ · exp(−|x|²)`
    XGaussian { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub dimension: usize,
    pub periodic: Vec<CosineTerm>,
    pub decaying: DecayingPart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// 1D: `cos x − exp(−x²)`.
    MathieuGaussian,
    /// 2D: `cos x + cos y`.
    H0,
    /// 2D: `cos x + cos y − c·exp(−(x²+y²))`.
    H1,
    /// 2D: `cos x + cos y − c·x·exp(−(x²+y²))`.
    H2,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::MathieuGaussian => "mathieu_gaussian",
            Builtin::H0 => "h0",
            Builtin::H1 => "h1",
            Builtin::H2 => "h2",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = PotentialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "mathieu_gaussian" => Ok(Builtin::MathieuGaussian),
            "h0" => Ok(Builtin::H0),
            "h1" => Ok(Builtin::H1),
            "h2" => Ok(Builtin::H2),
            _ => Err(PotentialError::UnknownName(s.to_string())),
        }
    }
}

/// Builds one of the catalog potentials. `c` is ignored for `H0` and
/// `MathieuGaussian` (the latter always uses unit coupling).
pub fn builtin(name: Builtin, c: f64) -> Result<PotentialSpec, PotentialError> {
    let lattice_2d = vec![
        CosineTerm { amplitude: 1.0, axis: 0 },
        CosineTerm { amplitude: 1.0, axis: 1 },
    ];
    let spec = match name {
        Builtin::MathieuGaussian => PotentialSpec {
            dimension: 1,
            periodic: vec![CosineTerm { amplitude: 1.0, axis: 0 }],
            decaying: DecayingPart::Gaussian { c: 1.0 },
        },
        Builtin::H0 => PotentialSpec {
            dimension: 2,
            periodic: lattice_2d,
            decaying: DecayingPart::None,
        },
        Builtin::H1 | Builtin::H2 => {
            if !(c > 0.0) || !c.is_finite() {
                return Err(PotentialError::NonPositiveCoupling { name: name.name(), c });
            }
            let decaying = if name == Builtin::H1 {
                DecayingPart::Gaussian { c }
            } else {
                DecayingPart::XGaussian { c }
            };
            PotentialSpec { dimension: 2, periodic: lattice_2d, decaying }
        }
    };
    Ok(spec)
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<(), PotentialError> {
        if !(1..=2).contains(&self.dimension) {
            return Err(PotentialError::BadDimension(self.dimension));
        }
        for term in &self.periodic {
            if term.axis >= self.dimension {
                return Err(PotentialError::BadAxis { axis: term.axis, dimension: self.dimension });
            }
            if !term.amplitude.is_finite() {
                return Err(PotentialError::NonFinite);
            }
        }
        match self.decaying {
            DecayingPart::Gaussian { c } | DecayingPart::XGaussian { c } if !c.is_finite() => {
                Err(PotentialError::NonFinite)
            }
            _ => Ok(()),
        }
    }

    /// Total cosine amplitude along each axis.
    pub fn axis_amplitudes(&self) -> Vec<f64> {
        let mut amps = vec![0.0; self.dimension];
        for term in &self.periodic {
            amps[term.axis] += term.amplitude;
        }
        amps
    }

    pub fn periodic_part(&self, x: &[f64]) -> f64 {
        self.periodic.iter().map(|t| t.amplitude * x[t.axis].cos()).sum()
    }

    pub fn decaying_part(&self, x: &[f64]) -> f64 {
        match self.decaying {
            DecayingPart::None => 0.0,
            DecayingPart::Gaussian { c } => -c * gaussian(x),
            DecayingPart::XGaussian { c } => {
                // the odd factor vanishes exactly on x₁ = 0
                if x[0] == 0.0 {
                    0.0
                } else {
                    -c * x[0] * gaussian(x)
                }
            }
        }
    }

    pub fn has_decaying_part(&self) -> bool {
        !matches!(self.decaying, DecayingPart::None)
    }

    /// Returns a copy with the decaying part removed.
    pub fn periodic_only(&self) -> PotentialSpec {
        PotentialSpec { decaying: DecayingPart::None, ..self.clone() }
    }
}

fn gaussian(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (-r2).exp()
}

/// Pointwise value of `V(x)`; `x.len()` must equal the potential's dimension.
pub fn eval_potential(pot: &PotentialSpec, x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), pot.dimension);
    pot.periodic_part(x) + pot.decaying_part(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn mathieu_gaussian_vanishes_at_origin() {
        let v = builtin(Builtin::MathieuGaussian, 0.0).unwrap();
        assert_eq!(eval_potential(&v, &[0.0]), 0.0);
    }

    #[test]
    fn h2_odd_factor_vanishes_on_axis() {
        let v = builtin(Builtin::H2, 14.0).unwrap();
        for y in [-3.0, -0.2, 0.0, 1.7] {
            assert_eq!(eval_potential(&v, &[0.0, y]), 1.0 + f64::cos(y));
        }
    }

    #[test]
    fn h1_at_origin() {
        let v = builtin(Builtin::H1, 6.0).unwrap();
        assert_eq!(eval_potential(&v, &[0.0, 0.0]), -4.0);
    }

    #[test]
    fn catalog_shapes() {
        let h0 = builtin(Builtin::H0, -3.0).unwrap();
        assert_eq!(h0.periodic.len(), 2);
        assert_eq!(h0.decaying, DecayingPart::None);

        let mg = builtin(Builtin::MathieuGaussian, 5.0).unwrap();
        assert_eq!(mg.dimension, 1);
        assert_eq!(mg.decaying, DecayingPart::Gaussian { c: 1.0 });

        let h2 = builtin(Builtin::H2, 14.0).unwrap();
        assert_eq!(h2.decaying, DecayingPart::XGaussian { c: 14.0 });
        let x = [0.3f64, -0.8];
        let expect = x[0].cos() + x[1].cos() - 14.0 * x[0] * (-(0.09 + 0.64f64)).exp();
        assert!((eval_potential(&h2, &x) - expect).abs() < 1e-15);
    }

    #[test]
    fn coupling_must_be_positive() {
        assert!(matches!(
            builtin(Builtin::H1, 0.0),
            Err(PotentialError::NonPositiveCoupling { .. })
        ));
        assert!(builtin(Builtin::H2, -1.0).is_err());
        assert!("h7".parse::<Builtin>().is_err());
        assert_eq!("Mathieu-Gaussian".parse::<Builtin>().unwrap(), Builtin::MathieuGaussian);
    }

    #[test]
    fn decay_underflows_far_out() {
        for name in [Builtin::H1, Builtin::H2] {
            let v = builtin(name, 20.0).unwrap();
            for x in [[30.0, 0.5], [-21.3, 21.3], [0.0, -31.0]] {
                assert!(v.decaying_part(&x).abs() <= 1e-300);
            }
        }
        let v = builtin(Builtin::MathieuGaussian, 1.0).unwrap();
        assert!(v.decaying_part(&[30.0]).abs() <= 1e-300);
    }

    proptest! {
        #[test]
        fn periodic_part_has_period_two_pi(x in -50.0..50.0f64, y in -50.0..50.0f64) {
            let v = builtin(Builtin::H2, 3.0).unwrap();
            let base = v.periodic_part(&[x, y]);
            prop_assert!((v.periodic_part(&[x + 2.0 * PI, y]) - base).abs() < 1e-12);
            prop_assert!((v.periodic_part(&[x, y + 2.0 * PI]) - base).abs() < 1e-12);
        }

        #[test]
        fn h1_symmetries(x in -6.0..6.0f64, y in -6.0..6.0f64, c in 0.1..10.0f64) {
            let v = builtin(Builtin::H1, c).unwrap();
            let base = eval_potential(&v, &[x, y]);
            prop_assert_eq!(eval_potential(&v, &[y, x]), base);
            prop_assert_eq!(eval_potential(&v, &[-x, -y]), base);
        }

        #[test]
        fn h2_decay_is_odd(x in -6.0..6.0f64, y in -6.0..6.0f64) {
            let v = builtin(Builtin::H2, 14.0).unwrap();
            prop_assert_eq!(v.decaying_part(&[-x, y]), -v.decaying_part(&[x, y]));
        }
    }
}
