//! Points of the extended complex plane in homogeneous form.
//!
//! A qubit state `(|0⟩ + z|1⟩)/√(1+|z|²)` is stored as the unit vector
//! `(alpha, beta)` with `z = beta / alpha`. The point at infinity is
//! `alpha = 0`, so the poles of the map and the state `|1⟩` need no special
//! casing anywhere downstream.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|α₁β₂ − α₂β₁|` under which two points compare equal.
pub const EQ_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct ProjectivePoint {
    alpha: Complex64,
    beta: Complex64,
}

impl ProjectivePoint {
    /// Builds a point from homogeneous coordinates `(alpha, beta) ~ (1, z)`.
    ///
    /// The pair is rescaled to unit norm and its global phase fixed so that
    /// `alpha` is real and non-negative (`beta` real and positive when
    /// `alpha = 0`).
    pub fn from_homogeneous(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite() && beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        // Rescale by the larger modulus first so that squaring cannot overflow.
        let scale = alpha.norm().max(beta.norm());
        if scale == 0.0 {
            return Err(Error::ZeroPoint);
        }
        let (a, b) = (alpha / scale, beta / scale);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        let phase = if a.norm() > 0.0 {
            a.conj() / a.norm()
        } else {
            b.conj() / b.norm()
        };
        Ok(Self {
            alpha: a * phase,
            beta: b * phase,
        })
    }

    pub fn from_z(z: Complex64) -> Self {
        Self::from_homogeneous(Complex64::new(1.0, 0.0), z).expect("finite z")
    }

    pub fn from_re(re: f64) -> Self {
        Self::from_z(Complex64::new(re, 0.0))
    }

    pub fn infinity() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn is_infinite(&self) -> bool {
        self.alpha.norm() == 0.0
    }

    /// The affine coordinate `z = beta / alpha`, or `None` at infinity.
    pub fn z(&self) -> Option<Complex64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.beta / self.alpha)
        }
    }

    /// `ᾱβ`, which carries the x and y Bloch components.
    pub(crate) fn coherence(&self) -> Complex64 {
        self.alpha.conj() * self.beta
    }

    /// Chordal distance `|α₁β₂ − α₂β₁|`, in `[0, 1]`.
    ///
    /// Zero iff the points coincide, one iff they are antipodal on the Bloch
    /// sphere. Equal to half the Euclidean chord on the unit Riemann sphere.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.alpha * other.beta - other.alpha * self.beta).norm()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) < tol
    }
}

impl PartialEq for ProjectivePoint {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, EQ_TOL)
    }
}

impl From<Complex64> for ProjectivePoint {
    fn from(z: Complex64) -> Self {
        Self::from_z(z)
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.z() {
            None => write!(f, "inf"),
            Some(z) if z.im.is_sign_negative() => {
                write!(f, "{}-{}i", z.re, -z.im)
            }
            Some(z) => write!(f, "{}+{}i", z.re, z.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_pair_is_rejected() {
        assert!(matches!(
            ProjectivePoint::from_homogeneous(c(0.0, 0.0), c(0.0, 0.0)),
            Err(Error::ZeroPoint)
        ));
        assert!(matches!(
            ProjectivePoint::from_homogeneous(c(f64::NAN, 0.0), c(1.0, 0.0)),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn normalized_with_fixed_phase() {
        let p = ProjectivePoint::from_homogeneous(c(0.0, 3.0), c(4.0, 0.0)).unwrap();
        assert!((p.alpha().norm_sqr() + p.beta().norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(p.alpha().im, 0.0);
        assert!(p.alpha().re > 0.0);
        let z = p.z().unwrap();
        assert!((z - c(0.0, -4.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn huge_coordinates_do_not_overflow() {
        let p = ProjectivePoint::from_homogeneous(c(1e300, 0.0), c(1e300, 1e300)).unwrap();
        assert!((p.z().unwrap() - c(1.0, 1.0)).norm() < 1e-14);
        let q = ProjectivePoint::from_z(c(1e200, 0.0));
        assert!(q.distance(&ProjectivePoint::infinity()) < 1e-150);
    }

    #[test]
    fn equality_is_projective() {
        let p = ProjectivePoint::from_z(c(0.2, -0.1));
        let q = ProjectivePoint::from_homogeneous(c(0.0, 2.0), c(0.2, 0.4)).unwrap();
        assert_eq!(p, q);
        assert_ne!(p, ProjectivePoint::from_z(c(0.2, 0.1)));
        assert!(ProjectivePoint::infinity().z().is_none());
    }

    #[test]
    fn antipodal_distance_is_one() {
        let z = c(0.3, -0.7);
        let p = ProjectivePoint::from_z(z);
        let q = ProjectivePoint::from_z(-1.0 / z.conj());
        assert!((p.distance(&q) - 1.0).abs() < 1e-15);
    }
}
