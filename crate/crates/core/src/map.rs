//! The post-selected nonlinear map `f(z) = 2z / (1 + z²)` and the quantities
//! derived from it: trajectories, per-step success probabilities,
//! convergence classification and state overlaps.
//!
//! Everything here works on [`ProjectivePoint`]s, so the poles `z = ±i`
//! and the point at infinity are ordinary inputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::point::ProjectivePoint;

/// Default convergence radius, as a chordal distance to `±1`.
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;

/// The attracting fixed point `z = 1`, i.e. `|+⟩ₓ`.
pub fn plus_x() -> ProjectivePoint {
    ProjectivePoint::from_re(1.0)
}

/// The attracting fixed point `z = −1`, i.e. `|−⟩ₓ`.
pub fn minus_x() -> ProjectivePoint {
    ProjectivePoint::from_re(-1.0)
}

/// One application of the map, `(α, β) ↦ (α² + β², 2αβ)`.
///
/// The homogeneous form never yields `(0, 0)` from a unit vector: both
/// components vanishing would need `α = β = 0`.
pub fn map_step(p: &ProjectivePoint) -> ProjectivePoint {
    let (a, b) = (p.alpha(), p.beta());
    ProjectivePoint::from_homogeneous(a * a + b * b, 2.0 * a * b)
        .expect("map image of a unit vector is non-zero")
}

/// Probability that one round of the protocol post-selects successfully,
/// `1/2 + 2 (Re z)² / (1 + |z|²)²`.
///
/// For a unit representative `(α, β)` the second term is `2 (Re ᾱβ)²`, which
/// also gives the limit `1/2` at infinity.
pub fn success_probability(p: &ProjectivePoint) -> f64 {
    let re = p.coherence().re;
    (0.5 + 2.0 * re * re).min(1.0)
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    points: Vec<ProjectivePoint>,
    step_probabilities: Vec<f64>,
}

impl Trajectory {
    /// `points[k]` is the state after `k` applications of the map.
    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    /// `step_probabilities[k]` is the success probability of the step taking
    /// `points[k]` to `points[k + 1]`.
    pub fn step_probabilities(&self) -> &[f64] {
        &self.step_probabilities
    }

    pub fn last(&self) -> &ProjectivePoint {
        self.points.last().expect("trajectory holds its start point")
    }

    /// Product of the first `n` step probabilities.
    pub fn cumulative(&self, n: usize) -> f64 {
        self.step_probabilities[..n].iter().product()
    }
}

pub fn iterate(p: &ProjectivePoint, n: usize) -> Trajectory {
    let mut points = Vec::with_capacity(n + 1);
    let mut step_probabilities = Vec::with_capacity(n);
    let mut current = *p;
    points.push(current);
    for _ in 0..n {
        step_probabilities.push(success_probability(&current));
        current = map_step(&current);
        points.push(current);
    }
    Trajectory {
        points,
        step_probabilities,
    }
}

/// Probability that `n` consecutive rounds all succeed starting from `p`.
pub fn cumulative_success(p: &ProjectivePoint, n: usize) -> f64 {
    iterate(p, n).cumulative(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    PlusX,
    MinusX,
    NonConvergent,
}

impl Tag {
    pub fn opposite(self) -> Self {
        match self {
            Tag::PlusX => Tag::MinusX,
            Tag::MinusX => Tag::PlusX,
            Tag::NonConvergent => Tag::NonConvergent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Classification {
    pub tag: Tag,
    /// Number of map applications before the trajectory entered the
    /// tolerance disk, or `max_iter` for [`Tag::NonConvergent`].
    pub iterations: usize,
}

/// Classifies `p` by the attracting fixed point its orbit reaches.
///
/// The start point itself is tested first, so a point already within `tol`
/// of `±1` reports zero iterations.
pub fn classify(p: &ProjectivePoint, tol: f64, max_iter: usize) -> Classification {
    let (plus, minus) = (plus_x(), minus_x());
    let mut current = *p;
    for k in 0..=max_iter {
        if current.distance(&plus) < tol {
            return Classification {
                tag: Tag::PlusX,
                iterations: k,
            };
        }
        if current.distance(&minus) < tol {
            return Classification {
                tag: Tag::MinusX,
                iterations: k,
            };
        }
        if k < max_iter {
            current = map_step(&current);
        }
    }
    Classification {
        tag: Tag::NonConvergent,
        iterations: max_iter,
    }
}

/// `|⟨ψ₁|ψ₂⟩|`, the modulus of the inner product (not its square).
pub fn overlap(p1: &ProjectivePoint, p2: &ProjectivePoint) -> f64 {
    let amp = p1.alpha().conj() * p2.alpha() + p1.beta().conj() * p2.beta();
    amp.norm().min(1.0)
}

/// Bloch vector `(2 Re ᾱβ, 2 Im ᾱβ, |α|² − |β|²)`.
pub fn bloch_coords(p: &ProjectivePoint) -> [f64; 3] {
    let c = p.coherence();
    [
        2.0 * c.re,
        2.0 * c.im,
        p.alpha().norm_sqr() - p.beta().norm_sqr(),
    ]
}

/// Convenience for the affine form of the map; `None` on the poles.
pub fn f(z: Complex64) -> Option<Complex64> {
    map_step(&ProjectivePoint::from_z(z)).z()
}
