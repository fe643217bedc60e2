//! Matrix-level model of one protocol round on a polarization qubit and a
//! spatial qubit.
//!
//! Two-qubit amplitudes are ordered `|00⟩, |01⟩, |10⟩, |11⟩` with the
//! polarization qubit first, i.e. `|p s⟩`. Spatial `|0⟩` is the lower mode,
//! the one that is kept after post-selection.
//!
//! [`apply_protocol_step`] is deliberately independent of [`crate::map`]:
//! it builds the product state, multiplies by the 4×4 unitary and projects,
//! so it can serve as an oracle for the closed-form map.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point::{ProjectivePoint, EQ_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState(Vector2<Complex64>);

impl QubitState {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroPoint);
        }
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self(Vector2::new(a0 / norm, a1 / norm)))
    }

    pub fn zero() -> Self {
        Self(Vector2::new(ONE, ZERO))
    }

    pub fn one() -> Self {
        Self(Vector2::new(ZERO, ONE))
    }

    /// `(|0⟩ + z|1⟩)/√(1+|z|²)` for the point's representative.
    pub fn from_point(p: &ProjectivePoint) -> Self {
        Self(Vector2::new(p.alpha(), p.beta()))
    }

    pub fn to_point(&self) -> ProjectivePoint {
        ProjectivePoint::from_homogeneous(self.0[0], self.0[1]).expect("unit state")
    }

    pub fn a0(&self) -> Complex64 {
        self.0[0]
    }

    pub fn a1(&self) -> Complex64 {
        self.0[1]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn tensor(&self, other: &Self) -> TwoQubitState {
        let (a, b) = (self.0, other.0);
        TwoQubitState(Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState(Vector4<Complex64>);

impl TwoQubitState {
    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// A 2×2 polarization element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesMatrix(Matrix2<Complex64>);

impl JonesMatrix {
    pub fn new(m: Matrix2<Complex64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn apply(&self, s: &QubitState) -> QubitState {
        QubitState(self.0 * s.0)
    }

    pub fn then(&self, next: &JonesMatrix) -> JonesMatrix {
        JonesMatrix(next.0 * self.0)
    }

    pub fn unitarity_error(&self) -> f64 {
        (self.0.adjoint() * self.0 - Matrix2::identity()).norm()
    }
}

/// Half-wave plate with its fast axis at `theta` radians.
pub fn hwp(theta: f64) -> JonesMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    JonesMatrix(Matrix2::new(r(c), r(s), r(s), r(-c)))
}

/// Quarter-wave plate with its fast axis at `theta` radians.
pub fn qwp(theta: f64) -> JonesMatrix {
    let (s, c) = theta.sin_cos();
    let off = Complex64::new(1.0, -1.0) * (s * c);
    JonesMatrix(Matrix2::new(
        Complex64::new(c * c, s * s),
        off,
        off,
        Complex64::new(s * s, c * c),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitUnitary(Matrix4<Complex64>);

impl TwoQubitUnitary {
    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn apply(&self, s: &TwoQubitState) -> TwoQubitState {
        TwoQubitState(self.0 * s.0)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self` followed by `next`, i.e. `next · self`.
    pub fn then(&self, next: &Self) -> Self {
        Self(next.0 * self.0)
    }

    pub fn unitarity_error(&self) -> f64 {
        (self.0.adjoint() * self.0 - Matrix4::identity()).norm()
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Applies `lower` to the polarization when the photon is in spatial
    /// `|0⟩` and `upper` when it is in spatial `|1⟩`.
    pub fn spatially_controlled(lower: &JonesMatrix, upper: &JonesMatrix) -> Self {
        let mut m = Matrix4::zeros();
        for (s, j) in [(0usize, lower), (1usize, upper)] {
            for p in 0..2 {
                for q in 0..2 {
                    m[(2 * p + s, 2 * q + s)] = j.0[(p, q)];
                }
            }
        }
        Self(m)
    }
}

/// The entangling unitary
/// `U = (1/√2)[[1,0,0,1],[0,−1,1,0],[0,1,1,0],[1,0,0,−1]]`.
pub fn build_u() -> TwoQubitUnitary {
    let h = r(FRAC_1_SQRT_2);
    TwoQubitUnitary(Matrix4::new(
        h, ZERO, ZERO, h, //
        ZERO, -h, h, ZERO, //
        ZERO, h, h, ZERO, //
        h, ZERO, ZERO, -h,
    ))
}

/// Controlled-NOT with the polarization as control.
pub fn u_cnot() -> TwoQubitUnitary {
    TwoQubitUnitary(Matrix4::new(
        ONE, ZERO, ZERO, ZERO, //
        ZERO, ONE, ZERO, ZERO, //
        ZERO, ZERO, ZERO, ONE, //
        ZERO, ZERO, ONE, ZERO,
    ))
}

/// The conjugated core rotation `Ũ = U_CNOT · U · U_CNOT†`, written out
/// explicitly.
pub fn u_tilde() -> TwoQubitUnitary {
    let h = r(FRAC_1_SQRT_2);
    TwoQubitUnitary(Matrix4::new(
        h, ZERO, h, ZERO, //
        ZERO, -h, ZERO, h, //
        h, ZERO, -h, ZERO, //
        ZERO, h, ZERO, h,
    ))
}

/// `U_CNOT† · Ũ · U_CNOT`, the waveplate-friendly factorization of [`build_u`].
pub fn build_u_decomposed() -> TwoQubitUnitary {
    let cnot = u_cnot();
    cnot.then(&u_tilde()).then(&cnot.adjoint())
}

/// Homogeneous coordinates of the state prepared by a QWP at `theta_q`
/// followed by a HWP at `theta_h`, acting on `|H⟩`:
/// `z = [i sin2θ_H + sin(2θ_H − 2θ_Q)] / [i cos2θ_H + cos(2θ_H − 2θ_Q)]`.
pub fn prepare_z(theta_q: f64, theta_h: f64) -> ProjectivePoint {
    let a = 2.0 * theta_h;
    let b = 2.0 * theta_h - 2.0 * theta_q;
    let denominator = Complex64::new(b.cos(), a.cos());
    let numerator = Complex64::new(b.sin(), a.sin());
    // |den|² + |num|² = 2 for all angles.
    ProjectivePoint::from_homogeneous(denominator, numerator).expect("norm is √2")
}

/// Waveplate angles `(θ_Q, θ_H)`, both in `[0, π)`, that prepare `p`.
///
/// The prepared vector is `(cos b, sin b) + i (cos a, sin a)` with
/// `a = 2θ_H`, `b = 2θ_H − 2θ_Q`. So we look for the global phase `φ` that
/// splits `√2 e^{iφ} ψ` into two real unit vectors, and read both angles off
/// with `atan2`.
pub fn invert_preparation(p: &ProjectivePoint) -> Result<(f64, f64)> {
    let (alpha, beta) = (p.alpha(), p.beta());
    let re = [alpha.re, beta.re];
    let im = [alpha.im, beta.im];
    let half_diff = 0.5 * (re[0] * re[0] + re[1] * re[1] - im[0] * im[0] - im[1] * im[1]);
    let dot = re[0] * im[0] + re[1] * im[1];
    // |Re(e^{iφ}ψ)|² − 1/2 = half_diff·cos2φ − dot·sin2φ.
    let phi = 0.5 * half_diff.atan2(dot);
    let rot = Complex64::from_polar(std::f64::consts::SQRT_2, phi);
    let (u, w) = (rot * alpha, rot * beta);
    let b = w.re.atan2(u.re);
    let a = w.im.atan2(u.im);
    let theta_h = reduce_angle(0.5 * a);
    let theta_q = reduce_angle(0.5 * (a - b));
    let residual = prepare_z(theta_q, theta_h).distance(p);
    if residual > EQ_TOL {
        return Err(Error::PreparationInverse { residual });
    }
    Ok((theta_q, theta_h))
}

/// Waveplates are symmetric under a half turn. Angles a rounding error short
/// of `π` are folded to zero.
fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(std::f64::consts::PI);
    if std::f64::consts::PI - r < 1e-12 {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StepOutcome {
    pub selected_state: QubitState,
    pub selected_probability: f64,
    pub rejected_state: QubitState,
    pub rejected_probability: f64,
}

/// The two-qubit state after the entangling unitary, before any
/// measurement. Proportional to `(1+z², 0, 2z, 1−z²)`.
pub fn post_u_state(p: &ProjectivePoint) -> TwoQubitState {
    let single = QubitState::from_point(p);
    build_u().apply(&single.tensor(&single))
}

/// One protocol round: prepare `|ψ⟩_p ⊗ |ψ⟩_s`, entangle, then measure the
/// spatial qubit. Outcome `|0⟩_s` is kept; outcome `|1⟩_s` leaves the
/// polarization in `|1⟩` and the nonlinear update does not happen.
pub fn apply_protocol_step(p: &ProjectivePoint) -> StepOutcome {
    let [a00, a01, a10, a11] = post_u_state(p).amplitudes();
    let selected_probability = a00.norm_sqr() + a10.norm_sqr();
    let rejected_probability = a01.norm_sqr() + a11.norm_sqr();
    let selected_state =
        QubitState::new(a00, a10).expect("selected branch has probability at least 1/2");
    let rejected_state = QubitState::new(a01, a11).unwrap_or_else(|_| QubitState::one());
    StepOutcome {
        selected_state,
        selected_probability,
        rejected_state,
        rejected_probability,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close2(m: &JonesMatrix, want: [[Complex64; 2]; 2]) -> bool {
        (0..2).all(|i| (0..2).all(|j| (m.matrix()[(i, j)] - want[i][j]).norm() < 1e-15))
    }

    #[test]
    fn hwp_examples() {
        assert!(close2(&hwp(0.0), [[ONE, ZERO], [ZERO, -ONE]]));
        assert!(close2(&hwp(FRAC_PI_4), [[ZERO, ONE], [ONE, ZERO]]));
        let h = r(FRAC_1_SQRT_2);
        assert!(close2(&hwp(FRAC_PI_8), [[h, h], [h, -h]]));
        assert!(hwp(FRAC_PI_8).unitarity_error() < 1e-15);
    }

    #[test]
    fn qwp_examples() {
        assert!(close2(&qwp(0.0), [[ONE, ZERO], [ZERO, I]]));
        assert!(close2(&qwp(FRAC_PI_2), [[I, ZERO], [ZERO, ONE]]));
        let (p, m) = (c(0.5, 0.5), c(0.5, -0.5));
        assert!(close2(&qwp(FRAC_PI_4), [[p, m], [m, p]]));
        assert!(qwp(FRAC_PI_4).unitarity_error() < 1e-15);
    }

    #[test]
    fn u_examples() {
        let u = build_u();
        assert!(u.unitarity_error() < 1e-15);
        let bell = u.apply(&QubitState::zero().tensor(&QubitState::zero()));
        let want = [r(FRAC_1_SQRT_2), ZERO, ZERO, r(FRAC_1_SQRT_2)];
        for (got, want) in bell.amplitudes().iter().zip(want) {
            assert!((got - want).norm() < 1e-15);
        }
    }

    #[test]
    fn decomposition_matches() {
        assert!(build_u_decomposed().max_abs_diff(&build_u()) <= 1e-14);
        let cnot = u_cnot();
        assert_eq!(cnot.then(&cnot).max_abs_diff(&TwoQubitUnitary(Matrix4::identity())), 0.0);
        assert!(u_tilde().unitarity_error() < 1e-15);
        // Ũ equals U conjugated the other way round.
        let conj = cnot.adjoint().then(&build_u()).then(&cnot);
        assert!(conj.max_abs_diff(&u_tilde()) <= 1e-15);
    }

    #[test]
    fn u_tilde_is_a_pair_of_waveplates() {
        let built = TwoQubitUnitary::spatially_controlled(&hwp(FRAC_PI_8), &hwp(3.0 * FRAC_PI_8));
        assert!(built.max_abs_diff(&u_tilde()) < 1e-15);
    }

    #[test]
    fn prepare_examples() {
        assert!(prepare_z(0.0, 0.0).z().unwrap().norm() < 1e-16);
        assert!((prepare_z(0.0, FRAC_PI_8).z().unwrap() - ONE).norm() < 1e-15);
        assert!((prepare_z(FRAC_PI_4, FRAC_PI_8).z().unwrap() - I).norm() < 1e-15);
    }

    #[test]
    fn invert_examples() {
        for z in [c(0.0, 0.0), c(1.0, 0.0), c(-0.2, -0.1), c(0.0, 1.0), c(0.0, -1.0)] {
            let p = ProjectivePoint::from_z(z);
            let (tq, th) = invert_preparation(&p).unwrap();
            assert!((0.0..PI).contains(&tq) && (0.0..PI).contains(&th));
            assert!(prepare_z(tq, th).distance(&p) < 1e-9);
        }
        let inf = ProjectivePoint::infinity();
        let (tq, th) = invert_preparation(&inf).unwrap();
        assert!(prepare_z(tq, th).distance(&inf) < 1e-9);
    }

    #[test]
    fn step_examples() {
        let s = apply_protocol_step(&ProjectivePoint::from_re(0.0));
        assert!(s.selected_state.to_point().z().unwrap().norm() < 1e-16);
        assert!((s.selected_probability - 0.5).abs() < 1e-15);
        assert!(s.rejected_state.to_point().is_infinite());
        assert!((s.rejected_probability - 0.5).abs() < 1e-15);

        let s = apply_protocol_step(&ProjectivePoint::from_re(1.0));
        assert!((s.selected_state.to_point().z().unwrap() - ONE).norm() < 1e-15);
        assert!((s.selected_probability - 1.0).abs() < 1e-15);
        assert_eq!(s.rejected_probability, 0.0);
        assert!(s.rejected_state.to_point().is_infinite());

        let s = apply_protocol_step(&ProjectivePoint::from_re(0.2));
        assert!((s.selected_state.to_point().z().unwrap() - r(0.3846153846153846)).norm() < 1e-15);
        assert!((s.selected_probability - 0.5739644970414199).abs() < 1e-15);
    }

    fn sphere_point() -> impl Strategy<Value = ProjectivePoint> {
        // Uniform on the Bloch sphere.
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(cos_t, phi)| {
            let half = 0.5 * cos_t.acos();
            ProjectivePoint::from_homogeneous(r(half.cos()), Complex64::from_polar(half.sin(), phi)).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn waveplates_are_unitary(t in -10.0f64..10.0) {
            prop_assert!(hwp(t).unitarity_error() < 1e-12);
            prop_assert!(qwp(t).unitarity_error() < 1e-12);
        }

        #[test]
        fn preparation_matches_waveplates(tq in 0.0f64..PI, th in 0.0f64..PI) {
            let out = qwp(tq).then(&hwp(th)).apply(&QubitState::zero());
            prop_assert!(out.to_point().distance(&prepare_z(tq, th)) < 1e-12);
        }

        #[test]
        fn preparation_round_trip(p in sphere_point()) {
            let (tq, th) = invert_preparation(&p).unwrap();
            prop_assert!(prepare_z(tq, th).distance(&p) < 1e-9);
        }

        #[test]
        fn post_u_coefficients(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let z = c(re, im);
            let amps = post_u_state(&ProjectivePoint::from_z(z)).amplitudes();
            let want = [ONE + z * z, ZERO, 2.0 * z, ONE - z * z];
            let scale = FRAC_1_SQRT_2 / (1.0 + z.norm_sqr());
            for (a, w) in amps.iter().zip(want) {
                prop_assert!((a - w * scale).norm() < 1e-12);
            }
        }

        #[test]
        fn branches_are_complete(p in sphere_point()) {
            let s = apply_protocol_step(&p);
            prop_assert!((s.selected_probability + s.rejected_probability - 1.0).abs() < 1e-12);
            prop_assert!((s.selected_state.norm() - 1.0).abs() < 1e-12);
            prop_assert!(s.rejected_state.to_point().is_infinite());
            let z2 = (p.alpha() * p.alpha() - p.beta() * p.beta()).norm_sqr();
            prop_assert!((s.rejected_probability - 0.5 * z2).abs() < 1e-12);
        }
    }
}
