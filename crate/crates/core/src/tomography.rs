//! Single-qubit tomography as done on the polarization output: four
//! projective settings, Poisson counts, a maximum-likelihood density matrix
//! and the pure state closest to it.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::overlap;
use crate::point::ProjectivePoint;

/// Coincidences per analyzer setting used when nothing else is given.
pub const DEFAULT_SHOTS: u64 = 12_000;

const MLE_MAX_ITER: usize = 10_000;
const MLE_TOL: f64 = 1e-12;
const MLE_STEP_TOL: f64 = 1e-9;
const DEGENERACY_GAP: f64 = 1e-12;
const VALIDITY_TOL: f64 = 1e-10;

/// The four analyzer settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `|H⟩`
    H,
    /// `|V⟩`
    V,
    /// `(|H⟩ + |V⟩)/√2`
    D,
    /// `(|H⟩ − i|V⟩)/√2`, the −y direction of the Bloch sphere.
    L,
}

#[derive(Clone, Copy, Debug)]
pub struct TomographyBases;

impl TomographyBases {
    pub const ALL: [Basis; 4] = [Basis::H, Basis::V, Basis::D, Basis::L];

    /// The ket each setting projects onto.
    pub fn ket(basis: Basis) -> [Complex64; 2] {
        let h = FRAC_1_SQRT_2;
        match basis {
            Basis::H => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            Basis::V => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            Basis::D => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            Basis::L => [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
        }
    }

    pub fn projector(basis: Basis) -> Matrix2<Complex64> {
        let [a, b] = Self::ket(basis);
        Matrix2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj())
    }

    /// Analyzer angles `(θ_Q, θ_H)` in radians. A QWP then a HWP followed by
    /// a polarizer transmitting `|H⟩` then project onto [`Self::ket`].
    pub fn analyzer_angles(basis: Basis) -> (f64, f64) {
        match basis {
            Basis::H => (0.0, 0.0),
            Basis::V => (0.0, FRAC_PI_4),
            Basis::D => (FRAC_PI_4, FRAC_PI_8),
            Basis::L => (0.0, FRAC_PI_8),
        }
    }
}

/// A 2×2 density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Matrix2<Complex64>);

impl DensityMatrix {
    /// Validates `m` against the density-matrix invariants to `1e−10`.
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        let herm = (m - m.adjoint()).norm();
        let trace = m.trace();
        if herm > VALIDITY_TOL || (trace - 1.0).norm() > VALIDITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "not a unit-trace Hermitian matrix (asymmetry {herm:e}, trace {trace})"
            )));
        }
        let rho = Self(m);
        let (low, _) = rho.eigenvalues();
        if low < -VALIDITY_TOL {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {low:e}")));
        }
        Ok(rho)
    }

    pub fn pure(p: &ProjectivePoint) -> Self {
        let (a, b) = (p.alpha(), p.beta());
        Self(Matrix2::new(
            Complex64::new(a.norm_sqr(), 0.0),
            a * b.conj(),
            b * a.conj(),
            Complex64::new(b.norm_sqr(), 0.0),
        ))
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix2::identity() * Complex64::new(0.5, 0.0))
    }

    /// `(I + x σx + y σy + z σz) / 2`; requires `|r| ≤ 1`.
    pub fn from_bloch([x, y, z]: [f64; 3]) -> Result<Self> {
        Self::new(Matrix2::new(
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        ))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let (mean, half_gap) = self.spectrum_parts();
        (mean - half_gap, mean + half_gap)
    }

    fn spectrum_parts(&self) -> (f64, f64) {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = self.0[(0, 1)];
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mean, half_gap)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, p: &ProjectivePoint) -> f64 {
        let v = nalgebra::Vector2::new(p.alpha(), p.beta());
        (v.adjoint() * self.0 * v)[(0, 0)].re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

pub fn measurement_probabilities(rho: &DensityMatrix) -> [f64; 4] {
    TomographyBases::ALL.map(|basis| {
        let [a, b] = TomographyBases::ket(basis);
        let m = rho.matrix();
        let value = a.conj() * (m[(0, 0)] * a + m[(0, 1)] * b) + b.conj() * (m[(1, 0)] * a + m[(1, 1)] * b);
        value.re.clamp(0.0, 1.0)
    })
}

/// Coincidence counts in the order H, V, D, L.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub counts: [u64; 4],
    /// Expected counts per setting for a state fully transmitted by it.
    pub nominal_total: u64,
}

impl CountRecord {
    /// Noise-free counts `round(N·pₖ)`.
    pub fn exact(probabilities: [f64; 4], nominal_total: u64) -> Self {
        Self {
            counts: probabilities.map(|p| (p * nominal_total as f64).round() as u64),
            nominal_total,
        }
    }
}

pub fn sample_counts(probabilities: [f64; 4], nominal_total: u64, seed: u64) -> CountRecord {
    sample_counts_with(probabilities, nominal_total, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Draws each setting independently from `Poisson(N·pₖ)`.
pub fn sample_counts_with<R: Rng + ?Sized>(probabilities: [f64; 4], nominal_total: u64, rng: &mut R) -> CountRecord {
    let counts = probabilities.map(|p| {
        let mean = p * nominal_total as f64;
        if mean > 0.0 {
            Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
        } else {
            0
        }
    });
    CountRecord {
        counts,
        nominal_total,
    }
}

/// Real quadratic forms `A_k` with `tr(Π_k T†T) = tᵀ A_k t` for the
/// lower-triangular `T = [[t₀, 0], [t₂ + i t₃, t₁]]`.
fn quadratic_forms() -> [Matrix4<f64>; 4] {
    TomographyBases::ALL.map(|basis| {
        let [a, b] = TomographyBases::ket(basis);
        let form = |t: &Vector4<f64>| {
            let c = Complex64::new(t[2], t[3]);
            let top = a * t[0];
            let bottom = c * a + b * t[1];
            top.norm_sqr() + bottom.norm_sqr()
        };
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            m[(i, i)] = form(&Vector4::ith(i, 1.0));
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                let both = form(&(Vector4::ith(i, 1.0) + Vector4::ith(j, 1.0)));
                let v = 0.5 * (both - m[(i, i)] - m[(j, j)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    })
}

struct Likelihood {
    forms: [Matrix4<f64>; 4],
    freqs: [f64; 4],
}

impl Likelihood {
    /// Log-likelihood shifted by the constant `sum f ln f - f`.
    ///
    /// Writing each term as `f (ln(1 + r) - r)` with `r = lambda / f - 1`
    /// keeps full relative precision when the model sits right on the
    /// data, which is where pure-state fits end up.
    fn value(&self, t: &Vector4<f64>) -> f64 {
        let mut total = 0.0;
        for (form, &f) in self.forms.iter().zip(&self.freqs) {
            let lambda = t.dot(&(form * t));
            if f > 0.0 {
                if lambda <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let r = (lambda - f) / f;
                total += f * (r.ln_1p() - r);
            } else {
                total -= lambda;
            }
        }
        total
    }

    fn gradient_hessian(&self, t: &Vector4<f64>) -> (Vector4<f64>, Matrix4<f64>) {
        let mut grad = Vector4::zeros();
        let mut hess = Matrix4::zeros();
        for (form, &f) in self.forms.iter().zip(&self.freqs) {
            let at = form * t;
            let lambda = t.dot(&at);
            let dl = 2.0 * at;
            let (w, w2) = if f > 0.0 {
                (f / lambda - 1.0, f / (lambda * lambda))
            } else {
                (-1.0, 0.0)
            };
            grad += w * dl;
            hess += 2.0 * w * form - w2 * dl * dl.transpose();
        }
        (grad, hess)
    }
}

/// Starting point from linear inversion, pulled inside the Bloch ball so the
/// Cholesky factor is full rank.
fn initial_parameters(freqs: &[f64; 4]) -> Vector4<f64> {
    let [h, v, d, l] = *freqs;
    let hv = h + v;
    let (trace, bloch) = if hv > 0.0 {
        (hv, [2.0 * d / hv - 1.0, 1.0 - 2.0 * l / hv, (h - v) / hv])
    } else {
        (0.5 * (d + l), [0.0; 3])
    };
    let radius = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
    let shrink = if radius > 0.9 { 0.9 / radius } else { 1.0 };
    let [x, y, z] = bloch.map(|c| c * shrink);
    let rho00 = 0.5 * trace * (1.0 + z);
    let rho11 = 0.5 * trace * (1.0 - z);
    let rho10 = Complex64::new(0.5 * trace * x, 0.5 * trace * y);
    let t1 = rho11.sqrt();
    let c = rho10 / t1;
    let t0 = (rho00 - c.norm_sqr()).max(0.0).sqrt();
    Vector4::new(t0, t1, c.re, c.im)
}

/// Maximum-likelihood density matrix for Poisson counts.
///
/// The unnormalized state is written as `T†T` with `T` lower triangular, so
/// every parameter vector is physical. The overall intensity is fitted along
/// with the state, which makes the estimate invariant under rescaling of all
/// counts. The log-likelihood is maximized by damped Newton steps.
pub fn mle_reconstruct(record: &CountRecord) -> Result<DensityMatrix> {
    let total: u64 = record.counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    let freqs = record.counts.map(|n| n as f64 / total as f64);
    let lik = Likelihood {
        forms: quadratic_forms(),
        freqs,
    };
    let mut t = initial_parameters(&freqs);
    let mut value = lik.value(&t);
    let mut converged = false;
    for _ in 0..MLE_MAX_ITER {
        let (grad, hess) = lik.gradient_hessian(&t);
        let neg = -hess;
        let mut damping = 0.0;
        let mut improved = None;
        for _ in 0..40 {
            let Some(chol) = (neg + Matrix4::identity() * damping).cholesky() else {
                damping = if damping == 0.0 { 1e-10 } else { damping * 10.0 };
                continue;
            };
            let dir = chol.solve(&grad);
            let mut step = 1.0;
            for _ in 0..50 {
                let candidate = t + dir * step;
                let v = lik.value(&candidate);
                if v > value {
                    improved = Some((candidate, v));
                    break;
                }
                step *= 0.5;
            }
            if improved.is_some() {
                break;
            }
            damping = if damping == 0.0 { 1e-10 } else { damping * 10.0 };
        }
        match improved {
            Some((next, v)) => {
                let gain = v - value;
                let moved = (next - t).norm();
                t = next;
                value = v;
                // Exactly attainable pure-state data leaves the likelihood
                // quartic in the mixed direction, so a small gain alone does
                // not mean the parameters have settled.
                if gain < MLE_TOL && moved < MLE_STEP_TOL * (1.0 + t.norm()) {
                    converged = true;
                    break;
                }
            }
            // No ascent direction left at machine precision.
            None => {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::MleNonConvergence {
            iterations: MLE_MAX_ITER,
        });
    }
    Ok(density_from_cholesky(&t))
}

fn density_from_cholesky(t: &Vector4<f64>) -> DensityMatrix {
    let c = Complex64::new(t[2], t[3]);
    let rho00 = t[0] * t[0] + c.norm_sqr();
    let rho11 = t[1] * t[1];
    let rho10 = c * t[1];
    let trace = rho00 + rho11;
    DensityMatrix(Matrix2::new(
        Complex64::new(rho00 / trace, 0.0),
        rho10.conj() / trace,
        rho10 / trace,
        Complex64::new(rho11 / trace, 0.0),
    ))
}

/// Dominant eigenvector of `ρ`, the pure state nearest in Frobenius norm.
pub fn nearest_pure_state(rho: &DensityMatrix) -> Result<ProjectivePoint> {
    let (mean, half_gap) = rho.spectrum_parts();
    if 2.0 * half_gap < DEGENERACY_GAP {
        return Err(Error::DegenerateSpectrum { gap: 2.0 * half_gap });
    }
    let top = mean + half_gap;
    let m = rho.matrix();
    let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
    // Pick whichever row of (ρ − λ)v = 0 is better conditioned.
    let (alpha, beta) = if a >= d {
        (Complex64::new(top - d, 0.0), b.conj())
    } else {
        (b, Complex64::new(top - a, 0.0))
    };
    ProjectivePoint::from_homogeneous(alpha, beta)
}

#[derive(Clone, Copy, Debug)]
pub struct TomographyRound {
    pub counts: CountRecord,
    pub rho: DensityMatrix,
    pub estimate: ProjectivePoint,
}

/// Prepare-and-measure: sample counts for the pure state `p`, reconstruct and
/// refit.
pub fn tomography_round<R: Rng + ?Sized>(p: &ProjectivePoint, nominal_total: u64, rng: &mut R) -> Result<TomographyRound> {
    let probabilities = measurement_probabilities(&DensityMatrix::pure(p));
    let counts = sample_counts_with(probabilities, nominal_total, rng);
    let rho = mle_reconstruct(&counts)?;
    let estimate = nearest_pure_state(&rho)?;
    Ok(TomographyRound {
        counts,
        rho,
        estimate,
    })
}

/// Generator for trial `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mean: f64,
    pub std: f64,
    pub successful: usize,
    pub failed: usize,
}

/// Spread of the reconstructed overlap of a state pair under shot noise.
///
/// Each trial tomographs both states independently, refits pure states and
/// takes their overlap. Trials run in parallel on their own substreams and
/// are reduced in trial order; failed trials are counted and dropped.
pub fn monte_carlo_error(pair: (ProjectivePoint, ProjectivePoint), nominal_total: u64, trials: usize, seed: u64) -> Result<MonteCarloSummary> {
    if trials < 2 {
        return Err(Error::InvalidArgument("Monte-Carlo needs at least 2 trials".into()));
    }
    if nominal_total == 0 {
        return Err(Error::InvalidArgument("shots per setting must be positive".into()));
    }
    let outcomes: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let first = tomography_round(&pair.0, nominal_total, &mut rng).ok()?;
            let second = tomography_round(&pair.1, nominal_total, &mut rng).ok()?;
            Some(overlap(&first.estimate, &second.estimate))
        })
        .collect();
    let values: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failed = trials - values.len();
    if values.is_empty() {
        return Err(Error::AllTrialsFailed { trials });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloSummary {
        mean,
        std,
        successful: values.len(),
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{hwp, qwp, QubitState};
    use proptest::prelude::*;

    fn pt(re: f64, im: f64) -> ProjectivePoint {
        ProjectivePoint::from_z(Complex64::new(re, im))
    }

    fn assert_probs(got: [f64; 4], want: [f64; 4], tol: f64) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < tol, "{got:?} vs {want:?}");
        }
    }

    fn assert_valid(rho: &DensityMatrix) {
        let m = rho.matrix();
        assert!((m - m.adjoint()).norm() < 1e-10);
        assert!((m.trace() - 1.0).norm() < 1e-10);
        assert!(rho.eigenvalues().0 > -1e-10);
    }

    #[test]
    fn projectors_are_rank_one_idempotent() {
        for b in TomographyBases::ALL {
            let p = TomographyBases::projector(b);
            assert!((p * p - p).norm() < 1e-15);
            assert!((p - p.adjoint()).norm() < 1e-15);
            assert!((p.trace() - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn analyzer_angles_select_the_kets() {
        for b in TomographyBases::ALL {
            let (tq, th) = TomographyBases::analyzer_angles(b);
            let analyzer = qwp(tq).then(&hwp(th)).matrix().adjoint();
            let selected = QubitState::new(analyzer[(0, 0)], analyzer[(1, 0)]).unwrap();
            let [a, c] = TomographyBases::ket(b);
            let ket = ProjectivePoint::from_homogeneous(a, c).unwrap();
            assert!(selected.to_point().distance(&ket) < 1e-15, "{b:?}");
        }
    }

    #[test]
    fn probability_examples() {
        assert_probs(measurement_probabilities(&DensityMatrix::pure(&pt(0.0, 0.0))), [1.0, 0.0, 0.5, 0.5], 1e-15);
        assert_probs(measurement_probabilities(&DensityMatrix::maximally_mixed()), [0.5; 4], 1e-15);
        assert_probs(
            measurement_probabilities(&DensityMatrix::pure(&pt(0.2, 0.0))),
            [0.9615384615384615, 0.038461538461538464, 0.6923076923076923, 0.5],
            1e-15,
        );
        // The fourth setting reads the −y component.
        assert_probs(measurement_probabilities(&DensityMatrix::pure(&pt(0.0, -1.0))), [0.5, 0.5, 0.5, 1.0], 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_bloch([0.0, 0.0, 1.1]).is_err());
        assert!(DensityMatrix::new(Matrix2::identity()).is_err());
        assert!(DensityMatrix::from_bloch([0.3, -0.2, 0.1]).is_ok());
    }

    #[test]
    fn sampling_examples() {
        let rec = sample_counts([0.0, 1.0, 0.5, 0.5], 12_000, 7);
        assert_eq!(rec.counts[0], 0);
        assert_eq!(rec, sample_counts([0.0, 1.0, 0.5, 0.5], 12_000, 7));
        assert_ne!(rec, sample_counts([0.0, 1.0, 0.5, 0.5], 12_000, 8));

        let p = [0.9615384615384615, 0.038461538461538464, 0.6923076923076923, 0.5];
        let big = sample_counts(p, 10_000_000, 3);
        for (n, want) in big.counts.iter().zip(p) {
            assert!((*n as f64 / 1e7 - want).abs() < 1e-3);
        }
    }

    #[test]
    fn mle_examples() {
        let rho = mle_reconstruct(&CountRecord::exact([1.0, 0.0, 0.5, 0.5], 12_000)).unwrap();
        assert!(rho.fidelity_with(&pt(0.0, 0.0)) > 1.0 - 1e-9);
        assert_valid(&rho);

        let rho = mle_reconstruct(&CountRecord::exact([0.5, 0.5, 1.0, 0.5], 12_000)).unwrap();
        assert!(rho.fidelity_with(&pt(1.0, 0.0)) > 1.0 - 1e-9);

        let target = pt(0.2, 0.0);
        let probs = measurement_probabilities(&DensityMatrix::pure(&target));
        let rec = CountRecord {
            counts: probs.map(|p| (p * 1e9).round() as u64),
            nominal_total: 1_000_000_000,
        };
        let rho = mle_reconstruct(&rec).unwrap();
        assert!(rho.fidelity_with(&target) > 1.0 - 1e-6);
        assert!((nearest_pure_state(&rho).unwrap().z().unwrap() - 0.2).norm() < 1e-4);
    }

    #[test]
    fn mle_recovers_a_mixed_state() {
        let rho = DensityMatrix::from_bloch([0.3, -0.2, 0.1]).unwrap();
        let rec = CountRecord {
            counts: measurement_probabilities(&rho).map(|p| (p * 1e9).round() as u64),
            nominal_total: 1_000_000_000,
        };
        let est = mle_reconstruct(&rec).unwrap();
        assert!((est.matrix() - rho.matrix()).norm() < 1e-6);
    }

    #[test]
    fn mle_handles_sparse_and_unphysical_counts() {
        assert!(matches!(
            mle_reconstruct(&CountRecord { counts: [0; 4], nominal_total: 10 }),
            Err(Error::EmptyCounts)
        ));
        for counts in [[0, 0, 5, 0], [10, 10, 20, 20], [0, 0, 0, 3], [100, 0, 100, 0], [1, 0, 0, 0]] {
            let rho = mle_reconstruct(&CountRecord { counts, nominal_total: 10 }).unwrap();
            assert_valid(&rho);
        }
    }

    #[test]
    fn nearest_pure_examples() {
        let z = nearest_pure_state(&DensityMatrix::pure(&pt(0.2, 0.0))).unwrap();
        assert!((z.z().unwrap() - 0.2).norm() < 1e-15);
        let rho = DensityMatrix::from_bloch([0.0, 0.0, 0.8]).unwrap();
        assert!(nearest_pure_state(&rho).unwrap().z().unwrap().norm() < 1e-15);
        assert!(matches!(
            nearest_pure_state(&DensityMatrix::maximally_mixed()),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let down = DensityMatrix::from_bloch([0.0, 0.0, -0.8]).unwrap();
        assert!(nearest_pure_state(&down).unwrap().is_infinite());
    }

    #[test]
    fn monte_carlo_examples() {
        let pair = (pt(0.2, 0.0), pt(-0.2, 0.0));
        let sharp = monte_carlo_error(pair, 1_000_000_000, 50, 11).unwrap();
        assert!((sharp.mean - 0.923076923076923).abs() < 1e-3);
        assert!(sharp.std < 1e-3);
        assert_eq!(sharp.failed, 0);

        let a = monte_carlo_error(pair, DEFAULT_SHOTS, 100, 5).unwrap();
        let b = monte_carlo_error(pair, DEFAULT_SHOTS, 100, 5).unwrap();
        assert_eq!(a, b);
        assert!((0.001..=0.01).contains(&a.std), "std {}", a.std);

        assert!(monte_carlo_error(pair, 100, 1, 0).is_err());
        assert!(monte_carlo_error(pair, 0, 10, 0).is_err());
    }

    #[test]
    fn monte_carlo_spread_shrinks_with_shots() {
        let pair = (pt(0.2, 0.0), pt(-0.2, 0.0));
        let coarse = monte_carlo_error(pair, 10_000, 100, 21).unwrap();
        let fine = monte_carlo_error(pair, 10_000_000, 100, 21).unwrap();
        assert!(fine.std < coarse.std);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn probabilities_are_linear(x in -0.5f64..0.5, y in -0.5f64..0.5, z in -0.5f64..0.5, w in 0.0f64..1.0) {
            let r1 = DensityMatrix::from_bloch([x, y, z]).unwrap();
            let r2 = DensityMatrix::from_bloch([-z, x, y]).unwrap();
            let mix = DensityMatrix::new(r1.matrix() * Complex64::new(w, 0.0) + r2.matrix() * Complex64::new(1.0 - w, 0.0)).unwrap();
            let (p1, p2, pm) = (measurement_probabilities(&r1), measurement_probabilities(&r2), measurement_probabilities(&mix));
            for k in 0..4 {
                prop_assert!((pm[k] - (w * p1[k] + (1.0 - w) * p2[k])).abs() < 1e-14);
            }
            prop_assert!((pm[0] + pm[1] - 1.0).abs() < 1e-15);
        }

        #[test]
        fn mle_output_is_always_physical(counts in proptest::array::uniform4(0u64..20_000)) {
            prop_assume!(counts.iter().any(|&n| n > 0));
            let rho = mle_reconstruct(&CountRecord { counts, nominal_total: 12_000 }).unwrap();
            assert_valid(&rho);
        }

        #[test]
        fn sampling_is_deterministic(seed in any::<u64>()) {
            let p = [0.3, 0.7, 0.1, 0.9];
            prop_assert_eq!(sample_counts(p, 12_000, seed), sample_counts(p, 12_000, seed));
        }
    }
}
