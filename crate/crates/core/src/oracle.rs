//! Brute-force verifiers for the closed forms and the Helstrom construction.
//!
//! Everything here is deliberately naive: random sampling over test operators,
//! bisection on the robustness predicate and repeated sampling of the Hoeffding
//! protocol. Results are deterministic for a given seed.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certification::{hoeffding_bounds, sample_from_probabilities};
use crate::classifier::Classifier;
use crate::error::{Error, Result};
use crate::hypothesis::{certify_condition, check_probability_order};
use crate::io::MatrixFile;
use crate::quantum::{
    c, depolarize, eigenvalues_unchecked, spectral_decompose, trace_product, CMatrix, CVector, Channel,
    DensityMatrix, PureState,
};
use crate::rng::{derive_seed, stream_rng};

/// Largest dimension accepted by [`brute_force_min_beta`].
pub const MAX_BRUTE_FORCE_DIM: usize = 4;
/// Smallest sample count accepted by the sampling oracles.
pub const MIN_SAMPLES: u64 = 1000;
/// Accepted type-I errors lie in `[alpha0 - ALPHA_WINDOW, alpha0]`.
pub const ALPHA_WINDOW: f64 = 1e-3;
const SAMPLE_BLOCK: u64 = 1024;
const ANGLE_TOL: f64 = 1e-15;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return PureState::new(v.unscale(norm)).expect("normalized");
        }
    }
}

/// Random density matrix `G G^dagger / Tr` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale_mut(tr);
    let rho = crate::quantum::hermitian_part(&rho);
    DensityMatrix::new(rho).expect("Wishart matrices are valid states")
}

/// Random GUE-style Hermitian matrix `(G + G^dagger) / 2`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Random channel with `n_kraus` Kraus operators, `K_i = G_i S^{-1/2}` where
/// `S = sum_i G_i^dagger G_i`. At least `ceil(dim_in / dim_out)` operators are
/// drawn so that `S` is invertible.
pub fn random_channel<R: Rng + ?Sized>(dim_in: usize, dim_out: usize, n_kraus: usize, rng: &mut R) -> Channel {
    let n_kraus = n_kraus.max(dim_in.div_ceil(dim_out));
    let gs: Vec<CMatrix> = (0..n_kraus).map(|_| ginibre(dim_out, dim_in, rng)).collect();
    let s = gs
        .iter()
        .fold(CMatrix::zeros(dim_in, dim_in), |acc, g| acc + g.adjoint() * g);
    let inv_sqrt = spectral_decompose(&crate::quantum::hermitian_part(&s))
        .expect("Hermitian")
        .map(|v| 1.0 / v.sqrt());
    Channel::new(gs.into_iter().map(|g| g * &inv_sqrt).collect()).expect("normalized Kraus operators")
}

/// Random test operator: a random Hermitian matrix with its spectrum mapped
/// affinely onto `[0, 1]`.
pub fn random_test_operator<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let h = random_hermitian(dim, rng);
    let (lo, hi) = extremes(&h);
    normalize_spectrum(&h, lo, hi)
}

fn extremes(h: &CMatrix) -> (f64, f64) {
    if h.nrows() == 2 {
        let a = h[(0, 0)].re;
        let d = h[(1, 1)].re;
        let r = (0.25 * (a - d) * (a - d) + h[(0, 1)].norm_sqr()).sqrt();
        let mid = 0.5 * (a + d);
        return (mid - r, mid + r);
    }
    let v = eigenvalues_unchecked(h);
    (v[v.len() - 1], v[0])
}

fn normalize_spectrum(h: &CMatrix, lo: f64, hi: f64) -> CMatrix {
    let d = h.nrows();
    let width = hi - lo;
    if width <= 1e-300 {
        return CMatrix::identity(d, d).scale(0.5);
    }
    (h - CMatrix::identity(d, d) * c(lo)).unscale(width)
}

/// Scalar adjustment of a test operator with type-I error `alpha` towards the
/// window `[alpha0 - ALPHA_WINDOW, alpha0]`: `M -> k M` with `k = alpha0 /
/// alpha` if `alpha` is too large, `M -> M + s (1 - M)` if it is too small.
/// Returns the affine coefficients `(k, s)` of `M' = k M + s 1`.
fn alpha_adjustment(alpha: f64, alpha0: f64) -> (f64, f64) {
    if alpha > alpha0 {
        (alpha0 / alpha, 0.0)
    } else if alpha < alpha0 - ALPHA_WINDOW {
        let s = (alpha0 - alpha) / (1.0 - alpha);
        (1.0 - s, s)
    } else {
        (1.0, 0.0)
    }
}

/// Best test operator found by a sampling search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOperatorRecord {
    pub sample_index: u64,
    pub alpha: f64,
    pub beta: f64,
    pub eigenvalues: Vec<f64>,
    pub operator: MatrixFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub best_value: f64,
    pub argmin: TestOperatorRecord,
    pub samples_used: u64,
    pub seed: u64,
}

struct Candidate {
    beta: f64,
    index: u64,
    h: CMatrix,
    lo: f64,
    hi: f64,
    coeffs: (f64, f64),
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    match a.beta.total_cmp(&b.beta) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal if a.index <= b.index => a,
        _ => b,
    }
}

/// Upper estimate of `min { beta(M) : alpha(M) <= alpha0 }` from `samples`
/// random test operators. Every sampled operator satisfies the constraint, so
/// the result can only approach the Helstrom value from above.
pub fn brute_force_min_beta(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    alpha0: f64,
    samples: u64,
    seed: u64,
) -> Result<SearchReport> {
    let d = sigma.dim();
    if rho.dim() != d {
        return Err(Error::DimMismatch { expected: d, found: rho.dim() });
    }
    if d > MAX_BRUTE_FORCE_DIM {
        return Err(Error::RegimeTooLarge {
            dim: d,
            max: MAX_BRUTE_FORCE_DIM,
        });
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if !(0.0..=1.0).contains(&alpha0) {
        return Err(Error::InvalidArgument(format!("alpha0 must lie in [0, 1], got {alpha0}")));
    }
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let best = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let start = b * SAMPLE_BLOCK;
            let end = (start + SAMPLE_BLOCK).min(samples);
            let mut best: Option<Candidate> = None;
            for index in start..end {
                let h = random_hermitian(d, &mut rng);
                let (lo, hi) = extremes(&h);
                let width = hi - lo;
                // Traces of the normalized operator, obtained without forming it.
                let (ts, tr) = if width <= 1e-300 {
                    (0.5, 0.5)
                } else {
                    (
                        (trace_product(sigma.matrix(), &h) - lo) / width,
                        (trace_product(rho.matrix(), &h) - lo) / width,
                    )
                };
                let coeffs = alpha_adjustment(ts, alpha0);
                let beta = 1.0 - (coeffs.0 * tr + coeffs.1);
                if best.as_ref().is_none_or(|c| beta < c.beta) {
                    best = Some(Candidate {
                        beta,
                        index,
                        h,
                        lo,
                        hi,
                        coeffs,
                    });
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(better(a, b)),
                (a, None) => a,
                (None, b) => b,
            },
        )
        .expect("at least one sample");

    let m = normalize_spectrum(&best.h, best.lo, best.hi).scale(best.coeffs.0)
        + CMatrix::identity(d, d).scale(best.coeffs.1);
    let alpha = trace_product(sigma.matrix(), &m);
    let beta = 1.0 - trace_product(rho.matrix(), &m);
    Ok(SearchReport {
        best_value: beta,
        argmin: TestOperatorRecord {
            sample_index: best.index,
            alpha,
            beta,
            eigenvalues: eigenvalues_unchecked(&m),
            operator: MatrixFile::from_matrix(&m),
        },
        samples_used: samples,
        seed,
    })
}

/// Largest angle `theta` in `[0, pi]` such that the (optionally depolarized)
/// pair `sigma = |ref>`, `rho = cos(theta/2)|ref> + e^{i phi} sin(theta/2)|ref_perp>`
/// still satisfies the robustness condition. `p = 0` disables smoothing.
pub fn boundary_angle(reference: &PureState, p: f64, p_a: f64, p_b: f64, phi: f64) -> Result<f64> {
    let orth = reference.orthogonal_complement_vector();
    boundary_angle_towards(reference, &orth, p, p_a, p_b, phi)
}

fn boundary_angle_towards(
    reference: &PureState,
    orth: &PureState,
    p: f64,
    p_a: f64,
    p_b: f64,
    phi: f64,
) -> Result<f64> {
    check_probability_order(p_a, p_b)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::OutOfRegime(format!("depolarization parameter must lie in [0, 1), got {p}")));
    }
    if reference.dim() < 2 {
        return Err(Error::InvalidArgument("reference state needs dimension at least 2".into()));
    }
    let sigma = depolarize(&reference.to_density(), p);
    let robust = |theta: f64| -> Result<bool> {
        let rho = depolarize(&reference.rotate_towards(orth, theta, phi).to_density(), p);
        certify_condition(&sigma, &rho, p_a, p_b)
    };
    if robust(PI)? {
        return Ok(PI);
    }
    let (mut lo, mut hi) = (0.0, PI);
    while hi - lo > ANGLE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if robust(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Depolarized boundary radius by bisection, as a trace distance between the
/// unsmoothed pure states.
pub fn smoothed_boundary_radius(reference: &PureState, p: f64, p_a: f64, p_b: f64, phi: f64) -> Result<f64> {
    Ok((boundary_angle(reference, p, p_a, p_b, phi)? / 2.0).sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    /// Smallest boundary angle over the sampled directions.
    pub theta: f64,
    /// Trace distance `sin(theta / 2)` at that angle.
    pub trace_distance: f64,
    /// Largest minus smallest angle across samples.
    pub theta_spread: f64,
    pub samples_used: u64,
    pub seed: u64,
}

/// Locates the boundary of the robustness condition around `reference` by
/// bisection in `theta` along `samples` random directions (random phase and,
/// for `d > 2`, a random orthogonal direction).
pub fn boundary_radius_search(
    p_a: f64,
    p_b: f64,
    reference: &PureState,
    samples: u64,
    seed: u64,
) -> Result<BoundaryReport> {
    check_probability_order(p_a, p_b)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let thetas = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let phi = rng.random::<f64>() * TAU;
            let orth = random_orthogonal(reference, &mut rng);
            boundary_angle_towards(reference, &orth, 0.0, p_a, p_b, phi)
        })
        .collect::<Result<Vec<f64>>>()?;
    let lo = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundaryReport {
        theta: lo,
        trace_distance: (lo / 2.0).sin(),
        theta_spread: hi - lo,
        samples_used: samples,
        seed,
    })
}

fn random_orthogonal<R: Rng + ?Sized>(reference: &PureState, rng: &mut R) -> PureState {
    let psi = reference.amplitudes();
    loop {
        let v = random_pure_state(reference.dim(), rng);
        let w = v.amplitudes() - psi * psi.dotc(v.amplitudes());
        let norm = w.norm();
        if norm > 1e-6 {
            return PureState::new(w.unscale(norm)).expect("normalized");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub coverage: f64,
    pub covered: u64,
    pub trials: u64,
    pub n_shots: u64,
    pub epsilon: f64,
    pub seed: u64,
}

/// Fraction of repeated certification runs in which the true probability of
/// the selected class is at least its Hoeffding lower bound.
pub fn hoeffding_coverage(
    cl: &Classifier,
    sigma: &DensityMatrix,
    trials: u64,
    n_shots: u64,
    epsilon: f64,
    seed: u64,
) -> Result<CoverageReport> {
    if trials < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} trials, got {trials}")));
    }
    let probs = cl.class_probabilities(sigma)?;
    let covered = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let counts = sample_from_probabilities(&probs, n_shots, derive_seed(seed, i))?;
            let est = hoeffding_bounds(&counts, n_shots, epsilon)?;
            Ok(u64::from(probs[est.k_a] >= est.p_a_lower))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(CoverageReport {
        coverage: covered as f64 / trials as f64,
        covered,
        trials,
        n_shots,
        epsilon,
        seed,
    })
}
