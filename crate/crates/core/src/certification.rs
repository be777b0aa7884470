//! Finite-shot robustness certification.
//!
//! The classifier is sampled `N` times on the benign input; Hoeffding's
//! inequality turns the empirical frequency of the top class into a lower bound
//! `pA` that holds with probability at least `1 - epsilon`. If `pA > 1/2` the
//! certificate reports the radii implied by `pA` (with `pB = 1 - pA`), otherwise
//! it abstains.
//!
//! Shots are drawn in blocks of [`SHOT_BLOCK`]; block `b` uses ChaCha20 stream
//! `b` keyed by the run seed, so counts are identical however the blocks are
//! scheduled.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    depol_full_sphere_threshold, radius_depol_dp, radius_depol_hoelder, radius_depol_qht, radius_hoelder,
    BoundReport,
};
use crate::classifier::{top_two, Classifier};
use crate::error::{Error, Result};
use crate::quantum::{depolarize, DensityMatrix, PureState};
use crate::rng::stream_rng;

/// Shots per random stream.
pub const SHOT_BLOCK: u64 = 4096;

/// Draws `n_shots` outcomes from `probabilities` and returns per-class counts.
pub fn sample_from_probabilities(probabilities: &[f64], n_shots: u64, seed: u64) -> Result<Vec<u64>> {
    if n_shots == 0 {
        return Err(Error::InvalidArgument("number of shots must be positive".into()));
    }
    if probabilities.is_empty() || probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidArgument("probabilities must be finite and non-negative".into()));
    }
    let mut cumulative = Vec::with_capacity(probabilities.len());
    let mut total = 0.0;
    for p in probabilities {
        total += p;
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(Error::InvalidArgument("probabilities sum to zero".into()));
    }
    let last_supported = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let k = probabilities.len();
    let blocks = n_shots.div_ceil(SHOT_BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let shots = SHOT_BLOCK.min(n_shots - b * SHOT_BLOCK);
            let mut counts = vec![0u64; k];
            for _ in 0..shots {
                let u = rng.random::<f64>() * total;
                let outcome = cumulative.iter().position(|&c| u < c).unwrap_or(last_supported);
                counts[outcome] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// Measures the classifier on `sigma` `n_shots` times.
pub fn sample_outcomes(cl: &Classifier, sigma: &DensityMatrix, n_shots: u64, seed: u64) -> Result<Vec<u64>> {
    sample_from_probabilities(&cl.class_probabilities(sigma)?, n_shots, seed)
}

/// Hoeffding confidence bounds on the top two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingEstimate {
    pub k_a: usize,
    pub k_b: usize,
    pub y_hat_a: f64,
    pub y_hat_b: f64,
    /// `sqrt(-ln(epsilon) / (2 N))`.
    pub margin: f64,
    pub p_a_lower: f64,
    pub p_b_upper: f64,
    /// Set when either bound left `[0, 1]` and was clipped.
    pub clipped: bool,
}

pub fn hoeffding_margin(n_shots: u64, epsilon: f64) -> f64 {
    (-epsilon.ln() / (2.0 * n_shots as f64)).max(0.0).sqrt()
}

pub fn hoeffding_bounds(counts: &[u64], n_shots: u64, epsilon: f64) -> Result<HoeffdingEstimate> {
    if counts.len() < 2 {
        return Err(Error::InvalidArgument("need counts for at least two classes".into()));
    }
    let total: u64 = counts.iter().sum();
    if total != n_shots || n_shots == 0 {
        return Err(Error::InvalidArgument(format!("counts sum to {total}, expected N = {n_shots}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let (k_a, k_b) = top_two(counts);
    let n = n_shots as f64;
    let y_hat_a = counts[k_a] as f64 / n;
    let y_hat_b = counts[k_b] as f64 / n;
    let margin = hoeffding_margin(n_shots, epsilon);
    let raw_a = y_hat_a - margin;
    let raw_b = y_hat_b + margin;
    Ok(HoeffdingEstimate {
        k_a,
        k_b,
        y_hat_a,
        y_hat_b,
        margin,
        p_a_lower: raw_a.clamp(0.0, 1.0),
        p_b_upper: raw_b.clamp(0.0, 1.0),
        clipped: raw_a < 0.0 || raw_b > 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificationMode {
    Protocol,
    Smoothed,
}

/// Radii from the general `(pA, pB)` variant, where `pB` is the Hoeffding upper
/// bound on the runner-up class instead of `1 - pA`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedBounds {
    pub p_a_lower: f64,
    pub p_b_upper: f64,
    pub radii: Option<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingInfo {
    pub p: f64,
    /// Every pure adversarial qubit state is certified.
    pub covers_entire_bloch_sphere: bool,
    /// The depolarized QHT radius came from bisection on the general robustness
    /// condition rather than the single-qubit closed form.
    pub generic_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: CertificationMode,
    pub label: usize,
    pub label_name: String,
    pub p_a_lower: f64,
    pub p_b_upper: f64,
    pub epsilon: f64,
    pub n_shots: u64,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub abstained: bool,
    pub clipped: bool,
    pub sigma_pure: bool,
    /// Present unless the certificate abstained.
    pub radii: Option<BoundReport>,
    pub extended: Option<ExtendedBounds>,
    pub smoothing: Option<SmoothingInfo>,
}

impl Certificate {
    /// The headline radius: the pure-state QHT radius, its depolarized
    /// counterpart, or the Hoelder radius for mixed inputs.
    pub fn radius(&self) -> Option<f64> {
        let r = self.radii.as_ref()?;
        r.r_depol_qht
            .or(r.r_qht_pure)
            .or(r.r_depol_hoelder)
            .or(r.r_hoelder)
    }
}

/// Certificate plus provenance, as written by the command line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub tool_version: String,
    pub input_hashes: BTreeMap<String, String>,
    #[serde(flatten)]
    pub certificate: Certificate,
}

fn empty_report(p_a: f64, p_b: f64, p: f64) -> BoundReport {
    BoundReport {
        p_a,
        p_b,
        p,
        r_qht_pure: None,
        r_qht_pure_mixed_main: None,
        r_qht_pure_mixed_appendix: None,
        r_hoelder: None,
        r_depol_qht: None,
        r_depol_hoelder: None,
        r_depol_dp: None,
    }
}

fn base_certificate(
    cl: &Classifier,
    sigma: &DensityMatrix,
    counts: Vec<u64>,
    n_shots: u64,
    epsilon: f64,
    seed: u64,
    mode: CertificationMode,
) -> Result<(Certificate, HoeffdingEstimate)> {
    let est = hoeffding_bounds(&counts, n_shots, epsilon)?;
    let abstained = est.p_a_lower <= 0.5;
    let cert = Certificate {
        mode,
        label: est.k_a,
        label_name: cl.labels()[est.k_a].clone(),
        p_a_lower: est.p_a_lower,
        p_b_upper: 1.0 - est.p_a_lower,
        epsilon,
        n_shots,
        seed,
        counts,
        abstained,
        clipped: est.clipped,
        sigma_pure: sigma.is_pure(),
        radii: None,
        extended: None,
        smoothing: None,
    };
    Ok((cert, est))
}

/// Sampling-based certification around the benign input `sigma`.
///
/// For pure `sigma` the certificate carries the pure-state QHT radius
/// `sqrt(1/2 - sqrt(pA (1 - pA)))` together with the Hoelder and pure-mixed
/// radii; for mixed `sigma` only the Hoelder radius is reported.
pub fn certify(cl: &Classifier, sigma: &DensityMatrix, n_shots: u64, epsilon: f64, seed: u64) -> Result<Certificate> {
    let counts = sample_outcomes(cl, sigma, n_shots, seed)?;
    let (mut cert, est) = base_certificate(cl, sigma, counts, n_shots, epsilon, seed, CertificationMode::Protocol)?;
    if cert.abstained {
        return Ok(cert);
    }
    let p_a = cert.p_a_lower;
    cert.radii = Some(if cert.sigma_pure {
        BoundReport::from_lower_bound(p_a, 0.0)?
    } else {
        let mut r = empty_report(p_a, 1.0 - p_a, 0.0);
        r.r_hoelder = Some(radius_hoelder(p_a, 1.0 - p_a)?);
        r
    });
    cert.extended = Some(extended(&est, cert.sigma_pure)?);
    Ok(cert)
}

fn extended(est: &HoeffdingEstimate, pure: bool) -> Result<ExtendedBounds> {
    let radii = if est.p_b_upper < est.p_a_lower {
        let mut r = BoundReport::compute(est.p_a_lower, est.p_b_upper, 0.0)?;
        if !pure {
            r.r_qht_pure = None;
            r.r_qht_pure_mixed_main = None;
            r.r_qht_pure_mixed_appendix = None;
        }
        Some(r)
    } else {
        None
    };
    Ok(ExtendedBounds {
        p_a_lower: est.p_a_lower,
        p_b_upper: est.p_b_upper,
        radii,
    })
}

/// Certification of the depolarization-smoothed classifier `y(E_p(.))`.
///
/// Radii are trace distances between the unsmoothed states. For single-qubit
/// pure `sigma` the closed-form depolarized radii are reported; for pure
/// `sigma` in higher dimension the QHT radius is found by bisection on the
/// robustness condition between smoothed pure states and flagged as a generic
/// fallback. Mixed `sigma` only receives the depolarized Hoelder radius.
pub fn certify_smoothed(
    cl: &Classifier,
    sigma: &DensityMatrix,
    p: f64,
    n_shots: u64,
    epsilon: f64,
    seed: u64,
) -> Result<Certificate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRegime(format!("depolarization parameter must lie in (0, 1), got {p}")));
    }
    let smoothed = depolarize(sigma, p);
    let counts = sample_outcomes(cl, &smoothed, n_shots, seed)?;
    let (mut cert, _) = base_certificate(cl, sigma, counts, n_shots, epsilon, seed, CertificationMode::Smoothed)?;
    let mut info = SmoothingInfo {
        p,
        covers_entire_bloch_sphere: false,
        generic_fallback: false,
    };
    if !cert.abstained {
        let p_a = cert.p_a_lower;
        let mut r = empty_report(p_a, 1.0 - p_a, p);
        r.r_depol_hoelder = Some(radius_depol_hoelder(p_a, p)?);
        if cert.sigma_pure && sigma.dim() == 2 {
            r.r_depol_qht = Some(radius_depol_qht(p_a, p)?);
            r.r_depol_dp = Some(radius_depol_dp(p_a, p)?);
            info.covers_entire_bloch_sphere = p_a > depol_full_sphere_threshold(p);
        } else if cert.sigma_pure {
            let reference = PureState::from_density(sigma)?;
            let theta = crate::oracle::boundary_angle(&reference, p, p_a, 1.0 - p_a, 0.0)?;
            r.r_depol_qht = Some((theta / 2.0).sin());
            info.generic_fallback = true;
        }
        cert.radii = Some(r);
    }
    cert.smoothing = Some(info);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::radius_qht_pure;
    use crate::quantum::Povm;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn fig3() -> Classifier {
        Classifier::bloch_projective(2.0 * 0.9f64.sqrt().acos(), FRAC_PI_2)
    }

    #[test]
    fn deterministic_outcomes() {
        let cl = Classifier::from_povm(Povm::computational(2)).unwrap();
        let counts = sample_outcomes(&cl, &DensityMatrix::basis(2, 0), 100, 3).unwrap();
        assert_eq!(counts, vec![100, 0]);
        let a = sample_outcomes(&fig3(), &DensityMatrix::basis(2, 0), 10_000, 11).unwrap();
        let b = sample_outcomes(&fig3(), &DensityMatrix::basis(2, 0), 10_000, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 10_000);
        let c = sample_outcomes(&fig3(), &DensityMatrix::basis(2, 0), 10_000, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(sample_from_probabilities(&[0.5, 0.5], 0, 1).is_err());
    }

    #[test]
    fn hoeffding_examples() {
        let est = hoeffding_bounds(&[950, 50], 1000, 0.001).unwrap();
        assert_abs_diff_eq!(est.margin, (6.907755278982137f64 / 2000.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(est.p_a_lower, 0.89123, epsilon = 1e-5);
        let est = hoeffding_bounds(&[950, 50], 1000, 1.0).unwrap();
        assert_eq!(est.margin, 0.0);
        assert_eq!(est.p_a_lower, 0.95);
        let big = hoeffding_bounds(&[95_000_000, 5_000_000], 100_000_000, 0.001).unwrap();
        assert_abs_diff_eq!(big.p_a_lower, 0.95, epsilon = 1e-3);
        let clipped = hoeffding_bounds(&[1, 1], 2, 0.001).unwrap();
        assert!(clipped.clipped);
        assert!(hoeffding_bounds(&[3, 3], 5, 0.1).is_err());
    }

    #[test]
    fn protocol_radius_from_lower_bound() {
        let r = BoundReport::from_lower_bound(0.89123, 0.0).unwrap();
        assert_abs_diff_eq!(r.r_qht_pure.unwrap(), 0.43434, epsilon = 1e-5);
    }

    #[test]
    fn fig3_certificate() {
        let cert = certify(&fig3(), &DensityMatrix::basis(2, 0), 100_000, 0.001, 7).unwrap();
        assert!(!cert.abstained);
        assert_eq!(cert.label, 0);
        let r = cert.radius().unwrap();
        assert_abs_diff_eq!(r, 0.44, epsilon = 0.01);
        assert_abs_diff_eq!(r, radius_qht_pure(cert.p_a_lower, 1.0 - cert.p_a_lower).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn balanced_classifier_abstains() {
        let cl = Classifier::from_povm(Povm::computational(2)).unwrap();
        for (n, eps) in [(100, 0.01), (10_000, 0.05), (1_000_000, 0.001)] {
            let cert = certify(&cl, &DensityMatrix::maximally_mixed(2), n, eps, 5).unwrap();
            assert!(cert.abstained);
            assert!(cert.radii.is_none());
        }
    }

    #[test]
    fn mixed_input_only_gets_hoelder() {
        let cl = fig3();
        let sigma = depolarize(&DensityMatrix::basis(2, 0), 0.05);
        let cert = certify(&cl, &sigma, 50_000, 0.01, 1).unwrap();
        let r = cert.radii.unwrap();
        assert!(r.r_qht_pure.is_none());
        assert!(r.r_hoelder.is_some());
    }

    #[test]
    fn smoothed_certificate_radii() {
        // After smoothing with p = 0.2 the class-0 probability on |0> is 1 - p/2 = 0.9.
        let p = 0.2;
        let cl = Classifier::from_povm(Povm::computational(2)).unwrap();
        let cert = certify_smoothed(&cl, &DensityMatrix::basis(2, 0), p, 4_000_000, 0.001, 9).unwrap();
        let r = cert.radii.unwrap();
        assert_abs_diff_eq!(r.r_depol_qht.unwrap(), 0.671, epsilon = 0.01);
        assert_abs_diff_eq!(r.r_depol_hoelder.unwrap(), 0.5, epsilon = 0.01);
        assert_abs_diff_eq!(r.r_depol_dp.unwrap(), 0.25, epsilon = 0.01);
        assert!(!cert.smoothing.unwrap().covers_entire_bloch_sphere);
    }

    #[test]
    fn smoothed_full_sphere_flag() {
        // A smoothed qubit state has smallest eigenvalue p / 2, so sampled pA
        // stays below (4 - 3p) / (4 - 2p) and the flag stays off.
        let cl = Classifier::from_povm(Povm::computational(2)).unwrap();
        for p in [0.02, 0.5] {
            let cert = certify_smoothed(&cl, &DensityMatrix::basis(2, 0), p, 1_000_000, 0.001, 2).unwrap();
            assert!(cert.p_a_lower < depol_full_sphere_threshold(p));
            assert!(!cert.smoothing.unwrap().covers_entire_bloch_sphere);
        }
    }

    #[test]
    fn smoothed_rejects_bad_p() {
        let cl = fig3();
        assert!(matches!(
            certify_smoothed(&cl, &DensityMatrix::basis(2, 0), 0.0, 100, 0.1, 1),
            Err(Error::OutOfRegime(_))
        ));
    }
}
