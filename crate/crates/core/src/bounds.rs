//! Closed-form certified radii in trace distance.
//!
//! All radii are trace distances `T(rho, sigma) = ||rho - sigma||_1 / 2` in
//! `[0, 1]`. For pure benign and adversarial states and `pA + pB = 1` the pure
//! radius is exact: robustness holds if and only if `T < radius_qht_pure`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::check_probability_order;

/// Which pure-mixed radius to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PureMixedVariant {
    /// `delta (1 - sqrt(1 - delta^2))`.
    Main,
    /// `delta (1 - sqrt(1 - delta^2 / 4))`, the smaller of the two.
    #[default]
    Appendix,
}

/// `f(pA, pB)`; the pure radius is `sqrt((1 - f) / 2)`.
pub fn overlap_function(p_a: f64, p_b: f64) -> f64 {
    let cross = (p_a * p_b * (1.0 - p_a) * (1.0 - p_b)).max(0.0).sqrt();
    (1.0 - p_b - p_a * (1.0 - 2.0 * p_b) + 2.0 * cross).max(0.0).sqrt()
}

/// Exact radius for pure benign and pure adversarial states, in `[0, sqrt(1/2)]`.
pub fn radius_qht_pure(p_a: f64, p_b: f64) -> Result<f64> {
    check_probability_order(p_a, p_b)?;
    Ok(((1.0 - overlap_function(p_a, p_b)) / 2.0).max(0.0).sqrt())
}

/// Sufficient radius for a pure benign and a possibly mixed adversarial state.
pub fn radius_qht_pure_mixed(p_a: f64, p_b: f64, variant: PureMixedVariant) -> Result<f64> {
    let delta = radius_qht_pure(p_a, p_b)?;
    let inner = match variant {
        PureMixedVariant::Main => 1.0 - delta * delta,
        PureMixedVariant::Appendix => 1.0 - delta * delta / 4.0,
    };
    Ok(delta * (1.0 - inner.sqrt()))
}

/// `(pA - pB) / 2`, valid for arbitrary states.
pub fn radius_hoelder(p_a: f64, p_b: f64) -> Result<f64> {
    check_probability_order(p_a, p_b)?;
    Ok((p_a - p_b) / 2.0)
}

fn check_depolarization(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRegime(format!("depolarization parameter must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Lower edge of the middle case of [`radius_depol_qht`].
pub fn depol_middle_threshold(p: f64) -> f64 {
    (4.0 - 6.0 * p + 3.0 * p * p) / (4.0 - 4.0 * p + 2.0 * p * p)
}

/// Above this `pA` the depolarized radius covers the whole Bloch sphere.
pub fn depol_full_sphere_threshold(p: f64) -> f64 {
    (4.0 - 3.0 * p) / (4.0 - 2.0 * p)
}

/// Exact radius for single-qubit pure states smoothed by depolarization with
/// parameter `p`, with `pB = 1 - pA`. The radius is a trace distance between
/// the unsmoothed states.
pub fn radius_depol_qht(p_a: f64, p: f64) -> Result<f64> {
    if !(p_a > 0.5 && p_a <= 1.0) {
        return Err(Error::OutOfRegime(format!("requires 1/2 < pA <= 1, got {p_a}")));
    }
    check_depolarization(p)?;
    let q = 1.0 - p;
    let r = if p_a <= depol_middle_threshold(p) {
        let g = (2.0 * p_a * (1.0 - p_a) - p * (1.0 - 0.5 * p)) / (2.0 * q * q);
        (0.5 - g.max(0.0).sqrt()).max(0.0).sqrt()
    } else if p_a <= depol_full_sphere_threshold(p) {
        let gap = 1.0 - 2.0 * p_a;
        (p * (2.0 - p) * gap * gap / (8.0 * q * q * (1.0 - p_a))).sqrt()
    } else {
        1.0
    };
    Ok(r.min(1.0))
}

fn check_half_open(p_a: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&p_a) {
        return Err(Error::OutOfRegime(format!("requires 1/2 <= pA <= 1, got {p_a}")));
    }
    Ok(())
}

/// Hoelder radius under depolarization, `(2 pA - 1) / (2 (1 - p))`, capped at 1.
pub fn radius_depol_hoelder(p_a: f64, p: f64) -> Result<f64> {
    check_half_open(p_a)?;
    check_depolarization(p)?;
    Ok(((2.0 * p_a - 1.0) / (2.0 * (1.0 - p))).min(1.0))
}

/// Differential-privacy radius `p / (2 (1 - p)) (sqrt(pA / (1 - pA)) - 1)`, capped at 1.
pub fn radius_depol_dp(p_a: f64, p: f64) -> Result<f64> {
    check_half_open(p_a)?;
    check_depolarization(p)?;
    if p_a == 1.0 {
        return Ok(1.0);
    }
    Ok((p / (2.0 * (1.0 - p)) * ((p_a / (1.0 - p_a)).sqrt() - 1.0)).min(1.0))
}

/// Type-II errors of the Helstrom tests with type-I errors `1 - pA` and `pB`
/// for pure states with `|<rho|sigma>|^2 = overlap_sq`.
///
/// Requires `max(pB, 1 - pA) < overlap_sq < 1`; outside that range at least one
/// of the tests has `tau = 0` and zero type-II error.
pub fn pure_beta_closed_form(overlap_sq: f64, p_a: f64, p_b: f64) -> Result<(f64, f64)> {
    check_probability_order(p_a, p_b)?;
    if !(overlap_sq < 1.0 && overlap_sq > p_b.max(1.0 - p_a)) {
        return Err(Error::OutOfRegime(format!(
            "overlap {overlap_sq} must exceed max(pB, 1 - pA) = {} and be below 1",
            p_b.max(1.0 - p_a)
        )));
    }
    let g = overlap_sq;
    let spread = g * (1.0 - g);
    let beta_a = g * (2.0 * p_a - 1.0) + (1.0 - p_a) * (1.0 - 2.0 * p_a * (spread / (p_a * (1.0 - p_a))).sqrt());
    let beta_b = g * (1.0 - 2.0 * p_b) + p_b * (1.0 - 2.0 * (1.0 - p_b) * (spread / (p_b * (1.0 - p_b))).sqrt());
    Ok((beta_a, beta_b))
}

/// Every radius that applies at one `(pA, pB, p)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p_a: f64,
    pub p_b: f64,
    /// Depolarization parameter, 0 when unsmoothed.
    pub p: f64,
    pub r_qht_pure: Option<f64>,
    pub r_qht_pure_mixed_main: Option<f64>,
    pub r_qht_pure_mixed_appendix: Option<f64>,
    pub r_hoelder: Option<f64>,
    pub r_depol_qht: Option<f64>,
    pub r_depol_hoelder: Option<f64>,
    pub r_depol_dp: Option<f64>,
}

impl BoundReport {
    /// Evaluates every radius applicable at `(pA, pB)` and, when `p > 0`, the
    /// depolarized radii (which assume `pB = 1 - pA`).
    pub fn compute(p_a: f64, p_b: f64, p: f64) -> Result<Self> {
        check_probability_order(p_a, p_b)?;
        if !(0.0..1.0).contains(&p) {
            return Err(Error::OutOfRegime(format!("depolarization parameter must lie in [0, 1), got {p}")));
        }
        let mut report = Self {
            p_a,
            p_b,
            p,
            r_qht_pure: Some(radius_qht_pure(p_a, p_b)?),
            r_qht_pure_mixed_main: Some(radius_qht_pure_mixed(p_a, p_b, PureMixedVariant::Main)?),
            r_qht_pure_mixed_appendix: Some(radius_qht_pure_mixed(p_a, p_b, PureMixedVariant::Appendix)?),
            r_hoelder: Some(radius_hoelder(p_a, p_b)?),
            r_depol_qht: None,
            r_depol_hoelder: None,
            r_depol_dp: None,
        };
        if p > 0.0 && p_a > 0.5 {
            let complementary = (p_a + p_b - 1.0).abs() <= 1e-12;
            report.r_depol_qht = complementary.then(|| radius_depol_qht(p_a, p)).transpose()?;
            report.r_depol_hoelder = Some(radius_depol_hoelder(p_a, p)?);
            report.r_depol_dp = Some(radius_depol_dp(p_a, p)?);
        }
        Ok(report)
    }

    /// Protocol-style report from a lower confidence bound alone (`pB = 1 - pA`).
    pub fn from_lower_bound(p_a: f64, p: f64) -> Result<Self> {
        Self::compute(p_a, 1.0 - p_a, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_radius_examples() {
        assert_abs_diff_eq!(overlap_function(0.9, 0.1), 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(radius_qht_pure(0.9, 0.1).unwrap(), 0.447213595499958, epsilon = 1e-12);
        // Protocol form for pB = 1 - pA.
        let protocol = (0.5 - (0.9f64 * 0.1).sqrt()).sqrt();
        assert_abs_diff_eq!(radius_qht_pure(0.9, 0.1).unwrap(), protocol, epsilon = 1e-12);
        assert_abs_diff_eq!(radius_qht_pure(0.5 + 1e-15, 0.5).unwrap(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(radius_qht_pure(1.0, 0.0).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(matches!(radius_qht_pure(0.4, 0.6), Err(Error::InvalidProbabilityOrder { .. })));
        assert!(radius_qht_pure(0.5, 0.5).is_err());
    }

    #[test]
    fn pure_mixed_examples() {
        let main = radius_qht_pure_mixed(0.9, 0.1, PureMixedVariant::Main).unwrap();
        let appendix = radius_qht_pure_mixed(0.9, 0.1, PureMixedVariant::Appendix).unwrap();
        assert_abs_diff_eq!(main, 0.0472135954999579, epsilon = 1e-12);
        assert_abs_diff_eq!(appendix, 0.0113237011458917, epsilon = 1e-12);
        for v in [PureMixedVariant::Main, PureMixedVariant::Appendix] {
            assert_abs_diff_eq!(radius_qht_pure_mixed(0.5 + 1e-15, 0.5, v).unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn hoelder_examples() {
        assert_abs_diff_eq!(radius_hoelder(0.9, 0.1).unwrap(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(radius_hoelder(1.0, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(radius_hoelder(0.5, 0.5 - 1e-15).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn depolarized_qht_examples() {
        assert_abs_diff_eq!(radius_depol_qht(0.9, 0.2).unwrap(), 0.45f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(radius_depol_qht(0.9, 0.2).unwrap(), 0.67082, epsilon = 1e-5);
        assert_eq!(radius_depol_qht(0.95, 0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(
            radius_depol_qht(0.9, 1e-9).unwrap(),
            radius_qht_pure(0.9, 0.1).unwrap(),
            epsilon = 1e-6
        );
        assert!(matches!(radius_depol_qht(0.5, 0.2), Err(Error::OutOfRegime(_))));
        assert!(matches!(radius_depol_qht(0.9, 0.0), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn depolarized_qht_is_continuous_at_case_edges() {
        for p in [0.05, 0.3, 0.6, 0.9] {
            for edge in [depol_middle_threshold(p), depol_full_sphere_threshold(p)] {
                let below = radius_depol_qht(edge - 1e-10, p).unwrap();
                let above = radius_depol_qht(edge + 1e-10, p).unwrap();
                assert_abs_diff_eq!(below, above, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn depolarized_hoelder_and_dp_examples() {
        assert_abs_diff_eq!(radius_depol_hoelder(0.9, 0.2).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(radius_depol_hoelder(0.5, 0.7).unwrap(), 0.0);
        assert_abs_diff_eq!(radius_depol_hoelder(0.9, 1e-12).unwrap(), 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(radius_depol_dp(0.9, 0.2).unwrap(), 0.25, epsilon = 1e-12);
        assert_eq!(radius_depol_dp(0.5, 0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(radius_depol_dp(0.9, 1e-12).unwrap(), 0.0, epsilon = 1e-9);
        assert_eq!(radius_depol_dp(0.99999, 0.9).unwrap(), 1.0);
    }

    #[test]
    fn pure_beta_examples() {
        let (beta_a, _) = pure_beta_closed_form(0.75, 0.9, 0.1).unwrap();
        assert_abs_diff_eq!(beta_a, 0.440192378864668, epsilon = 1e-12);
        let (beta_a, _) = pure_beta_closed_form(0.8, 0.9, 0.1).unwrap();
        assert_abs_diff_eq!(beta_a, 0.5, epsilon = 1e-12);
        assert!(matches!(pure_beta_closed_form(0.05, 0.9, 0.1), Err(Error::OutOfRegime(_))));
        assert!(matches!(pure_beta_closed_form(1.0, 0.9, 0.1), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn report_fields() {
        let r = BoundReport::compute(0.9, 0.1, 0.0).unwrap();
        assert!(r.r_depol_qht.is_none());
        let r = BoundReport::compute(0.9, 0.1, 0.2).unwrap();
        assert_abs_diff_eq!(r.r_depol_qht.unwrap(), 0.45f64.sqrt(), epsilon = 1e-12);
        let r = BoundReport::compute(0.8, 0.1, 0.2).unwrap();
        assert!(r.r_depol_qht.is_none());
        assert!(r.r_depol_hoelder.is_some());
    }
}
