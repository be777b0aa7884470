//! CSV tables and the worked qubit example.
//!
//! Numbers are written with 12 significant digits in fixed notation so output is
//! byte-stable for fixed inputs.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    depol_full_sphere_threshold, radius_depol_dp, radius_depol_hoelder, radius_depol_qht, BoundReport,
};
use crate::classifier::Classifier;
use crate::error::{Error, Result};
use crate::hypothesis::{helstrom, tau};
use crate::oracle::boundary_radius_search;
use crate::quantum::{DensityMatrix, PureState};

/// Fixed notation with 12 significant digits; `NaN`/infinities as `nan`/`inf`.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99.. -> 10.0..).
    let digits = s.chars().filter(char::is_ascii_digit).count();
    let leading_zeros = s
        .trim_start_matches('-')
        .chars()
        .take_while(|ch| *ch == '0' || *ch == '.')
        .filter(|ch| *ch == '0')
        .count();
    if digits - leading_zeros > 12 && decimals > 0 {
        let decimals = decimals - 1;
        return format!("{x:.decimals$}");
    }
    s
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig12).unwrap_or_default()
}

pub const BOUNDS_HEADER: &str = "pA,pB,p,r_qht_pure,r_qht_pure_mixed_main,r_qht_pure_mixed_appendix,\
r_hoelder,r_depol_qht,r_depol_hoelder,r_depol_dp";

/// One CSV row in [`BOUNDS_HEADER`] order; inapplicable radii are empty.
pub fn bound_report_row(r: &BoundReport) -> String {
    [
        fmt_sig12(r.p_a),
        fmt_sig12(r.p_b),
        fmt_sig12(r.p),
        fmt_opt(r.r_qht_pure),
        fmt_opt(r.r_qht_pure_mixed_main),
        fmt_opt(r.r_qht_pure_mixed_appendix),
        fmt_opt(r.r_hoelder),
        fmt_opt(r.r_depol_qht),
        fmt_opt(r.r_depol_hoelder),
        fmt_opt(r.r_depol_dp),
    ]
    .join(",")
}

pub fn bounds_csv(r: &BoundReport) -> String {
    format!("{BOUNDS_HEADER}\n{}\n", bound_report_row(r))
}

/// `(pA, pB)` grid with `pA = i / n`, `pB = j / n` for `0 <= j < i <= n`.
pub fn pure_grid(n: usize) -> Result<Vec<BoundReport>> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid resolution must be positive".into()));
    }
    (1..=n)
        .into_par_iter()
        .flat_map_iter(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| BoundReport::compute(i as f64 / n as f64, j as f64 / n as f64, 0.0))
        .collect()
}

pub const PURE_HEADER: &str = "pA,pB,r_qht_pure,r_hoelder,r_qht_pure_mixed_main,r_qht_pure_mixed_appendix,\
qht_minus_hoelder,hoelder_minus_mixed_main,hoelder_minus_mixed_appendix";

/// Pure-state radii on [`pure_grid`] with the two difference columns per
/// pure-mixed variant.
pub fn pure_comparison_csv(n: usize) -> Result<String> {
    let mut out = format!("{PURE_HEADER}\n");
    for r in pure_grid(n)? {
        let (q, h) = (r.r_qht_pure.unwrap_or(0.0), r.r_hoelder.unwrap_or(0.0));
        let (mm, ma) = (
            r.r_qht_pure_mixed_main.unwrap_or(0.0),
            r.r_qht_pure_mixed_appendix.unwrap_or(0.0),
        );
        let row = [r.p_a, r.p_b, q, h, mm, ma, q - h, h - mm, h - ma].map(fmt_sig12).join(",");
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// One point of the depolarized comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepolRow {
    pub p: f64,
    pub p_a: f64,
    pub r_qht: f64,
    pub r_hoelder: f64,
    pub r_dp: f64,
    pub entire_sphere: bool,
}

/// `p = 0.05, 0.10, ..., 0.95`.
pub fn default_depol_levels() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

/// Depolarized radii for each `p` at `pA = 1/2 + i / (2 (resolution + 1))`,
/// `i = 1..=resolution`.
pub fn depol_comparison(levels: &[f64], resolution: usize) -> Result<Vec<DepolRow>> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    levels
        .par_iter()
        .flat_map_iter(|&p| (1..=resolution).map(move |i| (p, 0.5 + 0.5 * i as f64 / (resolution + 1) as f64)))
        .map(|(p, p_a)| {
            Ok(DepolRow {
                p,
                p_a,
                r_qht: radius_depol_qht(p_a, p)?,
                r_hoelder: radius_depol_hoelder(p_a, p)?,
                r_dp: radius_depol_dp(p_a, p)?,
                entire_sphere: p_a > depol_full_sphere_threshold(p),
            })
        })
        .collect()
}

pub const DEPOL_HEADER: &str = "p,pA,r_depol_qht,r_depol_hoelder,r_depol_dp,entire_sphere";

pub fn depol_comparison_csv(levels: &[f64], resolution: usize) -> Result<String> {
    let mut out = format!("{DEPOL_HEADER}\n");
    for r in depol_comparison(levels, resolution)? {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_sig12(r.p),
            fmt_sig12(r.p_a),
            fmt_sig12(r.r_qht),
            fmt_sig12(r.r_hoelder),
            fmt_sig12(r.r_dp),
            u8::from(r.entire_sphere)
        );
    }
    Ok(out)
}

/// A computed quantity compared against a reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: &str, computed: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            reference,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        (self.computed - self.reference).abs() <= self.tolerance
    }
}

/// The qubit example: `sigma = |0>`, `rho` at `theta = pi/3`, `phi = -pi/2`, a
/// classifier with `y_0(sigma) = 0.9` and `alpha0 = 0.1`.
pub fn toy_example() -> Result<Vec<Check>> {
    let sigma = DensityMatrix::basis(2, 0);
    let rho = PureState::bloch(FRAC_PI_3, -FRAC_PI_2).to_density();
    let cl = Classifier::bloch_projective(2.0 * 0.9f64.sqrt().acos(), FRAC_PI_2);
    let test = helstrom(&rho, &sigma, 0.1)?;
    let boundary = boundary_radius_search(0.9, 0.1, &PureState::basis(2, 0), 16, 0)?;
    let prediction = cl.predict(&rho)?;
    Ok(vec![
        Check::new("y0_sigma", cl.class_probabilities(&sigma)?[0], 0.9, 1e-9),
        Check::new("tau", tau(&rho, &sigma, 0.1)?, 0.5 + 2.0 / 3f64.sqrt(), 1e-6),
        Check::new("beta", test.beta, 0.44, 0.01),
        Check::new("theta_max", boundary.theta, 0.93, 0.01),
        Check::new("radius", boundary.trace_distance, 0.5f64.sqrt() * (1.0 - 0.6f64).sqrt(), 1e-6),
        Check::new("predicted_label_rho", prediction.label as f64, 1.0, 0.0),
    ])
}

pub const CHECK_HEADER: &str = "quantity,computed,reference,tolerance,status";

pub fn checks_csv(checks: &[Check]) -> String {
    let mut out = format!("{CHECK_HEADER}\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.name,
            fmt_sig12(c.computed),
            fmt_sig12(c.reference),
            fmt_sig12(c.tolerance),
            if c.passed() { "PASS" } else { "FAIL" }
        );
    }
    out
}
