//! Asymmetric quantum hypothesis testing between a null state `sigma` and an
//! alternative `rho`.
//!
//! A test is an operator `0 <= M <= 1`; rejecting the null has type-I error
//! `alpha(M) = Tr[sigma M]` and type-II error `beta(M) = Tr[rho (1 - M)]`. The
//! tests minimizing `beta` at a fixed `alpha` are built from the eigenprojections
//! of `rho - t sigma` onto positive (`P+`), zero (`P0`) and negative (`P-`)
//! eigenvalues:
//!
//! ```text
//! M = P+(tau) + q0 P0(tau),   tau(alpha0) = inf { t >= 0 : alpha(P+(t)) <= alpha0 }
//! ```
//!
//! `t -> alpha(P+(t))` is non-increasing and right-continuous, which makes
//! `tau` the limit of a bisection on the predicate `alpha(P+(t)) <= alpha0`.
//!
//! Eigenvalue signs are decided relative to `||rho||_op + t ||sigma||_op`, the
//! scale of roundoff in `rho - t sigma`.

use crate::error::{Error, Result};
use crate::quantum::{c, eigenvalues_unchecked, hermitian_residual, CMatrix, DensityMatrix, Spectrum};
use crate::tol;

/// Eigenvalue-sign tolerance used for the final projections.
pub const DEFAULT_LAMBDA_TOL: f64 = 1e-8;
/// Upper limit when widening the sign tolerance after a failed sandwich check.
pub const MAX_LAMBDA_TOL: f64 = 1e-4;
/// Sign tolerance while bisecting for `tau`; close to machine precision so the
/// located `t` sits on the true crossing.
const SEARCH_LAMBDA_TOL: f64 = 1e-13;
/// Enough halvings to reach adjacent floats from any bracket.
const MAX_BISECTIONS: usize = 1100;
/// Slack allowed in the sandwich inequalities.
const SANDWICH_TOL: f64 = 1e-9;
/// Below this `alpha(P0)` is treated as zero when solving for `q0`.
const ZERO_MASS: f64 = 1e-15;
/// Eigenvalues of `sigma` below this span its kernel (used for `alpha0 = 0`).
const KERNEL_TOL: f64 = 1e-12;

/// Projections onto the positive, zero and negative eigenspaces of `rho - t sigma`.
#[derive(Debug, Clone)]
pub struct SignedProjections {
    pub t: f64,
    pub plus: CMatrix,
    pub zero: CMatrix,
    pub minus: CMatrix,
    pub lambda_tol: f64,
}

/// A Helstrom test `M = P+(t) + q0 P0(t)` together with its error probabilities.
#[derive(Debug, Clone)]
pub struct HelstromTest {
    pub m: CMatrix,
    /// `tau(alpha0)`; infinite for `alpha0 = 0`, where `M` is the projector onto
    /// the kernel of `sigma`.
    pub t: f64,
    pub q0: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Sign tolerance that satisfied the sandwich check.
    pub lambda_tol: f64,
}

struct Pencil<'a> {
    rho: &'a DensityMatrix,
    sigma: &'a DensityMatrix,
    rho_norm: f64,
    sigma_norm: f64,
}

impl<'a> Pencil<'a> {
    fn new(rho: &'a DensityMatrix, sigma: &'a DensityMatrix) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimMismatch {
                expected: sigma.dim(),
                found: rho.dim(),
            });
        }
        let op_norm = |m: &DensityMatrix| eigenvalues_unchecked(m.matrix())[0].abs();
        Ok(Self {
            rho,
            sigma,
            rho_norm: op_norm(rho),
            sigma_norm: op_norm(sigma),
        })
    }

    fn spectrum(&self, t: f64) -> Spectrum {
        let diff = self.rho.matrix() - self.sigma.matrix().scale(t);
        let n = diff.nrows();
        let eig = diff.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        Spectrum {
            values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
            vectors: CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]),
        }
    }

    fn threshold(&self, t: f64, lambda_tol: f64) -> f64 {
        lambda_tol * (self.rho_norm + t * self.sigma_norm)
    }

    /// `<v_k| sigma |v_k>` for every eigenvector column.
    fn sigma_weights(&self, sp: &Spectrum) -> Vec<f64> {
        let sv = self.sigma.matrix() * &sp.vectors;
        (0..sp.values.len())
            .map(|k| sp.vectors.column(k).dotc(&sv.column(k)).re)
            .collect()
    }

    /// `alpha(P+(t))` under the given sign tolerance.
    fn alpha_plus(&self, t: f64, lambda_tol: f64) -> f64 {
        let sp = self.spectrum(t);
        let thr = self.threshold(t, lambda_tol);
        self.sigma_weights(&sp)
            .iter()
            .zip(&sp.values)
            .filter(|(_, &v)| v > thr)
            .map(|(w, _)| w)
            .sum()
    }

    fn projections(&self, t: f64, lambda_tol: f64) -> SignedProjections {
        let sp = self.spectrum(t);
        let thr = self.threshold(t, lambda_tol);
        let idx = |keep: &dyn Fn(f64) -> bool| {
            sp.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| keep(v))
                .map(|(i, _)| i)
                .collect::<Vec<_>>()
        };
        SignedProjections {
            t,
            plus: sp.projector(idx(&|v| v > thr)),
            zero: sp.projector(idx(&|v| v.abs() <= thr)),
            minus: sp.projector(idx(&|v| v < -thr)),
            lambda_tol,
        }
    }

    fn locate_tau(&self, alpha0: f64) -> Result<f64> {
        let satisfied = |t: f64| self.alpha_plus(t, SEARCH_LAMBDA_TOL) <= alpha0;
        if satisfied(0.0) {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while !satisfied(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::OutOfRegime(format!(
                    "no threshold t reaches type-I error {alpha0}"
                )));
            }
        }
        // Bisect down to adjacent floats: near-identical states make
        // alpha(P+(t)) very steep in t.
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if satisfied(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Eigenprojections of `rho - t sigma` split by eigenvalue sign.
///
/// Eigenvalues with `|lambda| <= lambda_tol * (||rho||_op + t ||sigma||_op)` are
/// assigned to `zero`.
pub fn signed_projections(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
    lambda_tol: f64,
) -> Result<SignedProjections> {
    let pencil = Pencil::new(rho, sigma)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeT(t));
    }
    if !(lambda_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda_tol must be positive, got {lambda_tol}")));
    }
    Ok(pencil.projections(t, lambda_tol))
}

/// `(alpha, beta) = (Tr[sigma M], Tr[rho (1 - M)])` for a test operator `M`.
pub fn error_probabilities(m: &CMatrix, sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<(f64, f64)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            expected: sigma.dim(),
            found: rho.dim(),
        });
    }
    if m.nrows() != sigma.dim() || m.ncols() != sigma.dim() {
        return Err(Error::DimMismatch {
            expected: sigma.dim(),
            found: m.nrows(),
        });
    }
    let residual = hermitian_residual(m);
    if residual > tol::HERM {
        return Err(Error::NotHermitian { residual });
    }
    let values = eigenvalues_unchecked(m);
    let (hi, lo) = (values[0], values[values.len() - 1]);
    if lo < -tol::PSD {
        return Err(Error::InvalidTestOperator { eigenvalue: lo });
    }
    if hi > 1.0 + tol::PSD {
        return Err(Error::InvalidTestOperator { eigenvalue: hi });
    }
    Ok(raw_errors(m, sigma, rho))
}

fn raw_errors(m: &CMatrix, sigma: &DensityMatrix, rho: &DensityMatrix) -> (f64, f64) {
    let alpha = crate::quantum::trace_product(sigma.matrix(), m);
    let beta = 1.0 - crate::quantum::trace_product(rho.matrix(), m);
    (alpha.clamp(0.0, 1.0), beta.clamp(0.0, 1.0))
}

/// `tau(alpha0)`, the smallest `t >= 0` with `alpha(P+(t)) <= alpha0`.
pub fn tau(rho: &DensityMatrix, sigma: &DensityMatrix, alpha0: f64) -> Result<f64> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha0 must lie in (0, 1), got {alpha0}")));
    }
    Pencil::new(rho, sigma)?.locate_tau(alpha0)
}

/// Helstrom test for the null `sigma` against the alternative `rho` with type-I
/// error exactly `alpha0`; its `beta` is the minimal achievable type-II error.
pub fn helstrom(rho: &DensityMatrix, sigma: &DensityMatrix, alpha0: f64) -> Result<HelstromTest> {
    let pencil = Pencil::new(rho, sigma)?;
    if !(0.0..=1.0).contains(&alpha0) {
        return Err(Error::InvalidArgument(format!("alpha0 must lie in [0, 1], got {alpha0}")));
    }
    let d = sigma.dim();
    if alpha0 == 1.0 {
        let m = CMatrix::identity(d, d);
        let (alpha, beta) = raw_errors(&m, sigma, rho);
        return Ok(HelstromTest {
            m,
            t: 0.0,
            q0: 1.0,
            alpha,
            beta,
            lambda_tol: DEFAULT_LAMBDA_TOL,
        });
    }
    if alpha0 == 0.0 {
        let sp = crate::quantum::spectral_decompose(sigma.matrix())?;
        let kernel = sp.projector((0..d).filter(|&i| sp.values[i] <= KERNEL_TOL));
        let (alpha, beta) = raw_errors(&kernel, sigma, rho);
        return Ok(HelstromTest {
            m: kernel,
            t: f64::INFINITY,
            q0: 0.0,
            alpha,
            beta,
            lambda_tol: DEFAULT_LAMBDA_TOL,
        });
    }

    let t = pencil.locate_tau(alpha0)?;
    let mut lambda_tol = DEFAULT_LAMBDA_TOL;
    loop {
        let proj = pencil.projections(t, lambda_tol);
        let alpha_plus = crate::quantum::trace_product(sigma.matrix(), &proj.plus);
        let alpha_zero = crate::quantum::trace_product(sigma.matrix(), &proj.zero);
        if alpha_plus <= alpha0 + SANDWICH_TOL && alpha_plus + alpha_zero >= alpha0 - SANDWICH_TOL {
            let q0 = if alpha_zero > ZERO_MASS {
                ((alpha0 - alpha_plus) / alpha_zero).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let m = &proj.plus + &proj.zero * c(q0);
            let (alpha, beta) = raw_errors(&m, sigma, rho);
            return Ok(HelstromTest {
                m,
                t,
                q0,
                alpha,
                beta,
                lambda_tol,
            });
        }
        if lambda_tol >= MAX_LAMBDA_TOL {
            return Err(Error::SandwichViolated {
                t,
                alpha0,
                alpha_plus,
                alpha_plus_zero: alpha_plus + alpha_zero,
            });
        }
        lambda_tol = (lambda_tol * 10.0).min(MAX_LAMBDA_TOL);
    }
}

pub(crate) fn check_probability_order(p_a: f64, p_b: f64) -> Result<()> {
    if !(0.0 <= p_b && p_b < p_a && p_a <= 1.0) {
        return Err(Error::InvalidProbabilityOrder { p_a, p_b });
    }
    Ok(())
}

/// `beta(M_A) + beta(M_B) - 1` for Helstrom tests with type-I errors `1 - pA`
/// and `pB`. Positive exactly when robustness is certified.
pub fn condition_margin(sigma: &DensityMatrix, rho: &DensityMatrix, p_a: f64, p_b: f64) -> Result<f64> {
    check_probability_order(p_a, p_b)?;
    let beta_a = helstrom(rho, sigma, 1.0 - p_a)?.beta;
    let beta_b = if p_b == 1.0 - p_a {
        beta_a
    } else {
        helstrom(rho, sigma, p_b)?.beta
    };
    Ok(beta_a + beta_b - 1.0)
}

/// Robustness condition: every classifier with `y_kA(sigma) >= pA > pB >=
/// max_{k != kA} y_k(sigma)` also predicts `kA` on `rho` when this returns true.
pub fn certify_condition(sigma: &DensityMatrix, rho: &DensityMatrix, p_a: f64, p_b: f64) -> Result<bool> {
    Ok(condition_margin(sigma, rho, p_a, p_b)? > 0.0)
}
