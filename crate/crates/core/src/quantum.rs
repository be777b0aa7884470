//! Dense Hermitian linear algebra and quantum-state primitives.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Every state type validates its
//! invariants on construction and is immutable afterwards.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Maximum absolute column sum.
pub fn matrix_one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entrywise deviation from Hermiticity, scaled by `max(1, ||A||_1)`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst / matrix_one_norm(a).max(1.0)
}

fn check_square(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

fn check_hermitian(a: &CMatrix) -> Result<()> {
    check_square(a)?;
    let residual = hermitian_residual(a);
    if !residual.is_finite() || residual > tol::HERM {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

pub(crate) fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sum of `|v_i><v_i|` over the selected eigenvector indices.
    pub fn projector<I: IntoIterator<Item = usize>>(&self, indices: I) -> CMatrix {
        let n = self.vectors.nrows();
        let mut p = CMatrix::zeros(n, n);
        for i in indices {
            let v = self.vectors.column(i);
            p += v * v.adjoint();
        }
        p
    }

    /// `V f(diag) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        scaled * self.vectors.adjoint()
    }
}

fn decompose_unchecked(a: &CMatrix) -> Spectrum {
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), a.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    Spectrum { values, vectors }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
pub fn spectral_decompose(a: &CMatrix) -> Result<Spectrum> {
    check_hermitian(a)?;
    Ok(decompose_unchecked(a))
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    Ok(eigenvalues_unchecked(a))
}

pub(crate) fn eigenvalues_unchecked(a: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

/// Schatten 1-norm of a Hermitian matrix.
pub(crate) fn trace_norm_hermitian(a: &CMatrix) -> f64 {
    eigenvalues_unchecked(a).iter().map(|v| v.abs()).sum()
}

/// Real part of `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

/// A validated density operator: Hermitian, positive semi-definite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates `raw` against the density-operator invariants.
    pub fn new(raw: CMatrix) -> Result<Self> {
        check_hermitian(&raw)?;
        let trace = raw.trace();
        let residual = (trace - ONE).norm();
        if !(residual <= tol::TRACE) {
            return Err(Error::TraceNotOne { residual });
        }
        let min_eigenvalue = eigenvalues_unchecked(&raw).last().copied().unwrap_or(0.0);
        if min_eigenvalue < -tol::PSD {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self {
            matrix: hermitian_part(&raw),
        })
    }

    /// Wraps a matrix known to be a state up to roundoff.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(CMatrix::identity(dim, dim).scale(1.0 / dim as f64))
    }

    /// `|i><i|` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        PureState::basis(dim, index).to_density()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in descending order, with roundoff negatives clipped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_unchecked(&self.matrix)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect()
    }

    /// Rank one within [`tol::RANK_ONE`].
    pub fn is_pure(&self) -> bool {
        self.eigenvalues().get(1).is_none_or(|&v| v < tol::RANK_ONE)
    }

    /// Leading eigenvector when the state is pure.
    pub fn to_pure(&self) -> Option<PureState> {
        if !self.is_pure() {
            return None;
        }
        let sp = decompose_unchecked(&self.matrix);
        let v = sp.vectors.column(0).into_owned();
        let norm = v.norm();
        Some(PureState {
            amplitudes: v.unscale(norm),
        })
    }

    fn check_dims(&self, other: &DensityMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Validates a raw matrix as a density operator.
pub fn validate_density(raw: CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(raw)
}

/// A unit vector `|psi>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || !((norm - 1.0).abs() <= tol::NORM) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    /// Single-qubit state `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let amplitudes = CVector::from_vec(vec![
            c((theta / 2.0).cos()),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ]);
        Self { amplitudes }
    }

    /// `cos(theta/2)|self> + e^{i phi} sin(theta/2)|other>` for orthonormal pairs.
    pub(crate) fn rotate_towards(&self, orthogonal: &PureState, theta: f64, phi: f64) -> Self {
        let a = &self.amplitudes * c((theta / 2.0).cos())
            + &orthogonal.amplitudes * Complex64::from_polar((theta / 2.0).sin(), phi);
        let norm = a.norm();
        Self {
            amplitudes: a.unscale(norm),
        }
    }

    /// Some unit vector orthogonal to `self` (requires `dim >= 2`).
    pub(crate) fn orthogonal_complement_vector(&self) -> PureState {
        let d = self.dim();
        // Start from the basis vector with the smallest overlap.
        let start = (0..d)
            .min_by(|&i, &j| self.amplitudes[i].norm().total_cmp(&self.amplitudes[j].norm()))
            .unwrap_or(0);
        let e = PureState::basis(d, start).amplitudes;
        let proj = self.amplitudes.dotc(&e);
        let w = e - &self.amplitudes * proj;
        let norm = w.norm();
        PureState {
            amplitudes: w.unscale(norm),
        }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(&self.amplitudes * self.amplitudes.adjoint())
    }

    /// Accepts rank-one density matrices.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        rho.to_pure().ok_or_else(|| {
            Error::OutOfRegime(format!(
                "state is not rank one (second eigenvalue {:e})",
                rho.eigenvalues().get(1).copied().unwrap_or(0.0)
            ))
        })
    }
}

/// `T(rho, sigma) = ||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.check_dims(sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    Ok((0.5 * trace_norm_hermitian(&diff)).clamp(0.0, 1.0))
}

fn sqrt_psd(a: &CMatrix) -> CMatrix {
    decompose_unchecked(a).map(|v| if v > tol::PSD { v.sqrt() } else { 0.0 })
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.check_dims(sigma)?;
    let root = sqrt_psd(rho.matrix());
    let inner = &root * sigma.matrix() * &root;
    let s: f64 = eigenvalues_unchecked(&inner)
        .into_iter()
        .map(|v| if v > tol::PSD { v.sqrt() } else { 0.0 })
        .sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// `(1 - p) rho + p/d * 1`.
///
/// Panics if `p` is outside `[0, 1]`.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> DensityMatrix {
    assert!((0.0..=1.0).contains(&p), "depolarization parameter {p} outside [0, 1]");
    let d = rho.dim();
    let mixed = CMatrix::identity(d, d).scale(p / d as f64);
    DensityMatrix::from_trusted(rho.matrix().scale(1.0 - p) + mixed)
}

/// A CPTP map in Kraus form, `rho -> sum_i K_i rho K_i^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kraus: Vec<CMatrix>,
}

impl Channel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Format("channel has no Kraus operators".into()))?;
        let (rows, cols) = first.shape();
        for k in &kraus {
            if k.nrows() != rows {
                return Err(Error::DimMismatch {
                    expected: rows,
                    found: k.nrows(),
                });
            }
            if k.ncols() != cols {
                return Err(Error::DimMismatch {
                    expected: cols,
                    found: k.ncols(),
                });
            }
        }
        let mut sum = CMatrix::zeros(cols, cols);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let residual = (sum - CMatrix::identity(cols, cols)).camax();
        if !(residual <= tol::TP) {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    /// Depolarizing channel on dimension `dim` built from the `d^2` Weyl
    /// (clock-and-shift) operators.
    pub fn depolarizing(dim: usize, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "depolarization parameter {p} outside [0, 1]");
        let d = dim as f64;
        let omega = |k: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d);
        let mut kraus = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let weight = if a == 0 && b == 0 {
                    (1.0 - p + p / (d * d)).sqrt()
                } else {
                    p.sqrt() / d
                };
                // X^a Z^b |j> = omega^{jb} |j + a>
                let mut w = CMatrix::zeros(dim, dim);
                for j in 0..dim {
                    w[((j + a) % dim, j)] = omega((j * b) % dim) * weight;
                }
                kraus.push(w);
            }
        }
        Self { kraus }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in() {
            return Err(Error::DimMismatch {
                expected: self.dim_in(),
                found: rho.dim(),
            });
        }
        let n = self.dim_out();
        let mut out = CMatrix::zeros(n, n);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityMatrix::from_trusted(out))
    }

    /// Heisenberg-picture dual `sum_i K_i^dagger A K_i`.
    pub fn adjoint_apply(&self, op: &CMatrix) -> CMatrix {
        let n = self.dim_in();
        let mut out = CMatrix::zeros(n, n);
        for k in &self.kraus {
            out += k.adjoint() * op * k;
        }
        hermitian_part(&out)
    }
}

/// Applies `ch` to `rho`.
pub fn apply_channel(ch: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

/// Positive operators summing to the identity, one per class.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        check_square(first)?;
        let d = first.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (k, e) in elements.iter().enumerate() {
            if e.shape() != (d, d) {
                return Err(Error::DimMismatch {
                    expected: d,
                    found: e.nrows().max(e.ncols()),
                });
            }
            check_hermitian(e).map_err(|err| Error::InvalidPovm(format!("element {k}: {err}")))?;
            let values = eigenvalues_unchecked(e);
            let (hi, lo) = (values[0], values[values.len() - 1]);
            if lo < -tol::PSD || hi > 1.0 + tol::PSD {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalues outside [0, 1] (min {lo:e}, max {hi:e})"
                )));
            }
            sum += e;
        }
        let residual = (sum - CMatrix::identity(d, d)).camax();
        if !(residual <= tol::TP) {
            return Err(Error::InvalidPovm(format!(
                "elements do not sum to the identity (residual {residual:e})"
            )));
        }
        Ok(Self {
            elements: elements.iter().map(hermitian_part).collect(),
        })
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self {
            elements: (0..dim)
                .map(|i| DensityMatrix::basis(dim, i).matrix().clone())
                .collect(),
        }
    }

    pub(crate) fn from_trusted(elements: Vec<CMatrix>) -> Self {
        Self {
            elements: elements.iter().map(hermitian_part).collect(),
        }
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Tr[E_k rho]` for each element.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(self
            .elements
            .iter()
            .map(|e| trace_product(e, rho.matrix()))
            .collect())
    }
}
