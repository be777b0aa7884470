//! Quantum classifiers `y_k(sigma) = Tr[Pi_k E(sigma)]`.

use crate::error::{Error, Result};
use crate::hypothesis::helstrom;
use crate::quantum::{CMatrix, Channel, DensityMatrix, Povm, PureState};

/// A channel followed by a POVM with one element per class label.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    channel: Channel,
    povm: Povm,
    labels: Vec<String>,
}

/// Most likely class and the full probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub runner_up: usize,
    pub probabilities: Vec<f64>,
}

impl Classifier {
    pub fn new(channel: Channel, povm: Povm, labels: Vec<String>) -> Result<Self> {
        if channel.dim_out() != povm.dim() {
            return Err(Error::DimMismatch {
                expected: povm.dim(),
                found: channel.dim_out(),
            });
        }
        if labels.len() != povm.len() {
            return Err(Error::InvalidClassifier(format!(
                "{} labels for {} POVM elements",
                labels.len(),
                povm.len()
            )));
        }
        if labels.len() < 2 {
            return Err(Error::InvalidClassifier("at least two classes are required".into()));
        }
        Ok(Self { channel, povm, labels })
    }

    /// Identity channel with labels `"0"`, `"1"`, ...
    pub fn from_povm(povm: Povm) -> Result<Self> {
        let labels = (0..povm.len()).map(|k| k.to_string()).collect();
        Self::new(Channel::identity(povm.dim()), povm, labels)
    }

    /// Binary qubit classifier measuring `{|psi><psi|, 1 - |psi><psi|}` with
    /// `|psi> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
    pub fn bloch_projective(theta: f64, phi: f64) -> Self {
        let pi = PureState::bloch(theta, phi).to_density().matrix().clone();
        let rest = CMatrix::identity(2, 2) - &pi;
        Self {
            channel: Channel::identity(2),
            povm: Povm::from_trusted(vec![pi, rest]),
            labels: vec!["0".into(), "1".into()],
        }
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn input_dim(&self) -> usize {
        self.channel.dim_in()
    }

    /// `y_k(sigma)` for every class; roundoff negatives are clipped to zero.
    pub fn class_probabilities(&self, sigma: &DensityMatrix) -> Result<Vec<f64>> {
        let out = self.channel.apply(sigma)?;
        Ok(self
            .povm
            .probabilities(&out)?
            .into_iter()
            .map(|y| y.max(0.0))
            .collect())
    }

    /// Argmax of the class probabilities; ties go to the lowest index.
    pub fn predict(&self, sigma: &DensityMatrix) -> Result<Prediction> {
        let probabilities = self.class_probabilities(sigma)?;
        let (label, runner_up) = top_two(&probabilities);
        Ok(Prediction {
            label,
            runner_up,
            probabilities,
        })
    }

    /// Heisenberg-picture POVM `F_k = E^dagger(Pi_k)` acting on inputs directly.
    pub fn heisenberg_povm(&self) -> Povm {
        Povm::from_trusted(
            self.povm
                .elements()
                .iter()
                .map(|pi| self.channel.adjoint_apply(pi))
                .collect(),
        )
    }
}

/// Indices of the largest and second-largest entries, lowest index on ties.
pub(crate) fn top_two<T: PartialOrd + Copy>(values: &[T]) -> (usize, usize) {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    let mut second = usize::from(best == 0);
    for (k, v) in values.iter().enumerate() {
        if k != best && *v > values[second] {
            second = k;
        }
    }
    (best, second)
}

/// Classifier that reproduces `y_kA(sigma) = pA`, `y_kB(sigma) = 1 - pA` and
/// flips its prediction on `rho` whenever the robustness condition fails.
///
/// The POVM is `Pi_kA = 1 - M`, `Pi_kB = M` and zero for every other class,
/// where `M` is the Helstrom test with type-I error `1 - pA`.
pub fn worst_case_classifier(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    p_a: f64,
    k_a: usize,
    k_b: usize,
    num_classes: usize,
) -> Result<Classifier> {
    if !(p_a > 0.5 && p_a <= 1.0) {
        return Err(Error::OutOfRegime(format!("worst-case construction needs 1/2 < pA <= 1, got {p_a}")));
    }
    if k_a == k_b || k_a >= num_classes || k_b >= num_classes {
        return Err(Error::OutOfRegime(format!(
            "classes kA = {k_a}, kB = {k_b} must be distinct and below {num_classes}"
        )));
    }
    let test = helstrom(rho, sigma, 1.0 - p_a)?;
    let d = sigma.dim();
    let mut elements = vec![CMatrix::zeros(d, d); num_classes];
    elements[k_a] = CMatrix::identity(d, d) - &test.m;
    elements[k_b] = test.m;
    let povm = Povm::new(elements)?;
    Classifier::from_povm(povm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::radius_qht_pure;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn fig3() -> Classifier {
        Classifier::bloch_projective(2.0 * 0.9f64.sqrt().acos(), FRAC_PI_2)
    }

    #[test]
    fn computational_basis_probabilities() {
        let cl = Classifier::from_povm(Povm::computational(2)).unwrap();
        let y = cl.class_probabilities(&DensityMatrix::basis(2, 0)).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
        let y = cl.class_probabilities(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], 0.5, epsilon = 1e-15);
        assert!(matches!(
            cl.class_probabilities(&DensityMatrix::basis(3, 0)),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn predictions_and_ties() {
        let cl = Classifier::from_povm(Povm::computational(2)).unwrap();
        let pred = cl.predict(&DensityMatrix::basis(2, 0)).unwrap();
        assert_eq!((pred.label, pred.runner_up), (0, 1));
        let tie = cl.predict(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!(tie.label, 0);
        assert_eq!(top_two(&[0.2, 0.4, 0.4]), (1, 2));
        assert_eq!(top_two(&[0.5, 0.5]), (0, 1));
    }

    #[test]
    fn fig3_classifier() {
        let cl = fig3();
        let y = cl.class_probabilities(&DensityMatrix::basis(2, 0)).unwrap();
        assert_abs_diff_eq!(y[0], 0.9, epsilon = 1e-12);
        let rho = PureState::bloch(FRAC_PI_3, -FRAC_PI_2).to_density();
        assert_eq!(cl.predict(&rho).unwrap().label, 1);
    }

    #[test]
    fn heisenberg_dual_of_identity_and_depolarizing() {
        let cl = fig3();
        assert_eq!(cl.heisenberg_povm().elements(), cl.povm().elements());

        let p = 0.3;
        let dep = Classifier::new(Channel::depolarizing(2, p), cl.povm().clone(), cl.labels().to_vec()).unwrap();
        let dual = dep.heisenberg_povm();
        for (f, pi) in dual.elements().iter().zip(cl.povm().elements()) {
            let expected = pi.scale(1.0 - p) + CMatrix::identity(2, 2) * (pi.trace() * (p / 2.0));
            assert_abs_diff_eq!((f - expected).norm(), 0.0, epsilon = 1e-12);
        }
        Povm::new(dual.elements().to_vec()).expect("dual is a POVM");
    }

    #[test]
    fn worst_case_on_toy_pair() {
        let sigma = DensityMatrix::basis(2, 0);
        let rho = PureState::bloch(FRAC_PI_3, -FRAC_PI_2).to_density();
        let cl = worst_case_classifier(&sigma, &rho, 0.9, 0, 1, 3).unwrap();
        let y = cl.class_probabilities(&sigma).unwrap();
        assert_abs_diff_eq!(y[0], 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 0.1, epsilon = 1e-9);
        assert_abs_diff_eq!(y[2], 0.0, epsilon = 1e-12);
        assert_eq!(cl.predict(&rho).unwrap().label, 1);

        // Just inside the certified radius the flip is impossible.
        let r = radius_qht_pure(0.9, 0.1).unwrap();
        let theta = 2.0 * (r - 1e-6).asin();
        let near = PureState::bloch(theta, 0.7).to_density();
        let cl = worst_case_classifier(&sigma, &near, 0.9, 0, 1, 2).unwrap();
        assert_eq!(cl.predict(&near).unwrap().label, 0);
    }

    #[test]
    fn worst_case_regime() {
        let sigma = DensityMatrix::basis(2, 0);
        assert!(matches!(
            worst_case_classifier(&sigma, &sigma, 0.5, 0, 1, 2),
            Err(Error::OutOfRegime(_))
        ));
        assert!(matches!(
            worst_case_classifier(&sigma, &sigma, 0.9, 1, 1, 2),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn classifier_validation() {
        let povm = Povm::computational(3);
        assert!(matches!(
            Classifier::new(Channel::identity(2), povm.clone(), vec!["a".into(); 3]),
            Err(Error::DimMismatch { .. })
        ));
        assert!(matches!(
            Classifier::new(Channel::identity(3), povm, vec!["a".into(); 2]),
            Err(Error::InvalidClassifier(_))
        ));
    }
}
