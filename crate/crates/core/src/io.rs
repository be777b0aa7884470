//! JSON file formats.
//!
//! Matrices are stored row-major as separate real and imaginary parts:
//!
//! ```json
//! {"dim": 2, "re": [[1.0, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}
//! ```
//!
//! `dim` is the number of rows; rectangular Kraus operators carry their column
//! count implicitly. Pure states use `{"amplitudes_re": [...], "amplitudes_im": [...]}`,
//! channels `{"kraus": [matrix, ...]}`, POVMs `{"labels": [...], "elements": [matrix, ...]}`
//! and classifiers `{"labels": [...], "channel": {...}, "povm": {...}}`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::error::{Error, Result};
use crate::quantum::{CMatrix, CVector, Channel, DensityMatrix, Povm, PureState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.re.len() != self.dim || self.im.len() != self.dim {
            return Err(Error::Format(format!(
                "expected {} rows, found re: {}, im: {}",
                self.dim,
                self.re.len(),
                self.im.len()
            )));
        }
        let cols = self.re.first().map_or(0, Vec::len);
        if cols == 0 {
            return Err(Error::Format("empty matrix".into()));
        }
        for (r, i) in self.re.iter().zip(&self.im) {
            if r.len() != cols || i.len() != cols {
                return Err(Error::Format("ragged matrix rows".into()));
            }
        }
        let m = CMatrix::from_fn(self.dim, cols, |i, j| Complex64::new(self.re[i][j], self.im[i][j]));
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureStateFile {
    pub amplitudes_re: Vec<f64>,
    pub amplitudes_im: Vec<f64>,
}

impl PureStateFile {
    pub fn from_state(psi: &PureState) -> Self {
        Self {
            amplitudes_re: psi.amplitudes().iter().map(|z| z.re).collect(),
            amplitudes_im: psi.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_state(&self) -> Result<PureState> {
        if self.amplitudes_re.len() != self.amplitudes_im.len() {
            return Err(Error::Format("amplitude arrays differ in length".into()));
        }
        let v = CVector::from_iterator(
            self.amplitudes_re.len(),
            self.amplitudes_re
                .iter()
                .zip(&self.amplitudes_im)
                .map(|(&re, &im)| Complex64::new(re, im)),
        );
        PureState::new(v)
    }
}

/// A state file holds either a density matrix or pure-state amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Pure(PureStateFile),
    Matrix(MatrixFile),
}

impl StateFile {
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            StateFile::Pure(p) => Ok(p.to_state()?.to_density()),
            StateFile::Matrix(m) => DensityMatrix::new(m.to_matrix()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub kraus: Vec<MatrixFile>,
}

impl ChannelFile {
    pub fn from_channel(ch: &Channel) -> Self {
        Self {
            kraus: ch.kraus().iter().map(MatrixFile::from_matrix).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        Channel::new(self.kraus.iter().map(MatrixFile::to_matrix).collect::<Result<_>>()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmFile {
    pub labels: Vec<String>,
    pub elements: Vec<MatrixFile>,
}

impl PovmFile {
    pub fn from_povm(povm: &Povm, labels: &[String]) -> Self {
        Self {
            labels: labels.to_vec(),
            elements: povm.elements().iter().map(MatrixFile::from_matrix).collect(),
        }
    }

    pub fn to_povm(&self) -> Result<Povm> {
        if self.labels.len() != self.elements.len() {
            return Err(Error::Format(format!(
                "{} labels for {} POVM elements",
                self.labels.len(),
                self.elements.len()
            )));
        }
        Povm::new(self.elements.iter().map(MatrixFile::to_matrix).collect::<Result<_>>()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierFile {
    pub labels: Vec<String>,
    pub channel: ChannelFile,
    pub povm: PovmFile,
}

impl ClassifierFile {
    pub fn from_classifier(cl: &Classifier) -> Self {
        Self {
            labels: cl.labels().to_vec(),
            channel: ChannelFile::from_channel(cl.channel()),
            povm: PovmFile::from_povm(cl.povm(), cl.labels()),
        }
    }

    pub fn to_classifier(&self) -> Result<Classifier> {
        if self.povm.labels != self.labels {
            return Err(Error::Format("classifier and POVM labels differ".into()));
        }
        Classifier::new(self.channel.to_channel()?, self.povm.to_povm()?, self.labels.clone())
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    read_json::<StateFile>(path)?.to_density()
}

pub fn read_classifier(path: &Path) -> Result<Classifier> {
    read_json::<ClassifierFile>(path)?.to_classifier()
}
