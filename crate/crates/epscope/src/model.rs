//! Parametrized Hamiltonian families.
//!
//! A model is a list of levels, each with an affine energy law `e_i(a)` and a
//! constant full width `gamma_i`, coupled by a real symmetric matrix with
//! zero diagonal. Materializing the model at a parameter value `a` yields the
//! complex-symmetric matrix with diagonal `e_i(a) - (i/2) gamma_i` and
//! off-diagonal `-w_kl`.

use num_complex::Complex64;
use thiserror::Error;

/// Affine energy law `e(a) = intercept + slope * a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLaw {
    pub intercept: f64,
    pub slope: f64,
}

impl EnergyLaw {
    pub fn new(intercept: f64, slope: f64) -> Self {
        Self { intercept, slope }
    }

    pub fn eval(&self, a: f64) -> f64 {
        self.intercept + self.slope * a
    }
}

/// One level: energy law plus a constant full width `gamma >= 0`.
///
/// The width is stored as the full `gamma`; figure captions and all I/O
/// surfaces use the halved convention and are labelled `gamma_half` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSpec {
    pub energy: EnergyLaw,
    pub gamma: f64,
}

impl LevelSpec {
    pub fn new(energy: EnergyLaw, gamma: f64) -> Self {
        Self { energy, gamma }
    }

    /// Complex unperturbed level `epsilon(a) = e(a) - (i/2) gamma`.
    pub fn epsilon(&self, a: f64) -> Complex64 {
        Complex64::new(self.energy.eval(a), -0.5 * self.gamma)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("model needs at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("level {0}: negative width {1}")]
    NegativeWidth(usize, f64),
    #[error("coupling matrix must be {n}x{n}, got {rows} rows")]
    CouplingShape { n: usize, rows: usize },
    #[error("coupling matrix not symmetric at ({0},{1})")]
    CouplingAsymmetric(usize, usize),
    #[error("coupling matrix diagonal entry ({0},{0}) must be zero")]
    CouplingDiagonal(usize),
}

/// A parametrized family of N x N complex-symmetric Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    levels: Vec<LevelSpec>,
    coupling: Vec<Vec<f64>>,
}

impl ModelSpec {
    pub fn new(levels: Vec<LevelSpec>, coupling: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = levels.len();
        if n < 2 {
            return Err(ModelError::TooFewLevels(n));
        }
        for (i, lv) in levels.iter().enumerate() {
            if lv.gamma < 0.0 {
                return Err(ModelError::NegativeWidth(i, lv.gamma));
            }
        }
        if coupling.len() != n || coupling.iter().any(|r| r.len() != n) {
            return Err(ModelError::CouplingShape {
                n,
                rows: coupling.len(),
            });
        }
        for k in 0..n {
            if coupling[k][k] != 0.0 {
                return Err(ModelError::CouplingDiagonal(k));
            }
            for l in (k + 1)..n {
                if coupling[k][l] != coupling[l][k] {
                    return Err(ModelError::CouplingAsymmetric(k, l));
                }
            }
        }
        Ok(Self { levels, coupling })
    }

    /// Two-level model with a single coupling strength `omega`.
    pub fn two_level(l1: LevelSpec, l2: LevelSpec, omega: f64) -> Self {
        Self::new(vec![l1, l2], vec![vec![0.0, omega], vec![omega, 0.0]])
            .expect("two-level construction is always valid")
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[LevelSpec] {
        &self.levels
    }

    pub fn coupling(&self) -> &[Vec<f64>] {
        &self.coupling
    }

    pub fn omega(&self, k: usize, l: usize) -> f64 {
        self.coupling[k][l]
    }

    /// Copy with all widths multiplied by `scale`.
    pub fn with_width_scale(&self, scale: f64) -> Self {
        let levels = self
            .levels
            .iter()
            .map(|lv| LevelSpec::new(lv.energy, lv.gamma * scale))
            .collect();
        Self {
            levels,
            coupling: self.coupling.clone(),
        }
    }

    /// Copy with the coupling entry (k,l) (and its mirror) multiplied by `scale`.
    pub fn with_coupling_scale(&self, k: usize, l: usize, scale: f64) -> Self {
        let mut coupling = self.coupling.clone();
        coupling[k][l] *= scale;
        coupling[l][k] = coupling[k][l];
        Self {
            levels: self.levels.clone(),
            coupling,
        }
    }
}

/// Dense N x N complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|k| self.get(k, k)).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }
}

/// Materialize `H(a)`: diagonal `e_k(a) - (i/2) gamma_k`, off-diagonal `-w_kl`.
pub fn build_matrix(model: &ModelSpec, a: f64) -> ComplexMatrix {
    let n = model.n();
    let mut m = ComplexMatrix::zeros(n);
    for k in 0..n {
        m.set(k, k, model.levels[k].epsilon(a));
        for l in 0..n {
            if l != k {
                m.set(k, l, Complex64::new(-model.coupling[k][l], 0.0));
            }
        }
    }
    m
}

/// Diagonal of `H(a)` with the coupling zeroed: the unperturbed levels
/// `epsilon_j(a)`. The unperturbed basis states are the canonical unit vectors.
pub fn unperturbed_spectrum(model: &ModelSpec, a: f64) -> Vec<Complex64> {
    model.levels.iter().map(|lv| lv.epsilon(a)).collect()
}
