//! Value types shared by every other module: state vectors, density matrices,
//! Bloch vectors and time grids.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Probability amplitudes `C_n` of a pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "state dimension must be at least 2, got {}",
                amplitudes.len()
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Basis state `ψ_{level+1}` (0-based `level`).
    pub fn basis(dim: usize, level: usize) -> Result<Self> {
        if level >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: level + 1 });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[level] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn as_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    pub fn from_dvector(v: &DVector<C64>) -> Result<Self> {
        Self::new(v.iter().copied().collect())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Self::new(self.amplitudes.iter().map(|c| c / n).collect())
    }

    /// Multiplies every amplitude by `e^{iχ}`.
    pub fn with_global_phase(&self, chi: f64) -> Self {
        let ph = C64::from_polar(1.0, chi);
        Self { amplitudes: self.amplitudes.iter().map(|c| c * ph).collect() }
    }

    /// Populations `|C_n|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `⟨other|self⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: other.dim(), found: self.dim() });
        }
        Ok(other
            .amplitudes
            .iter()
            .zip(&self.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨target|self⟩|²`.
    pub fn fidelity_to(&self, target: &StateVector) -> Result<f64> {
        Ok(self.inner(target)?.norm_sqr())
    }

    /// Maps a three-state amplitude vector onto a real Bloch vector via
    /// `u = −C₃`, `v = −iC₂`, `w = C₁`.
    ///
    /// The mapping holds for resonant dynamics with real couplings, where `C₁`
    /// and `C₃` are real and `C₂` is imaginary. A global phase is removed
    /// first: `C₁² + C₃² − C₂²` is real and positive in that gauge, so its
    /// argument fixes the phase up to an overall sign. Returns the vector and
    /// the largest discarded imaginary residue.
    pub fn bloch_from_three_state(&self, tol: f64) -> Result<(BlochVector, f64)> {
        if self.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: self.dim() });
        }
        let c = &self.amplitudes;
        let s = c[0] * c[0] + c[2] * c[2] - c[1] * c[1];
        let gauge = if s.norm() > 0.0 {
            C64::from_polar(1.0, -0.5 * s.arg())
        } else {
            C64::new(1.0, 0.0)
        };
        let c1 = c[0] * gauge;
        let c2 = c[1] * gauge;
        let c3 = c[2] * gauge;
        let u = -c3;
        let v = C64::new(0.0, -1.0) * c2;
        let w = c1;
        let residue = u.im.abs().max(v.im.abs()).max(w.im.abs());
        if residue > tol {
            return Err(Error::PhaseConvention { residue });
        }
        Ok((BlochVector::new(u.re, v.re, w.re), residue))
    }
}

/// Density matrix `ρ_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a square matrix, hermitizing it so that `ρ_mn = conj(ρ_nm)`
    /// holds exactly. The upper triangle is authoritative.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() < 2 {
            return Err(Error::InvalidArgument("density matrix must be square with dim >= 2".into()));
        }
        let mut m = Self { entries };
        m.hermitize();
        Ok(m)
    }

    pub fn from_pure(s: &StateVector) -> Self {
        let v = s.as_dvector();
        let entries = &v * v.adjoint();
        let mut m = Self { entries };
        m.hermitize();
        m
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.entries[(m, n)]
    }

    /// Mirrors the upper triangle into the lower one and makes the diagonal
    /// real.
    pub(crate) fn hermitize(&mut self) {
        let n = self.entries.nrows();
        for i in 0..n {
            let d = self.entries[(i, i)].re;
            self.entries[(i, i)] = C64::new(d, 0.0);
            for j in (i + 1)..n {
                self.entries[(j, i)] = self.entries[(i, j)].conj();
            }
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// Smallest eigenvalue; negative values beyond round-off signal a loss of
    /// positivity.
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = self.entries.clone().symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }
}

/// Real Bloch (or Stokes) vector `(u, v, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochVector {
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.u * other.u + self.v * other.v + self.w * other.w
    }

    pub fn cross(&self, other: &BlochVector) -> BlochVector {
        BlochVector::new(
            self.v * other.w - self.w * other.v,
            self.w * other.u - self.u * other.w,
            self.u * other.v - self.v * other.u,
        )
    }
}

/// Strictly increasing output sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument("time grid needs at least 2 samples".into()));
        }
        if samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("time grid samples must be finite".into()));
        }
        if samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
        }
        Ok(Self { samples })
    }

    pub fn uniform(t_start: f64, t_end: f64, n: usize) -> Result<Self> {
        if !(t_start < t_end) {
            return Err(Error::InvalidArgument(format!(
                "t_start ({t_start}) must be below t_end ({t_end})"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument("time grid needs at least 2 samples".into()));
        }
        let h = (t_end - t_start) / (n - 1) as f64;
        let mut samples: Vec<f64> = (0..n).map(|k| t_start + h * k as f64).collect();
        samples[n - 1] = t_end;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0]
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }
}
