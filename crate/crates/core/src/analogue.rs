//! Classical analogues: evanescently coupled waveguide arrays mapped onto the
//! chain Hamiltonian, and polarization optics mapped onto the torque
//! equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_chain, ModelSpec};
use crate::propagate::{propagate_torque, IntegratorOptions, TorqueTrajectory};
use crate::pulse::PulseShape;
use crate::state::{BlochVector, TimeGrid};

/// Separation between neighboring guides as a function of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Separation {
    /// `d(z) = d_min + curvature·(z − z_center)²`.
    Parabolic { d_min: f64, curvature: f64, z_center: f64 },
    Constant { d: f64 },
}

impl Separation {
    pub fn at(&self, z: f64) -> f64 {
        match *self {
            Separation::Parabolic { d_min, curvature, z_center } => d_min + curvature * (z - z_center).powi(2),
            Separation::Constant { d } => d,
        }
    }
}

/// Planar array of identical guides with exponential coupling law
/// `κ(z) = κ₀·exp(−d(z)/d₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideLayout {
    pub n_guides: usize,
    pub kappa0: f64,
    pub d0: f64,
    /// `separations[j]` is the distance between guides `j` and `j+1`.
    pub separations: Vec<Separation>,
    /// Propagation-constant offsets per guide; zero for identical guides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<Vec<f64>>,
    pub z_start: f64,
    pub z_end: f64,
}

impl WaveguideLayout {
    pub fn validate(&self) -> Result<()> {
        if self.n_guides < 2 {
            return Err(Error::InvalidArgument("need at least 2 guides".into()));
        }
        if self.separations.len() + 1 != self.n_guides {
            return Err(Error::DimensionMismatch { expected: self.n_guides - 1, found: self.separations.len() });
        }
        if !(self.kappa0 >= 0.0) || !(self.d0 > 0.0) {
            return Err(Error::InvalidArgument("need kappa0 >= 0 and d0 > 0".into()));
        }
        if !(self.z_start < self.z_end) {
            return Err(Error::InvalidArgument("need z_start < z_end".into()));
        }
        for s in &self.separations {
            let ok = match *s {
                Separation::Parabolic { d_min, curvature, .. } => d_min > 0.0 && curvature > 0.0,
                Separation::Constant { d } => d > 0.0,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!("separation {s:?} must stay positive")));
            }
        }
        if let Some(m) = &self.mismatch {
            if m.len() != self.n_guides {
                return Err(Error::DimensionMismatch { expected: self.n_guides, found: m.len() });
            }
        }
        Ok(())
    }

    /// Coupling constant between guides `j` and `j+1` at `z`.
    pub fn coupling(&self, j: usize, z: f64) -> f64 {
        self.kappa0 * (-self.separations[j].at(z) / self.d0).exp()
    }

    /// Copy with `κ₀` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut c = self.clone();
        c.kappa0 *= s;
        c
    }
}

/// Coupled-mode equations as a chain model over `z` with
/// `Ω_{j,j+1}(z) = 2κ_{j,j+1}(z)`. Parabolic separations give Gaussian
/// couplings of width `√(d₀/curvature)`.
pub fn waveguide_to_chain(layout: &WaveguideLayout) -> Result<ModelSpec> {
    layout.validate()?;
    let couplings: Vec<PulseShape> = layout
        .separations
        .iter()
        .map(|s| match *s {
            Separation::Parabolic { d_min, curvature, z_center } => PulseShape::gaussian(
                2.0 * layout.kappa0 * (-d_min / layout.d0).exp(),
                (layout.d0 / curvature).sqrt(),
                z_center,
            ),
            Separation::Constant { d } => Ok(PulseShape::constant(2.0 * layout.kappa0 * (-d / layout.d0).exp())),
        })
        .collect::<Result<_>>()?;
    let det = layout.mismatch.clone().unwrap_or_else(|| vec![0.0; layout.n_guides]);
    build_chain(&couplings, &det)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waveplate {
    pub retardance: f64,
    /// Fast-axis angle in radians.
    pub angle: f64,
}

impl Waveplate {
    /// Birefringence axis on the Poincaré sphere, `(cos2α, sin2α, 0)`.
    pub fn axis(&self) -> BlochVector {
        BlochVector::new((2.0 * self.angle).cos(), (2.0 * self.angle).sin(), 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveplateStack {
    pub elements: Vec<Waveplate>,
}

impl WaveplateStack {
    /// `n` identical plates whose fast axis turns linearly from `a0` to `a1`.
    pub fn rotating(n: usize, retardance: f64, a0: f64, a1: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("stack needs at least one element".into()));
        }
        let angles = if n == 1 { vec![a0] } else { crate::numerics::linspace(a0, a1, n) };
        Ok(Self { elements: angles.into_iter().map(|angle| Waveplate { retardance, angle }).collect() })
    }
}

/// Stokes vector after each element (the first entry is `s0`). Each plate
/// rotates the vector by its retardance about its birefringence axis.
pub fn polarization_propagate(stack: &WaveplateStack, s0: BlochVector) -> Result<Vec<BlochVector>> {
    if s0.norm() > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!("|S0| = {} exceeds 1", s0.norm())));
    }
    let mut out = Vec::with_capacity(stack.elements.len() + 1);
    let mut s = s0;
    out.push(s);
    for e in &stack.elements {
        if !e.retardance.is_finite() || !e.angle.is_finite() {
            return Err(Error::InvalidArgument("waveplate parameters must be finite".into()));
        }
        let r = crate::propagate::rotation(e.axis(), e.retardance);
        let v = s.to_array();
        s = BlochVector::from_array([
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
        ]);
        out.push(s);
    }
    Ok(out)
}

/// Continuous birefringent medium `dS/dz = Ω(z) × S`.
pub fn polarization_propagate_continuous<F: Fn(f64) -> BlochVector>(
    omega: &F,
    s0: BlochVector,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
    length_scale: f64,
) -> Result<TorqueTrajectory> {
    propagate_torque(omega, s0, grid, opts, length_scale)
}

/// Angle between two nonzero vectors.
pub fn misalignment(a: BlochVector, b: BlochVector) -> f64 {
    (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}
