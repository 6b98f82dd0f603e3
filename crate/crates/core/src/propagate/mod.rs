//! Time propagation of the Schrödinger equation, the Liouville equation with
//! pure dephasing and the real torque equation.

mod expm;
mod liouville;
mod tdse;
mod torque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, StateVector, TimeGrid};

pub use expm::expm_taylor;
pub use liouville::{liouvillian, propagate_liouville};
pub use tdse::propagate_tdse;
pub use torque::{propagate_torque, rotation, two_state_stirap_run, TorqueTrajectory, TwoStateRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Midpoint matrix exponential per step with step-doubling control.
    ExpMidpoint,
    /// Dormand–Prince 5(4) on the amplitude equations.
    RkAdaptive,
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper step bound; the integrator additionally caps steps at 1/64 of the
    /// shortest pulse time scale.
    pub max_step: f64,
    pub min_step: f64,
    /// Number of output samples used when a protocol builds its own grid.
    pub dense_output_samples: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            method: Method::ExpMidpoint,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_step: 1.0,
            min_step: 1e-12,
            dense_output_samples: 1025,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-3).contains(&self.rel_tol) {
            return Err(Error::InvalidArgument(format!("rel_tol must lie in [1e-14, 1e-3], got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidArgument("abs_tol must be >= 0".into()));
        }
        if !(self.min_step > 0.0) || !(self.max_step >= self.min_step) {
            return Err(Error::InvalidArgument("need max_step >= min_step > 0".into()));
        }
        if self.dense_output_samples < 2 {
            return Err(Error::InvalidArgument("dense_output_samples must be >= 2".into()));
        }
        Ok(())
    }
}

/// Per-run counters and extrema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub rejected_steps: usize,
    /// Largest population of each level seen at any accepted step.
    pub max_population: Vec<f64>,
    /// Largest `|1 − Σ P_n|` for lossless runs, or trace drift for density
    /// matrices.
    pub max_norm_drift: f64,
    /// Smallest density-matrix eigenvalue seen at the output samples.
    pub min_eigenvalue: Option<f64>,
}

impl Diagnostics {
    /// Largest transient population of level 2.
    pub fn max_transient_p2(&self) -> f64 {
        self.max_population.get(1).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimStates {
    Pure(Vec<StateVector>),
    Mixed(Vec<DensityMatrix>),
}

/// Output of a TDSE or Liouville propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub grid: TimeGrid,
    pub states: SimStates,
    /// `populations[k][n]` at output sample `k`.
    pub populations: Vec<Vec<f64>>,
    /// `1 − Σ_n P_n` at each output sample.
    pub loss_accumulated: Vec<f64>,
    pub diagnostics: Diagnostics,
    /// Set when the integration aborted; samples after the fault are absent.
    pub fault: Option<Error>,
}

impl SimResult {
    pub fn final_populations(&self) -> &[f64] {
        self.populations.last().map(|p| p.as_slice()).unwrap_or(&[])
    }

    /// Population of one level at every recorded sample.
    pub fn population_series(&self, level: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[level]).collect()
    }

    pub fn times(&self) -> &[f64] {
        &self.grid.samples()[..self.populations.len()]
    }

    pub fn final_state(&self) -> Option<&StateVector> {
        match &self.states {
            SimStates::Pure(v) => v.last(),
            SimStates::Mixed(_) => None,
        }
    }

    pub fn final_density(&self) -> Option<&DensityMatrix> {
        match &self.states {
            SimStates::Mixed(v) => v.last(),
            SimStates::Pure(_) => None,
        }
    }

    /// Converts a faulted run into its error.
    pub fn into_result(self) -> Result<Self> {
        match self.fault {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

pub(crate) mod driver {
    //! Adaptive stepping for linear equations `y' = A(t) y`.

    use nalgebra::{DMatrix, DVector};

    use super::{IntegratorOptions, Method};
    use crate::error::Error;
    use crate::state::C64;

    pub trait LinearSystem {
        /// Propagator over `[t_mid − h/2, t_mid + h/2]` with the generator
        /// frozen at `t_mid`.
        fn propagator(&mut self, t_mid: f64, h: f64) -> DMatrix<C64>;
        /// `A(t) y`.
        fn rhs(&mut self, t: f64, y: &DVector<C64>) -> DVector<C64>;
    }

    pub struct Outcome {
        pub samples: Vec<DVector<C64>>,
        pub steps: usize,
        pub rejected: usize,
        pub fault: Option<Error>,
    }

    /// Integrates from `times[0]` to the last sample, landing on every sample.
    /// `post_step` runs after each accepted step and may abort the run.
    pub fn integrate<S: LinearSystem>(
        sys: &mut S,
        y0: DVector<C64>,
        times: &[f64],
        opts: &IntegratorOptions,
        h_cap: f64,
        extrapolate: bool,
        mut post_step: impl FnMut(f64, &mut DVector<C64>) -> Result<(), Error>,
    ) -> Outcome {
        let hmax = opts.max_step.min(h_cap).max(opts.min_step);
        let mut y = y0;
        let mut out = Outcome { samples: vec![y.clone()], steps: 0, rejected: 0, fault: None };
        let mut t = times[0];
        let mut h = hmax;
        for &target in &times[1..] {
            while t < target {
                let remaining = target - t;
                let landing = h >= remaining * (1.0 - 1e-12);
                let step = if landing { remaining } else { h };
                let tol = opts.rel_tol * y.norm() + opts.abs_tol;
                let (candidate, err, order) = match opts.method {
                    Method::ExpMidpoint => {
                        let full = sys.propagator(t + 0.5 * step, step) * &y;
                        let u1 = sys.propagator(t + 0.25 * step, 0.5 * step);
                        let u2 = sys.propagator(t + 0.75 * step, 0.5 * step);
                        let half = u2 * (u1 * &y);
                        let err = (&half - &full).norm() / 3.0;
                        let cand = if extrapolate { (&half * C64::new(4.0, 0.0) - &full) / C64::new(3.0, 0.0) } else { half };
                        (cand, err, 3.0)
                    }
                    Method::RkAdaptive => {
                        let (y5, err) = dopri_step(sys, t, &y, step);
                        (y5, err, 5.0)
                    }
                };
                let err = if err.is_finite() { err } else { f64::INFINITY };
                if err <= tol || step <= opts.min_step {
                    if err > tol && !(err <= 10.0 * tol) {
                        out.fault = Some(Error::Integration {
                            time: t,
                            reason: format!("step size underflow (h = {step:.3e}, error {err:.3e})"),
                        });
                        return out;
                    }
                    y = candidate;
                    t = if landing { target } else { t + step };
                    out.steps += 1;
                    if let Err(e) = post_step(t, &mut y) {
                        out.fault = Some(e);
                        return out;
                    }
                    let grow = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(1.0 / order)).clamp(0.2, 4.0) };
                    if !landing || step >= h {
                        h = (step * grow).min(hmax);
                    }
                } else {
                    out.rejected += 1;
                    let shrink = (0.9 * (tol / err).powf(1.0 / order)).clamp(0.1, 0.9);
                    h = (step * shrink).max(opts.min_step);
                }
            }
            out.samples.push(y.clone());
        }
        out
    }

    /// Dormand–Prince 5(4) step; returns the fifth-order solution and the
    /// norm of the embedded error estimate.
    fn dopri_step<S: LinearSystem>(sys: &mut S, t: f64, y: &DVector<C64>, h: f64) -> (DVector<C64>, f64) {
        const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
        const A: [[f64; 6]; 7] = [
            [0.0; 6],
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
            [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
            [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
        const B4: [f64; 7] = [
            5179.0 / 57600.0,
            0.0,
            7571.0 / 16695.0,
            393.0 / 640.0,
            -92097.0 / 339200.0,
            187.0 / 2100.0,
            1.0 / 40.0,
        ];
        let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
        for i in 0..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[i][j] != 0.0 {
                    yi += kj * C64::new(h * A[i][j], 0.0);
                }
            }
            k.push(sys.rhs(t + C[i] * h, &yi));
        }
        let mut y5 = y.clone();
        let mut e = DVector::<C64>::zeros(y.len());
        for i in 0..7 {
            y5 += &k[i] * C64::new(h * B5[i], 0.0);
            e += &k[i] * C64::new(h * (B5[i] - B4[i]), 0.0);
        }
        (y5, e.norm())
    }
}
