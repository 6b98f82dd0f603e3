use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::driver::{integrate, LinearSystem};
use super::IntegratorOptions;
use crate::error::{Error, Result};
use crate::pulse::PulseShape;
use crate::state::{BlochVector, TimeGrid, C64};

/// Trajectory of a real 3-vector driven by `dB/dt = Q × B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorqueTrajectory {
    pub times: Vec<f64>,
    pub vectors: Vec<BlochVector>,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Largest `| |B(t)| − |B0| |` seen at any accepted step.
    pub max_norm_drift: f64,
}

impl TorqueTrajectory {
    pub fn last(&self) -> BlochVector {
        *self.vectors.last().unwrap()
    }
}

/// Rotation by `|Q|·h` about `Q`, the exact solution for constant `Q`.
pub fn rotation(q: BlochVector, h: f64) -> [[f64; 3]; 3] {
    let w = q.norm();
    if w == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let k = [q.u / w, q.v / w, q.w / w];
    let (s, c) = (w * h).sin_cos();
    let oc = 1.0 - c;
    [
        [c + k[0] * k[0] * oc, k[0] * k[1] * oc - k[2] * s, k[0] * k[2] * oc + k[1] * s],
        [k[1] * k[0] * oc + k[2] * s, c + k[1] * k[1] * oc, k[1] * k[2] * oc - k[0] * s],
        [k[2] * k[0] * oc - k[1] * s, k[2] * k[1] * oc + k[0] * s, c + k[2] * k[2] * oc],
    ]
}

struct Torque<'a, F: Fn(f64) -> BlochVector> {
    q: &'a F,
}

impl<F: Fn(f64) -> BlochVector> LinearSystem for Torque<'_, F> {
    fn propagator(&mut self, t_mid: f64, h: f64) -> DMatrix<C64> {
        let r = rotation((self.q)(t_mid), h);
        DMatrix::from_fn(3, 3, |i, j| C64::new(r[i][j], 0.0))
    }

    fn rhs(&mut self, t: f64, y: &DVector<C64>) -> DVector<C64> {
        let q = (self.q)(t);
        let b = BlochVector::new(y[0].re, y[1].re, y[2].re);
        let d = q.cross(&b);
        DVector::from_vec(vec![C64::new(d.u, 0.0), C64::new(d.v, 0.0), C64::new(d.w, 0.0)])
    }
}

/// Integrates `dB/dt = Q(t) × B`. With the exponential method every step is an
/// exact rotation, so `|B|` is conserved to round-off.
pub fn propagate_torque<F: Fn(f64) -> BlochVector>(
    q: &F,
    b0: BlochVector,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
    time_scale: f64,
) -> Result<TorqueTrajectory> {
    opts.validate()?;
    if b0.norm() > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!("|B0| = {} exceeds 1", b0.norm())));
    }
    let n0 = b0.norm();
    let mut drift: f64 = 0.0;
    let mut sys = Torque { q };
    let y0 = DVector::from_vec(vec![C64::new(b0.u, 0.0), C64::new(b0.v, 0.0), C64::new(b0.w, 0.0)]);
    let outcome = integrate(&mut sys, y0, grid.samples(), opts, time_scale / 64.0, false, |_, y| {
        let n = (y[0].re.powi(2) + y[1].re.powi(2) + y[2].re.powi(2)).sqrt();
        drift = drift.max((n - n0).abs());
        Ok(())
    });
    if let Some(e) = outcome.fault {
        return Err(e);
    }
    Ok(TorqueTrajectory {
        times: grid.samples().to_vec(),
        vectors: outcome.samples.iter().map(|y| BlochVector::new(y[0].re, y[1].re, y[2].re)).collect(),
        steps: outcome.steps,
        rejected_steps: outcome.rejected,
        max_norm_drift: drift,
    })
}

/// Two-state STIRAP analogue: torque `Q = (Ω, 0, Δ)` and the adiabatic
/// invariant `d = w·cosθ + u·sinθ`, `θ = atan2(Ω, Δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStateRun {
    pub trajectory: TorqueTrajectory,
    pub d: Vec<f64>,
    pub final_vector: BlochVector,
}

pub fn two_state_stirap_run(
    delta: &[PulseShape],
    omega: &[PulseShape],
    b0: BlochVector,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
) -> Result<TwoStateRun> {
    let eval = |ps: &[PulseShape], t: f64| ps.iter().map(|p| p.eval(t).re).sum::<f64>();
    let q = |t: f64| BlochVector::new(eval(omega, t), 0.0, eval(delta, t));
    let scale = delta.iter().chain(omega).map(|p| p.time_scale()).fold(f64::INFINITY, f64::min);
    let scale = if scale.is_finite() { scale } else { 1.0 };
    let trajectory = propagate_torque(&q, b0, grid, opts, scale)?;
    let d = trajectory
        .times
        .iter()
        .zip(&trajectory.vectors)
        .map(|(&t, b)| {
            let qt = q(t);
            let th = qt.u.atan2(qt.w);
            b.w * th.cos() + b.u * th.sin()
        })
        .collect();
    let final_vector = trajectory.last();
    Ok(TwoStateRun { trajectory, d, final_vector })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_torque_is_static() {
        let q = |_t: f64| BlochVector::new(0.0, 0.0, 3.0);
        let grid = TimeGrid::uniform(0.0, 5.0, 11).unwrap();
        let r = propagate_torque(&q, BlochVector::new(0.0, 0.0, 1.0), &grid, &IntegratorOptions::default(), 1.0).unwrap();
        for b in &r.vectors {
            assert!((b.w - 1.0).abs() < 1e-15 && b.u.abs() < 1e-15);
        }
    }

    #[test]
    fn perpendicular_torque_precesses() {
        let w = 2.0;
        let q = move |_t: f64| BlochVector::new(0.0, 0.0, w);
        let grid = TimeGrid::uniform(0.0, 3.0, 31).unwrap();
        let r = propagate_torque(&q, BlochVector::new(1.0, 0.0, 0.0), &grid, &IntegratorOptions::default(), 1.0).unwrap();
        for (t, b) in r.times.iter().zip(&r.vectors) {
            assert!((b.u - (w * t).cos()).abs() < 1e-12 && (b.v - (w * t).sin()).abs() < 1e-12);
        }
        assert!(r.max_norm_drift < 1e-13);
    }

    #[test]
    fn no_coupling_freezes_inversion() {
        let delta = vec![PulseShape::gaussian(5.0, 1.0, -1.0).unwrap()];
        let omega = vec![PulseShape::gaussian(0.0, 1.0, 1.0).unwrap()];
        let grid = TimeGrid::uniform(-5.0, 5.0, 21).unwrap();
        let b0 = BlochVector::new(0.0, 0.0, 1.0);
        let r = two_state_stirap_run(&delta, &omega, b0, &grid, &IntegratorOptions::default()).unwrap();
        for (b, d) in r.trajectory.vectors.iter().zip(&r.d) {
            assert!((b.w - 1.0).abs() < 1e-14 && (d - b.w).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_is_orthogonal() {
        let r = rotation(BlochVector::new(0.3, -1.2, 0.7), 0.9);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }
}
