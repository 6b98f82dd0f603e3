use nalgebra::{DMatrix, DVector};

use super::driver::{integrate, LinearSystem};
use super::expm::{expm_hermitian, expm_taylor};
use super::{Diagnostics, IntegratorOptions, SimResult, SimStates};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::state::{StateVector, TimeGrid, C64};

struct Tdse<'a> {
    model: &'a ModelSpec,
    h: DMatrix<C64>,
    hermitian: bool,
}

impl LinearSystem for Tdse<'_> {
    fn propagator(&mut self, t_mid: f64, dt: f64) -> DMatrix<C64> {
        self.model.hamiltonian_into(t_mid, &mut self.h);
        if self.hermitian {
            expm_hermitian(&self.h, dt)
        } else {
            expm_taylor(&(&self.h * C64::new(0.0, -dt)))
        }
    }

    fn rhs(&mut self, t: f64, y: &DVector<C64>) -> DVector<C64> {
        self.model.hamiltonian_into(t, &mut self.h);
        (&self.h * y) * C64::new(0.0, -1.0)
    }
}

/// Integrates `i dψ/dt = H(t) ψ` from `grid.t_start()` and records the state
/// at every grid sample.
pub fn propagate_tdse(model: &ModelSpec, psi0: &StateVector, grid: &TimeGrid, opts: &IntegratorOptions) -> Result<SimResult> {
    opts.validate()?;
    model.validate()?;
    if psi0.dim() != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, found: psi0.dim() });
    }
    if (psi0.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("initial state must be normalized".into()));
    }
    let lossless = model.is_lossless();
    let mut sys = Tdse { model, h: DMatrix::zeros(model.dim, model.dim), hermitian: lossless };
    let mut max_pop = psi0.populations();
    let mut max_drift: f64 = 0.0;
    let outcome = integrate(
        &mut sys,
        psi0.as_dvector(),
        grid.samples(),
        opts,
        model.time_scale() / 64.0,
        true,
        |_, y| {
            let mut total = 0.0;
            for (m, c) in max_pop.iter_mut().zip(y.iter()) {
                let p = c.norm_sqr();
                total += p;
                *m = m.max(p);
            }
            if lossless {
                max_drift = max_drift.max((1.0 - total).abs());
            }
            Ok(())
        },
    );
    let states: Vec<StateVector> = outcome
        .samples
        .iter()
        .map(StateVector::from_dvector)
        .collect::<Result<_>>()?;
    let populations: Vec<Vec<f64>> = states.iter().map(|s| s.populations()).collect();
    let loss_accumulated = populations.iter().map(|p| 1.0 - p.iter().sum::<f64>()).collect();
    Ok(SimResult {
        grid: grid.clone(),
        states: SimStates::Pure(states),
        populations,
        loss_accumulated,
        diagnostics: Diagnostics {
            steps: outcome.steps,
            rejected_steps: outcome.rejected,
            max_population: max_pop,
            max_norm_drift: max_drift,
            min_eigenvalue: None,
        },
        fault: outcome.fault,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_lambda;
    use crate::propagate::Method;
    use crate::pulse::{make_stirap_pair, Envelope, PulseSet};

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let m = ModelSpec::custom(3, vec![0.0; 3], PulseSet::new()).unwrap();
        let psi = StateVector::from_real(&[0.6, 0.0, 0.8]).unwrap();
        let grid = TimeGrid::uniform(-1.0, 1.0, 5).unwrap();
        let r = propagate_tdse(&m, &psi, &grid, &IntegratorOptions::default()).unwrap();
        for p in &r.populations {
            assert!((p[0] - 0.36).abs() < 1e-14 && (p[2] - 0.64).abs() < 1e-14);
        }
    }

    #[test]
    fn methods_agree_on_stirap() {
        let ps = make_stirap_pair(20.0, 20.0, 1.0, 1.2, Envelope::Gaussian).unwrap();
        let m = build_lambda(ps, 0.0, 0.0, 0.0, vec![]).unwrap();
        let grid = TimeGrid::uniform(-4.6, 4.6, 101).unwrap();
        let psi = StateVector::basis(3, 0).unwrap();
        let opts = IntegratorOptions::default();
        let a = propagate_tdse(&m, &psi, &grid, &opts).unwrap();
        let b = propagate_tdse(&m, &psi, &grid, &opts.with_method(Method::RkAdaptive)).unwrap();
        for (x, y) in a.final_populations().iter().zip(b.final_populations()) {
            assert!((x - y).abs() < 10.0 * opts.rel_tol, "{x} vs {y}");
        }
        assert!(a.final_populations()[2] > 0.99);
        assert!(a.diagnostics.max_norm_drift < 10.0 * opts.rel_tol);
    }

    #[test]
    fn rejects_unnormalized_start() {
        let m = ModelSpec::custom(2, vec![0.0; 2], PulseSet::new()).unwrap();
        let psi = StateVector::from_real(&[1.0, 1.0]).unwrap();
        let grid = TimeGrid::uniform(0.0, 1.0, 3).unwrap();
        assert!(propagate_tdse(&m, &psi, &grid, &IntegratorOptions::default()).is_err());
    }
}
