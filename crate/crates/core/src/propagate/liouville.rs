use nalgebra::{DMatrix, DVector};

use super::driver::{integrate, LinearSystem};
use super::expm::expm_taylor;
use super::{Diagnostics, IntegratorOptions, SimResult, SimStates};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::state::{DensityMatrix, TimeGrid, C64};

/// Superoperator acting on column-major `vec(ρ)`:
/// `ρ̇ = −i(Hρ − ρH†) − D(ρ)`.
pub fn liouvillian(h: &DMatrix<C64>, gamma: &DMatrix<f64>) -> DMatrix<C64> {
    let n = h.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let mi = C64::new(0.0, -1.0);
    let mut l = id.kronecker(h) * mi - h.map(|x| x.conj()).kronecker(&id) * mi;
    for j in 0..n {
        for i in 0..n {
            l[(i + n * j, i + n * j)] -= C64::new(gamma[(i, j)], 0.0);
        }
    }
    l
}

struct Liouville<'a> {
    model: &'a ModelSpec,
    h: DMatrix<C64>,
}

impl LinearSystem for Liouville<'_> {
    fn propagator(&mut self, t_mid: f64, dt: f64) -> DMatrix<C64> {
        self.model.hamiltonian_into(t_mid, &mut self.h);
        expm_taylor(&(liouvillian(&self.h, &self.model.dephasing) * C64::new(dt, 0.0)))
    }

    fn rhs(&mut self, t: f64, y: &DVector<C64>) -> DVector<C64> {
        self.model.hamiltonian_into(t, &mut self.h);
        liouvillian(&self.h, &self.model.dephasing) * y
    }
}

fn unvec(y: &DVector<C64>, n: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(n, n, y.as_slice())
}

/// Integrates the Liouville equation with pure dephasing. Hermiticity is
/// restored after every step from the upper triangle; lossless runs abort
/// when the trace drifts by more than `1e-6`.
pub fn propagate_liouville(model: &ModelSpec, rho0: &DensityMatrix, grid: &TimeGrid, opts: &IntegratorOptions) -> Result<SimResult> {
    opts.validate()?;
    model.validate()?;
    let n = model.dim;
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho0.dim() });
    }
    if (rho0.trace() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("initial density matrix must have unit trace".into()));
    }
    if rho0.min_eigenvalue() < -1e-9 {
        return Err(Error::InvalidArgument("initial density matrix must be positive semidefinite".into()));
    }
    let lossless = model.is_lossless();
    let mut sys = Liouville { model, h: DMatrix::zeros(n, n) };
    let mut max_pop = rho0.populations();
    let mut max_drift: f64 = 0.0;
    let y0 = DVector::from_column_slice(rho0.entries().as_slice());
    let outcome = integrate(&mut sys, y0, grid.samples(), opts, model.time_scale() / 64.0, true, |t, y| {
        for i in 0..n {
            let d = y[i + n * i].re;
            y[i + n * i] = C64::new(d, 0.0);
            for j in (i + 1)..n {
                y[j + n * i] = y[i + n * j].conj();
            }
        }
        let mut tr = 0.0;
        for i in 0..n {
            let p = y[i + n * i].re;
            tr += p;
            max_pop[i] = max_pop[i].max(p);
        }
        if lossless {
            let drift = (1.0 - tr).abs();
            max_drift = max_drift.max(drift);
            if drift > 1e-6 {
                return Err(Error::Integration { time: t, reason: format!("trace drift {drift:.3e}") });
            }
        }
        Ok(())
    });
    let states: Vec<DensityMatrix> = outcome
        .samples
        .iter()
        .map(|y| DensityMatrix::new(unvec(y, n)))
        .collect::<Result<_>>()?;
    let min_eig = states.iter().map(|r| r.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    let populations: Vec<Vec<f64>> = states.iter().map(|r| r.populations()).collect();
    let loss_accumulated = populations.iter().map(|p| 1.0 - p.iter().sum::<f64>()).collect();
    Ok(SimResult {
        grid: grid.clone(),
        states: SimStates::Mixed(states),
        populations,
        loss_accumulated,
        diagnostics: Diagnostics {
            steps: outcome.steps,
            rejected_steps: outcome.rejected,
            max_population: max_pop,
            max_norm_drift: max_drift,
            min_eigenvalue: Some(min_eig),
        },
        fault: outcome.fault,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_lambda, dephasing_matrix};
    use crate::propagate::propagate_tdse;
    use crate::pulse::{make_stirap_pair, Envelope};
    use crate::state::StateVector;

    #[test]
    fn closed_system_matches_tdse() {
        let ps = make_stirap_pair(12.0, 10.0, 1.0, 0.8, Envelope::Gaussian).unwrap();
        let m = build_lambda(ps, 2.0, 0.0, 0.0, vec![]).unwrap();
        let grid = TimeGrid::uniform(-4.4, 4.4, 41).unwrap();
        let psi = StateVector::basis(3, 0).unwrap();
        let opts = IntegratorOptions::default().with_tol(1e-10);
        let a = propagate_tdse(&m, &psi, &grid, &opts).unwrap();
        let b = propagate_liouville(&m, &DensityMatrix::from_pure(&psi), &grid, &opts).unwrap();
        for (pa, pb) in a.populations.iter().zip(&b.populations) {
            for (x, y) in pa.iter().zip(pb) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn strong_dephasing_matches_adiabatic_solution() {
        let (g, tau) = (10.0, 1.0);
        let ps = make_stirap_pair(30.0, 30.0, 1.0, tau, Envelope::Gaussian).unwrap();
        let m = build_lambda(ps, 0.0, 0.0, 0.0, vec![])
            .unwrap()
            .with_dephasing(dephasing_matrix(3, &[(0, 2, g)]).unwrap())
            .unwrap();
        let grid = TimeGrid::uniform(-4.5, 4.5, 11).unwrap();
        let rho0 = DensityMatrix::from_pure(&StateVector::basis(3, 0).unwrap());
        let r = propagate_liouville(&m, &rho0, &grid, &IntegratorOptions::default()).unwrap();
        let p = r.final_populations();
        let e = (-g * 0.75 / tau).exp();
        assert!((p[0] - p[1]).abs() < 0.02, "{p:?}");
        assert!((p[2] - (1.0 / 3.0 + 2.0 / 3.0 * e)).abs() < 0.05, "{p:?}");
        assert!(r.diagnostics.max_norm_drift < 1e-8);
    }

    #[test]
    fn lindblad_dephasing_stays_positive() {
        // Dephasing of level 3 alone damps both of its coherences equally.
        let ps = make_stirap_pair(30.0, 30.0, 1.0, 1.0, Envelope::Gaussian).unwrap();
        let m = build_lambda(ps, 0.0, 0.0, 0.0, vec![])
            .unwrap()
            .with_dephasing(dephasing_matrix(3, &[(0, 2, 10.0), (1, 2, 10.0)]).unwrap())
            .unwrap();
        let grid = TimeGrid::uniform(-4.5, 4.5, 37).unwrap();
        let rho0 = DensityMatrix::from_pure(&StateVector::basis(3, 0).unwrap());
        let r = propagate_liouville(&m, &rho0, &grid, &IntegratorOptions::default()).unwrap();
        assert!(r.diagnostics.min_eigenvalue.unwrap() > -1e-7, "{:?}", r.diagnostics);
        assert!(r.diagnostics.max_norm_drift < 1e-8);
    }
}
