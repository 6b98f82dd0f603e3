//! Instantaneous eigensystems, adiabatic-state tracking, closed-form dark
//! states and adiabaticity diagnostics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HamiltonianAt, ModelSpec};
use crate::numerics;
use crate::pulse::{Link, PulseSet};
use crate::state::{StateVector, TimeGrid, C64};

/// Largest dimension handled by the dense solvers.
pub const MAX_DENSE_DIM: usize = 64;

/// Eigenvalues with right eigenvectors stored as matrix columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<C64>,
    pub vectors: DMatrix<C64>,
    pub hermitian: bool,
    /// Set when the eigenvectors are (numerically) linearly dependent.
    pub defective: bool,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.vectors.column(k).into_owned()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// Makes the first non-negligible component real and positive.
fn fix_gauge(v: &mut DVector<C64>) {
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(c) = v.iter().find(|c| c.norm() > 1e-8 * scale).copied() {
        let ph = c.conj() / c.norm();
        v.iter_mut().for_each(|x| *x *= ph);
    }
}

/// Eigen-decomposition of `H`. Hermitian matrices yield real ascending
/// eigenvalues and orthonormal vectors; others are sorted by real part with
/// unit-norm right eigenvectors.
pub fn eigensystem(h: &HamiltonianAt) -> Result<Eigensystem> {
    eigensystem_matrix(&h.matrix)
}

pub fn eigensystem_matrix(m: &DMatrix<C64>) -> Result<Eigensystem> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidArgument("eigensystem needs a square matrix".into()));
    }
    if n > MAX_DENSE_DIM {
        return Err(Error::Unsupported(format!("dense eigensolver limited to dim {MAX_DENSE_DIM}")));
    }
    let scale = m.norm().max(1e-300);
    let hermitian = (m - m.adjoint()).norm() <= 1e-13 * scale;
    let (mut values, mut vectors) = if hermitian {
        let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let vals: Vec<C64> = eig.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect();
        (vals, eig.eigenvectors)
    } else {
        schur_eigen(m, scale)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .partial_cmp(&values[b].re)
            .unwrap()
            .then(values[a].im.partial_cmp(&values[b].im).unwrap())
    });
    values = order.iter().map(|&k| values[k]).collect();
    vectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    for j in 0..n {
        let mut col = vectors.column(j).into_owned();
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::new(nrm, 0.0);
        }
        fix_gauge(&mut col);
        vectors.set_column(j, &col);
    }
    let mut defective = false;
    if !hermitian {
        for a in 0..n {
            for b in (a + 1)..n {
                let ov = vectors.column(a).dotc(&vectors.column(b)).norm();
                if ov > 1.0 - 1e-8 {
                    defective = true;
                }
            }
        }
    }
    Ok(Eigensystem { values, vectors, hermitian, defective })
}

fn schur_eigen(m: &DMatrix<C64>, scale: f64) -> (Vec<C64>, DMatrix<C64>) {
    let n = m.nrows();
    let (q, t) = Schur::new(m.clone()).unpack();
    let vals: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    let tiny = 1e-14 * scale;
    for k in 0..n {
        let mut x = DVector::<C64>::zeros(n);
        x[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                s += t[(j, l)] * x[l];
            }
            let mut d = t[(j, j)] - vals[k];
            if d.norm() < tiny {
                d = C64::new(tiny, 0.0);
            }
            x[j] = -s / d;
        }
        let v = &q * x;
        vecs.set_column(k, &v);
    }
    (vals, vecs)
}

/// Λ dark state `(cosθ, 0, −e^{iα}sinθ)` with `tanθ = |Ω_P/Ω_S|` and `α`
/// the phase of `Ω_P/Ω_S`.
pub fn dark_state_lambda(omega_p: C64, omega_s: C64) -> Result<StateVector> {
    let (p, s) = (omega_p.norm(), omega_s.norm());
    if p == 0.0 && s == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    let th = p.atan2(s);
    let ph = if p > 0.0 && s > 0.0 {
        (omega_p / omega_s) / (p / s)
    } else if p > 0.0 {
        omega_p / p
    } else {
        C64::new(1.0, 0.0)
    };
    StateVector::new(vec![C64::new(th.cos(), 0.0), C64::new(0.0, 0.0), -ph * th.sin()])
}

/// Bright adiabatic states `(Φ₊, Φ₋)` of the real Λ Hamiltonian.
pub fn bright_states_lambda(omega_p: f64, omega_s: f64, delta: f64) -> Result<(StateVector, StateVector)> {
    if omega_p == 0.0 && omega_s == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    let th = omega_p.atan2(omega_s);
    let phi = 0.5 * omega_p.hypot(omega_s).atan2(delta);
    let (st, ct, sp, cp) = (th.sin(), th.cos(), phi.sin(), phi.cos());
    Ok((
        StateVector::from_real(&[st * sp, cp, ct * sp])?,
        StateVector::from_real(&[st * cp, -sp, ct * cp])?,
    ))
}

/// Closed-form adiabatic energies `(ε₋, ε₀, ε₊)` of the Λ system at `δ = 0`.
pub fn lambda_energies(omega_rms: f64, delta: f64) -> (f64, f64, f64) {
    let r = (delta * delta + omega_rms * omega_rms).sqrt();
    (0.5 * (delta - r), 0.0, 0.5 * (delta + r))
}

/// Tripod dark pair `(Φ_D1, Φ_D2)`.
pub fn tripod_dark_pair(omega_p: f64, omega_s: f64, omega_c: f64) -> Result<(StateVector, StateVector)> {
    let sc = omega_s.hypot(omega_c);
    if sc == 0.0 && omega_p == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    let vt = omega_p.atan2(sc);
    let phi = omega_c.atan2(omega_s);
    let (sv, cv, sp, cp) = (vt.sin(), vt.cos(), phi.sin(), phi.cos());
    Ok((
        StateVector::from_real(&[cv, 0.0, -sv * cp, -sv * sp])?,
        StateVector::from_real(&[0.0, 0.0, sp, -cp])?,
    ))
}

/// Options for [`track_adiabatic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Gaps below `crossing_fraction · max Ω_rms` are flagged.
    pub crossing_fraction: f64,
    /// Overlaps closer than this are reported as ambiguous.
    pub ambiguity_tol: f64,
    /// Samples with `Ω_rms` below this fraction of its maximum are skipped
    /// when computing the local adiabaticity minimum.
    pub margin_floor: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { crossing_fraction: 0.02, ambiguity_tol: 1e-3, margin_floor: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingFlag {
    pub time: f64,
    pub labels: (usize, usize),
    pub gap: f64,
}

/// Adiabatic energies and states followed through time by continuity.
#[derive(Debug, Clone)]
pub struct AdiabaticReport {
    pub grid: TimeGrid,
    /// `energies[k][label]`.
    pub energies: Vec<Vec<C64>>,
    /// Eigenvectors per time, column `label`.
    pub states: Vec<DMatrix<C64>>,
    /// Λ mixing angles where pump and Stokes links exist.
    pub theta: Option<Vec<f64>>,
    pub phi: Option<Vec<f64>>,
    pub local_margin: Option<f64>,
    pub global_area: Option<f64>,
    pub crossing_flags: Vec<CrossingFlag>,
    /// Sample indices where the overlap assignment was ambiguous.
    pub ambiguous: Vec<usize>,
    /// True when the grid is coarser than 64 samples per pulse time scale.
    pub under_resolved: bool,
}

impl AdiabaticReport {
    pub fn energy_series(&self, label: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[label].re).collect()
    }
}

/// Diagonalizes `H(t)` on every grid sample and assigns continuous labels by
/// maximal overlap with the previous sample. Labels start in ascending
/// energy order; within degenerate clusters the ascending order is kept.
pub fn track_adiabatic(model: &ModelSpec, grid: &TimeGrid, opts: &TrackOptions) -> Result<AdiabaticReport> {
    let n = model.dim;
    let times = grid.samples();
    let mut energies = Vec::with_capacity(times.len());
    let mut states: Vec<DMatrix<C64>> = Vec::with_capacity(times.len());
    let mut ambiguous = Vec::new();
    let mut h = DMatrix::zeros(n, n);
    let mut max_rms: f64 = 0.0;
    let mut rms = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        model.hamiltonian_into(t, &mut h);
        let offdiag: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i < j)
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum::<f64>();
        let r = 2.0 * offdiag.sqrt();
        rms.push(r);
        max_rms = max_rms.max(r);
        let es = eigensystem_matrix(&h)?;
        if k == 0 {
            energies.push(es.values.clone());
            states.push(es.vectors.clone());
            continue;
        }
        let prev_vals: &Vec<C64> = &energies[k - 1];
        let prev_vecs = &states[k - 1];
        let overlaps = prev_vecs.adjoint() * &es.vectors;
        let mut taken = vec![false; n];
        let mut assign = vec![0usize; n];
        let mut amb = false;
        for label in 0..n {
            let mut best: Option<(usize, f64)> = None;
            let mut second = 0.0;
            for j in 0..n {
                if taken[j] {
                    continue;
                }
                let o = overlaps[(label, j)].norm();
                match best {
                    None => best = Some((j, o)),
                    Some((_, bo)) if o > bo => {
                        second = bo;
                        best = Some((j, o));
                    }
                    Some(_) => second = f64::max(second, o),
                }
            }
            let (j, bo) = best.unwrap();
            if n - label > 1 && (bo - second).abs() < opts.ambiguity_tol && bo > 0.0 {
                amb = true;
            }
            taken[j] = true;
            assign[label] = j;
        }
        // Degenerate clusters of the previous sample carry no overlap
        // information; keep them in ascending energy order.
        let scale = 1e-8 * (1.0 + h.norm());
        let mut visited = vec![false; n];
        for a in 0..n {
            if visited[a] {
                continue;
            }
            let cluster: Vec<usize> = (0..n)
                .filter(|&b| (prev_vals[b] - prev_vals[a]).norm() < scale)
                .collect();
            if cluster.len() > 1 {
                let mut cols: Vec<usize> = cluster.iter().map(|&l| assign[l]).collect();
                cols.sort_by(|&x, &y| es.values[x].re.partial_cmp(&es.values[y].re).unwrap());
                for (l, c) in cluster.iter().zip(cols) {
                    assign[*l] = c;
                }
                amb = false;
            }
            for b in cluster {
                visited[b] = true;
            }
        }
        if amb {
            ambiguous.push(k);
        }
        let mut vals = Vec::with_capacity(n);
        let mut vecs = DMatrix::zeros(n, n);
        for label in 0..n {
            let j = assign[label];
            vals.push(es.values[j]);
            let mut col = es.vectors.column(j).into_owned();
            let ov = prev_vecs.column(label).dotc(&col);
            if ov.norm() > 0.0 {
                col *= ov.conj() / ov.norm();
            }
            vecs.set_column(label, &col);
        }
        energies.push(vals);
        states.push(vecs);
    }

    let mut crossing_flags = Vec::new();
    let thresh = opts.crossing_fraction * max_rms;
    let floor = opts.margin_floor * max_rms;
    for a in 0..n {
        for b in (a + 1)..n {
            let gap: Vec<f64> = energies.iter().map(|e| (e[a] - e[b]).norm()).collect();
            for k in 1..times.len().saturating_sub(1) {
                if rms[k] >= floor && gap[k] < thresh && gap[k] <= gap[k - 1] && gap[k] < gap[k + 1] {
                    crossing_flags.push(CrossingFlag { time: times[k], labels: (a, b), gap: gap[k] });
                }
            }
        }
    }
    crossing_flags.sort_by(|x, y| x.time.partial_cmp(&y.time).unwrap());

    let lambda_like = model.pulses.has(Link::PUMP) && model.pulses.has(Link::STOKES) && n >= 3;
    let (theta, phi, local_margin, global_area) = if lambda_like {
        let delta = model.detunings[1];
        let mut th = Vec::with_capacity(times.len());
        let mut ph = Vec::with_capacity(times.len());
        for &t in times {
            let p = model.pulses.eval(Link::PUMP, t).norm();
            let s = model.pulses.eval(Link::STOKES, t).norm();
            th.push(p.atan2(s));
            ph.push(0.5 * p.hypot(s).atan2(delta));
        }
        let lm = local_adiabaticity(&model.pulses, Link::PUMP, Link::STOKES, grid, opts.margin_floor)?;
        let area = crate::pulse::rms_area(&model.pulses, Link::PUMP, Link::STOKES).ok();
        (Some(th), Some(ph), Some(lm.min_margin), area)
    } else {
        (None, None, None, None)
    };
    let dt_max = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(AdiabaticReport {
        grid: grid.clone(),
        energies,
        states,
        theta,
        phi,
        local_margin,
        global_area,
        crossing_flags,
        ambiguous,
        under_resolved: dt_max > model.time_scale() / 64.0,
    })
}

/// Local adiabaticity profile `r(t) = Ω_rms/|θ̇|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalAdiabaticity {
    pub times: Vec<f64>,
    /// `+∞` where `θ̇ = 0`, NaN where both couplings vanish.
    pub margin: Vec<f64>,
    pub min_margin: f64,
    pub min_time: f64,
    /// Samples left out of the minimum (couplings below the floor).
    pub excluded: usize,
}

/// Computes `θ̇ = (Ω_S Ω̇_P − Ω_P Ω̇_S)/(Ω_P² + Ω_S²)` from analytic pulse
/// derivatives and the margin `Ω_rms/|θ̇|`. Samples whose `Ω_rms` is below
/// `floor · max Ω_rms` are excluded from the minimum.
pub fn local_adiabaticity(ps: &PulseSet, link_p: Link, link_s: Link, grid: &TimeGrid, floor: f64) -> Result<LocalAdiabaticity> {
    for l in [link_p, link_s] {
        if !ps.has(l) {
            return Err(Error::MissingLink(l.to_string()));
        }
    }
    let times = grid.samples().to_vec();
    let mag = |v: C64, d: C64| -> (f64, f64) {
        let m = v.norm();
        if m == 0.0 {
            (0.0, d.norm())
        } else {
            (m, (v.conj() * d).re / m)
        }
    };
    let mut rms = Vec::with_capacity(times.len());
    let mut margin = Vec::with_capacity(times.len());
    for &t in &times {
        let (vp, dp) = ps.eval_with_derivative(link_p, t);
        let (vs, ds) = ps.eval_with_derivative(link_s, t);
        let (p, pd) = mag(vp, dp);
        let (s, sd) = mag(vs, ds);
        let r2 = p * p + s * s;
        let r = r2.sqrt();
        rms.push(r);
        if r2 == 0.0 {
            margin.push(f64::NAN);
            continue;
        }
        let thdot = (s * pd - p * sd) / r2;
        margin.push(if thdot == 0.0 { f64::INFINITY } else { r / thdot.abs() });
    }
    let max_rms = rms.iter().cloned().fold(0.0, f64::max);
    let mut min_margin = f64::INFINITY;
    let mut min_time = f64::NAN;
    let mut excluded = 0;
    for k in 0..times.len() {
        if margin[k].is_nan() || rms[k] < floor * max_rms {
            excluded += 1;
            continue;
        }
        if margin[k] < min_margin {
            min_margin = margin[k];
            min_time = times[k];
        }
    }
    Ok(LocalAdiabaticity { times, margin, min_margin, min_time, excluded })
}

/// Outcome of the global (area) adiabaticity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalAdiabaticity {
    pub required_area: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Default minimum rms area for efficient transfer.
pub const DEFAULT_MIN_AREA: f64 = 3.0 * PI;

/// Compares `area` with `A_min·√(1 + ratio²)`.
pub fn global_adiabaticity(area: f64, excess_bandwidth_ratio: f64, a_min: f64) -> GlobalAdiabaticity {
    let required_area = a_min * (1.0 + excess_bandwidth_ratio * excess_bandwidth_ratio).sqrt();
    let margin = area / required_area;
    GlobalAdiabaticity { required_area, margin, pass: area > 0.0 && margin >= 1.0 - 1e-12 }
}

/// Sign test for an adiabatic-passage state connecting the chain ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApCertificate {
    /// Determinant of the block spanning levels 2..N−2 (1-based).
    pub d_left: f64,
    /// Determinant of the block spanning levels 3..N−1.
    pub d_right: f64,
    pub exists: bool,
}

fn block_det(h: &DMatrix<C64>, lo: usize, hi: usize) -> f64 {
    // Inclusive 0-based range; an empty block has determinant 1.
    if lo > hi {
        return 1.0;
    }
    let n = hi - lo + 1;
    let m = DMatrix::from_fn(n, n, |i, j| h[(lo + i, lo + j)].re);
    m.determinant()
}

/// Evaluates `D^(2,N−2)·D^(3,N−1) > 0` on `H(t)` of a chain.
pub fn ap_state_exists(model: &ModelSpec, t: f64) -> Result<ApCertificate> {
    let n = model.dim;
    if n < 3 {
        return Err(Error::InvalidArgument("chain needs at least 3 levels".into()));
    }
    let h = model.hamiltonian(t).matrix;
    let d_left = if n >= 4 { block_det(&h, 1, n - 3) } else { 1.0 };
    let d_right = if n >= 4 { block_det(&h, 2, n - 2) } else { 1.0 };
    Ok(ApCertificate { d_left, d_right, exists: d_left * d_right > 0.0 })
}

/// Eigenvalues of the inner block (levels 2..N−1) of a chain at time `t`.
pub fn dressed_middle_spectrum(model: &ModelSpec, t: f64) -> Result<Vec<f64>> {
    let n = model.dim;
    if n < 3 {
        return Err(Error::InvalidArgument("chain needs at least 3 levels".into()));
    }
    let h = model.hamiltonian(t).matrix;
    let m = n - 2;
    let inner = DMatrix::from_fn(m, m, |i, j| h[(i + 1, j + 1)]);
    Ok(eigensystem_matrix(&inner)?.real_values())
}

/// Geometric mixing angle of the tripod dark pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripodBeta {
    pub beta: f64,
    /// Predicted dark-dark transition probability `sin²β`.
    pub sin2_beta: f64,
}

/// `β = ∫ φ̇ sinϑ dt` with `tanφ = Ω_C/Ω_S` and `sinϑ = Ω_P/Ω_rms`, by
/// adaptive quadrature over `[t0, t1]`.
pub fn tripod_beta(ps: &PulseSet, t0: f64, t1: f64) -> Result<TripodBeta> {
    for l in [Link::PUMP, Link::STOKES, Link::CONTROL] {
        if !ps.has(l) {
            return Err(Error::MissingLink(l.to_string()));
        }
    }
    let f = |t: f64| {
        let (vp, _) = ps.eval_with_derivative(Link::PUMP, t);
        let (vs, ds) = ps.eval_with_derivative(Link::STOKES, t);
        let (vc, dc) = ps.eval_with_derivative(Link::CONTROL, t);
        let (p, s, c) = (vp.norm(), vs.norm(), vc.norm());
        let sd = if s > 0.0 { (vs.conj() * ds).re / s } else { 0.0 };
        let cd = if c > 0.0 { (vc.conj() * dc).re / c } else { 0.0 };
        let sc2 = s * s + c * c;
        if sc2 < 1e-300 {
            return 0.0;
        }
        let phidot = (s * cd - c * sd) / sc2;
        let r = (sc2 + p * p).sqrt();
        phidot * p / r
    };
    let beta = numerics::integrate_with_breaks(&f, t0, t1, &ps.breakpoints(), 1e-12);
    Ok(TripodBeta { beta, sin2_beta: beta.sin().powi(2) })
}
