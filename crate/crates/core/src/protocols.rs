//! Named protocol runs with closed-form oracles and standard reports.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::config::{Equation, Observable, ProtocolName, PulsesConfig, RunConfig, TripodOrdering};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::numerics::first_crossing;
use crate::output::Table;
use crate::propagate::{propagate_liouville, propagate_tdse, two_state_stirap_run, SimResult};
use crate::pulse::{mixing_angle_profile, rms_area, Envelope, Link};
use crate::spectral::{
    ap_state_exists, bright_states_lambda, eigensystem, global_adiabaticity, local_adiabaticity, tripod_beta, DEFAULT_MIN_AREA,
};
use crate::state::{BlochVector, DensityMatrix, StateVector, TimeGrid, C64};
use crate::TOOLKIT_VERSION;

/// Closed-form prediction next to the simulated value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub predicted: f64,
    pub measured: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub within: bool,
}

impl OracleValue {
    pub fn new(predicted: f64, measured: f64, tolerance: f64) -> Self {
        let deviation = (measured - predicted).abs();
        Self { predicted, measured, deviation, tolerance, within: deviation <= tolerance }
    }
}

/// Rise time of the target population between `ε` and `1 − ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionTimeEstimate {
    pub epsilon: f64,
    /// `None` when the population never reaches `1 − ε`.
    pub measured: Option<f64>,
    /// `(T²/τ)·ln√((1−ε)/ε)`.
    pub predicted: f64,
}

impl TransitionTimeEstimate {
    pub fn defined(&self) -> bool {
        self.measured.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub name: ProtocolName,
    pub config_hash: String,
    pub toolkit_version: String,
    pub final_populations: Vec<f64>,
    /// 1-based target level.
    pub target: usize,
    pub efficiency: f64,
    pub infidelity: f64,
    pub max_transient_p2: f64,
    /// Largest population reached by any level other than the two ends.
    pub max_middle_population: f64,
    pub rms_area: Option<f64>,
    pub local_margin: Option<f64>,
    pub global_margin: Option<f64>,
    /// Overlap with the protocol's closed-form final state.
    pub fidelity: Option<f64>,
    pub oracle_values: BTreeMap<String, OracleValue>,
    pub transition_time: Option<TransitionTimeEstimate>,
    pub ap_state_exists: Option<bool>,
    pub final_vector: Option<[f64; 3]>,
    pub steps: usize,
    pub rejected_steps: usize,
}

/// Report plus the time series that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: ProtocolReport,
    pub series: Table,
}

/// A propagated level-system run.
pub struct Simulation {
    pub model: ModelSpec,
    pub grid: TimeGrid,
    pub result: SimResult,
}

fn grid_for(cfg: &RunConfig, model: &ModelSpec, samples: usize) -> Result<TimeGrid> {
    let (a, b) = model.support().unwrap_or((-5.0, 5.0));
    let t0 = cfg.protocol.t_start.unwrap_or(a);
    let t1 = cfg.protocol.t_end.unwrap_or(b);
    TimeGrid::uniform(t0, t1, samples)
}

fn target_level(cfg: &RunConfig, dim: usize) -> Result<usize> {
    let t = cfg.protocol.target.unwrap_or(dim);
    if t == 0 || t > dim {
        return Err(Error::Config(format!("target level {t} outside 1..={dim}")));
    }
    Ok(t - 1)
}

/// Propagates the configured model on `samples` output points.
pub fn simulate(cfg: &RunConfig, samples: usize) -> Result<Simulation> {
    let model = cfg.build_model()?;
    let grid = grid_for(cfg, &model, samples)?;
    let i0 = cfg.protocol.initial;
    if i0 == 0 || i0 > model.dim {
        return Err(Error::Config(format!("initial level {i0} outside 1..={}", model.dim)));
    }
    let psi0 = StateVector::basis(model.dim, i0 - 1)?;
    let result = match cfg.protocol.equation {
        Equation::Tdse => propagate_tdse(&model, &psi0, &grid, &cfg.integrator)?,
        Equation::Liouville => propagate_liouville(&model, &DensityMatrix::from_pure(&psi0), &grid, &cfg.integrator)?,
    }
    .into_result()?;
    Ok(Simulation { model, grid, result })
}

/// Overlap `⟨target|ρ|target⟩` for pure or mixed final states.
fn overlap(result: &SimResult, target: &StateVector) -> Result<f64> {
    if let Some(psi) = result.final_state() {
        return psi.fidelity_to(target);
    }
    let rho = result.final_density().ok_or_else(|| Error::Undefined("no final state".into()))?;
    let a = target.as_dvector();
    Ok((a.adjoint() * rho.entries() * &a)[(0, 0)].re)
}

/// Closed-form final state predicted for the configuration, if any.
pub fn oracle_state(cfg: &RunConfig, model: &ModelSpec, t0: f64, t1: f64) -> Result<Option<StateVector>> {
    Ok(match (&cfg.protocol.name, &cfg.pulses) {
        (ProtocolName::Fractional, PulsesConfig::Fractional { theta, alpha, .. }) => Some(StateVector::new(vec![
            C64::new(theta.cos(), 0.0),
            C64::new(0.0, 0.0),
            -C64::from_polar(theta.sin(), *alpha),
        ])?),
        (ProtocolName::Tripod, PulsesConfig::Tripod { ordering, peak_c, .. }) => {
            let z = C64::new(0.0, 0.0);
            let r = |a: f64, b: f64| StateVector::new(vec![z, z, C64::new(a, 0.0), C64::new(b, 0.0)]);
            if *peak_c == Some(0.0) {
                Some(r(-1.0, 0.0)?)
            } else {
                match ordering {
                    TripodOrdering::CsP => Some(r(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2)?),
                    o => {
                        let b = tripod_beta(&model.pulses, t0, t1)?.beta;
                        if *o == TripodOrdering::Scp {
                            Some(r(-b.sin(), -b.cos())?)
                        } else {
                            Some(r(-b.cos(), b.sin())?)
                        }
                    }
                }
            }
        }
        _ => None,
    })
}

/// Scalar figure of merit for one configuration; used by scans.
pub fn evaluate(cfg: &RunConfig, observable: Observable) -> Result<f64> {
    if matches!(cfg.pulses, PulsesConfig::TwoState { .. } | PulsesConfig::Waveplates { .. }) {
        return Err(Error::Unsupported("scans need a level-system protocol".into()));
    }
    let sim = simulate(cfg, 2)?;
    let r = &sim.result;
    let k = target_level(cfg, sim.model.dim)?;
    Ok(match observable {
        Observable::PTarget => r.final_populations()[k],
        Observable::MaxP2 => r.diagnostics.max_transient_p2(),
        Observable::Loss => *r.loss_accumulated.last().unwrap(),
        Observable::Infidelity => match oracle_state(cfg, &sim.model, sim.grid.t_start(), sim.grid.t_end())? {
            Some(s) => 1.0 - overlap(r, &s)?,
            None => 1.0 - r.final_populations()[k],
        },
    })
}

/// Measured and predicted rise time of a population series.
pub fn transition_time(times: &[f64], population: &[f64], epsilon: f64, delay: f64, width: f64) -> Result<TransitionTimeEstimate> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    if delay == 0.0 {
        return Err(Error::InvalidArgument("transition time needs a nonzero delay".into()));
    }
    let predicted = width * width / delay.abs() * ((1.0 - epsilon) / epsilon).sqrt().ln();
    let lo = first_crossing(times, population, epsilon, true);
    let hi = first_crossing(times, population, 1.0 - epsilon, true);
    let measured = match (lo, hi) {
        (Some(a), Some(b)) if b >= a => Some(b - a),
        _ => None,
    };
    Ok(TransitionTimeEstimate { epsilon, measured, predicted })
}

fn param(params: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    params.get(key).copied().ok_or_else(|| Error::InvalidArgument(format!("missing parameter '{key}'")))
}

/// Names accepted by [`analytic_oracles`].
pub const ORACLE_NAMES: &[&str] = &[
    "dephasing_rho11",
    "dephasing_rho33",
    "asymmetric_center",
    "asymmetric_width",
    "intuitive_p1",
    "intuitive_p2",
    "intuitive_p3",
    "tripod_sin2_beta",
    "transition_time",
    "pap_max_p2",
];

/// Closed-form values used as comparison targets.
///
/// | name | parameters |
/// |---|---|
/// | `dephasing_rho11`, `dephasing_rho33` | `gamma13`, `tau`, optional `width` |
/// | `asymmetric_center` | `delta` |
/// | `asymmetric_width` | `omega_min` |
/// | `intuitive_p1..3` | `area` |
/// | `tripod_sin2_beta` | `beta` |
/// | `transition_time` | `epsilon`, `tau`, optional `width` |
/// | `pap_max_p2` | `n` |
pub fn analytic_oracles(name: &str, params: &BTreeMap<String, f64>) -> Result<f64> {
    let width = params.get("width").copied().unwrap_or(1.0);
    match name {
        "dephasing_rho11" | "dephasing_rho33" => {
            let eta = 3.0 * width * width / (4.0 * param(params, "tau")?);
            let e = (-param(params, "gamma13")? * eta).exp();
            Ok(if name == "dephasing_rho11" { (1.0 - e) / 3.0 } else { (1.0 + 2.0 * e) / 3.0 })
        }
        "asymmetric_center" => Ok(8.0 / 9.0 * param(params, "delta")?),
        "asymmetric_width" => Ok(4.0 / 3.0 * param(params, "omega_min")?),
        "intuitive_p1" => {
            param(params, "area")?;
            Ok(0.0)
        }
        "intuitive_p2" => Ok((0.5 * param(params, "area")?).sin().powi(2)),
        "intuitive_p3" => Ok((0.5 * param(params, "area")?).cos().powi(2)),
        "tripod_sin2_beta" => Ok(param(params, "beta")?.sin().powi(2)),
        "transition_time" => {
            let eps = param(params, "epsilon")?;
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::InvalidArgument("epsilon must lie in (0, 1/2)".into()));
            }
            Ok(width * width / param(params, "tau")?.abs() * ((1.0 - eps) / eps).sqrt().ln())
        }
        "pap_max_p2" => {
            let n = param(params, "n")?;
            Ok((PI / (4.0 * n)).sin().powi(2))
        }
        _ => Err(Error::UnknownOracle(name.into())),
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Width of the pulses of pair-like configurations.
pub fn pulse_width(cfg: &RunConfig) -> Option<f64> {
    match &cfg.pulses {
        PulsesConfig::Pair { width, .. }
        | PulsesConfig::Ddp { width, .. }
        | PulsesConfig::Fractional { width, .. }
        | PulsesConfig::Composite { width, .. }
        | PulsesConfig::Tripod { width, .. }
        | PulsesConfig::Chain { width, .. }
        | PulsesConfig::MChain { width, .. } => Some(*width),
        _ => None,
    }
}

fn gaussian_pair(cfg: &RunConfig) -> Option<(f64, f64, f64, f64)> {
    match &cfg.pulses {
        PulsesConfig::Pair { shape, peak, peak_s, width, delay, .. }
            if shape.envelope() == Envelope::Gaussian =>
        {
            Some((*peak, peak_s.unwrap_or(*peak), *width, *delay))
        }
        _ => None,
    }
}

/// Fills every field that does not depend on the protocol.
fn base_report(cfg: &RunConfig, sim: &Simulation) -> Result<ProtocolReport> {
    let r = &sim.result;
    let dim = sim.model.dim;
    let k = target_level(cfg, dim)?;
    let pops = r.final_populations().to_vec();
    let max_pop = &r.diagnostics.max_population;
    let middle = if dim > 2 { max_pop[1..dim - 1].iter().cloned().fold(0.0, f64::max) } else { 0.0 };
    let (mut area, mut local, mut global) = (None, None, None);
    if let (Some(p), Some(s)) = (sim.model.pump, sim.model.stokes) {
        if let Ok(a) = rms_area(&sim.model.pulses, p, s) {
            area = Some(a);
            global = Some(global_adiabaticity(a, 0.0, DEFAULT_MIN_AREA).margin);
        }
        if let Ok(l) = local_adiabaticity(&sim.model.pulses, p, s, &sim.grid, 1e-2) {
            local = Some(l.min_margin);
        }
    }
    Ok(ProtocolReport {
        name: cfg.protocol.name,
        config_hash: cfg.hash(),
        toolkit_version: TOOLKIT_VERSION.into(),
        target: k + 1,
        efficiency: pops[k],
        infidelity: 1.0 - pops[k],
        max_transient_p2: r.diagnostics.max_transient_p2(),
        max_middle_population: middle,
        final_populations: pops,
        rms_area: area,
        local_margin: local,
        global_margin: global,
        fidelity: None,
        oracle_values: BTreeMap::new(),
        transition_time: None,
        ap_state_exists: None,
        final_vector: None,
        steps: r.diagnostics.steps,
        rejected_steps: r.diagnostics.rejected_steps,
    })
}

/// Time series with `t, P1..PN, loss`, `|ρ13|` for density-matrix runs and
/// the mixing angles `θ, φ` for three-state systems.
fn level_series(cfg: &RunConfig, sim: &Simulation, axis: &str) -> Result<Table> {
    let dim = sim.model.dim;
    let mut cols = vec![axis.to_string()];
    cols.extend((1..=dim).map(|n| format!("P{n}")));
    cols.push("loss".into());
    let liouville = sim.result.final_density().is_some();
    if liouville && dim >= 3 {
        cols.push("abs_rho13".into());
    }
    let lambda_like = dim == 3 && sim.model.pulses.has(Link::PUMP) && sim.model.pulses.has(Link::STOKES);
    let angles = if lambda_like {
        for c in ["theta", "phi", "omega_p", "omega_s", "eps_minus", "eps_0", "eps_plus"] {
            cols.push(c.into());
        }
        Some(mixing_angle_profile(&sim.model.pulses, sim.model.detunings[1], sim.result.times())?)
    } else {
        None
    };
    let mut t = Table::new(cols).stamped(&cfg.hash());
    t.meta.insert("protocol".into(), format!("{:?}", cfg.protocol.name).to_lowercase());
    if let Some((_, _, w, d)) = gaussian_pair(cfg) {
        t.meta.insert("pulse_delay".into(), crate::output::format_number(d));
        t.meta.insert("pulse_width".into(), crate::output::format_number(w));
    }
    for (k, &time) in sim.result.times().iter().enumerate() {
        let mut row = vec![time];
        row.extend_from_slice(&sim.result.populations[k]);
        row.push(sim.result.loss_accumulated[k]);
        if liouville && dim >= 3 {
            if let crate::propagate::SimStates::Mixed(v) = &sim.result.states {
                row.push(v[k].get(0, 2).norm());
            }
        }
        if let Some(a) = &angles {
            row.push(a[k].0.theta);
            row.push(a[k].0.phi);
            row.push(sim.model.pulses.eval(Link::PUMP, time).norm());
            row.push(sim.model.pulses.eval(Link::STOKES, time).norm());
            let e = eigensystem(&sim.model.hamiltonian(time))?.real_values();
            row.extend_from_slice(&e);
        }
        t.push(row)?;
    }
    Ok(t)
}

fn finish(cfg: &RunConfig, sim: &Simulation, report: ProtocolReport) -> Result<RunOutput> {
    let axis = if matches!(cfg.pulses, PulsesConfig::Waveguide { .. }) { "z" } else { "t" };
    Ok(RunOutput { series: level_series(cfg, sim, axis)?, report })
}

fn add_fidelity(cfg: &RunConfig, sim: &Simulation, report: &mut ProtocolReport, tol: f64) -> Result<()> {
    if let Some(s) = oracle_state(cfg, &sim.model, sim.grid.t_start(), sim.grid.t_end())? {
        let f = overlap(&sim.result, &s)?;
        report.fidelity = Some(f);
        report.oracle_values.insert("fidelity".into(), OracleValue::new(1.0, f, tol));
    }
    Ok(())
}

/// Resonant-intuitive closed form, added when it applies.
fn add_intuitive_oracles(cfg: &RunConfig, sim: &Simulation, report: &mut ProtocolReport) -> Result<()> {
    let m = &sim.model;
    let resonant = m.detunings.iter().all(|&d| d == 0.0) && m.is_lossless();
    if let (Some((_, _, _, d)), Some(a)) = (gaussian_pair(cfg), report.rms_area) {
        if resonant && d < 0.0 && m.dim == 3 {
            let p = params(&[("area", a)]);
            for (n, name) in ["intuitive_p1", "intuitive_p2", "intuitive_p3"].iter().enumerate() {
                let v = analytic_oracles(name, &p)?;
                report.oracle_values.insert((*name).into(), OracleValue::new(v, report.final_populations[n], 0.02));
            }
        }
    }
    Ok(())
}

pub fn run_stirap(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    report.oracle_values.insert("p_target_adiabatic".into(), OracleValue::new(1.0, report.efficiency, 0.01));
    add_intuitive_oracles(cfg, &sim, &mut report)?;
    if let Some((_, _, w, d)) = gaussian_pair(cfg) {
        if d != 0.0 {
            let k = report.target - 1;
            let tt = transition_time(sim.result.times(), &sim.result.population_series(k), 0.01, d, w)?;
            report.transition_time = Some(tt);
        }
        let g = &sim.model.dephasing;
        let only13 = sim.model.dim == 3
            && g[(0, 2)] > 0.0
            && g[(0, 1)] == 0.0
            && g[(1, 2)] == 0.0
            && d > 0.0;
        if only13 && cfg.protocol.equation == Equation::Liouville {
            let p = params(&[("gamma13", g[(0, 2)]), ("tau", d), ("width", w)]);
            let f = &report.final_populations;
            report.oracle_values.insert(
                "dephasing_rho33".into(),
                OracleValue::new(analytic_oracles("dephasing_rho33", &p)?, f[2], 0.05),
            );
            report
                .oracle_values
                .insert("dephasing_rho11_minus_rho22".into(), OracleValue::new(0.0, f[0] - f[1], 0.02));
        }
    }
    finish(cfg, &sim, report)
}

pub fn run_fractional(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    add_fidelity(cfg, &sim, &mut report, 0.01)?;
    finish(cfg, &sim, report)
}

pub fn run_composite(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    report.oracle_values.insert("infidelity".into(), OracleValue::new(0.0, report.infidelity, 1e-4));
    finish(cfg, &sim, report)
}

pub fn run_bright_stirap(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    let m = &sim.model;
    if m.dim == 3 && m.detunings[1] != 0.0 {
        // Follow whichever bright state starts in level 1.
        let times = sim.grid.samples();
        let eval = |t: f64| (m.pulses.eval(Link::PUMP, t).norm(), m.pulses.eval(Link::STOKES, t).norm());
        let mut label = None;
        let mut predicted: f64 = 0.0;
        for &t in times {
            let (p, s) = eval(t);
            let Ok((plus, minus)) = bright_states_lambda(p, s, m.detunings[1]) else { continue };
            let l = *label.get_or_insert(if plus.populations()[0] >= minus.populations()[0] { 0 } else { 1 });
            let st = if l == 0 { plus } else { minus };
            predicted = predicted.max(st.populations()[1]);
        }
        report
            .oracle_values
            .insert("max_p2_bright_state".into(), OracleValue::new(predicted, report.max_transient_p2, 0.05));
    }
    report.oracle_values.insert("p_target_adiabatic".into(), OracleValue::new(1.0, report.efficiency, 0.05));
    add_intuitive_oracles(cfg, &sim, &mut report)?;
    finish(cfg, &sim, report)
}

pub fn run_tripod(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    add_fidelity(cfg, &sim, &mut report, 0.01)?;
    if let PulsesConfig::Tripod { ordering, peak_c, .. } = &cfg.pulses {
        if *peak_c != Some(0.0) && *ordering != TripodOrdering::CsP {
            let b = tripod_beta(&sim.model.pulses, sim.grid.t_start(), sim.grid.t_end())?;
            let level = if *ordering == TripodOrdering::Scp { 2 } else { 3 };
            report.oracle_values.insert(
                "sin2_beta".into(),
                OracleValue::new(b.sin2_beta, report.final_populations[level], 0.01),
            );
        }
    }
    finish(cfg, &sim, report)
}

pub fn run_straddle(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    report.oracle_values.insert("p_target_adiabatic".into(), OracleValue::new(1.0, report.efficiency, 0.01));
    report
        .oracle_values
        .insert("max_middle_population".into(), OracleValue::new(0.0, report.max_middle_population, 0.05));
    finish(cfg, &sim, report)
}

pub fn run_chain(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    if sim.model.dim >= 3 {
        let c = ap_state_exists(&sim.model, 0.0)?;
        report.ap_state_exists = Some(c.exists);
        if c.exists {
            report.oracle_values.insert("p_target_adiabatic".into(), OracleValue::new(1.0, report.efficiency, 0.01));
        }
    }
    finish(cfg, &sim, report)
}

pub fn run_waveguide(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    report.oracle_values.insert("p_target_adiabatic".into(), OracleValue::new(1.0, report.efficiency, 0.01));
    report
        .oracle_values
        .insert("max_middle_population".into(), OracleValue::new(0.0, report.max_middle_population, 0.02));
    finish(cfg, &sim, report)
}

pub fn run_pap(cfg: &RunConfig) -> Result<RunOutput> {
    let sim = simulate(cfg, cfg.integrator.dense_output_samples)?;
    let mut report = base_report(cfg, &sim)?;
    if let PulsesConfig::PapTrain { n_pulses, .. } = &cfg.pulses {
        let v = analytic_oracles("pap_max_p2", &params(&[("n", *n_pulses as f64)]))?;
        report.oracle_values.insert("pap_max_p2".into(), OracleValue::new(v, report.max_transient_p2, 0.02));
    }
    report.oracle_values.insert("p_target_adiabatic".into(), OracleValue::new(1.0, report.efficiency, 0.01));
    finish(cfg, &sim, report)
}

fn torque_report(cfg: &RunConfig, final_vector: BlochVector, steps: usize, rejected: usize) -> ProtocolReport {
    ProtocolReport {
        name: cfg.protocol.name,
        config_hash: cfg.hash(),
        toolkit_version: TOOLKIT_VERSION.into(),
        final_populations: Vec::new(),
        target: 0,
        efficiency: f64::NAN,
        infidelity: f64::NAN,
        max_transient_p2: f64::NAN,
        max_middle_population: f64::NAN,
        rms_area: None,
        local_margin: None,
        global_margin: None,
        fidelity: None,
        oracle_values: BTreeMap::new(),
        transition_time: None,
        ap_state_exists: None,
        final_vector: Some(final_vector.to_array()),
        steps,
        rejected_steps: rejected,
    }
}

/// Two-state STIRAP on the Bloch sphere; columns `t, u, v, w, d`.
pub fn run_two_state(cfg: &RunConfig) -> Result<RunOutput> {
    let PulsesConfig::TwoState { delta, omega } = &cfg.pulses else {
        return Err(Error::Config("two_state protocol needs pulses.kind = \"two_state\"".into()));
    };
    let delta: Vec<_> = delta.iter().map(|p| p.build()).collect::<Result<_>>()?;
    let omega: Vec<_> = omega.iter().map(|p| p.build()).collect::<Result<_>>()?;
    let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in delta.iter().chain(&omega) {
        let (x, y) = p.support();
        if p.width < 1e9 {
            a = a.min(x);
            b = b.max(y);
        }
    }
    if !a.is_finite() {
        (a, b) = (-5.0, 5.0);
    }
    let grid = TimeGrid::uniform(
        cfg.protocol.t_start.unwrap_or(a),
        cfg.protocol.t_end.unwrap_or(b),
        cfg.integrator.dense_output_samples,
    )?;
    let b0 = BlochVector::from_array(cfg.protocol.initial_vector.unwrap_or([0.0, 0.0, 1.0]));
    let run = two_state_stirap_run(&delta, &omega, b0, &grid, &cfg.integrator)?;
    let fv = run.final_vector;
    let mut report = torque_report(cfg, fv, run.trajectory.steps, run.trajectory.rejected_steps);
    report.oracle_values.insert("w_final".into(), OracleValue::new(0.0, fv.w, 0.01));
    report.oracle_values.insert("abs_u_final".into(), OracleValue::new(1.0, fv.u.abs(), 1e-3));
    report
        .oracle_values
        .insert("norm_drift".into(), OracleValue::new(0.0, run.trajectory.max_norm_drift, 10.0 * cfg.integrator.rel_tol));
    let mut t = Table::new(["t", "u", "v", "w", "d"].iter().map(|s| s.to_string()).collect()).stamped(&cfg.hash());
    for ((time, v), d) in run.trajectory.times.iter().zip(&run.trajectory.vectors).zip(&run.d) {
        t.push(vec![*time, v.u, v.v, v.w, *d])?;
    }
    Ok(RunOutput { report, series: t })
}

/// Polarization through a waveplate stack; columns `element, s1, s2, s3,
/// misalignment` (angle to the element's birefringence axis).
pub fn run_polarization(cfg: &RunConfig) -> Result<RunOutput> {
    let PulsesConfig::Waveplates { stack } = &cfg.pulses else {
        return Err(Error::Config("polarization protocol needs pulses.kind = \"waveplates\"".into()));
    };
    if stack.elements.is_empty() {
        return Err(Error::Config("waveplate stack is empty".into()));
    }
    let s0 = cfg
        .protocol
        .initial_vector
        .map(BlochVector::from_array)
        .unwrap_or_else(|| stack.elements[0].axis());
    let out = crate::analogue::polarization_propagate(stack, s0)?;
    let last = *out.last().unwrap();
    let mut report = torque_report(cfg, last, stack.elements.len(), 0);
    let mis = crate::analogue::misalignment(last, stack.elements.last().unwrap().axis());
    report.oracle_values.insert("final_misalignment".into(), OracleValue::new(0.0, mis, 0.05));
    let mut t =
        Table::new(["element", "s1", "s2", "s3", "misalignment"].iter().map(|s| s.to_string()).collect()).stamped(&cfg.hash());
    for (k, s) in out.iter().enumerate() {
        let axis = stack.elements[k.saturating_sub(1)].axis();
        t.push(vec![k as f64, s.u, s.v, s.w, crate::analogue::misalignment(*s, axis)])?;
    }
    Ok(RunOutput { report, series: t })
}

/// Runs the protocol named in the configuration.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.protocol.name {
        ProtocolName::Stirap => run_stirap(cfg),
        ProtocolName::Fractional => run_fractional(cfg),
        ProtocolName::Composite => run_composite(cfg),
        ProtocolName::BrightStirap => run_bright_stirap(cfg),
        ProtocolName::Tripod => run_tripod(cfg),
        ProtocolName::Straddle => run_straddle(cfg),
        ProtocolName::Chain => run_chain(cfg),
        ProtocolName::Waveguide => run_waveguide(cfg),
        ProtocolName::Pap => run_pap(cfg),
        ProtocolName::TwoState => run_two_state(cfg),
        ProtocolName::Polarization => run_polarization(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(body: &str) -> RunConfig {
        RunConfig::from_toml(&format!("schema_version = 1\n{body}")).unwrap()
    }

    const STIRAP: &str = r#"
[system]
topology = "lambda"
[pulses]
kind = "pair"
peak = 20.0
delay = 1.2
[protocol]
name = "stirap"
"#;

    #[test]
    fn stirap_report() {
        let out = run(&cfg(STIRAP)).unwrap();
        let r = &out.report;
        // Reference values from a fixed-step RK4 run with h = 1e-4.
        assert!((r.efficiency - 0.999621516).abs() < 1e-6, "{r:?}");
        assert!((r.max_transient_p2 - 0.0208185).abs() < 1e-5, "{r:?}");
        assert!(r.oracle_values["p_target_adiabatic"].within);
        assert!(r.global_margin.unwrap() > 1.0);
        assert_eq!(
            out.series.columns,
            ["t", "P1", "P2", "P3", "loss", "theta", "phi", "omega_p", "omega_s", "eps_minus", "eps_0", "eps_plus"]
        );
        for row in &out.series.rows {
            let (ep, e0, em) = (row[11], row[10], row[9]);
            let rms2 = row[7] * row[7] + row[8] * row[8];
            assert!(e0.abs() < 1e-10 && (ep + em).abs() < 1e-10 && (ep * em + rms2 / 4.0).abs() < 1e-9);
        }
        assert_eq!(out.series.rows.len(), 1025);
        let th = out.series.column("theta").unwrap();
        assert!(th[0] < 0.01 && (th[1024] - PI / 2.0).abs() < 0.01);
        assert!(r.transition_time.unwrap().defined());
    }

    #[test]
    fn oracle_table() {
        let p = params(&[("gamma13", 2f64.ln()), ("tau", 0.75)]);
        assert!((analytic_oracles("dephasing_rho33", &p).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((analytic_oracles("asymmetric_center", &params(&[("delta", 9.0)])).unwrap() - 8.0).abs() < 1e-14);
        let a = params(&[("area", 2.0 * PI)]);
        assert!(analytic_oracles("intuitive_p2", &a).unwrap() < 1e-30);
        assert!((analytic_oracles("intuitive_p3", &a).unwrap() - 1.0).abs() < 1e-15);
        let tt = params(&[("epsilon", 0.01), ("tau", 1.0)]);
        assert!((analytic_oracles("transition_time", &tt).unwrap() - 99f64.sqrt().ln()).abs() < 1e-14);
        assert!(matches!(analytic_oracles("nope", &a), Err(Error::UnknownOracle(_))));
        assert!(analytic_oracles("tripod_sin2_beta", &a).is_err());
    }

    #[test]
    fn transition_time_scales_inversely_with_delay() {
        let a = transition_time(&[0.0, 1.0], &[0.0, 1.0], 0.01, 1.0, 1.0).unwrap();
        let b = transition_time(&[0.0, 1.0], &[0.0, 1.0], 0.01, 2.0, 1.0).unwrap();
        assert!((a.predicted - 2.0 * b.predicted).abs() < 1e-14);
        assert!((a.predicted - 2.2975599250672945).abs() < 1e-12);
        let never = transition_time(&[0.0, 1.0], &[0.0, 0.5], 0.01, 1.0, 1.0).unwrap();
        assert!(!never.defined());
        assert!(transition_time(&[0.0, 1.0], &[0.0, 1.0], 0.6, 1.0, 1.0).is_err());
    }

    #[test]
    fn composite_single_pair_matches_stirap() {
        let a = cfg(r#"
[system]
topology = "lambda"
[pulses]
kind = "pair"
shape = "sin2"
peak = 15.0
width = 0.5
delay = 0.3
[protocol]
name = "stirap"
"#);
        let b = cfg(r#"
[system]
topology = "lambda"
[pulses]
kind = "composite"
peak = 15.0
width = 0.5
delay = 0.3
phases = [[0.0, 0.0]]
[protocol]
name = "composite"
"#);
        let ra = run(&a).unwrap().report;
        let rb = run(&b).unwrap().report;
        assert_eq!(ra.final_populations, rb.final_populations);
        assert_eq!(ra.steps, rb.steps);
    }

    #[test]
    fn global_phase_leaves_populations_unchanged() {
        let base = cfg(STIRAP);
        let shifted = base.with_value("pulses.phase_p", 0.7).unwrap().with_value("pulses.phase_s", 0.7).unwrap();
        let relative = base.with_value("pulses.phase_p", 1.9).unwrap();
        let p0 = run(&base).unwrap().report.final_populations;
        for c in [shifted, relative] {
            let p = run(&c).unwrap().report.final_populations;
            for (x, y) in p0.iter().zip(&p) {
                assert!((x - y).abs() < 1e-12, "{x} {y}");
            }
        }
    }

    #[test]
    fn fractional_half_superposition() {
        let c = cfg(r#"
[system]
topology = "lambda"
[pulses]
kind = "fractional"
peak = 25.0
delay = 1.0
theta = 0.7853981633974483
[protocol]
name = "fractional"
t_start = -6.0
t_end = 8.0
"#);
        let r = run(&c).unwrap().report;
        assert!(r.fidelity.unwrap() > 0.99, "{r:?}");
        let flipped = c.with_value("pulses.alpha", PI).unwrap();
        assert!(run(&flipped).unwrap().report.fidelity.unwrap() > 0.99);
    }

    #[test]
    fn scan_observables() {
        let c = cfg(STIRAP);
        let p = evaluate(&c, Observable::PTarget).unwrap();
        let q = evaluate(&c, Observable::Infidelity).unwrap();
        assert!((p + q - 1.0).abs() < 1e-15);
        assert!(evaluate(&c, Observable::Loss).unwrap().abs() < 1e-7);
        assert!((evaluate(&c, Observable::MaxP2).unwrap() - 0.0208185).abs() < 1e-5);
    }
}
