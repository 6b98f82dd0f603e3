//! Declarative run configuration (TOML), model construction from it, and the
//! dotted-path parameter addressing used by scans.
//!
//! Level indices in configuration files start at 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::analogue::{waveguide_to_chain, WaveguideLayout, WaveplateStack};
use crate::error::{Error, Result};
use crate::model::{
    build_chain, build_lambda, build_m_chain, build_three_state, build_tripod, dephasing_matrix, Linkage, ModelSpec,
    StarkTerm, Topology,
};
use crate::propagate::IntegratorOptions;
use crate::pulse::{
    make_composite, make_ddp_pair, make_fractional_pair, make_pap_train, make_stirap_pair, CompositeSequence, Envelope,
    GlobalEnvelopes, Link, PairKind, PulseSet, PulseShape,
};
use crate::TOOLKIT_VERSION;

/// Schema version accepted by this build; equals the toolkit major version.
pub fn schema_version() -> u32 {
    let major: u32 = TOOLKIT_VERSION.split('.').next().and_then(|s| s.parse().ok()).unwrap_or(0);
    major.max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub system: SystemConfig,
    pub pulses: PulsesConfig,
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub topology: Topology,
    /// Level count for chains and custom systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Single-photon detuning `Δ` of level 2.
    #[serde(default)]
    pub delta: f64,
    /// Two-photon detuning `δ` of level 3.
    #[serde(default)]
    pub two_photon: f64,
    /// Per-field detunings; when both are given they replace `delta` and
    /// `two_photon` through the linkage rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linkage: Option<Linkage>,
    /// Full diagonal for chains and custom systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
    /// Loss rate of level 2 for three-state systems.
    #[serde(default)]
    pub gamma2: f64,
    /// Per-level loss rates; overrides `gamma2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dephasing: Vec<DephasingEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stark: Vec<StarkEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingEntry {
    pub levels: [usize; 2],
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarkEntry {
    pub level: usize,
    pub link: [usize; 2],
    pub coefficient: f64,
}

/// Envelope families available in the generic pulse specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    #[default]
    Gaussian,
    Sin2,
    Flat,
}

impl ShapeKind {
    pub fn envelope(self) -> Envelope {
        match self {
            ShapeKind::Gaussian => Envelope::Gaussian,
            ShapeKind::Sin2 => Envelope::Sin2,
            ShapeKind::Flat => Envelope::Flat,
        }
    }
}

fn one() -> f64 {
    1.0
}

/// A single pulse in configuration form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    #[serde(default)]
    pub shape: ShapeKind,
    pub peak: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub phase: f64,
}

impl PulseSpec {
    pub fn build(&self) -> Result<PulseShape> {
        PulseShape::new(self.shape.envelope(), self.peak, self.width, self.center, self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitPulse {
    pub link: [usize; 2],
    #[serde(flatten)]
    pub pulse: PulseSpec,
}

/// Pulse timing of the tripod.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripodOrdering {
    /// Stokes, then control, then pump.
    Scp,
    /// Control, then Stokes, then pump.
    Csp,
    /// Coincident Stokes and control, then pump.
    CsP,
}

fn default_middle_pulsed() -> bool {
    false
}

/// Pulse block; `kind` selects the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulsesConfig {
    /// Pump/Stokes pair; `delay > 0` is counterintuitive.
    Pair {
        #[serde(default)]
        shape: ShapeKind,
        peak: f64,
        /// Stokes peak; defaults to `peak`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        peak_s: Option<f64>,
        #[serde(default = "one")]
        width: f64,
        delay: f64,
        #[serde(default)]
        phase_p: f64,
        #[serde(default)]
        phase_s: f64,
    },
    Ddp {
        peak: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        windowed: bool,
    },
    Fractional {
        #[serde(default)]
        shape: ShapeKind,
        peak: f64,
        #[serde(default = "one")]
        width: f64,
        delay: f64,
        theta: f64,
        #[serde(default)]
        alpha: f64,
    },
    /// Train of sine-squared pairs; `phases` defaults to the five-pair
    /// reference set.
    Composite {
        peak: f64,
        #[serde(default = "one")]
        width: f64,
        delay: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phases: Option<Vec<[f64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pair_spacing: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pair_kind: Option<PairKind>,
    },
    PapTrain {
        n_pulses: usize,
        envelopes: GlobalEnvelopes,
        t_start: f64,
        t_end: f64,
        sub_width: f64,
    },
    Tripod {
        ordering: TripodOrdering,
        #[serde(default)]
        shape: ShapeKind,
        peak: f64,
        /// Control peak; defaults to `peak`. Zero reduces the tripod to Λ.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        peak_c: Option<f64>,
        #[serde(default = "one")]
        width: f64,
        delay: f64,
    },
    /// Chain with pulsed end couplings (pump on the first link, Stokes on
    /// the last) and middle couplings that are constant or pulsed at `t = 0`.
    Chain {
        #[serde(default)]
        shape: ShapeKind,
        peak: f64,
        #[serde(default = "one")]
        width: f64,
        delay: f64,
        middle_peak: f64,
        #[serde(default = "default_middle_pulsed")]
        middle_pulsed: bool,
    },
    MChain {
        #[serde(default = "two")]
        j: u32,
        #[serde(default)]
        shape: ShapeKind,
        peak: f64,
        #[serde(default = "one")]
        width: f64,
        delay: f64,
    },
    Explicit {
        pulses: Vec<ExplicitPulse>,
    },
    /// Detuning pulse `Δ(t)` and coupling pulse `Ω(t)` of the torque model.
    TwoState {
        delta: Vec<PulseSpec>,
        omega: Vec<PulseSpec>,
    },
    Waveguide {
        layout: WaveguideLayout,
    },
    Waveplates {
        stack: WaveplateStack,
    },
}

fn two() -> u32 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolName {
    Stirap,
    Fractional,
    Composite,
    BrightStirap,
    Tripod,
    Straddle,
    Chain,
    TwoState,
    Waveguide,
    Polarization,
    Pap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    #[default]
    Tdse,
    Liouville,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub name: ProtocolName,
    /// Target level; defaults to the last level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    #[serde(default = "one_usize")]
    pub initial: usize,
    #[serde(default)]
    pub equation: Equation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Initial Bloch or Stokes vector for torque protocols.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_vector: Option<[f64; 3]>,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    PTarget,
    MaxP2,
    Infidelity,
    Loss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// `[start, end, count]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<(f64, f64, usize)>,
    /// `[log10 start, log10 end, count]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logspace: Option<(f64, f64, usize)>,
}

impl AxisConfig {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let set = [self.values.is_some(), self.linspace.is_some(), self.logspace.is_some()];
        if set.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::Config(format!("axis '{}' needs exactly one of values, linspace, logspace", self.path)));
        }
        let v = if let Some(v) = &self.values {
            v.clone()
        } else if let Some((a, b, n)) = self.linspace {
            crate::numerics::linspace(a, b, n)
        } else {
            let (a, b, n) = self.logspace.unwrap();
            crate::numerics::logspace(a, b, n)
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!("axis '{}' needs finite values", self.path)));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub axes: Vec<AxisConfig>,
    pub observable: Observable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default = "yes")]
    pub timeseries: bool,
    #[serde(default = "yes")]
    pub report: bool,
}

fn default_prefix() -> String {
    "run".into()
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { prefix: default_prefix(), timeseries: true, report: true }
    }
}

fn level(n: usize, dim: usize, what: &str) -> Result<usize> {
    if n == 0 || n > dim {
        return Err(Error::Config(format!("{what}: level {n} outside 1..={dim}")));
    }
    Ok(n - 1)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != schema_version() {
            return Err(Error::Config(format!(
                "schema_version {} does not match toolkit schema {}",
                self.schema_version,
                schema_version()
            )));
        }
        self.integrator.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(scan) = &self.scan {
            if scan.axes.is_empty() {
                return Err(Error::Config("scan needs at least one axis".into()));
            }
            for a in &scan.axes {
                a.resolve()?;
                let probe = self.get_path(&a.path)?;
                if !probe.is_number() && !probe.is_null() {
                    return Err(Error::Config(format!("scan path '{}' is not numeric", a.path)));
                }
            }
            if scan.workers == Some(0) {
                return Err(Error::Config("scan workers must be >= 1".into()));
            }
        }
        let torque = matches!(self.pulses, PulsesConfig::TwoState { .. } | PulsesConfig::Waveplates { .. });
        if !torque {
            self.build_model()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let text = serde_json::to_string(&v).expect("value serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn get_path(&self, path: &str) -> Result<Value> {
        let v = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        let mut cur = &v;
        for key in path.split('.') {
            cur = match cur {
                Value::Object(m) => m.get(key),
                Value::Array(a) => key.parse::<usize>().ok().and_then(|i| a.get(i)),
                _ => None,
            }
            .ok_or_else(|| Error::Config(format!("path '{path}' does not resolve")))?;
        }
        Ok(cur.clone())
    }

    /// Returns a copy with the numeric field at dotted `path` replaced.
    /// Optional fields that are absent may be set through the full path
    /// when their parent object exists.
    pub fn with_value(&self, path: &str, value: f64) -> Result<Self> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        let keys: Vec<&str> = path.split('.').collect();
        let mut cur = &mut v;
        for (i, key) in keys.iter().enumerate() {
            let last = i + 1 == keys.len();
            cur = match cur {
                Value::Object(m) => {
                    if last && !m.contains_key(*key) {
                        m.insert(key.to_string(), Value::Null);
                    }
                    m.get_mut(*key)
                }
                Value::Array(a) => key.parse::<usize>().ok().and_then(move |k| a.get_mut(k)),
                _ => None,
            }
            .ok_or_else(|| Error::Config(format!("path '{path}' does not resolve")))?;
        }
        if !(cur.is_number() || cur.is_null()) {
            return Err(Error::Config(format!("path '{path}' is not numeric")));
        }
        *cur = if path.ends_with("n_pulses") || path.ends_with("levels") || path.ends_with(".j") {
            Value::from(value.round() as u64)
        } else {
            Value::from(value)
        };
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| Error::Config(format!("path '{path}': {e}")))?;
        Ok(cfg)
    }

    pub fn pulse_set(&self) -> Result<PulseSet> {
        Ok(match &self.pulses {
            PulsesConfig::Pair { shape, peak, peak_s, width, delay, phase_p, phase_s } => {
                let ps = make_stirap_pair(*peak, peak_s.unwrap_or(*peak), *width, *delay, shape.envelope())?;
                let mut out = PulseSet::new();
                for (l, shapes) in ps.iter() {
                    let ph = if *l == Link::PUMP { *phase_p } else { *phase_s };
                    for s in shapes {
                        out.add(*l, s.clone().with_phase(ph));
                    }
                }
                out
            }
            PulsesConfig::Ddp { peak, width, windowed } => make_ddp_pair(*peak, *width, *windowed)?,
            PulsesConfig::Fractional { shape, peak, width, delay, theta, alpha } => {
                make_fractional_pair(*peak, *width, *delay, *theta, *alpha, shape.envelope())?
            }
            PulsesConfig::Composite { peak, width, delay, .. } => {
                make_composite(&self.composite_sequence().unwrap(), *peak, *width, *delay)?
            }
            PulsesConfig::PapTrain { n_pulses, envelopes, t_start, t_end, sub_width } => {
                make_pap_train(*n_pulses, envelopes, *t_start, *t_end, *sub_width)?
            }
            PulsesConfig::Tripod { ordering, shape, peak, peak_c, width, delay } => {
                let env = shape.envelope();
                let pc = peak_c.unwrap_or(*peak);
                let (cs, cc, cp) = match ordering {
                    TripodOrdering::Scp => (-delay, 0.0, *delay),
                    TripodOrdering::Csp => (0.0, -delay, *delay),
                    TripodOrdering::CsP => (-0.5 * delay, -0.5 * delay, 0.5 * delay),
                };
                PulseSet::new()
                    .with(Link::PUMP, PulseShape::new(env.clone(), *peak, *width, cp, 0.0)?)
                    .with(Link::STOKES, PulseShape::new(env.clone(), *peak, *width, cs, 0.0)?)
                    .with(Link::CONTROL, PulseShape::new(env, pc, *width, cc, 0.0)?)
            }
            PulsesConfig::Chain { .. } | PulsesConfig::MChain { .. } | PulsesConfig::Waveguide { .. } => {
                self.build_model()?.pulses
            }
            PulsesConfig::Explicit { pulses } => {
                let dim = self.system.levels.unwrap_or(0);
                let mut ps = PulseSet::new();
                for p in pulses {
                    let l = Link(level(p.link[0], dim, "pulse link")?, level(p.link[1], dim, "pulse link")?);
                    ps.add(l, p.pulse.build()?);
                }
                ps
            }
            PulsesConfig::TwoState { .. } | PulsesConfig::Waveplates { .. } => {
                return Err(Error::Unsupported("torque protocols have no level pulse set".into()))
            }
        })
    }

    pub fn composite_sequence(&self) -> Option<CompositeSequence> {
        if let PulsesConfig::Composite { phases, pair_spacing, pair_kind, .. } = &self.pulses {
            let mut seq = match phases {
                None => CompositeSequence::reference_five(),
                Some(p) => CompositeSequence {
                    n_pairs: p.len(),
                    phases: p.iter().map(|a| (a[0], a[1])).collect(),
                    pair_spacing: None,
                    pair_kind: PairKind::ResonantAlternating,
                },
            };
            seq.pair_spacing = *pair_spacing;
            if let Some(k) = pair_kind {
                seq.pair_kind = *k;
            }
            Some(seq)
        } else {
            None
        }
    }

    /// Builds the driven model described by the system and pulse blocks.
    pub fn build_model(&self) -> Result<ModelSpec> {
        let sys = &self.system;
        let mut m = match (&self.pulses, sys.topology) {
            (PulsesConfig::Tripod { .. }, Topology::Tripod) => {
                let ps = self.pulse_set()?;
                let resonant = sys.delta == 0.0 && sys.two_photon == 0.0;
                build_tripod(ps.shapes(Link::PUMP), ps.shapes(Link::STOKES), ps.shapes(Link::CONTROL), resonant)?
            }
            (PulsesConfig::Chain { shape, peak, width, delay, middle_peak, middle_pulsed }, Topology::Chain) => {
                let n = sys.levels.ok_or_else(|| Error::Config("chain needs system.levels".into()))?;
                if n < 3 {
                    return Err(Error::Config("chain needs at least 3 levels".into()));
                }
                let env = shape.envelope();
                let mut c = Vec::with_capacity(n - 1);
                c.push(PulseShape::new(env.clone(), *peak, *width, 0.5 * delay, 0.0)?);
                for _ in 1..n - 2 {
                    c.push(if *middle_pulsed {
                        PulseShape::new(env.clone(), *middle_peak, *width, 0.0, 0.0)?
                    } else {
                        PulseShape::constant(*middle_peak)
                    });
                }
                c.push(PulseShape::new(env, *peak, *width, -0.5 * delay, 0.0)?);
                let det = sys.detunings.clone().unwrap_or_else(|| vec![0.0; n]);
                build_chain(&c, &det)?
            }
            (PulsesConfig::MChain { j, shape, peak, width, delay }, Topology::MChain) => {
                let env = shape.envelope();
                let fp = PulseShape::new(env.clone(), *peak, *width, 0.5 * delay, 0.0)?;
                let fm = PulseShape::new(env, *peak, *width, -0.5 * delay, 0.0)?;
                build_m_chain(*j, *j, &fp, &fm, None)?
            }
            (PulsesConfig::Waveguide { layout }, Topology::Chain) => waveguide_to_chain(layout)?,
            (PulsesConfig::Explicit { .. }, Topology::Custom) => {
                let n = sys.levels.ok_or_else(|| Error::Config("custom system needs system.levels".into()))?;
                let det = sys.detunings.clone().unwrap_or_else(|| vec![0.0; n]);
                if det.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: det.len() });
                }
                ModelSpec::custom(n, det, self.pulse_set()?)?
            }
            (
                PulsesConfig::Pair { .. }
                | PulsesConfig::Ddp { .. }
                | PulsesConfig::Fractional { .. }
                | PulsesConfig::Composite { .. }
                | PulsesConfig::PapTrain { .. },
                Topology::Lambda | Topology::Ladder,
            ) => {
                let ps = self.pulse_set()?;
                match (sys.delta_p, sys.delta_s) {
                    (Some(dp), Some(ds)) => {
                        let linkage = sys.linkage.unwrap_or(if sys.topology == Topology::Ladder {
                            Linkage::Ladder
                        } else {
                            Linkage::Lambda
                        });
                        build_three_state(ps, dp, ds, linkage, sys.gamma2)?
                    }
                    (None, None) => {
                        let mut stark = Vec::new();
                        for s in &sys.stark {
                            stark.push(StarkTerm {
                                level: level(s.level, 3, "stark level")?,
                                link: Link(level(s.link[0], 3, "stark link")?, level(s.link[1], 3, "stark link")?),
                                coefficient: s.coefficient,
                            });
                        }
                        let mut m = build_lambda(ps, sys.delta, sys.two_photon, sys.gamma2, stark)?;
                        m.topology = sys.topology;
                        m
                    }
                    _ => return Err(Error::Config("delta_p and delta_s must be given together".into())),
                }
            }
            (p, t) => {
                return Err(Error::Config(format!(
                    "pulse kind '{}' is incompatible with topology {t:?}",
                    pulses_kind(p)
                )))
            }
        };
        if let Some(l) = &sys.loss_rates {
            m = m.with_loss(l.clone())?;
        }
        if !sys.dephasing.is_empty() {
            let dim = m.dim;
            let mut entries = Vec::new();
            for d in &sys.dephasing {
                entries.push((level(d.levels[0], dim, "dephasing")?, level(d.levels[1], dim, "dephasing")?, d.rate));
            }
            m = m.with_dephasing(dephasing_matrix(dim, &entries)?)?;
        }
        Ok(m)
    }

    /// Final-state oracle parameters of a fractional pair, `(Θ, α)`.
    pub fn fractional_angles(&self) -> Option<(f64, f64)> {
        match &self.pulses {
            PulsesConfig::Fractional { theta, alpha, .. } => Some((*theta, *alpha)),
            PulsesConfig::Pair { .. } => Some((PI / 2.0, 0.0)),
            _ => None,
        }
    }
}

pub fn pulses_kind(p: &PulsesConfig) -> &'static str {
    match p {
        PulsesConfig::Pair { .. } => "pair",
        PulsesConfig::Ddp { .. } => "ddp",
        PulsesConfig::Fractional { .. } => "fractional",
        PulsesConfig::Composite { .. } => "composite",
        PulsesConfig::PapTrain { .. } => "pap_train",
        PulsesConfig::Tripod { .. } => "tripod",
        PulsesConfig::Chain { .. } => "chain",
        PulsesConfig::MChain { .. } => "m_chain",
        PulsesConfig::Explicit { .. } => "explicit",
        PulsesConfig::TwoState { .. } => "two_state",
        PulsesConfig::Waveguide { .. } => "waveguide",
        PulsesConfig::Waveplates { .. } => "waveplates",
    }
}
