//! Pulse envelopes, pulse sets and the standard pulse-sequence generators.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;
use crate::state::C64;

/// Which half of a sine/cosine pulse pair a DDP envelope represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DdpRole {
    /// `sin(π f / 2)`, the pump.
    Pump,
    /// `cos(π f / 2)`, the Stokes.
    Stokes,
}

/// Normalized temporal profile of a pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// `exp(−((t−c)/w)²)`.
    Gaussian,
    /// `sin²(π(t−c+w)/(2w))` on `[c−w, c+w]`, zero elsewhere.
    Sin2,
    /// 1 on `[c−w/2, c+w/2]`, zero elsewhere.
    Flat,
    /// `sin` or `cos` of `π f/2` with the logistic `f = 1/(1+e^{−4(t−c)/w})`.
    DdpF { role: DdpRole },
    /// DDP shape multiplied by the window `g = exp(−((t−c)/2w)⁶)`.
    DdpGWindowed { role: DdpRole },
    /// Tabulated complex samples, linearly interpolated; zero outside the table.
    /// Times are absolute, `center` and `width` are ignored.
    ExternalSamples { times: Vec<f64>, re: Vec<f64>, im: Vec<f64> },
}

/// One pulse: `peak · envelope(t) · e^{iφ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub envelope: Envelope,
    pub peak: f64,
    pub width: f64,
    pub center: f64,
    #[serde(default)]
    pub phase: f64,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-4.0 * x).exp())
}

impl PulseShape {
    pub fn new(envelope: Envelope, peak: f64, width: f64, center: f64, phase: f64) -> Result<Self> {
        let s = Self { envelope, peak, width, center, phase };
        s.validate()?;
        Ok(s)
    }

    pub fn gaussian(peak: f64, width: f64, center: f64) -> Result<Self> {
        Self::new(Envelope::Gaussian, peak, width, center, 0.0)
    }

    pub fn sin2(peak: f64, width: f64, center: f64) -> Result<Self> {
        Self::new(Envelope::Sin2, peak, width, center, 0.0)
    }

    pub fn flat(peak: f64, width: f64, center: f64) -> Result<Self> {
        Self::new(Envelope::Flat, peak, width, center, 0.0)
    }

    /// Constant coupling over every practical time range.
    pub fn constant(peak: f64) -> Self {
        Self { envelope: Envelope::Flat, peak, width: 1e12, center: 0.0, phase: 0.0 }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak >= 0.0) || !self.peak.is_finite() {
            return Err(Error::InvalidArgument(format!("pulse peak must be >= 0, got {}", self.peak)));
        }
        if !(self.width > 0.0) {
            return Err(Error::InvalidArgument(format!("pulse width must be > 0, got {}", self.width)));
        }
        if let Envelope::ExternalSamples { times, re, im } = &self.envelope {
            if times.len() < 2 || times.len() != re.len() || times.len() != im.len() {
                return Err(Error::InvalidArgument("external samples need >= 2 rows of equal length".into()));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidArgument("external sample times must increase".into()));
            }
        }
        Ok(())
    }

    /// Real envelope value and its time derivative (complex for tabulated data).
    fn envelope_with_derivative(&self, t: f64) -> (C64, C64) {
        let w = self.width;
        let x = (t - self.center) / w;
        let r = |a: f64, b: f64| (C64::new(a, 0.0), C64::new(b, 0.0));
        match &self.envelope {
            Envelope::Gaussian => {
                let e = (-x * x).exp();
                r(e, -2.0 * x / w * e)
            }
            Envelope::Sin2 => {
                if x <= -1.0 || x >= 1.0 {
                    r(0.0, 0.0)
                } else {
                    let a = FRAC_PI_2 * (x + 1.0);
                    let s = a.sin();
                    r(s * s, (2.0 * a).sin() * FRAC_PI_2 / w)
                }
            }
            Envelope::Flat => {
                if x.abs() <= 0.5 {
                    r(1.0, 0.0)
                } else {
                    r(0.0, 0.0)
                }
            }
            Envelope::DdpF { role } => {
                let (e, de) = ddp_core(*role, x, w);
                r(e, de)
            }
            Envelope::DdpGWindowed { role } => {
                let (e, de) = ddp_core(*role, x, w);
                let y = 0.5 * x;
                let g = (-y.powi(6)).exp();
                let dg = -6.0 * y.powi(5) * 0.5 / w * g;
                r(g * e, dg * e + g * de)
            }
            Envelope::ExternalSamples { times, re, im } => {
                let n = times.len();
                if t < times[0] || t > times[n - 1] {
                    return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                }
                let k = match times.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
                    Ok(i) => i.min(n - 2),
                    Err(i) => i - 1,
                };
                let h = times[k + 1] - times[k];
                let s = (t - times[k]) / h;
                let a = C64::new(re[k], im[k]);
                let b = C64::new(re[k + 1], im[k + 1]);
                (a + (b - a) * s, (b - a) / h)
            }
        }
    }

    /// Complex Rabi amplitude at time `t`.
    pub fn eval(&self, t: f64) -> C64 {
        self.eval_with_derivative(t).0
    }

    /// Complex Rabi amplitude and its time derivative at `t`.
    pub fn eval_with_derivative(&self, t: f64) -> (C64, C64) {
        let (e, de) = self.envelope_with_derivative(t);
        let f = C64::from_polar(self.peak, self.phase);
        (e * f, de * f)
    }

    /// Interval outside of which the pulse is treated as zero.
    pub fn support(&self) -> (f64, f64) {
        let (c, w) = (self.center, self.width);
        match &self.envelope {
            Envelope::Gaussian | Envelope::DdpF { .. } | Envelope::DdpGWindowed { .. } => (c - 4.0 * w, c + 4.0 * w),
            Envelope::Sin2 => (c - w, c + w),
            Envelope::Flat => (c - 0.5 * w, c + 0.5 * w),
            Envelope::ExternalSamples { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    /// Times where the envelope or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.envelope {
            Envelope::Sin2 | Envelope::Flat => {
                let (a, b) = self.support();
                vec![a, b]
            }
            Envelope::ExternalSamples { times, .. } => times.clone(),
            _ => Vec::new(),
        }
    }

    /// Time scale that integrators must resolve.
    pub fn time_scale(&self) -> f64 {
        match &self.envelope {
            Envelope::ExternalSamples { times, .. } => {
                times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).max(1e-9) * 8.0
            }
            Envelope::Flat => self.width.min(1e3),
            _ => self.width,
        }
    }
}

fn ddp_core(role: DdpRole, x: f64, w: f64) -> (f64, f64) {
    let f = logistic(x);
    let df = 4.0 * f * (1.0 - f) / w;
    let a = FRAC_PI_2 * f;
    match role {
        DdpRole::Pump => (a.sin(), a.cos() * FRAC_PI_2 * df),
        DdpRole::Stokes => (a.cos(), -a.sin() * FRAC_PI_2 * df),
    }
}

/// Ordered level pair `(from, to)`, 0-based.
///
/// A coupling `Ω` on link `(a, b)` enters the Hamiltonian as `H[b][a] = Ω/2`
/// and `H[a][b] = conj(Ω)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link(pub usize, pub usize);

impl Link {
    pub fn new(from: usize, to: usize) -> Result<Self> {
        if from == to {
            return Err(Error::InvalidArgument(format!("link connects level {from} to itself")));
        }
        Ok(Self(from, to))
    }

    pub fn max_level(&self) -> usize {
        self.0.max(self.1)
    }

    /// Pump link of the Λ and ladder systems, `ψ₁ → ψ₂`.
    pub const PUMP: Link = Link(0, 1);
    /// Stokes link of the Λ system, `ψ₃ → ψ₂`.
    pub const STOKES: Link = Link(2, 1);
    /// Control link of the tripod, `ψ₄ → ψ₂`.
    pub const CONTROL: Link = Link(3, 1);
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.0 + 1, self.1 + 1)
    }
}

/// Couplings keyed by link; pulses sharing a link are summed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSet {
    pulses: BTreeMap<Link, Vec<PulseShape>>,
}

impl PulseSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, link: Link, shape: PulseShape) -> &mut Self {
        self.pulses.entry(link).or_default().push(shape);
        self
    }

    pub fn with(mut self, link: Link, shape: PulseShape) -> Self {
        self.add(link, shape);
        self
    }

    pub fn has(&self, link: Link) -> bool {
        self.pulses.contains_key(&link)
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.pulses.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Link, &Vec<PulseShape>)> {
        self.pulses.iter()
    }

    pub fn shapes(&self, link: Link) -> &[PulseShape] {
        self.pulses.get(&link).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn max_level(&self) -> Option<usize> {
        self.pulses.keys().map(Link::max_level).max()
    }

    /// Summed coupling on `link` at `t`; zero for absent links.
    pub fn eval(&self, link: Link, t: f64) -> C64 {
        self.shapes(link).iter().map(|p| p.eval(t)).sum()
    }

    pub fn eval_with_derivative(&self, link: Link, t: f64) -> (C64, C64) {
        self.shapes(link).iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |acc, p| {
            let (v, d) = p.eval_with_derivative(t);
            (acc.0 + v, acc.1 + d)
        })
    }

    /// Union of the supports of all pulses, skipping effectively constant ones.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.pulses.values().flatten() {
            let (a, b) = p.support();
            if (b - a) > 1e9 {
                continue;
            }
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo < hi).then_some((lo, hi))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.pulses.values().flatten().flat_map(|p| p.breakpoints()).collect()
    }

    /// Shortest time scale among the pulses.
    pub fn min_time_scale(&self) -> Option<f64> {
        self.pulses.values().flatten().map(|p| p.time_scale()).reduce(f64::min)
    }

    /// Adds `chi` to the phase of every pulse.
    pub fn with_global_phase(&self, chi: f64) -> Self {
        let mut out = self.clone();
        for p in out.pulses.values_mut().flatten() {
            p.phase += chi;
        }
        out
    }

    /// Multiplies every peak by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for p in out.pulses.values_mut().flatten() {
            p.peak *= s;
        }
        out
    }
}

/// Gaussian, sine-squared or flat pump/Stokes pair with delay `τ`.
///
/// `τ > 0` is the counterintuitive order: the Stokes pulse is centered at
/// `−τ/2`, the pump at `+τ/2`.
pub fn make_stirap_pair(peak_p: f64, peak_s: f64, width: f64, delay: f64, envelope: Envelope) -> Result<PulseSet> {
    let p = PulseShape::new(envelope.clone(), peak_p, width, 0.5 * delay, 0.0)?;
    let s = PulseShape::new(envelope, peak_s, width, -0.5 * delay, 0.0)?;
    Ok(PulseSet::new().with(Link::PUMP, p).with(Link::STOKES, s))
}

/// Pulse pair with the DDP-optimized shapes `Ω_P = g·peak·sin(πf/2)`,
/// `Ω_S = g·peak·cos(πf/2)`.
pub fn make_ddp_pair(peak: f64, width: f64, windowed: bool) -> Result<PulseSet> {
    let env = |role| if windowed { Envelope::DdpGWindowed { role } } else { Envelope::DdpF { role } };
    let p = PulseShape::new(env(DdpRole::Pump), peak, width, 0.0, 0.0)?;
    let s = PulseShape::new(env(DdpRole::Stokes), peak, width, 0.0, 0.0)?;
    Ok(PulseSet::new().with(Link::PUMP, p).with(Link::STOKES, s))
}

/// Pulse pair whose ratio freezes at `Ω_P/Ω_S → e^{iα} tanΘ` at late times.
///
/// `Ω_P = peak·sinΘ·e^{iα}·E(t−τ/2)` and `Ω_S = peak·[E(t+τ/2) + cosΘ·E(t−τ/2)]`.
pub fn make_fractional_pair(
    peak: f64,
    width: f64,
    delay: f64,
    theta: f64,
    alpha: f64,
    envelope: Envelope,
) -> Result<PulseSet> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::InvalidArgument(format!("fractional angle must lie in [0, π/2], got {theta}")));
    }
    let late = PulseShape::new(envelope.clone(), peak * theta.sin(), width, 0.5 * delay, alpha)?;
    let early = PulseShape::new(envelope.clone(), peak, width, -0.5 * delay, 0.0)?;
    let mut ps = PulseSet::new();
    if theta.sin() > 0.0 {
        ps.add(Link::PUMP, late);
    } else {
        ps.add(Link::PUMP, PulseShape::new(envelope.clone(), 0.0, width, 0.5 * delay, 0.0)?);
    }
    ps.add(Link::STOKES, early);
    let c = theta.cos();
    if c > 1e-12 {
        ps.add(Link::STOKES, PulseShape::new(envelope, peak * c, width, 0.5 * delay, 0.0)?);
    }
    Ok(ps)
}

/// Ordering rule for the pairs of a composite sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// The S/P order reverses from pair to pair.
    ResonantAlternating,
    /// Every pair has S before P.
    DetunedFixedOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSequence {
    pub n_pairs: usize,
    /// `(φ_P, φ_S)` per pair.
    pub phases: Vec<(f64, f64)>,
    /// Center-to-center spacing of consecutive pairs; `None` places the
    /// pairs back to back.
    pub pair_spacing: Option<f64>,
    pub pair_kind: PairKind,
}

impl CompositeSequence {
    /// Five-pair reference phase set.
    pub fn reference_five() -> Self {
        let f = PI / 5.0;
        Self {
            n_pairs: 5,
            phases: vec![(0.0, 4.0 * f), (PI, 8.0 * f), (3.0 * f, 3.0 * f), (8.0 * f, PI), (4.0 * f, 0.0)],
            pair_spacing: None,
            pair_kind: PairKind::ResonantAlternating,
        }
    }

    pub fn single() -> Self {
        Self { n_pairs: 1, phases: vec![(0.0, 0.0)], pair_spacing: None, pair_kind: PairKind::ResonantAlternating }
    }
}

/// Train of sine-squared pump/Stokes pairs with intra-pair delay `τ`.
///
/// Each pulse has support `2·width`; the sequence is centered on `t = 0`.
/// Phases are read in the ladder ordering, where both couplings sit on the
/// same side of the diagonal, so the Stokes pulse carries `−φ_S` on the Λ
/// link.
pub fn make_composite(seq: &CompositeSequence, peak: f64, width: f64, delay: f64) -> Result<PulseSet> {
    if seq.n_pairs == 0 {
        return Err(Error::InvalidArgument("composite sequence needs at least one pair".into()));
    }
    if seq.phases.len() != seq.n_pairs {
        return Err(Error::DimensionMismatch { expected: seq.n_pairs, found: seq.phases.len() });
    }
    let spacing = seq.pair_spacing.unwrap_or(2.0 * width + delay.abs());
    if spacing <= 0.0 {
        return Err(Error::InvalidArgument("composite pair spacing must be positive".into()));
    }
    let mut ps = PulseSet::new();
    let offset = 0.5 * spacing * (seq.n_pairs - 1) as f64;
    for (k, &(phi_p, phi_s)) in seq.phases.iter().enumerate() {
        let c = spacing * k as f64 - offset;
        let reversed = seq.pair_kind == PairKind::ResonantAlternating && k % 2 == 1;
        let d = if reversed { -delay } else { delay };
        ps.add(Link::PUMP, PulseShape::new(Envelope::Sin2, peak, width, c + 0.5 * d, phi_p)?);
        ps.add(Link::STOKES, PulseShape::new(Envelope::Sin2, peak, width, c - 0.5 * d, -phi_s)?);
    }
    Ok(ps)
}

/// Slowly varying envelopes sampled by a pulse train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GlobalEnvelopes {
    /// Arbitrary pump and Stokes envelopes (peaks included).
    Pulses { pump: PulseShape, stokes: PulseShape },
    /// Mixing angle rising linearly from 0 to π/2 across the train at a
    /// fixed rms amplitude.
    LinearMixing { rms_peak: f64 },
}

/// Pulse-train (piecewise adiabatic) version of STIRAP.
///
/// Pulse `k` is a coincident sine-squared P/S pair centered at
/// `t_k = t_start + (k+½)(t_end−t_start)/n` with amplitudes sampled from the
/// global envelopes at `t_k`.
pub fn make_pap_train(
    n_pulses: usize,
    envelopes: &GlobalEnvelopes,
    t_start: f64,
    t_end: f64,
    sub_width: f64,
) -> Result<PulseSet> {
    if n_pulses < 2 {
        return Err(Error::InvalidArgument("pulse train needs at least 2 pulses".into()));
    }
    if !(t_start < t_end) {
        return Err(Error::InvalidArgument("pulse train needs t_start < t_end".into()));
    }
    let period = (t_end - t_start) / n_pulses as f64;
    let mut ps = PulseSet::new();
    for k in 0..n_pulses {
        let tk = t_start + (k as f64 + 0.5) * period;
        let (ap, as_) = match envelopes {
            GlobalEnvelopes::Pulses { pump, stokes } => (pump.eval(tk).norm(), stokes.eval(tk).norm()),
            GlobalEnvelopes::LinearMixing { rms_peak } => {
                let th = FRAC_PI_2 * (tk - t_start) / (t_end - t_start);
                (rms_peak * th.sin(), rms_peak * th.cos())
            }
        };
        ps.add(Link::PUMP, PulseShape::new(Envelope::Sin2, ap, sub_width, tk, 0.0)?);
        ps.add(Link::STOKES, PulseShape::new(Envelope::Sin2, as_, sub_width, tk, 0.0)?);
    }
    Ok(ps)
}

/// rms pulse area `∫√(|Ω_P|²+|Ω_S|²) dt` over the support of the set.
pub fn rms_area(ps: &PulseSet, link_p: Link, link_s: Link) -> Result<f64> {
    for l in [link_p, link_s] {
        if !ps.has(l) {
            return Err(Error::MissingLink(l.to_string()));
        }
    }
    let (a, b) = ps
        .support()
        .ok_or_else(|| Error::InvalidArgument("pulse set has no finite support".into()))?;
    let f = |t: f64| (ps.eval(link_p, t).norm_sqr() + ps.eval(link_s, t).norm_sqr()).sqrt();
    Ok(numerics::integrate_with_breaks(&f, a, b, &ps.breakpoints(), 1e-12))
}

/// Area `∫|Ω| dt` of one link over the support of the set.
pub fn link_area(ps: &PulseSet, link: Link) -> Result<f64> {
    if !ps.has(link) {
        return Err(Error::MissingLink(link.to_string()));
    }
    let (a, b) = ps
        .support()
        .ok_or_else(|| Error::InvalidArgument("pulse set has no finite support".into()))?;
    let f = |t: f64| ps.eval(link, t).norm();
    Ok(numerics::integrate_with_breaks(&f, a, b, &ps.breakpoints(), 1e-12))
}

/// Mixing angles of the Λ system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingAngles {
    /// `θ = atan2(|Ω_P|, |Ω_S|)`.
    pub theta: f64,
    /// `φ = ½·atan2(Ω_rms, Δ)`.
    pub phi: f64,
}

/// Mixing angles `(θ, φ)` at time `t`; fails when both couplings vanish.
pub fn mixing_angles(ps: &PulseSet, delta: f64, t: f64) -> Result<MixingAngles> {
    for l in [Link::PUMP, Link::STOKES] {
        if !ps.has(l) {
            return Err(Error::MissingLink(l.to_string()));
        }
    }
    let p = ps.eval(Link::PUMP, t).norm();
    let s = ps.eval(Link::STOKES, t).norm();
    if p == 0.0 && s == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok(MixingAngles { theta: p.atan2(s), phi: 0.5 * (p.hypot(s)).atan2(delta) })
}

/// Mixing angles over a time grid; where undefined, the last defined value is
/// carried and the sample is flagged.
pub fn mixing_angle_profile(ps: &PulseSet, delta: f64, times: &[f64]) -> Result<Vec<(MixingAngles, bool)>> {
    let mut last: Option<MixingAngles> = None;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        match mixing_angles(ps, delta, t) {
            Ok(m) => {
                last = Some(m);
                out.push((m, true));
            }
            Err(Error::UndefinedAngle) => {
                out.push((last.unwrap_or(MixingAngles { theta: 0.0, phi: 0.0 }), false));
            }
            Err(e) => return Err(e),
        }
    }
    // Leading undefined samples take the first defined value.
    if let Some(first) = out.iter().find(|(_, ok)| *ok).map(|(m, _)| *m) {
        for entry in out.iter_mut() {
            if entry.1 {
                break;
            }
            entry.0 = first;
        }
    }
    Ok(out)
}
