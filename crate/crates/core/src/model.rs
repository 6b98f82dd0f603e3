//! Driven-system descriptions and the Hamiltonians and dissipators they yield.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{Link, PulseSet, PulseShape};
use crate::state::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Lambda,
    Ladder,
    Chain,
    Tripod,
    MChain,
    TwoState,
    Custom,
}

/// Dynamic Stark shift `coefficient · |Ω_link(t)|²` added to the diagonal of
/// `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkTerm {
    pub level: usize,
    pub link: Link,
    pub coefficient: f64,
}

/// Hamiltonian matrix at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianAt {
    pub matrix: DMatrix<C64>,
    pub time: f64,
}

impl HamiltonianAt {
    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).norm() <= tol * self.matrix.norm().max(1.0)
    }
}

/// Everything needed to evaluate `H(t)` and the dephasing dissipator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    pub topology: Topology,
    /// Diagonal energies (detunings) per level.
    pub detunings: Vec<f64>,
    /// Loss rate `Γ_n` per level.
    pub loss_rates: Vec<f64>,
    pub stark: Vec<StarkTerm>,
    pub pulses: PulseSet,
    /// Symmetric pure-dephasing rates `γ_mn` with zero diagonal.
    pub dephasing: DMatrix<f64>,
    pub pump: Option<Link>,
    pub stokes: Option<Link>,
    pub control: Option<Link>,
}

impl ModelSpec {
    /// Generic model with the given diagonal; validates every input.
    pub fn custom(dim: usize, detunings: Vec<f64>, pulses: PulseSet) -> Result<Self> {
        let m = Self {
            dim,
            topology: Topology::Custom,
            detunings,
            loss_rates: vec![0.0; dim],
            stark: Vec::new(),
            pulses,
            dephasing: DMatrix::zeros(dim, dim),
            pump: None,
            stokes: None,
            control: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidArgument("model needs at least 2 levels".into()));
        }
        if self.detunings.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.detunings.len() });
        }
        if self.loss_rates.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.loss_rates.len() });
        }
        if let Some(&g) = self.loss_rates.iter().find(|&&g| g < 0.0 || !g.is_finite()) {
            return Err(Error::NegativeRate(g));
        }
        if let Some(m) = self.pulses.max_level() {
            if m >= self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: m + 1 });
            }
        }
        for s in &self.stark {
            if s.level >= self.dim || s.link.max_level() >= self.dim {
                return Err(Error::InvalidArgument(format!("stark term references missing level: {s:?}")));
            }
        }
        check_dephasing(&self.dephasing, self.dim)?;
        Ok(())
    }

    pub fn with_loss(mut self, loss_rates: Vec<f64>) -> Result<Self> {
        self.loss_rates = loss_rates;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dephasing(mut self, gamma: DMatrix<f64>) -> Result<Self> {
        self.dephasing = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_stark(mut self, stark: Vec<StarkTerm>) -> Result<Self> {
        self.stark = stark;
        self.validate()?;
        Ok(self)
    }

    pub fn with_pulses(mut self, pulses: PulseSet) -> Result<Self> {
        self.pulses = pulses;
        self.validate()?;
        Ok(self)
    }

    pub fn is_lossless(&self) -> bool {
        self.loss_rates.iter().all(|&g| g == 0.0)
    }

    pub fn has_dephasing(&self) -> bool {
        self.dephasing.iter().any(|&g| g != 0.0)
    }

    /// Writes `H(t)` into `h` (which must be `dim × dim`).
    pub fn hamiltonian_into(&self, t: f64, h: &mut DMatrix<C64>) {
        h.fill(C64::new(0.0, 0.0));
        for n in 0..self.dim {
            h[(n, n)] = C64::new(self.detunings[n], -0.5 * self.loss_rates[n]);
        }
        for s in &self.stark {
            h[(s.level, s.level)] += s.coefficient * self.pulses.eval(s.link, t).norm_sqr();
        }
        for (link, _) in self.pulses.iter() {
            let half = 0.5 * self.pulses.eval(*link, t);
            h[(link.1, link.0)] += half;
            h[(link.0, link.1)] += half.conj();
        }
    }

    pub fn hamiltonian(&self, t: f64) -> HamiltonianAt {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.hamiltonian_into(t, &mut m);
        HamiltonianAt { matrix: m, time: t }
    }

    /// Time derivative of `H(t)` (analytic pulse derivatives).
    pub fn hamiltonian_derivative(&self, t: f64) -> DMatrix<C64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for s in &self.stark {
            let (v, d) = self.pulses.eval_with_derivative(s.link, t);
            h[(s.level, s.level)] += s.coefficient * 2.0 * (v.conj() * d).re;
        }
        for (link, _) in self.pulses.iter() {
            let (_, d) = self.pulses.eval_with_derivative(*link, t);
            h[(link.1, link.0)] += 0.5 * d;
            h[(link.0, link.1)] += 0.5 * d.conj();
        }
        h
    }

    /// Time window covered by the pulses.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.pulses.support()
    }

    /// Shortest pulse time scale; integrators cap their step at a fraction of it.
    pub fn time_scale(&self) -> f64 {
        self.pulses.min_time_scale().unwrap_or(1.0)
    }

    /// Dissipator for the model's dephasing matrix.
    pub fn dissipator(&self) -> Result<Dissipator> {
        build_dissipator(self.dephasing.clone())
    }
}

fn check_dephasing(g: &DMatrix<f64>, dim: usize) -> Result<()> {
    if g.nrows() != dim || g.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: g.nrows() });
    }
    for m in 0..dim {
        if g[(m, m)] != 0.0 {
            return Err(Error::InvalidArgument("dephasing matrix must have a zero diagonal".into()));
        }
        for n in 0..dim {
            let v = g[(m, n)];
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeRate(v));
            }
            if v != g[(n, m)] {
                return Err(Error::InvalidArgument("dephasing matrix must be symmetric".into()));
            }
        }
    }
    Ok(())
}

/// Λ system: pump on `(1,2)`, Stokes on `(3,2)`, `H₂₂ = Δ − iΓ₂/2`,
/// `H₃₃ = δ`, plus optional Stark terms.
pub fn build_lambda(pulses: PulseSet, delta: f64, two_photon: f64, gamma2: f64, stark: Vec<StarkTerm>) -> Result<ModelSpec> {
    for l in [Link::PUMP, Link::STOKES] {
        if !pulses.has(l) {
            return Err(Error::MissingLink(l.to_string()));
        }
    }
    let m = ModelSpec {
        dim: 3,
        topology: Topology::Lambda,
        detunings: vec![0.0, delta, two_photon],
        loss_rates: vec![0.0, gamma2, 0.0],
        stark,
        pulses,
        dephasing: DMatrix::zeros(3, 3),
        pump: Some(Link::PUMP),
        stokes: Some(Link::STOKES),
        control: None,
    };
    m.validate()?;
    Ok(m)
}

/// Energy-level arrangement of a three-state system driven by two fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Lambda,
    Ladder,
    Vee,
}

/// Two-photon detuning from the single-photon detunings of both fields.
pub fn two_photon_detuning(delta_p: f64, delta_s: f64, linkage: Linkage) -> f64 {
    match linkage {
        Linkage::Lambda | Linkage::Vee => delta_p - delta_s,
        Linkage::Ladder => delta_p + delta_s,
    }
}

/// Three-state model from per-field detunings; the linkage only decides the
/// sign folding of the two-photon detuning.
pub fn build_three_state(pulses: PulseSet, delta_p: f64, delta_s: f64, linkage: Linkage, gamma2: f64) -> Result<ModelSpec> {
    let mut m = build_lambda(pulses, delta_p, two_photon_detuning(delta_p, delta_s, linkage), gamma2, Vec::new())?;
    if linkage == Linkage::Ladder {
        m.topology = Topology::Ladder;
    }
    Ok(m)
}

/// Tridiagonal chain: coupling `j` drives link `(j, j+1)`.
pub fn build_chain(couplings: &[PulseShape], detunings: &[f64]) -> Result<ModelSpec> {
    let dim = detunings.len();
    if couplings.len() + 1 != dim {
        return Err(Error::DimensionMismatch { expected: dim.saturating_sub(1), found: couplings.len() });
    }
    let mut ps = PulseSet::new();
    for (j, c) in couplings.iter().enumerate() {
        ps.add(Link(j, j + 1), c.clone());
    }
    let m = ModelSpec {
        dim,
        topology: Topology::Chain,
        detunings: detunings.to_vec(),
        loss_rates: vec![0.0; dim],
        stark: Vec::new(),
        pulses: ps,
        dephasing: DMatrix::zeros(dim, dim),
        pump: Some(Link(0, 1)),
        stokes: Some(Link(dim - 2, dim - 1)),
        control: None,
    };
    m.validate()?;
    Ok(m)
}

/// Clebsch–Gordan weights for the chain between two degenerate levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgTable {
    /// Weight of each chain link in order, `2·J_g` entries.
    pub weights: Vec<f64>,
}

/// Letter-M chain between sublevels of `J_g` and `J_e`.
///
/// Odd links (from `M_g = −J`) are driven by `f_plus` (σ⁺), even links by
/// `f_minus` (σ⁻). `J_g = J_e = 2` has a built-in weight table; other values
/// need `cg`.
pub fn build_m_chain(j_g: u32, j_e: u32, f_plus: &PulseShape, f_minus: &PulseShape, cg: Option<&CgTable>) -> Result<ModelSpec> {
    let weights = match (j_g, j_e, cg) {
        (_, _, Some(t)) => t.weights.clone(),
        (2, 2, None) => {
            let (a, b) = (1.0 / 3f64.sqrt(), 1.0 / 2f64.sqrt());
            vec![a, b, b, a]
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "no built-in Clebsch-Gordan table for J_g = {j_g}, J_e = {j_e}"
            )))
        }
    };
    if weights.is_empty() {
        return Err(Error::InvalidArgument("empty Clebsch-Gordan table".into()));
    }
    let couplings: Vec<PulseShape> = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let mut p = if k % 2 == 0 { f_plus.clone() } else { f_minus.clone() };
            p.peak *= w;
            p
        })
        .collect();
    let mut m = build_chain(&couplings, &vec![0.0; weights.len() + 1])?;
    m.topology = Topology::MChain;
    Ok(m)
}

/// Resonant tripod: pump `(1,2)`, Stokes `(3,2)`, control `(4,2)`.
pub fn build_tripod(p: &[PulseShape], s: &[PulseShape], c: &[PulseShape], resonant: bool) -> Result<ModelSpec> {
    if !resonant {
        return Err(Error::Unsupported("only the single-photon resonant tripod is modeled".into()));
    }
    let mut ps = PulseSet::new();
    for (link, shapes) in [(Link::PUMP, p), (Link::STOKES, s), (Link::CONTROL, c)] {
        if shapes.is_empty() {
            return Err(Error::MissingLink(link.to_string()));
        }
        for sh in shapes {
            ps.add(link, sh.clone());
        }
    }
    let m = ModelSpec {
        dim: 4,
        topology: Topology::Tripod,
        detunings: vec![0.0; 4],
        loss_rates: vec![0.0; 4],
        stark: Vec::new(),
        pulses: ps,
        dephasing: DMatrix::zeros(4, 4),
        pump: Some(Link::PUMP),
        stokes: Some(Link::STOKES),
        control: Some(Link::CONTROL),
    };
    m.validate()?;
    Ok(m)
}

/// Pure-dephasing dissipator `D(ρ)_mn = γ_mn ρ_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    gamma: DMatrix<f64>,
}

impl Dissipator {
    pub fn rates(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        rho.zip_map(&self.gamma, |r, g| r * g)
    }
}

pub fn build_dissipator(gamma: DMatrix<f64>) -> Result<Dissipator> {
    check_dephasing(&gamma, gamma.nrows())?;
    Ok(Dissipator { gamma })
}

/// Symmetric dephasing matrix with the listed `(m, n, γ)` entries (0-based).
pub fn dephasing_matrix(dim: usize, entries: &[(usize, usize, f64)]) -> Result<DMatrix<f64>> {
    let mut g = DMatrix::zeros(dim, dim);
    for &(m, n, r) in entries {
        if m >= dim || n >= dim || m == n {
            return Err(Error::InvalidArgument(format!("bad dephasing pair ({}, {})", m + 1, n + 1)));
        }
        if r < 0.0 {
            return Err(Error::NegativeRate(r));
        }
        g[(m, n)] = r;
        g[(n, m)] = r;
    }
    Ok(g)
}

/// Effective coupling and detuning after adiabatic elimination of level 2:
/// `Ω_eff = −Ω_PΩ_S/(2Δ)`, `Δ_eff = (Ω_P² − Ω_S²)/(2Δ)`.
pub fn effective_two_state(omega_p: f64, omega_s: f64, delta: f64) -> Result<(f64, f64)> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    Ok((-omega_p * omega_s / (2.0 * delta), (omega_p * omega_p - omega_s * omega_s) / (2.0 * delta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamGeometry {
    Copropagating,
    Counterpropagating,
}

/// Velocity-dependent two-photon detuning `Δ_P − Δ_S + (k_P ∓ k_S)·v`.
/// Wave numbers are magnitudes; the geometry fixes the Stokes direction.
pub fn doppler_detuning(delta_p: f64, delta_s: f64, k_p: f64, k_s: f64, v: f64, geometry: BeamGeometry) -> f64 {
    let (kp, ks) = (k_p.abs(), k_s.abs());
    let dk = match geometry {
        BeamGeometry::Copropagating => kp - ks,
        BeamGeometry::Counterpropagating => kp + ks,
    };
    delta_p - delta_s + dk * v
}

/// Rabi frequency `Ω = −d·E` (ħ = 1).
pub fn rabi_from_field(dipole_moment: f64, field_amplitude: f64) -> f64 {
    -dipole_moment * field_amplitude
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{make_stirap_pair, Envelope};

    fn zero_pair() -> PulseSet {
        make_stirap_pair(0.0, 0.0, 1.0, 1.0, Envelope::Gaussian).unwrap()
    }

    #[test]
    fn undriven_lambda_is_diagonal() {
        let m = build_lambda(zero_pair(), 2.5, -0.7, 0.0, vec![]).unwrap();
        let h = m.hamiltonian(0.3).matrix;
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(2.5, 0.0),
            C64::new(-0.7, 0.0),
        ]));
        assert_eq!(h, expect);
    }

    #[test]
    fn lambda_loss_entry() {
        let m = build_lambda(zero_pair(), 0.0, 0.0, 3.0, vec![]).unwrap();
        let h = m.hamiltonian(0.0);
        assert_eq!(h.matrix[(1, 1)], C64::new(0.0, -1.5));
        let defect = (&h.matrix - h.matrix.adjoint()) * C64::new(0.5, 0.0);
        assert_eq!(defect[(1, 1)], C64::new(0.0, -1.5));
        assert!(!h.is_hermitian(1e-12));
    }

    #[test]
    fn lambda_requires_links() {
        let ps = PulseSet::new().with(Link::PUMP, PulseShape::gaussian(1.0, 1.0, 0.0).unwrap());
        assert!(matches!(build_lambda(ps, 0.0, 0.0, 0.0, vec![]), Err(Error::MissingLink(_))));
    }

    #[test]
    fn lambda_and_chain_agree() {
        let p = PulseShape::gaussian(4.0, 1.0, 0.5).unwrap();
        let s = PulseShape::gaussian(3.0, 1.0, -0.5).unwrap();
        let lam = build_lambda(PulseSet::new().with(Link::PUMP, p.clone()).with(Link::STOKES, s.clone()), 0.0, 0.0, 0.0, vec![]).unwrap();
        let ch = build_chain(&[p, s], &[0.0, 0.0, 0.0]).unwrap();
        for &t in &[-1.0, 0.0, 0.2, 1.4] {
            assert!((lam.hamiltonian(t).matrix - ch.hamiltonian(t).matrix).norm() < 1e-15);
        }
    }

    #[test]
    fn chain_length_mismatch() {
        let p = PulseShape::constant(1.0);
        assert!(matches!(build_chain(&[p], &[0.0, 0.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn stark_terms_follow_intensity() {
        let ps = make_stirap_pair(2.0, 3.0, 1.0, 0.0, Envelope::Gaussian).unwrap();
        let stark = vec![StarkTerm { level: 1, link: Link::PUMP, coefficient: 0.25 }];
        let m = build_lambda(ps.clone(), 0.0, 0.0, 0.0, stark).unwrap();
        let off = build_lambda(ps.clone(), 0.0, 0.0, 0.0, vec![StarkTerm { level: 1, link: Link::PUMP, coefficient: 0.0 }]).unwrap();
        for &t in &[-1.0, 0.0, 0.7] {
            let expect = 0.25 * ps.eval(Link::PUMP, t).norm_sqr();
            assert!((m.hamiltonian(t).matrix[(1, 1)].re - expect).abs() < 1e-14);
            assert_eq!(off.hamiltonian(t).matrix[(1, 1)].re, 0.0);
        }
    }

    #[test]
    fn hamiltonian_derivative_matches_differences() {
        let ps = make_stirap_pair(5.0, 4.0, 1.0, 1.0, Envelope::Gaussian).unwrap();
        let stark = vec![StarkTerm { level: 2, link: Link::STOKES, coefficient: 0.1 }];
        let m = build_lambda(ps, 1.0, 0.0, 0.0, stark).unwrap();
        let h = 1e-6;
        let t = 0.3;
        let fd = (m.hamiltonian(t + h).matrix - m.hamiltonian(t - h).matrix) / C64::new(2.0 * h, 0.0);
        assert!((fd - m.hamiltonian_derivative(t)).norm() < 1e-7);
    }

    #[test]
    fn tripod_rejects_nonresonant() {
        let g = PulseShape::gaussian(1.0, 1.0, 0.0).unwrap();
        let r = build_tripod(&[g.clone()], &[g.clone()], &[g], false);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn tripod_zero_couplings_give_zero_h() {
        let g = PulseShape::gaussian(0.0, 1.0, 0.0).unwrap();
        let m = build_tripod(&[g.clone()], &[g.clone()], &[g], true).unwrap();
        assert_eq!(m.hamiltonian(0.0).matrix.norm(), 0.0);
    }

    #[test]
    fn dissipator_cases() {
        let rho = DMatrix::from_fn(3, 3, |i, j| C64::new(1.0 + i as f64, j as f64));
        let zero = build_dissipator(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(zero.apply(&rho).norm(), 0.0);
        let g = dephasing_matrix(3, &[(0, 2, 2.0)]).unwrap();
        let d = build_dissipator(g).unwrap().apply(&rho);
        for m in 0..3 {
            for n in 0..3 {
                let expect = if (m, n) == (0, 2) || (m, n) == (2, 0) { rho[(m, n)] * 2.0 } else { C64::new(0.0, 0.0) };
                assert_eq!(d[(m, n)], expect);
            }
            assert_eq!(d[(m, m)], C64::new(0.0, 0.0));
        }
        assert!(matches!(dephasing_matrix(3, &[(0, 1, -1.0)]), Err(Error::NegativeRate(_))));
        let mut asym = DMatrix::zeros(3, 3);
        asym[(0, 1)] = 1.0;
        assert!(build_dissipator(asym).is_err());
    }

    #[test]
    fn effective_two_state_cases() {
        let (oe, de) = effective_two_state(1.0, 1.0, 10.0).unwrap();
        assert!((oe + 0.05).abs() < 1e-15 && de == 0.0);
        let (oe, de) = effective_two_state(0.0, 2.0, 4.0).unwrap();
        assert!(oe == 0.0 && (de + 0.5).abs() < 1e-15);
        assert!(matches!(effective_two_state(1.0, 1.0, 0.0), Err(Error::ZeroDetuning)));
    }

    #[test]
    fn doppler_cases() {
        for &v in &[-3.0, 0.0, 2.0] {
            assert_eq!(doppler_detuning(1.0, 1.0, 5.0, 5.0, v, BeamGeometry::Copropagating), 0.0);
            assert_eq!(doppler_detuning(1.0, 1.0, 5.0, 3.0, v, BeamGeometry::Counterpropagating).abs(), 8.0 * v.abs());
        }
        assert_eq!(doppler_detuning(2.0, 0.5, 5.0, 3.0, 0.0, BeamGeometry::Counterpropagating), 1.5);
    }

    #[test]
    fn rabi_sign_and_linearity() {
        assert_eq!(rabi_from_field(0.0, 3.0), 0.0);
        assert!(rabi_from_field(1.0, 1.0) < 0.0);
        assert_eq!(rabi_from_field(1.5, 4.0), 2.0 * rabi_from_field(1.5, 2.0));
    }

    #[test]
    fn ladder_and_lambda_fold_detunings() {
        assert_eq!(two_photon_detuning(2.0, 0.5, Linkage::Lambda), 1.5);
        assert_eq!(two_photon_detuning(2.0, 0.5, Linkage::Ladder), 2.5);
        let m = build_three_state(zero_pair(), 2.0, 0.5, Linkage::Ladder, 0.0).unwrap();
        assert_eq!(m.detunings, vec![0.0, 2.0, 2.5]);
        assert_eq!(m.topology, Topology::Ladder);
    }
}
