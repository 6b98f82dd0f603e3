//! N-dimensional parameter scans, line-profile extraction and power-law fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Observable, RunConfig};
use crate::error::{Error, Result};
use crate::output::Table;
use crate::protocols::evaluate;

/// One scan axis: a dotted config path and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub base: RunConfig,
    pub axes: Vec<Axis>,
    pub observable: Observable,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ScanSpec {
    /// Reads the scan block of a configuration.
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let scan = cfg.scan.as_ref().ok_or_else(|| Error::Config("configuration has no scan block".into()))?;
        let axes = scan
            .axes
            .iter()
            .map(|a| Ok(Axis { path: a.path.clone(), values: a.resolve()? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { base: cfg.clone(), axes, observable: scan.observable, workers: scan.workers })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of flat index `k`; the last axis varies fastest.
    pub fn point(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            let n = a.values.len();
            out[i] = a.values[k % n];
            k /= n;
        }
        out
    }

    pub fn config_at(&self, k: usize) -> Result<RunConfig> {
        let mut c = self.base.clone();
        for (a, v) in self.axes.iter().zip(self.point(k)) {
            c = c.with_value(&a.path, v)?;
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Config("scan needs at least one axis".into()));
        }
        for a in &self.axes {
            if a.values.is_empty() || a.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("axis '{}' needs finite values", a.path)));
            }
            self.base.with_value(&a.path, a.values[0])?;
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// Propagation aborted.
    IntegrationFault,
    /// The point configuration was rejected.
    InvalidConfig,
}

impl PointStatus {
    pub fn code(self) -> f64 {
        match self {
            PointStatus::Ok => 0.0,
            PointStatus::IntegrationFault => 1.0,
            PointStatus::InvalidConfig => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub axes: Vec<Axis>,
    pub observable: Observable,
    /// Row-major values, last axis fastest; NaN at failed points.
    pub values: Vec<f64>,
    pub status: Vec<PointStatus>,
    pub config_hash: String,
}

impl ScanResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn failures(&self) -> usize {
        self.status.iter().filter(|s| **s != PointStatus::Ok).count()
    }

    /// One row per grid point: axis values, the observable, the status code.
    pub fn to_table(&self) -> Table {
        let mut cols: Vec<String> = self.axes.iter().map(|a| a.path.clone()).collect();
        cols.push(observable_name(self.observable).into());
        cols.push("status".into());
        let mut t = Table::new(cols).stamped(&self.config_hash);
        t.meta.insert("observable".into(), observable_name(self.observable).into());
        t.meta.insert("shape".into(), self.shape().iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x"));
        let spec_axes = &self.axes;
        for k in 0..self.values.len() {
            let mut row = Vec::with_capacity(spec_axes.len() + 2);
            let mut rem = k;
            let mut idx = vec![0; spec_axes.len()];
            for (i, a) in spec_axes.iter().enumerate().rev() {
                idx[i] = rem % a.values.len();
                rem /= a.values.len();
            }
            for (i, a) in spec_axes.iter().enumerate() {
                row.push(a.values[idx[i]]);
            }
            row.push(self.values[k]);
            row.push(self.status[k].code());
            t.push(row).expect("row width matches header");
        }
        t
    }
}

pub fn observable_name(o: Observable) -> &'static str {
    match o {
        Observable::PTarget => "p_target",
        Observable::MaxP2 => "max_p2",
        Observable::Infidelity => "infidelity",
        Observable::Loss => "loss",
    }
}

fn eval_point(spec: &ScanSpec, k: usize) -> (f64, PointStatus) {
    let cfg = match spec.config_at(k) {
        Ok(c) => c,
        Err(_) => return (f64::NAN, PointStatus::InvalidConfig),
    };
    match evaluate(&cfg, spec.observable) {
        Ok(v) => (v, PointStatus::Ok),
        Err(Error::Integration { .. }) => (f64::NAN, PointStatus::IntegrationFault),
        Err(_) => (f64::NAN, PointStatus::InvalidConfig),
    }
}

/// Evaluates the observable at every grid point. Each worker writes into the
/// slot of its flat index, so the result does not depend on scheduling.
pub fn scan(spec: &ScanSpec) -> Result<ScanResult> {
    scan_with_progress(spec, |_| {})
}

/// Like [`scan`], calling `progress` with the number of finished points.
pub fn scan_with_progress(spec: &ScanSpec, progress: impl Fn(usize) + Sync) -> Result<ScanResult> {
    spec.validate()?;
    let n = spec.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let work = || -> Vec<(f64, PointStatus)> {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let r = eval_point(spec, k);
                progress(done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1);
                r
            })
            .collect()
    };
    let slots = match spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let (values, status) = slots.into_iter().unzip();
    Ok(ScanResult {
        axes: spec.axes.clone(),
        observable: spec.observable,
        values,
        status,
        config_hash: spec.base.hash(),
    })
}

/// Center and full width at half maximum of a single-peaked profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub center: f64,
    pub fwhm: f64,
    pub peak: f64,
    /// Half-maximum crossings left and right of the peak.
    pub left: f64,
    pub right: f64,
    /// Set when the two half widths differ by more than 10 % of the FWHM.
    pub asymmetric: bool,
    /// rms difference between the profile and its mirror image about the
    /// center, over the FWHM window, relative to the peak.
    pub residual: f64,
}

fn interp(x: &[f64], y: &[f64], at: f64) -> Option<f64> {
    if at < x[0] || at > x[x.len() - 1] {
        return None;
    }
    let k = x.partition_point(|&v| v < at).clamp(1, x.len() - 1);
    let s = (at - x[k - 1]) / (x[k] - x[k - 1]);
    Some(y[k - 1] + s * (y[k] - y[k - 1]))
}

/// Peak position by parabolic refinement around the largest sample and FWHM
/// from linearly interpolated half-maximum crossings.
pub fn line_profile(x: &[f64], y: &[f64]) -> Result<ProfileFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::Fit("profile needs at least 3 points".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("profile abscissa must increase and values be finite".into()));
    }
    let k = y.iter().enumerate().fold(0, |b, (i, v)| if *v > y[b] { i } else { b });
    let mut center = x[k];
    let mut peak = y[k];
    if k > 0 && k + 1 < x.len() {
        let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
        let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
        let d = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d;
        if a < 0.0 {
            let xv = -b / (2.0 * a);
            if xv > x0 && xv < x2 {
                center = xv;
                peak = (y1 + (xv - x1) * (a * (xv + x1) + b)).max(y1);
            }
        }
    }
    if peak <= 0.0 {
        return Err(Error::Fit("profile has no positive peak".into()));
    }
    let half = 0.5 * peak;
    let cross = |i: usize, j: usize| x[j] + (x[i] - x[j]) * (half - y[j]) / (y[i] - y[j]);
    let mut left = None;
    for i in (0..k).rev() {
        if y[i] < half {
            left = Some(cross(i, i + 1));
            break;
        }
    }
    let mut right = None;
    for i in k + 1..x.len() {
        if y[i] < half {
            right = Some(cross(i, i - 1));
            break;
        }
    }
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::Fit("profile never falls to half maximum on both sides".into()));
    };
    let fwhm = right - left;
    let asymmetric = ((right - center) - (center - left)).abs() > 0.1 * fwhm;
    let mut acc = 0.0;
    let mut n = 0;
    for (xi, yi) in x.iter().zip(y) {
        if *xi >= left && *xi <= right {
            if let Some(m) = interp(x, y, 2.0 * center - xi) {
                acc += (yi - m).powi(2);
                n += 1;
            }
        }
    }
    let residual = if n > 0 { (acc / n as f64).sqrt() / peak } else { 0.0 };
    Ok(ProfileFit { center, fwhm, peak, left, right, asymmetric, residual })
}

/// Least-squares power law `y = c·x^p` on log–log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub stderr: f64,
    pub prefactor: f64,
    pub points: usize,
}

/// Fits `log y = log c + p·log x` over the positive finite pairs.
pub fn fit_scaling(x: &[f64], y: &[f64]) -> Result<ScalingFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite() && **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 valid points, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissa values are all equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    let stderr = if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(ScalingFit { exponent: slope, stderr, prefactor: icpt.exp(), points: n })
}

/// Transfer efficiency against the pulse delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCurve {
    pub delays: Vec<f64>,
    pub efficiency: Vec<f64>,
    pub optimum_delay: f64,
    /// Optimum delay divided by the pulse width.
    pub optimum_over_width: f64,
}

/// Scans `pulses.delay` and reports the best delay.
pub fn delay_curve(cfg: &RunConfig, delays: &[f64]) -> Result<DelayCurve> {
    if delays.is_empty() {
        return Err(Error::InvalidArgument("delay list is empty".into()));
    }
    let spec = ScanSpec {
        base: cfg.clone(),
        axes: vec![Axis { path: "pulses.delay".into(), values: delays.to_vec() }],
        observable: Observable::PTarget,
        workers: None,
    };
    let r = scan(&spec)?;
    if r.failures() > 0 {
        return Err(Error::Integration { time: f64::NAN, reason: format!("{} delay points failed", r.failures()) });
    }
    let k = r.values.iter().enumerate().fold(0, |b, (i, v)| if *v > r.values[b] { i } else { b });
    let width = crate::protocols::pulse_width(cfg).unwrap_or(1.0);
    Ok(DelayCurve {
        delays: delays.to_vec(),
        efficiency: r.values,
        optimum_delay: delays[k],
        optimum_over_width: delays[k] / width,
    })
}
