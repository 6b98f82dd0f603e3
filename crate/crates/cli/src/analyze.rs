//! `analyze` subcommand: fits on CSV files written by `simulate` and `scan`.

use std::path::Path;

use stirap_core::output::{format_number, Table};
use stirap_core::protocols::transition_time;
use stirap_core::sweep::{fit_scaling, line_profile, ProfileFit};

use crate::{Failure, EXIT_INPUT};

pub struct Options {
    pub column: Option<String>,
    pub epsilon: f64,
    pub delay: Option<f64>,
    pub width: Option<f64>,
}

type Lines = Vec<(String, String)>;

fn incompatible(msg: impl Into<String>) -> Failure {
    Failure::new(EXIT_INPUT, msg)
}

fn column(t: &Table, name: &str) -> Result<Vec<f64>, Failure> {
    t.column(name).ok_or_else(|| incompatible(format!("no column '{name}'")))
}

/// Axis columns of a scan table: everything before the observable.
fn scan_layout(t: &Table, opts: &Options) -> Result<(Vec<String>, String), Failure> {
    let obs = match (&opts.column, t.meta.get("observable")) {
        (Some(c), _) => c.clone(),
        (None, Some(o)) => o.clone(),
        (None, None) => {
            if t.columns.len() == 2 {
                t.columns[1].clone()
            } else {
                return Err(incompatible("not a scan file; pass --column"));
            }
        }
    };
    let k = t.columns.iter().position(|c| *c == obs).ok_or_else(|| incompatible(format!("no column '{obs}'")))?;
    if k == 0 {
        return Err(incompatible("the first column must be an axis"));
    }
    Ok((t.columns[..k].to_vec(), obs))
}

/// Rows with status 0 (or all rows when the file has no status column).
fn ok_rows(t: &Table) -> Vec<&Vec<f64>> {
    match t.columns.iter().position(|c| c == "status") {
        Some(k) => t.rows.iter().filter(|r| r[k] == 0.0).collect(),
        None => t.rows.iter().collect(),
    }
}

fn profile_lines(f: &ProfileFit) -> Lines {
    vec![
        ("center".into(), format_number(f.center)),
        ("fwhm".into(), format_number(f.fwhm)),
        ("peak".into(), format_number(f.peak)),
        ("left".into(), format_number(f.left)),
        ("right".into(), format_number(f.right)),
        ("asymmetric".into(), f.asymmetric.to_string()),
        ("residual".into(), format_number(f.residual)),
    ]
}

fn profile(t: &Table, opts: &Options) -> Result<Lines, Failure> {
    let (axes, obs) = scan_layout(t, opts)?;
    if axes.len() != 1 {
        return Err(incompatible(format!("profile needs a one-axis scan, found {} axes", axes.len())));
    }
    let kx = 0;
    let ky = t.columns.iter().position(|c| *c == obs).unwrap();
    let rows = ok_rows(t);
    let x: Vec<f64> = rows.iter().map(|r| r[kx]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[ky]).collect();
    let f = line_profile(&x, &y).map_err(|e| incompatible(e.to_string()))?;
    let mut out = vec![("axis".into(), axes[0].clone()), ("observable".into(), obs)];
    out.extend(profile_lines(&f));
    Ok(out)
}

/// Power-law fit of profile widths. A two-axis scan is split along its first
/// axis and each slice is fitted with [`line_profile`]; a two-column table
/// is fitted directly.
fn linewidth_scaling(t: &Table, opts: &Options) -> Result<Lines, Failure> {
    let (axes, obs) = scan_layout(t, opts)?;
    let ky = t.columns.iter().position(|c| *c == obs).unwrap();
    let rows = ok_rows(t);
    let (x, w) = match axes.len() {
        1 => (rows.iter().map(|r| r[0]).collect::<Vec<_>>(), rows.iter().map(|r| r[ky]).collect::<Vec<_>>()),
        2 => {
            let mut groups: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
            for r in &rows {
                match groups.iter_mut().find(|g| g.0 == r[0]) {
                    Some(g) => {
                        g.1.push(r[1]);
                        g.2.push(r[ky]);
                    }
                    None => groups.push((r[0], vec![r[1]], vec![r[ky]])),
                }
            }
            let mut x = Vec::new();
            let mut w = Vec::new();
            for (v, dx, dy) in groups {
                let f = line_profile(&dx, &dy).map_err(|e| incompatible(format!("slice {} = {v}: {e}", axes[0])))?;
                x.push(v);
                w.push(f.fwhm);
            }
            (x, w)
        }
        n => return Err(incompatible(format!("linewidth-scaling needs one or two axes, found {n}"))),
    };
    let fit = fit_scaling(&x, &w).map_err(|e| incompatible(e.to_string()))?;
    let mut out: Lines = vec![
        ("exponent".into(), format_number(fit.exponent)),
        ("stderr".into(), format_number(fit.stderr)),
        ("prefactor".into(), format_number(fit.prefactor)),
        ("points".into(), fit.points.to_string()),
    ];
    for (a, b) in x.iter().zip(&w) {
        out.push((format!("width[{}]", format_number(*a)), format_number(*b)));
    }
    Ok(out)
}

fn meta_number(t: &Table, key: &str) -> Option<f64> {
    t.meta.get(key).and_then(|v| v.parse().ok())
}

fn transition(t: &Table, opts: &Options) -> Result<Lines, Failure> {
    let times = column(t, "t")?;
    let name = match &opts.column {
        Some(c) => c.clone(),
        None => t
            .columns
            .iter()
            .filter(|c| c.starts_with('P') && c[1..].parse::<usize>().is_ok())
            .max_by_key(|c| c[1..].parse::<usize>().unwrap())
            .cloned()
            .ok_or_else(|| incompatible("no population columns"))?,
    };
    let pop = column(t, &name)?;
    let delay = opts
        .delay
        .or_else(|| meta_number(t, "pulse_delay"))
        .ok_or_else(|| incompatible("pulse delay unknown; pass --delay"))?;
    let width = opts
        .width
        .or_else(|| meta_number(t, "pulse_width"))
        .ok_or_else(|| incompatible("pulse width unknown; pass --width"))?;
    let est = transition_time(&times, &pop, opts.epsilon, delay, width).map_err(|e| incompatible(e.to_string()))?;
    let mut out: Lines = vec![
        ("column".into(), name),
        ("epsilon".into(), format_number(est.epsilon)),
        ("predicted".into(), format_number(est.predicted)),
    ];
    match est.measured {
        Some(m) => {
            out.push(("measured".into(), format_number(m)));
            out.push(("relative_deviation".into(), format_number((m - est.predicted) / est.predicted)));
        }
        None => out.push(("measured".into(), "undefined".into())),
    }
    Ok(out)
}

pub fn run(path: &Path, analysis: &str, opts: &Options) -> Result<Lines, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| incompatible(format!("{}: {e}", path.display())))?;
    let t = Table::parse_csv(&text).map_err(|e| incompatible(format!("{}: {e}", path.display())))?;
    let mut lines = match analysis {
        "profile" => profile(&t, opts)?,
        "linewidth-scaling" => linewidth_scaling(&t, opts)?,
        "transition-time" => transition(&t, opts)?,
        other => {
            return Err(incompatible(format!(
                "unknown analysis '{other}' (expected profile, linewidth-scaling, transition-time)"
            )))
        }
    };
    lines.insert(0, ("analysis".into(), analysis.into()));
    if let Some(h) = t.meta.get("config_hash") {
        lines.push(("config_hash".into(), h.clone()));
    }
    Ok(lines)
}
