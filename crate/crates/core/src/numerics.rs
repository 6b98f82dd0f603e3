//! Small numerical helpers: quadrature, interpolation and level crossings.

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates over `[a, b]`, splitting at the given interior breakpoints so
/// that kinks and jumps sit on panel edges.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    // Sub-panels keep the adaptive rule from skipping narrow features.
    let mut total = 0.0;
    for w in pts.windows(2) {
        let n = 16;
        let h = (w[1] - w[0]) / n as f64;
        for k in 0..n {
            let lo = w[0] + h * k as f64;
            let hi = if k + 1 == n { w[1] } else { lo + h };
            total += adaptive_simpson(f, lo, hi, tol / (n as f64 * pts.len() as f64));
        }
    }
    total
}

/// Trapezoidal integral of sampled data.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// First `x` where the sampled curve crosses `level` going in the direction
/// given by `rising`, found by linear interpolation.
pub fn first_crossing(x: &[f64], y: &[f64], level: f64, rising: bool) -> Option<f64> {
    for k in 1..x.len() {
        let (a, b) = (y[k - 1] - level, y[k] - level);
        let hit = if rising { a < 0.0 && b >= 0.0 } else { a > 0.0 && b <= 0.0 };
        if hit {
            let s = a / (a - b);
            return Some(x[k - 1] + s * (x[k] - x[k - 1]));
        }
    }
    None
}

/// Last `x` where the sampled curve crosses `level` in the given direction.
pub fn last_crossing(x: &[f64], y: &[f64], level: f64, rising: bool) -> Option<f64> {
    for k in (1..x.len()).rev() {
        let (a, b) = (y[k - 1] - level, y[k] - level);
        let hit = if rising { a < 0.0 && b >= 0.0 } else { a > 0.0 && b <= 0.0 };
        if hit {
            let s = a / (a - b);
            return Some(x[k - 1] + s * (x[k] - x[k - 1]));
        }
    }
    None
}

/// Evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let h = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|k| a + h * k as f64).collect();
    v[n - 1] = b;
    v
}

/// Logarithmically spaced values from `a` to `b` inclusive (both positive).
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-13);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn crossings() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.0, 0.0, 1.0];
        assert_eq!(first_crossing(&x, &y, 0.5, true), Some(0.5));
        assert_eq!(last_crossing(&x, &y, 0.5, true), Some(2.5));
        assert_eq!(first_crossing(&x, &y, 0.5, false), Some(1.5));
        assert_eq!(first_crossing(&x, &y, 2.0, true), None);
    }

    #[test]
    fn spacing() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = logspace(1.0, 100.0, 3);
        assert!((l[1] - 10.0).abs() < 1e-12);
    }
}
