use nalgebra::DMatrix;

use crate::state::C64;

/// Matrix exponential by scaling and squaring of the Taylor series; terms are
/// summed until they drop below `1e-13` of the running sum.
pub fn expm_taylor(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a / C64::new(2f64.powi(s), 0.0);
    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..40 {
        term = &term * &b / C64::new(k as f64, 0.0);
        sum += &term;
        if term.norm() < 1e-13 * sum.norm() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(−iHh)` for Hermitian `H` through its eigen-decomposition.
pub(crate) fn expm_hermitian(h: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let n = h.nrows();
    let mut scaled = v.clone();
    for j in 0..n {
        let ph = C64::from_polar(1.0, -eig.eigenvalues[j] * dt);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    scaled * v.adjoint()
}
