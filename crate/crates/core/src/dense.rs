//! Dense complex kernels backed by `faer` (SIMD gemm, LU, SVD).

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use nalgebra::DMatrix;

use crate::operators::C64;

fn to_faer(m: &DMatrix<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn to_nalgebra(m: MatRef<'_, C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn matmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let c = &to_faer(a) * &to_faer(b);
    to_nalgebra(c.as_ref())
}

/// `a⁻¹ rhs` by partially pivoted LU; `None` if the result is not finite.
pub fn lu_solve(a: &DMatrix<C64>, rhs: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let x = to_faer(a).partial_piv_lu().solve(to_faer(rhs));
    let x = to_nalgebra(x.as_ref());
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
}

/// Singular values (descending) and the matching right singular vectors as columns.
pub fn svd_right(a: &DMatrix<C64>) -> Option<(Vec<f64>, DMatrix<C64>)> {
    let svd = to_faer(a).svd().ok()?;
    let s = svd.S();
    let values = (0..s.dim()).map(|k| s[k].re).collect();
    Some((values, to_nalgebra(svd.V())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: usize) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |i, j| {
            let k = (i * 31 + j * 17 + seed * 7) % 23;
            C64::new(k as f64 / 7.0 - 1.5 + if i == j { 4.0 } else { 0.0 }, ((i + 2 * j + seed) % 5) as f64 / 3.0)
        })
    }

    #[test]
    fn matches_nalgebra() {
        let (a, b) = (sample(9, 1), sample(9, 2));
        assert!((matmul(&a, &b) - &a * &b).norm() < 1e-12 * (&a * &b).norm());
        let x = lu_solve(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() < 1e-12 * b.norm());
    }

    #[test]
    fn svd_reconstructs_kernel() {
        let mut a = sample(6, 3);
        let col = a.column(0).clone_owned();
        a.set_column(5, &(col * C64::new(2.0, -1.0)));
        let (s, v) = svd_right(&a).unwrap();
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let null = v.column(5);
        assert!((&a * null).norm() < 1e-12 * s[0]);
    }
}
