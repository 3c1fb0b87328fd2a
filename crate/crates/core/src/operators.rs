//! Dense operator and superoperator primitives.
//!
//! Density matrices are vectorized by **column stacking**: `vec(ρ)[i + d*j] = ρ[(i, j)]`.
//! This is nalgebra's native storage order, so `vectorize` and `devectorize`
//! are plain reinterpretations. With this convention
//!
//! ```text
//! vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)
//! ```
//!
//! and every superoperator in the crate is assembled from [`left_mult`] and
//! [`right_mult`] so the convention lives in exactly one place.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex operator on a (possibly composite) Hilbert space.
pub type Operator = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Linear map on column-stacked density matrices of a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::InvalidDimension(format!(
                "superoperator on dim {dim} needs a {0}x{0} matrix, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::identity(dim * dim, dim * dim),
        }
    }

    /// Hilbert-space dimension `d` (the matrix is `d² × d²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        devectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * factor,
        }
    }

    pub fn add(&self, other: &SuperOperator) -> Self {
        assert_eq!(self.dim, other.dim, "superoperator dimension mismatch");
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn compose(&self, other: &SuperOperator) -> Self {
        assert_eq!(self.dim, other.dim, "superoperator dimension mismatch");
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Truncated bosonic annihilation operator: `a[(n-1, n)] = √n`.
pub fn annihilation(n_levels: usize) -> Result<Operator> {
    if n_levels < 2 {
        return Err(Error::InvalidDimension(format!(
            "annihilation operator needs at least 2 levels, got {n_levels}"
        )));
    }
    let mut a = Operator::zeros(n_levels, n_levels);
    for n in 1..n_levels {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Pauli matrix with the excited state at index 1: `σ_z = diag(−1, +1)`,
/// so the ground state has `σ_z = −1` and `σ = |0⟩⟨1|` lowers.
pub fn pauli(axis: Axis) -> Operator {
    match axis {
        Axis::X => Operator::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => Operator::from_row_slice(2, 2, &[ZERO, I, -I, ZERO]),
        Axis::Z => Operator::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]),
    }
}

/// Two-level lowering operator `σ = |g⟩⟨e|` in the same convention as [`pauli`].
pub fn lowering() -> Operator {
    Operator::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

/// One factor of a tensor product.
#[derive(Clone, Debug)]
pub enum Local {
    Op(Operator),
    Identity(usize),
}

impl Local {
    fn dim(&self) -> usize {
        match self {
            Local::Op(op) => op.nrows(),
            Local::Identity(d) => *d,
        }
    }

    fn matrix(&self) -> Operator {
        match self {
            Local::Op(op) => op.clone(),
            Local::Identity(d) => Operator::identity(*d, *d),
        }
    }
}

/// Kronecker product of local factors, leftmost factor slowest-varying.
///
/// The crate always orders subsystems as (cavity, TLS, sensor).
pub fn embed(locals: &[Local]) -> Result<Operator> {
    let (first, rest) = locals
        .split_first()
        .ok_or_else(|| Error::InvalidDimension("embed needs at least one factor".into()))?;
    for l in locals {
        if let Local::Op(op) = l {
            if op.nrows() != op.ncols() {
                return Err(Error::InvalidDimension("embedded operator is not square".into()));
            }
        }
        if l.dim() == 0 {
            return Err(Error::InvalidDimension("zero-dimensional factor".into()));
        }
    }
    Ok(rest
        .iter()
        .fold(first.matrix(), |acc, l| acc.kronecker(&l.matrix())))
}

/// `vec(Aρ) = (I ⊗ A) vec(ρ)`.
pub fn left_mult(a: &Operator) -> SuperOperator {
    let d = a.nrows();
    SuperOperator {
        dim: d,
        matrix: Operator::identity(d, d).kronecker(a),
    }
}

/// `vec(ρB) = (Bᵀ ⊗ I) vec(ρ)`.
pub fn right_mult(b: &Operator) -> SuperOperator {
    let d = b.nrows();
    SuperOperator {
        dim: d,
        matrix: b.transpose().kronecker(&Operator::identity(d, d)),
    }
}

/// `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_generator(h: &Operator) -> SuperOperator {
    let d = h.nrows();
    let mut m = Operator::identity(d, d).kronecker(h) - h.transpose().kronecker(&Operator::identity(d, d));
    m *= -I;
    SuperOperator { dim: d, matrix: m }
}

/// Lindblad dissipator `ρ ↦ OρO† − {O†O, ρ}/2` (unit rate).
pub fn lindblad_dissipator(o: &Operator) -> SuperOperator {
    let d = o.nrows();
    let id = Operator::identity(d, d);
    let odo = o.adjoint() * o;
    let jump = o.conjugate().kronecker(o);
    let anti = id.kronecker(&odo) + odo.transpose().kronecker(&id);
    SuperOperator {
        dim: d,
        matrix: jump - anti * C64::new(0.5, 0.0),
    }
}

pub fn vectorize(rho: &Operator) -> DVector<C64> {
    DVector::from_column_slice(rho.as_slice())
}

pub fn devectorize(v: &DVector<C64>, dim: usize) -> Operator {
    assert_eq!(v.len(), dim * dim, "vector length is not dim²");
    Operator::from_column_slice(dim, dim, v.as_slice())
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..=j.min(a.nrows() - 1) {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest absolute entry of an operator.
pub fn max_abs(a: &Operator) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(a: &Operator) -> f64 {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().map(|x| x.abs()).sum()
}

pub fn trace(a: &Operator) -> C64 {
    a.diagonal().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_op(d: usize, seed: &[f64]) -> Operator {
        Operator::from_fn(d, d, |i, j| {
            let k = (i * d + j) * 2;
            C64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
        })
    }

    #[test]
    fn annihilation_entries() {
        let a = annihilation(3).unwrap();
        assert!((a[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a[(0, 1)], ONE);
        assert_eq!(a[(2, 1)], ZERO);

        let a2 = annihilation(2).unwrap();
        let nonzero: Vec<_> = a2.iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(a2[(0, 1)], ONE);

        let a4 = annihilation(4).unwrap();
        let mut ket3 = DVector::zeros(4);
        ket3[3] = ONE;
        let out = a4 * ket3;
        assert!((out[2].re - 3f64.sqrt()).abs() < 1e-15);
        assert!(out.iter().enumerate().all(|(i, z)| i == 2 || z.norm() == 0.0));
    }

    #[test]
    fn annihilation_rejects_tiny_space() {
        assert!(matches!(annihilation(1), Err(Error::InvalidDimension(_))));
        assert!(annihilation(0).is_err());
    }

    #[test]
    fn canonical_commutator_below_truncation() {
        let n = 7;
        let a = annihilation(n).unwrap();
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let expect = if i == j { ONE } else { ZERO };
                assert!((comm[(i, j)] - expect).norm() < 1e-14);
            }
        }
        // top level carries the truncation artifact
        assert!((comm[(n - 1, n - 1)].re + (n as f64 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z));
        let id = Operator::identity(2, 2);
        assert!(max_abs(&(&z * &z - &id)) < 1e-15);
        let comm = &x * &y - &y * &x;
        assert!(max_abs(&(comm - z.clone() * C64::new(0.0, 2.0))) < 1e-15);
        assert_eq!(trace(&x), ZERO);
        // excited state at index 1
        assert_eq!(z[(1, 1)], ONE);
        let s = lowering();
        assert!(max_abs(&(s.adjoint() * &s - (z + id) * C64::new(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn embed_dimensions_and_identities() {
        let n = 5;
        let a = annihilation(n).unwrap();
        let big = embed(&[Local::Op(a.clone()), Local::Identity(2), Local::Identity(2)]).unwrap();
        assert_eq!(big.nrows(), 4 * n);

        let sx = embed(&[Local::Identity(n), Local::Op(pauli(Axis::X)), Local::Identity(2)]).unwrap();
        let n_op = &big * big.adjoint();
        assert!(max_abs(&(&sx * &n_op - &n_op * &sx)) < 1e-14);

        let all_id = embed(&[Local::Identity(3), Local::Identity(2)]).unwrap();
        assert_eq!(all_id, Operator::identity(6, 6));

        assert!(embed(&[]).is_err());
    }

    #[test]
    fn embed_preserves_hermiticity() {
        let n = 4;
        let a = annihilation(n).unwrap();
        let x = &a + a.adjoint();
        let op = embed(&[Local::Op(x), Local::Op(pauli(Axis::Y)), Local::Op(pauli(Axis::Z))]).unwrap();
        assert!(hermiticity_defect(&op) < 1e-15);
    }

    #[test]
    fn left_mult_identity_and_devectorize() {
        let id = Operator::identity(3, 3);
        assert_eq!(left_mult(&id).into_matrix(), DMatrix::identity(9, 9));
        let a = random_op(3, &[0.3, -1.2, 0.7, 2.1, -0.4, 0.9, 1.5]);
        let v = left_mult(&a).matrix() * vectorize(&id);
        assert_eq!(devectorize(&v, 3), a);
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let rho = Operator::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let v = vectorize(&rho);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(v[i + 3 * j], rho[(i, j)]);
            }
        }
    }

    proptest! {
        #[test]
        fn sandwich_matches_direct_product(seed in prop::collection::vec(-2.0f64..2.0, 54)) {
            let d = 3;
            let a = random_op(d, &seed[0..18]);
            let b = random_op(d, &seed[18..36]);
            let rho = random_op(d, &seed[36..54]);
            let sup = left_mult(&a).compose(&right_mult(&b));
            let via_super = sup.apply(&rho);
            let direct = &a * &rho * &b;
            prop_assert!(max_abs(&(via_super - direct)) < 1e-12);
        }

        #[test]
        fn vectorize_round_trip(d in 1usize..=64, seed in prop::collection::vec(-5.0f64..5.0, 16)) {
            let rho = random_op(d, &seed);
            prop_assert_eq!(devectorize(&vectorize(&rho), d), rho);
        }

        #[test]
        fn dissipator_preserves_trace_and_hermiticity(seed in prop::collection::vec(-1.0f64..1.0, 32)) {
            let d = 4;
            let o = random_op(d, &seed);
            let h0 = random_op(d, &seed[5..]);
            let rho = &h0 + h0.adjoint();
            let out = lindblad_dissipator(&o).apply(&rho);
            prop_assert!(trace(&out).norm() < 1e-12);
            prop_assert!(hermiticity_defect(&out) < 1e-12);
        }
    }
}
