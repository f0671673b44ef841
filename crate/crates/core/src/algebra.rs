//! Finite traced matrix algebras with a block upper-triangular subdiagonal
//! structure.
//!
//! The algebra is `M_n(C)` with the normalized trace `tau(a) = Tr(a) / n`. An
//! ordered partition `b_1 + ... + b_m = n` of the rows selects
//!
//! * `H^inf`: block upper-triangular matrices,
//! * `D = H^inf ∩ (H^inf)*`: block-diagonal matrices,
//! * `Phi`: the compression onto `D`, which is trace preserving and
//!   multiplicative on `H^inf`.
//!
//! The single-block partition gives `H^inf = M_n`, the full flag `(1, ..., 1)`
//! gives the upper-triangular matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative asymmetry accepted by [`Operator::is_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `sigma_min <= SINGULAR_TOL * sigma_max` is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TracedAlgebra {
    partition: Vec<usize>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl TracedAlgebra {
    pub fn new(partition: Vec<usize>) -> Result<Self> {
        if partition.is_empty() {
            return Err(Error::InvalidPartition("partition is empty".into()));
        }
        if let Some(pos) = partition.iter().position(|&b| b == 0) {
            return Err(Error::InvalidPartition(format!("block {pos} has size 0")));
        }
        let block_of = partition
            .iter()
            .enumerate()
            .flat_map(|(block, &size)| std::iter::repeat_n(block, size))
            .collect();
        Ok(Self {
            partition,
            block_of,
        })
    }

    /// Partition checked against a known dimension.
    pub fn with_dimension(n: usize, partition: Vec<usize>) -> Result<Self> {
        let sum: usize = partition.iter().sum();
        if sum != n {
            return Err(Error::PartitionMismatch { n, sum });
        }
        Self::new(partition)
    }

    /// Full flag `(1, ..., 1)`: `H^inf` is the upper-triangular matrices.
    pub fn flag(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    /// Trivial partition `(n)`: `H^inf = D = M_n`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// Two blocks `(n/2, n - n/2)`; a single block when `n = 1`.
    pub fn halves(n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::InvalidPartition("dimension must be positive".into())),
            1 => Self::single(1),
            _ => Self::new(vec![n / 2, n - n / 2]),
        }
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.len()
    }

    /// Block containing row (or column) `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn allows(&self, tag: SubspaceTag, i: usize, j: usize) -> bool {
        let (bi, bj) = (self.block_of[i], self.block_of[j]);
        match tag {
            SubspaceTag::Full => true,
            SubspaceTag::Hinf => bi <= bj,
            SubspaceTag::Hinf0 => bi < bj,
            SubspaceTag::HinfStar => bi >= bj,
            SubspaceTag::Hinf0Star => bi > bj,
            SubspaceTag::Diag => bi == bj,
        }
    }

    /// Complex dimension of the subspace selected by `tag`.
    pub fn dimension(&self, tag: SubspaceTag) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.allows(tag, i, j))
            .count()
    }
}

impl TryFrom<Vec<usize>> for TracedAlgebra {
    type Error = Error;

    fn try_from(partition: Vec<usize>) -> Result<Self> {
        Self::new(partition)
    }
}

impl From<TracedAlgebra> for Vec<usize> {
    fn from(alg: TracedAlgebra) -> Self {
        alg.partition
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SubspaceTag {
    Full,
    Hinf,
    Hinf0,
    HinfStar,
    Hinf0Star,
    Diag,
}

/// An element of the traced algebra. Immutable once built.
#[derive(Clone, PartialEq)]
pub struct Operator {
    algebra: Arc<TracedAlgebra>,
    entries: DMatrix<Complex64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("partition", &self.algebra.partition())
            .field("entries", &self.entries)
            .finish()
    }
}

impl Operator {
    pub fn from_matrix(algebra: Arc<TracedAlgebra>, entries: DMatrix<Complex64>) -> Result<Self> {
        let n = algebra.n();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { algebra, entries })
    }

    /// Internal constructor for results of arithmetic on valid operators.
    pub(crate) fn wrap(algebra: Arc<TracedAlgebra>, entries: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(entries.nrows(), algebra.n());
        Self { algebra, entries }
    }

    pub fn from_fn(
        algebra: &Arc<TracedAlgebra>,
        f: impl Fn(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let n = algebra.n();
        Self::from_matrix(algebra.clone(), DMatrix::from_fn(n, n, f))
    }

    /// Real matrix given row by row.
    pub fn from_real_rows(algebra: &Arc<TracedAlgebra>, rows: &[&[f64]]) -> Result<Self> {
        let n = algebra.n();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                rows: rows.len(),
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::from_fn(algebra, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(algebra: &Arc<TracedAlgebra>, diag: &[f64]) -> Result<Self> {
        let n = algebra.n();
        if diag.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                rows: diag.len(),
                cols: 1,
            });
        }
        Self::from_fn(algebra, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn identity(algebra: &Arc<TracedAlgebra>) -> Self {
        let n = algebra.n();
        Self::wrap(algebra.clone(), DMatrix::identity(n, n))
    }

    pub fn zeros(algebra: &Arc<TracedAlgebra>) -> Self {
        let n = algebra.n();
        Self::wrap(algebra.clone(), DMatrix::zeros(n, n))
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    pub fn n(&self) -> usize {
        self.algebra.n()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Same entries, different algebra of the same dimension.
    pub fn with_algebra(&self, algebra: Arc<TracedAlgebra>) -> Result<Self> {
        Self::from_matrix(algebra, self.entries.clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.algebra.clone(), self.entries.adjoint())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::wrap(self.algebra.clone(), self.entries.map(|z| z * c))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self::wrap(self.algebra.clone(), self.entries.map(|z| z * c))
    }

    /// `self + c I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.entries.clone();
        for i in 0..self.n() {
            m[(i, i)] += c;
        }
        Self::wrap(self.algebra.clone(), m)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::identity(&self.algebra);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `(a + a*) / 2`.
    pub fn real_part(&self) -> Self {
        Self::wrap(
            self.algebra.clone(),
            (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.assert_same_algebra(other);
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |a - a*|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.asymmetry() <= HERMITIAN_TOL * (1.0 + self.max_abs())
    }

    /// Unnormalized Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.entries.norm()
    }

    fn assert_same_algebra(&self, other: &Operator) {
        assert!(
            Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra,
            "operators belong to different algebras: {:?} vs {:?}",
            self.algebra.partition(),
            other.algebra.partition()
        );
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                self.assert_same_algebra(rhs);
                Operator::wrap(self.algebra.clone(), &self.entries $op &rhs.entries)
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                &self $op &rhs
            }
        }
        impl $trait<&Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                &self $op rhs
            }
        }
        impl $trait<Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator::wrap(self.algebra.clone(), -&self.entries)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        -&self
    }
}

/// Normalized trace `tau(a) = Tr(a) / n`.
pub fn trace(a: &Operator) -> Complex64 {
    a.entries.trace() / a.n() as f64
}

/// The conditional expectation `Phi` onto the block diagonal.
pub fn expectation(a: &Operator) -> Operator {
    project(a, SubspaceTag::Diag)
}

/// Zero every entry outside the support pattern of `tag`.
pub fn project(a: &Operator, tag: SubspaceTag) -> Operator {
    let alg = a.algebra();
    let n = a.n();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if alg.allows(tag, i, j) {
            a.entries[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Operator::wrap(alg.clone(), m)
}

/// Largest modulus of an entry lying outside the support pattern of `tag`.
pub fn pattern_leak(a: &Operator, tag: SubspaceTag) -> f64 {
    let alg = a.algebra();
    let n = a.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !alg.allows(tag, i, j) {
                worst = worst.max(a.entries[(i, j)].norm());
            }
        }
    }
    worst
}

pub fn membership(a: &Operator, tag: SubspaceTag, tol: f64) -> bool {
    pattern_leak(a, tag) <= tol
}

/// Eigendecomposition of a hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    algebra: Arc<TracedAlgebra>,
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    pub fn new(a: &Operator) -> Result<Self> {
        if !a.is_hermitian() {
            return Err(Error::NotHermitian {
                asymmetry: a.asymmetry(),
            });
        }
        Ok(Self::of_symmetrized(a))
    }

    /// Decomposes `(a + a*) / 2` without checking `a`.
    pub(crate) fn of_symmetrized(a: &Operator) -> Self {
        let eig = SymmetricEigen::new(a.real_part().into_matrix());
        let n = a.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
        Self {
            algebra: a.algebra().clone(),
            values,
            vectors,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `sum_i phi(s_i) P_i`.
    pub fn apply(&self, phi: impl Fn(f64) -> f64) -> Operator {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &s) in self.values.iter().enumerate() {
            let w = phi(s);
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        Operator::wrap(self.algebra.clone(), &scaled * self.vectors.adjoint())
    }

    /// Spectral projection onto the eigenvalues selected by `keep`.
    pub fn projection(&self, keep: impl Fn(f64) -> bool) -> Operator {
        self.apply(|s| if keep(s) { 1.0 } else { 0.0 })
    }
}

/// Borel functional calculus `phi(a)` for hermitian `a`.
pub fn hermitian_calculus(a: &Operator, phi: impl Fn(f64) -> f64) -> Result<Operator> {
    Ok(SpectralDecomposition::new(a)?.apply(phi))
}

/// `|a| = (a* a)^{1/2}`.
pub fn abs_value(a: &Operator) -> Operator {
    let gram = &a.adjoint() * a;
    SpectralDecomposition::of_symmetrized(&gram).apply(|s| s.max(0.0).sqrt())
}

pub fn inverse(a: &Operator) -> Result<Operator> {
    let sv = a.entries.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= SINGULAR_TOL * max {
        return Err(Error::Singular {
            ratio: if max == 0.0 { 0.0 } else { min / max },
        });
    }
    let inv = a
        .entries
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { ratio: min / max })?;
    Ok(Operator::wrap(a.algebra.clone(), inv))
}
