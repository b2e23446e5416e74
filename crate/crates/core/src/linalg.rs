//! Dense complex linear algebra for small square matrices.
//!
//! Everything here works on [`ComplexMatrix`], a row-major square matrix of
//! dimension at most [`MAX_DIM`]. Qubit indices used by [`ComplexMatrix::kron`]
//! and [`ComplexMatrix::partial_trace`] are zero-based, with qubit 0 the
//! leftmost tensor factor (most significant bit of the basis index).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported matrix dimension (four qubits).
pub const MAX_DIM: usize = 16;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Tolerance used by [`ComplexMatrix::hermitian_eigenvalues`] when checking
/// its input.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Shape("matrix dimension must be at least 1".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::Capacity { dim, max: MAX_DIM });
    }
    Ok(())
}

impl ComplexMatrix {
    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("rows must all have length equal to the row count".into()));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn from_complex_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { left: u.len(), right: v.len() });
        }
        check_dim(u.len())?;
        let dim = u.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        Ok(m)
    }

    /// Matrix unit `|i><j|` of the given dimension.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    /// Matrix product. Fails when the operands have different dimensions.
    pub fn multiply(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(ComplexMatrix { dim: n, data: out })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.scale(C64::new(s, 0.0))
    }

    /// `self * x * self^†`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.multiply(x)?.multiply(&self.adjoint())
    }

    /// Kronecker product; the result dimension must not exceed [`MAX_DIM`].
    pub fn kron(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        if dim > MAX_DIM {
            return Err(Error::Capacity { dim, max: MAX_DIM });
        }
        let mut out = Self::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Number of qubits when the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        self.dim.is_power_of_two().then(|| self.dim.trailing_zeros() as usize)
    }

    /// Reduced matrix on the qubits in `keep`, tracing out all others.
    ///
    /// `keep` may be given in any order; the kept qubits retain their
    /// original relative order. An empty `keep` yields the 1x1 matrix `[tr a]`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        let n = self
            .n_qubits()
            .ok_or_else(|| Error::Shape(format!("dimension {} is not a power of two", self.dim)))?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&q) = kept.iter().find(|&&q| q >= n) {
            return Err(Error::Shape(format!("qubit index {q} out of range for {n} qubits")));
        }
        // Bit position of qubit q within a basis index.
        let bit = |q: usize| n - 1 - q;
        let keep_mask: usize = kept.iter().map(|&q| 1 << bit(q)).sum();
        let reduce = |idx: usize| -> usize {
            kept.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> bit(q)) & 1))
        };
        let out_dim = 1 << kept.len();
        let mut out = Self::zeros(out_dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                if (i & !keep_mask) == (j & !keep_mask) {
                    out[(reduce(i), reduce(j))] += self[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dimensions");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `max |U^† U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = &self.adjoint() * self;
        g.max_abs_diff(&Self::identity(self.dim))
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(&self.multiply(other)? - &other.multiply(self)?)
    }

    /// Eigenvalues of a Hermitian matrix in descending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.hermitian_eigen()?.values)
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Eigenvalues are sorted descending; column `j` of `vectors` is the
    /// eigenvector belonging to `values[j]`.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "eigen-decomposition requires a Hermitian matrix (defect {defect:e})"
            )));
        }
        let n = self.dim;
        // Work on the exactly Hermitian part.
        let mut a = self.clone();
        for i in 0..n {
            a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
                a[(i, j)] = avg;
                a[(j, i)] = avg.conj();
            }
        }
        let mut v = Self::identity(n);
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= JACOBI_OFF_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }

        let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
        let values = pairs.iter().map(|&(x, _)| x).collect();
        let mut vectors = Self::zeros(n);
        for (col, &(_, src)) in pairs.iter().enumerate() {
            for row in 0..n {
                vectors[(row, col)] = v[(row, src)];
            }
        }
        Ok(HermitianEigen { values, vectors })
    }

    /// Applies a real function to the spectrum of a Hermitian matrix.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
        let eig = self.hermitian_eigen()?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for (k, &lam) in eig.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = eig.vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vi * eig.vectors[(j, k)].conj();
                }
            }
        }
        Ok(out)
    }

    /// Square root of a positive semidefinite matrix (negative dust clamped).
    pub fn psd_sqrt(&self) -> Result<ComplexMatrix> {
        self.hermitian_map(|x| x.max(0.0).sqrt())
    }

    /// Polar decomposition `self = U * P` with `P = sqrt(self^† self)`
    /// positive semidefinite and `U` unitary.
    ///
    /// On the kernel of `self` the unitary factor is completed with an
    /// arbitrary orthonormal set.
    pub fn polar_decompose(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let n = self.dim;
        let gram = &self.adjoint() * self;
        let eig = gram.hermitian_eigen()?;
        let sigma: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
        let sigma_max = sigma.first().copied().unwrap_or(0.0);
        let cutoff = 1e-12 * sigma_max.max(f64::MIN_POSITIVE);

        let mut p = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                let vi = eig.vectors[(i, k)] * sigma[k];
                for j in 0..n {
                    p[(i, j)] += vi * eig.vectors[(j, k)].conj();
                }
            }
        }

        // Left singular vectors for the retained singular values, in
        // descending order, re-orthonormalized against earlier ones.
        let mut left: Vec<Option<Vec<C64>>> = vec![None; n];
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
        for k in 0..n {
            if sigma[k] <= cutoff {
                continue;
            }
            let vk = eig.vectors.column(k);
            let mut u = self.apply_vec(&vk);
            for x in u.iter_mut() {
                *x /= sigma[k];
            }
            orthogonalize(&mut u, &basis);
            orthogonalize(&mut u, &basis);
            let norm = vec_norm(&u);
            if norm < 0.5 {
                continue;
            }
            for x in u.iter_mut() {
                *x /= norm;
            }
            basis.push(u.clone());
            left[k] = Some(u);
        }
        // Complete the remaining directions from the standard basis.
        for k in 0..n {
            if left[k].is_some() {
                continue;
            }
            let mut best: Option<Vec<C64>> = None;
            let mut best_norm = 0.0;
            for e in 0..n {
                let mut u = vec![ZERO; n];
                u[e] = ONE;
                orthogonalize(&mut u, &basis);
                orthogonalize(&mut u, &basis);
                let norm = vec_norm(&u);
                if norm > best_norm {
                    best_norm = norm;
                    best = Some(u);
                }
            }
            let mut u = best.expect("orthonormal completion always finds a direction");
            for x in u.iter_mut() {
                *x /= best_norm;
            }
            basis.push(u.clone());
            left[k] = Some(u);
        }

        let mut unitary = Self::zeros(n);
        for (k, u) in left.into_iter().enumerate() {
            let u = u.expect("every column assigned");
            for i in 0..n {
                for j in 0..n {
                    unitary[(i, j)] += u[i] * eig.vectors[(j, k)].conj();
                }
            }
        }
        Ok((unitary, p))
    }

    /// Matrix-vector product.
    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Haar-distributed random unitary, deterministic in `seed`.
    pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
        check_dim(dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::random_unitary_with(dim, &mut rng))
    }

    /// Haar-distributed random unitary drawn from `rng`.
    pub fn random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
        let cols = random_isometry_columns(dim, dim, rng);
        let mut m = Self::zeros(dim);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..dim {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

/// Result of [`ComplexMatrix::hermitian_eigen`].
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if r <= 1e-300 || r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let w = apq / r;
    let zeta = (aqq - app) / (2.0 * r);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Rotation J with J_pp = J_qq = c, J_pq = s w, J_qp = -s conj(w).
    let j_pp = C64::new(c, 0.0);
    let j_pq = w * s;
    let j_qp = -w.conj() * s;
    let j_qq = C64::new(c, 0.0);
    let n = a.dim;
    // A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    // A <- J^† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

fn vec_norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(u: &mut [C64], basis: &[Vec<C64>]) {
    for b in basis {
        let overlap: C64 = b.iter().zip(u.iter()).map(|(bi, ui)| bi.conj() * ui).sum();
        for (ui, bi) in u.iter_mut().zip(b) {
            *ui -= overlap * bi;
        }
    }
}

/// Standard complex Gaussian sample with `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Columns of a Haar-random isometry from `C^cols` into `C^rows`.
///
/// Gram-Schmidt on a complex Gaussian matrix; the triangular factor has a
/// positive real diagonal, so no extra phase correction is needed. Not
/// bounded by [`MAX_DIM`], which lets Stinespring dilations exceed it.
pub fn random_isometry_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<C64>> {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut u: Vec<C64> = (0..rows).map(|_| complex_gaussian(rng)).collect();
        let raw = vec_norm(&u);
        orthogonalize(&mut u, &basis);
        orthogonalize(&mut u, &basis);
        let norm = vec_norm(&u);
        // Gaussian columns are almost surely independent; redraw otherwise.
        if norm <= 1e-8 * raw {
            continue;
        }
        for x in u.iter_mut() {
            *x /= norm;
        }
        basis.push(u);
    }
    basis
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on mismatched dimensions; use [`ComplexMatrix::multiply`] for
    /// a fallible product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.multiply(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}
