//! Density matrices, Kraus channels and the scalar functionals built on
//! them: von Neumann entropy, entanglement fidelity, distortion, entropy
//! exchange, coherent information and the average conditional output
//! entropy. All entropies are in bits.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{random_isometry_columns, ComplexMatrix, C64, MAX_DIM, ONE, ZERO};

/// Tolerance for the Hermitian, positivity and unit-trace checks on states.
pub const STATE_TOL: f64 = 1e-10;
/// Looser tolerance accepted by [`von_neumann_entropy`] on raw matrices.
pub const ENTROPY_INPUT_TOL: f64 = 1e-8;
/// Output traces at or below this are treated as annihilation.
pub const ANNIHILATION_TOL: f64 = 1e-14;
/// Eigenvalues below this are clamped to zero before taking logarithms.
pub const EIGEN_CLAMP: f64 = 1e-14;
/// Completeness tolerance for trace-preserving channels.
pub const TP_TOL: f64 = 1e-10;

/// A Hermitian, positive semidefinite, unit-trace matrix on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    n_qubits: usize,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let n_qubits = mat
            .n_qubits()
            .ok_or_else(|| Error::Shape(format!("density matrix dimension {} is not a power of two", mat.dim())))?;
        validate_state(&mat, STATE_TOL)?;
        Ok(Self { mat, n_qubits })
    }

    /// `p0 |0><0| + (1 - p0) |1><1|`.
    pub fn diagonal_qubit(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::Domain(format!("probability {p0} outside [0, 1]")));
        }
        Self::new(ComplexMatrix::from_diag(&[p0, 1.0 - p0]))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if dim > MAX_DIM {
            return Err(Error::Capacity { dim, max: MAX_DIM });
        }
        Self::new(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// Projector onto a normalized pure state.
    pub fn pure(state: &[C64]) -> Result<Self> {
        let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Contract(format!("pure state has squared norm {norm}, expected 1")));
        }
        Self::new(ComplexMatrix::outer(state, state)?)
    }

    /// `self^{\otimes n}`.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("tensor power must be at least 1".into()));
        }
        let mut out = self.mat.clone();
        for _ in 1..n {
            out = out.kron(&self.mat)?;
        }
        Ok(Self { mat: out, n_qubits: self.n_qubits * n })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn entropy(&self) -> f64 {
        entropy_unchecked(&self.mat)
    }
}

fn validate_state(mat: &ComplexMatrix, tol: f64) -> Result<()> {
    let defect = mat.hermiticity_defect();
    if defect > tol {
        return Err(Error::Contract(format!("state is not Hermitian (defect {defect:e})")));
    }
    let tr = mat.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::Contract(format!("state trace is {tr}, expected 1")));
    }
    let min = mat.hermitian_eigenvalues()?.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::Contract(format!("state has negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// An ordered list of operation elements `{A_i}` acting as
/// `rho -> sum_i A_i rho A_i^†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    elements: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

impl KrausChannel {
    /// Builds a channel. When `trace_preserving` is claimed the completeness
    /// relation `sum_i A_i^† A_i = I` is checked to [`TP_TOL`].
    pub fn new(elements: Vec<ComplexMatrix>, trace_preserving: bool) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Shape("a channel needs at least one operation element".into()))?;
        let dim = first.dim();
        if let Some(bad) = elements.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: bad.dim() });
        }
        let ch = Self { elements, trace_preserving };
        if trace_preserving {
            let defect = ch.completeness_defect();
            if defect > TP_TOL {
                return Err(Error::Contract(format!(
                    "operation elements violate the trace-preserving condition (defect {defect:e})"
                )));
            }
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self { elements: vec![ComplexMatrix::identity(dim)], trace_preserving: true }
    }

    /// Single-element channel; not assumed trace preserving.
    pub fn single(a: ComplexMatrix) -> Self {
        Self { elements: vec![a], trace_preserving: false }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u], true)
    }

    /// Projective measurement in the computational basis, `{|i><i|}`.
    pub fn dephasing(dim: usize) -> Self {
        let elements = (0..dim).map(|i| ComplexMatrix::unit(dim, i, i)).collect();
        Self { elements, trace_preserving: true }
    }

    /// Random trace-preserving channel with `k` elements on a `dim`-level
    /// system, read off a Haar-random Stinespring isometry
    /// `|s> -> sum_i A_i |s> |i>_E`.
    pub fn random_stinespring<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Self {
        assert!((1..=MAX_DIM).contains(&dim) && k >= 1);
        let cols = random_isometry_columns(dim * k, dim, rng);
        let elements = (0..k)
            .map(|i| {
                let mut a = ComplexMatrix::zeros(dim);
                for (s, col) in cols.iter().enumerate() {
                    for out in 0..dim {
                        a[(out, s)] = col[out * k + i];
                    }
                }
                a
            })
            .collect();
        Self { elements, trace_preserving: true }
    }

    /// Channel whose elements are all pairwise Kronecker products.
    pub fn tensor(&self, other: &KrausChannel) -> Result<Self> {
        let mut elements = Vec::with_capacity(self.len() * other.len());
        for a in &self.elements {
            for b in &other.elements {
                elements.push(a.kron(b)?);
            }
        }
        Ok(Self { elements, trace_preserving: self.trace_preserving && other.trace_preserving })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The trace-preserving claim recorded at construction.
    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `max |sum_i A_i^† A_i - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for a in &self.elements {
            sum = &sum + &(&a.adjoint() * a);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    fn check_dims(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { left: self.dim(), right: dim });
        }
        Ok(())
    }

    fn require_trace_preserving(&self) -> Result<()> {
        let defect = self.completeness_defect();
        if defect > TP_TOL {
            return Err(Error::Contract(format!("channel is not trace preserving (defect {defect:e})")));
        }
        Ok(())
    }

    /// `sum_i A_i x A_i^†` for an arbitrary operator `x`.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dims(x.dim())?;
        let mut out = ComplexMatrix::zeros(x.dim());
        for a in &self.elements {
            out = &out + &a.conjugate(x)?;
        }
        Ok(out)
    }
}

/// Applies a channel to a state. Returns the unnormalized output and its
/// trace (the success weight); fails if the weight is at most
/// [`ANNIHILATION_TOL`].
pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<(ComplexMatrix, f64)> {
    let out = ch.apply_operator(rho.matrix())?;
    let weight = out.trace().re;
    if weight <= ANNIHILATION_TOL {
        return Err(Error::Annihilation { weight });
    }
    Ok((out, weight))
}

/// Normalized output state `E(rho) / tr E(rho)`.
pub fn apply_normalized(ch: &KrausChannel, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let (out, w) = apply(ch, rho)?;
    Ok(out.scale_real(1.0 / w))
}

/// Entropy in bits of a probability spectrum, clamping dust below
/// [`EIGEN_CLAMP`].
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > EIGEN_CLAMP)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

fn entropy_unchecked(mat: &ComplexMatrix) -> f64 {
    spectrum_entropy(&mat.hermitian_eigenvalues().expect("state is Hermitian"))
}

/// `S(sigma) = -tr(sigma log2 sigma)` for a normalized state given as a raw
/// matrix, checked to [`ENTROPY_INPUT_TOL`].
pub fn von_neumann_entropy(sigma: &ComplexMatrix) -> Result<f64> {
    let defect = sigma.hermiticity_defect();
    if defect > ENTROPY_INPUT_TOL {
        return Err(Error::Contract(format!("entropy of a non-Hermitian matrix (defect {defect:e})")));
    }
    let tr = sigma.trace();
    if (tr.re - 1.0).abs() > ENTROPY_INPUT_TOL || tr.im.abs() > ENTROPY_INPUT_TOL {
        return Err(Error::Contract(format!("entropy of a matrix with trace {tr}")));
    }
    let values = sigma.hermitian_eigenvalues()?;
    if let Some(&min) = values.last() {
        if min < -ENTROPY_INPUT_TOL {
            return Err(Error::Contract(format!("entropy of a matrix with eigenvalue {min:e}")));
        }
    }
    Ok(spectrum_entropy(&values))
}

/// Shannon binary entropy `h2(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(Error::Domain(format!("binary entropy argument {p} outside [0, 1]")));
    }
    Ok(h2(p))
}

/// [`binary_entropy`] without the domain check; arguments are clamped.
pub(crate) fn h2(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Entanglement fidelity `sum_i |tr(A_i rho)|^2 / tr E(rho)`.
pub fn entanglement_fidelity(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    let (_, weight) = apply(ch, rho)?;
    let mut num = 0.0;
    for a in ch.elements() {
        num += (a * rho.matrix()).trace().norm_sqr();
    }
    Ok(num / weight)
}

/// `1 - F_e(rho, ch)`.
pub fn distortion(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    Ok(1.0 - entanglement_fidelity(rho, ch)?)
}

/// The k x k matrix `W_ij = tr(A_i rho A_j^†) / tr E(rho)`.
pub fn exchange_matrix(rho: &DensityMatrix, ch: &KrausChannel) -> Result<ComplexMatrix> {
    let k = ch.len();
    if k > MAX_DIM {
        return Err(Error::Capacity { dim: k, max: MAX_DIM });
    }
    let (_, weight) = apply(ch, rho)?;
    let left: Vec<ComplexMatrix> = ch.elements().iter().map(|a| a * rho.matrix()).collect();
    let mut w = ComplexMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            w[(i, j)] = (&left[i] * &ch.elements()[j].adjoint()).trace() / weight;
        }
    }
    Ok(w)
}

/// Entropy exchange `S(W)`.
pub fn entropy_exchange(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    if ch.len() == 1 {
        // W is the 1x1 matrix [1].
        apply(ch, rho)?;
        return Ok(0.0);
    }
    let w = exchange_matrix(rho, ch)?;
    von_neumann_entropy(&w)
}

/// Coherent information `S(E(rho)/tr E(rho)) - S_e(rho, E)`.
pub fn coherent_information(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    let out = apply_normalized(ch, rho)?;
    Ok(von_neumann_entropy(&out)? - entropy_exchange(rho, ch)?)
}

/// Probability and normalized output of each single-element operation.
/// Outputs with probability at most [`ANNIHILATION_TOL`] are `None`.
pub fn conditional_outputs(ch: &KrausChannel, rho: &DensityMatrix) -> Result<Vec<(f64, Option<ComplexMatrix>)>> {
    ch.check_dims(rho.dim())?;
    ch.elements()
        .iter()
        .map(|a| {
            let out = a.conjugate(rho.matrix())?;
            let lambda = out.trace().re;
            if lambda <= ANNIHILATION_TOL {
                Ok((lambda.max(0.0), None))
            } else {
                Ok((lambda, Some(out.scale_real(1.0 / lambda))))
            }
        })
        .collect()
}

/// Average conditional output entropy `sum_i lambda_i S(A_i rho A_i^† / lambda_i)`
/// with `lambda_i = tr(A_i rho A_i^†)`, for a trace-preserving channel.
pub fn average_entropy(ch: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    ch.require_trace_preserving()?;
    let mut total = 0.0;
    for (lambda, out) in conditional_outputs(ch, rho)? {
        if let Some(out) = out {
            total += lambda * entropy_unchecked(&out);
        }
    }
    Ok(total)
}

/// Average fidelity `sum_j p_j <psi_j| E(|psi_j><psi_j|) |psi_j>` over a
/// pure-state ensemble.
pub fn average_pure_state_fidelity(ensemble: &[(Vec<C64>, f64)], ch: &KrausChannel) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::Domain("empty ensemble".into()));
    }
    ch.require_trace_preserving()?;
    let total: f64 = ensemble.iter().map(|(_, p)| *p).sum();
    if (total - 1.0).abs() > STATE_TOL || ensemble.iter().any(|(_, p)| *p < 0.0) {
        return Err(Error::Domain(format!("ensemble probabilities must be non-negative and sum to 1 (sum {total})")));
    }
    let mut fidelity = 0.0;
    for (psi, p) in ensemble {
        if psi.len() != ch.dim() {
            return Err(Error::DimensionMismatch { left: ch.dim(), right: psi.len() });
        }
        let proj = DensityMatrix::pure(psi)?;
        let out = ch.apply_operator(proj.matrix())?;
        let v = out.apply_vec(psi);
        let overlap: C64 = psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        fidelity += p * overlap.re;
    }
    Ok(fidelity)
}

/// Block layout of a [`ChoiMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiConvention {
    /// Block `(i, j)` holds the image of the input matrix unit `|i><j|`.
    InputBlocks,
}

/// Choi representation `sum_ij |i><j| (x) T(|i><j|)` of a single-qubit map.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    mat: ComplexMatrix,
    convention: ChoiConvention,
}

impl ChoiMatrix {
    /// Builds the Choi matrix of a linear map on 2x2 matrices.
    pub fn from_map(map: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>) -> Result<Self> {
        let mut mat = ComplexMatrix::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                let image = map(&ComplexMatrix::unit(2, i, j))?;
                if image.dim() != 2 {
                    return Err(Error::DimensionMismatch { left: 2, right: image.dim() });
                }
                for a in 0..2 {
                    for b in 0..2 {
                        mat[(2 * i + a, 2 * j + b)] = image[(a, b)];
                    }
                }
            }
        }
        Ok(Self { mat, convention: ChoiConvention::InputBlocks })
    }

    pub fn from_kraus(ch: &KrausChannel) -> Result<Self> {
        if ch.dim() != 2 {
            return Err(Error::DimensionMismatch { left: 2, right: ch.dim() });
        }
        Self::from_map(|x| ch.apply_operator(x))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn convention(&self) -> ChoiConvention {
        self.convention
    }

    /// Image of `|i><j|`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2);
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] = self.mat[(2 * i + a, 2 * j + b)];
            }
        }
        out
    }

    /// Applies the represented map to a 2x2 operator.
    pub fn apply(&self, sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
        if sigma.dim() != 2 {
            return Err(Error::DimensionMismatch { left: 2, right: sigma.dim() });
        }
        let mut out = ComplexMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                if sigma[(i, j)] != ZERO {
                    out = &out + &self.block(i, j).scale(sigma[(i, j)]);
                }
            }
        }
        Ok(out)
    }
}

/// Marginal map on qubit `alpha` (zero-based) of an n-qubit channel: the
/// input operator is placed in slot `alpha`, `rho` in every other slot,
/// and all other output qubits are traced out.
pub fn marginal_channel(ch: &KrausChannel, rho: &DensityMatrix, alpha: usize) -> Result<ChoiMatrix> {
    if rho.n_qubits() != 1 {
        return Err(Error::Shape("marginal channels need a single-qubit source state".into()));
    }
    let n = ch
        .elements()[0]
        .n_qubits()
        .ok_or_else(|| Error::Shape(format!("channel dimension {} is not a power of two", ch.dim())))?;
    if n == 0 || n > 3 {
        return Err(Error::Shape(format!("marginal channels support 1 to 3 qubits, got {n}")));
    }
    if alpha >= n {
        return Err(Error::Domain(format!("qubit index {alpha} out of range for {n} qubits")));
    }
    ChoiMatrix::from_map(|sigma| {
        let mut input = ComplexMatrix::identity(1);
        for slot in 0..n {
            let factor = if slot == alpha { sigma } else { rho.matrix() };
            input = input.kron(factor)?;
        }
        ch.apply_operator(&input)?.partial_trace(&[alpha])
    })
}

/// Entanglement fidelity of the map represented by `choi`, evaluated on the
/// purification `sum_m |m>_R (x) sqrt(rho)|m>_Q` and normalized by the
/// output trace `tr T(rho)`.
pub fn choi_entanglement_fidelity(choi: &ChoiMatrix, rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 1 {
        return Err(Error::Shape("Choi fidelity needs a single-qubit state".into()));
    }
    let root = rho.matrix().psd_sqrt()?;
    // F = sum_ij ( sqrt(rho) T(sqrt(rho) |i><j| sqrt(rho)) sqrt(rho) )_ij
    let mut fidelity = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            let input = &(&root * &ComplexMatrix::unit(2, i, j)) * &root;
            let image = choi.apply(&input)?;
            let sandwiched = &(&root * &image) * &root;
            fidelity += sandwiched[(i, j)];
        }
    }
    let weight = choi.apply(rho.matrix())?.trace().re;
    if weight <= ANNIHILATION_TOL {
        return Err(Error::Annihilation { weight });
    }
    Ok(fidelity.re / weight)
}

/// Per-qubit distortion `(1/n) sum_alpha (1 - F_e(rho, T^alpha))` of an
/// n-qubit channel acting on `rho^{\otimes n}`.
pub fn block_distortion(ch: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let n = ch
        .elements()[0]
        .n_qubits()
        .ok_or_else(|| Error::Shape(format!("channel dimension {} is not a power of two", ch.dim())))?;
    if n == 0 {
        return Err(Error::Shape("block distortion needs at least one qubit".into()));
    }
    let mut total = 0.0;
    for alpha in 0..n {
        let marginal = marginal_channel(ch, rho, alpha)?;
        total += 1.0 - choi_entanglement_fidelity(&marginal, rho)?;
    }
    Ok(total / n as f64)
}

/// Computational basis vector `|index>`.
pub fn basis_state(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}
