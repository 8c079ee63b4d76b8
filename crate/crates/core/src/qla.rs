//! Small dense complex linear algebra for the simulator.
//!
//! Everything here is sized for desk-scale problems: the largest operator the
//! rest of the crate builds is `2(t+1)` square with `t <= 16`, so dense
//! storage and a dense Hermitian eigensolver are all we need.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Tolerance for exact structural identities such as Hermiticity.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance for derived numerics: normalization, completeness, PSD.
pub const NUMERIC_TOL: f64 = 1e-9;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QlaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not real symmetric (max deviation {deviation:e})")]
    NotRealSymmetric { deviation: f64 },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error(
        "POVM elements do not sum to the identity on their support (max deviation {deviation:e})"
    )]
    Incomplete { deviation: f64 },
    #[error("outcome probabilities sum to {total}, expected 1")]
    ProbabilityMismatch { total: f64 },
    #[error("empty operand")]
    Empty,
}

pub type Result<T> = std::result::Result<T, QlaError>;

/// A complex column vector. State-valued vectors are expected to be unit norm.
#[derive(Clone, PartialEq)]
pub struct CVec(DVector<C64>);

impl CVec {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(QlaError::Empty);
        }
        Ok(Self(DVector::from_vec(amps)))
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// Computational basis vector `|k>` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amps(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn get(&self, k: usize) -> C64 {
        self.0[k]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(QlaError::NotNormalized { norm: n });
        }
        Ok(Self(self.0.unscale(n)))
    }

    /// Checks the unit-norm invariant of a state vector.
    pub fn ensure_state(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > NUMERIC_TOL {
            return Err(QlaError::NotNormalized { norm: n });
        }
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVec) -> Result<C64> {
        self.check_dim(other.dim())?;
        Ok(self.0.dotc(&other.0))
    }

    pub fn scale(&self, z: C64) -> CVec {
        Self(&self.0 * z)
    }

    /// Tensor product `self ⊗ other`, with `other` as the fast index.
    pub fn kron(&self, other: &CVec) -> CVec {
        Self(self.0.kronecker(&other.0))
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.0
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if self.dim() != found {
            return Err(QlaError::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for CVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Add for &CVec {
    type Output = CVec;
    fn add(self, rhs: &CVec) -> CVec {
        CVec(&self.0 + &rhs.0)
    }
}

impl Sub for &CVec {
    type Output = CVec;
    fn sub(self, rhs: &CVec) -> CVec {
        CVec(&self.0 - &rhs.0)
    }
}

/// A dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat(DMatrix<C64>);

impl CMat {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(QlaError::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let flat: Vec<C64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::from_row_major(n, m, &flat)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diag(entries: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// `|u><v|`.
    pub fn outer(u: &CVec, v: &CVec) -> Self {
        Self(u.0.clone() * v.0.adjoint())
    }

    /// `|v><v|`.
    pub fn projector(v: &CVec) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn adjoint(&self) -> CMat {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> CMat {
        Self(&self.0 * z)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn kron(&self, other: &CMat) -> CMat {
        Self(self.0.kronecker(&other.0))
    }

    pub fn apply(&self, v: &CVec) -> Result<CVec> {
        if self.cols() != v.dim() {
            return Err(QlaError::DimensionMismatch {
                expected: self.cols(),
                found: v.dim(),
            });
        }
        Ok(CVec(&self.0 * &v.0))
    }

    pub fn matmul(&self, other: &CMat) -> Result<CMat> {
        if self.cols() != other.rows() {
            return Err(QlaError::DimensionMismatch {
                expected: self.cols(),
                found: other.rows(),
            });
        }
        Ok(Self(&self.0 * &other.0))
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &CMat) -> Result<CMat> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    /// `<v|A|v>`.
    pub fn expectation(&self, v: &CVec) -> Result<C64> {
        let av = self.apply(v)?;
        v.inner(&av)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> Result<f64> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(QlaError::DimensionMismatch {
                expected: self.rows() * self.cols(),
                found: other.rows() * other.cols(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.rows() != self.cols() {
            return Err(QlaError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        Ok(self.rows())
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.rows().min(self.cols());
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        self.ensure_square()?;
        let dev = self.hermitian_deviation();
        if dev > STRUCTURAL_TOL * self.max_abs().max(1.0) {
            return Err(QlaError::NotHermitian { deviation: dev });
        }
        Ok(())
    }

    pub fn is_hermitian(&self) -> bool {
        self.ensure_hermitian().is_ok()
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.cols();
        let g = self.0.adjoint() * &self.0;
        (&g - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.rows() == self.cols() && self.unitarity_deviation() <= NUMERIC_TOL
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMat{:?}", self.0.shape())?;
        for i in 0..self.rows() {
            write!(f, "\n  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        CMat(&self.0 + &rhs.0)
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        CMat(&self.0 - &rhs.0)
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        CMat(&self.0 * &rhs.0)
    }
}

/// The single-qubit phase shift `diag(1, e^{iφ})`.
pub fn phase_gate(phi: f64) -> CMat {
    CMat::diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, phi)])
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVec>,
}

pub fn hermitian_eigen(a: &CMat) -> Result<HermitianEigen> {
    a.ensure_hermitian()?;
    let eig = SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| CVec(eig.eigenvectors.column(i).into_owned()))
        .collect();
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    a.ensure_hermitian()?;
    let mut v: Vec<f64> =
        a.0.clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
    v.sort_by(|x, y| y.total_cmp(x));
    Ok(v)
}

/// Sum of the absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?.iter().map(|x| x.abs()).sum())
}

/// Trace norm together with `sign(A)`, the subgradient of the trace norm at `A`.
pub fn trace_norm_with_sign(a: &CMat) -> Result<(f64, CMat)> {
    let eig = hermitian_eigen(a)?;
    let n = a.rows();
    let mut sign = CMat::zeros(n, n);
    let mut norm = 0.0;
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        norm += lambda.abs();
        if lambda.abs() > STRUCTURAL_TOL {
            let p = CMat::projector(v).scale(C64::new(lambda.signum(), 0.0));
            sign = &sign + &p;
        }
    }
    Ok((norm, sign))
}

/// Checks that `m` is real symmetric and returns it as a real matrix.
fn as_real_symmetric(m: &CMat) -> Result<DMatrix<f64>> {
    m.ensure_square()?;
    let imag = m.0.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let re = m.0.map(|z| z.re);
    let asym = (&re - re.transpose()).abs().max();
    let dev = imag.max(asym);
    if dev > STRUCTURAL_TOL * m.max_abs().max(1.0) {
        return Err(QlaError::NotRealSymmetric { deviation: dev });
    }
    Ok(re)
}

/// Full spectrum of a real symmetric matrix, descending, with real unit
/// eigenvectors whose first significant component is positive.
pub fn sym_eigen(m: &CMat) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let re = as_real_symmetric(m)?;
    let eig = SymmetricEigen::new(re);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let lead = v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
            let s = lead.signum() / n;
            v.iter_mut().for_each(|x| *x *= s);
            v
        })
        .collect();
    Ok((values, vectors))
}

/// Largest eigenvalue of a real symmetric matrix and a unit eigenvector for it.
pub fn max_eig_sym(m: &CMat) -> Result<(f64, CVec)> {
    let (values, vectors) = sym_eigen(m)?;
    let v = CVec::from_real(&vectors[0])?;
    Ok((values[0], v))
}

/// Residual `||Mv - λv||`.
pub fn eig_residual(m: &CMat, lambda: f64, v: &CVec) -> Result<f64> {
    let mv = m.apply(v)?;
    Ok((&mv - &v.scale(C64::new(lambda, 0.0))).norm())
}

/// A labeled POVM element.
#[derive(Debug, Clone)]
pub struct PovmElement<T> {
    pub outcome: T,
    pub op: CMat,
}

/// A POVM whose elements are PSD and sum to the identity on a support
/// subspace (the full space unless declared otherwise).
#[derive(Debug, Clone)]
pub struct Povm<T> {
    elements: Vec<PovmElement<T>>,
    support: Option<CMat>,
}

/// Structural deviations of a POVM, as measured by [`Povm::diagnose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmDiagnostics {
    pub min_eigenvalue: f64,
    pub completeness_deviation: f64,
    pub hermitian_deviation: f64,
}

impl PovmDiagnostics {
    pub fn passes(&self) -> bool {
        self.min_eigenvalue >= -NUMERIC_TOL
            && self.completeness_deviation <= NUMERIC_TOL
            && self.hermitian_deviation <= STRUCTURAL_TOL
    }
}

impl<T: Copy> Povm<T> {
    pub fn new(elements: Vec<PovmElement<T>>) -> Result<Self> {
        let povm = Self::new_unchecked(elements, None);
        povm.validate()?;
        Ok(povm)
    }

    /// A POVM complete on the subspace projected onto by `support`.
    pub fn with_support(elements: Vec<PovmElement<T>>, support: CMat) -> Result<Self> {
        let povm = Self::new_unchecked(elements, Some(support));
        povm.validate()?;
        Ok(povm)
    }

    /// Skips validation. Used to exercise the validators with malformed input.
    pub fn new_unchecked(elements: Vec<PovmElement<T>>, support: Option<CMat>) -> Self {
        Self { elements, support }
    }

    pub fn elements(&self) -> &[PovmElement<T>] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |e| e.op.rows())
    }

    pub fn diagnose(&self) -> Result<PovmDiagnostics> {
        let dim = self.dim();
        if dim == 0 {
            return Err(QlaError::Empty);
        }
        let mut total = CMat::zeros(dim, dim);
        let mut min_eig = f64::INFINITY;
        let mut herm: f64 = 0.0;
        for e in &self.elements {
            if e.op.rows() != dim || e.op.cols() != dim {
                return Err(QlaError::DimensionMismatch {
                    expected: dim,
                    found: e.op.rows(),
                });
            }
            herm = herm.max(e.op.hermitian_deviation());
            // Eigenvalues of the Hermitian part; asymmetry is reported separately.
            let sym = (&e.op + &e.op.adjoint()).scale(C64::new(0.5, 0.0));
            let ev = hermitian_eigenvalues(&sym)?;
            min_eig = min_eig.min(*ev.last().unwrap());
            total = &total + &e.op;
        }
        let target = self.support.clone().unwrap_or_else(|| CMat::identity(dim));
        let completeness = total.max_abs_diff(&target)?;
        Ok(PovmDiagnostics {
            min_eigenvalue: min_eig,
            completeness_deviation: completeness,
            hermitian_deviation: herm,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnose()?;
        if d.hermitian_deviation > STRUCTURAL_TOL {
            return Err(QlaError::NotHermitian {
                deviation: d.hermitian_deviation,
            });
        }
        if d.min_eigenvalue < -NUMERIC_TOL {
            return Err(QlaError::NotPositive {
                min_eigenvalue: d.min_eigenvalue,
            });
        }
        if d.completeness_deviation > NUMERIC_TOL {
            return Err(QlaError::Incomplete {
                deviation: d.completeness_deviation,
            });
        }
        Ok(())
    }

    /// Born probabilities `<ψ|E_k|ψ>` for each element, in element order.
    pub fn probabilities(&self, state: &CVec) -> Result<Vec<f64>> {
        if state.dim() != self.dim() {
            return Err(QlaError::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        self.elements
            .iter()
            .map(|e| e.op.expectation(state).map(|z| z.re))
            .collect()
    }

    pub fn probability_of(&self, state: &CVec, outcome: T) -> Result<f64>
    where
        T: PartialEq,
    {
        let probs = self.probabilities(state)?;
        Ok(self
            .elements
            .iter()
            .zip(probs)
            .filter(|(e, _)| e.outcome == outcome)
            .map(|(_, p)| p)
            .sum())
    }
}

/// Samples a POVM outcome for `state` with Born-rule probabilities.
pub fn measure_povm<T: Copy, R: Rng + ?Sized>(
    state: &CVec,
    povm: &Povm<T>,
    rng: &mut R,
) -> Result<T> {
    state.ensure_state()?;
    let probs = povm.probabilities(state)?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NUMERIC_TOL {
        return Err(QlaError::ProbabilityMismatch { total });
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (e, p) in povm.elements.iter().zip(&probs) {
        acc += p.max(0.0);
        if u < acc {
            return Ok(e.outcome);
        }
    }
    // u landed in the rounding slack above the last cumulative sum.
    let last = probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1);
    Ok(povm.elements[last].outcome)
}

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    mat: CMat,
}

impl DensityOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        mat.ensure_hermitian()?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > NUMERIC_TOL || tr.im.abs() > NUMERIC_TOL {
            return Err(QlaError::BadTrace { trace: tr.re });
        }
        let ev = hermitian_eigenvalues(&mat)?;
        let min = *ev.last().unwrap();
        if min < -NUMERIC_TOL {
            return Err(QlaError::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { mat })
    }

    pub fn pure(state: &CVec) -> Result<Self> {
        state.ensure_state()?;
        Self::new(CMat::projector(state))
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }
}

/// Haar-random unitary via QR of a complex Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    });
    let qr = g.qr();
    let (q, r) = qr.unpack();
    // Fix the phases of R's diagonal so the distribution is Haar.
    let phases = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    }));
    CMat(q * phases)
}

/// Box-Muller standard normal sample.
pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn computational_povm() -> Povm<u8> {
        Povm::new(vec![
            PovmElement {
                outcome: 0,
                op: CMat::projector(&CVec::basis(2, 0)),
            },
            PovmElement {
                outcome: 1,
                op: CMat::projector(&CVec::basis(2, 1)),
            },
        ])
        .unwrap()
    }

    #[test]
    fn phase_gate_special_values() {
        assert_eq!(
            phase_gate(0.0).max_abs_diff(&CMat::identity(2)).unwrap(),
            0.0
        );
        let z = CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(phase_gate(PI).max_abs_diff(&z).unwrap() < 1e-15);
        let s = phase_gate(PI / 2.0);
        assert!((s.get(1, 1) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(s.is_unitary());
    }

    #[test]
    fn measure_basis_state_is_deterministic() {
        let povm = computational_povm();
        let mut rng = substream(1, 0);
        for _ in 0..1000 {
            assert_eq!(
                measure_povm(&CVec::basis(2, 0), &povm, &mut rng).unwrap(),
                0
            );
        }
    }

    #[test]
    fn measure_plus_state_is_fair() {
        let povm = computational_povm();
        let plus = CVec::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let mut rng = substream(2, 0);
        let n = 1_000_000;
        let zeros = (0..n)
            .filter(|_| measure_povm(&plus, &povm, &mut rng).unwrap() == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn measure_rejects_bad_inputs() {
        let povm = computational_povm();
        let mut rng = substream(3, 0);
        let wrong_dim = CVec::basis(3, 0);
        assert!(matches!(
            measure_povm(&wrong_dim, &povm, &mut rng),
            Err(QlaError::DimensionMismatch { .. })
        ));
        let broken = Povm::new_unchecked(
            vec![PovmElement {
                outcome: 0u8,
                op: CMat::projector(&CVec::basis(2, 0)).scale(c(0.5)),
            }],
            None,
        );
        assert!(matches!(
            measure_povm(&CVec::basis(2, 0), &broken, &mut rng),
            Err(QlaError::ProbabilityMismatch { .. })
        ));
        assert!(broken.validate().is_err());
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&CMat::zeros(3, 3)).unwrap(), 0.0);
        let z = CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!((trace_norm(&z).unwrap() - 2.0).abs() < 1e-14);
        let mut bad = CMat::zeros(2, 2);
        bad.set(0, 1, c(1.0));
        assert!(matches!(
            trace_norm(&bad),
            Err(QlaError::NotHermitian { .. })
        ));
    }

    #[test]
    fn trace_norm_sign_is_consistent() {
        let a = CMat::from_real_rows(&[&[0.0, 2.0], &[2.0, 1.0]]).unwrap();
        let (n, s) = trace_norm_with_sign(&a).unwrap();
        assert!((n - trace_norm(&a).unwrap()).abs() < 1e-14);
        // tr(sign(A) A) = ||A||_1
        assert!((s.matmul(&a).unwrap().trace().re - n).abs() < 1e-12);
    }

    #[test]
    fn max_eig_examples() {
        let (l, v) = max_eig_sym(&CMat::from_real_rows(&[&[0.0]]).unwrap()).unwrap();
        assert_eq!(l, 0.0);
        assert!((v.get(0) - c(1.0)).norm() < 1e-15);

        let x = CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let (l, v) = max_eig_sym(&x).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        assert!((v.get(0) - c(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((v.get(1) - c(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!(eig_residual(&x, l, &v).unwrap() <= 1e-9);

        let mut nonsym = CMat::zeros(2, 2);
        nonsym.set(0, 1, c(1.0));
        assert!(matches!(
            max_eig_sym(&nonsym),
            Err(QlaError::NotRealSymmetric { .. })
        ));
        let mut complex = CMat::zeros(2, 2);
        complex.set(0, 1, C64::new(0.0, 1.0));
        complex.set(1, 0, C64::new(0.0, -1.0));
        assert!(max_eig_sym(&complex).is_err());
    }

    #[test]
    fn density_operator_validation() {
        let plus = CVec::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let rho = DensityOperator::pure(&plus).unwrap();
        assert!((rho.mat().trace().re - 1.0).abs() < 1e-15);
        assert!(matches!(
            DensityOperator::new(CMat::identity(2)),
            Err(QlaError::BadTrace { .. })
        ));
        let neg = CMat::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(matches!(
            DensityOperator::new(neg),
            Err(QlaError::NotPositive { .. })
        ));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = substream(9, 0);
        for dim in [1, 2, 5, 12] {
            assert!(haar_unitary(dim, &mut rng).is_unitary());
        }
    }

    #[test]
    fn kron_orders_second_factor_fastest() {
        let v = CVec::basis(3, 1).kron(&CVec::basis(2, 1));
        assert_eq!(v.dim(), 6);
        assert_eq!(v.get(3), c(1.0));
    }
}
