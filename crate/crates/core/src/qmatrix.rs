//! Small dense complex linear algebra for 2- and 4-dimensional Hilbert spaces.
//!
//! Everything the engine touches is a 2x2 or 4x4 complex matrix, so this
//! module keeps its own row-major storage instead of pulling in a general
//! linear-algebra crate. Eigenvalues of Hermitian matrices come from cyclic
//! Jacobi rotations, which are exact enough and unconditionally stable at
//! these dimensions.

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Tolerance for algebraic identities (Hermiticity, unit trace).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for unitarity of composed pulse operators.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Negative eigenvalue slack admitted by the positivity check.
pub const POSITIVITY_SLACK: f64 = 1e-12;
/// Off-diagonal norm at which the Jacobi sweep is considered converged.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("unsupported dimension {0}: only 2 and 4 are used")]
    UnsupportedDimension(usize),
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("Jacobi eigensolver failed to converge")]
    NoConvergence,
}

/// Which spin of the two-spin register an operation addresses.
///
/// Spin 1 is the left (most significant) tensor factor; the four-dimensional
/// basis is ordered |dn dn>, |dn up>, |up dn>, |up up>.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    One,
    Two,
}

impl Spin {
    pub fn other(self) -> Spin {
        match self {
            Spin::One => Spin::Two,
            Spin::Two => Spin::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Spin::One => 1,
            Spin::Two => 2,
        }
    }

    pub fn from_index(i: usize) -> Result<Spin, MatrixError> {
        match i {
            1 => Ok(Spin::One),
            2 => Ok(Spin::Two),
            _ => Err(MatrixError::UnsupportedDimension(i)),
        }
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Dense square complex matrix, dimension 2 or 4, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    entries: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Result<CMatrix, MatrixError> {
        if dim != 2 && dim != 4 {
            return Err(MatrixError::UnsupportedDimension(dim));
        }
        Ok(CMatrix {
            dim,
            entries: vec![Complex::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<CMatrix, MatrixError> {
        let mut m = CMatrix::zeros(dim)?;
        for i in 0..dim {
            m.set(i, i, Complex::new(1.0, 0.0));
        }
        Ok(m)
    }

    /// Build from row-major entries, rejecting NaN/Inf components.
    pub fn from_entries(dim: usize, entries: Vec<Complex>) -> Result<CMatrix, MatrixError> {
        if dim != 2 && dim != 4 {
            return Err(MatrixError::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(MatrixError::DimensionMismatch(dim, entries.len()));
        }
        for (k, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(MatrixError::NonFinite(k / dim, k % dim));
            }
        }
        Ok(CMatrix { dim, entries })
    }

    /// Convenience constructor from real row arrays.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<CMatrix, MatrixError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(MatrixError::DimensionMismatch(dim, row.len()));
            }
            entries.extend(row.iter().map(|&x| Complex::new(x, 0.0)));
        }
        CMatrix::from_entries(dim, entries)
    }

    pub fn diagonal(values: &[Complex]) -> Result<CMatrix, MatrixError> {
        let mut m = CMatrix::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex) {
        self.entries[row * self.dim + col] = value;
    }

    /// Standard matrix product.
    pub fn mul(&self, rhs: &CMatrix) -> Result<CMatrix, MatrixError> {
        if self.dim != rhs.dim {
            return Err(MatrixError::DimensionMismatch(self.dim, rhs.dim));
        }
        let n = self.dim;
        let mut out = CMatrix::zeros(n)?;
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == Complex::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix {
            dim: n,
            entries: vec![Complex::new(0.0, 0.0); n * n],
        };
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Kronecker product; the left operand is the most significant factor.
    pub fn tensor(&self, rhs: &CMatrix) -> Result<CMatrix, MatrixError> {
        let n = self.dim * rhs.dim;
        let mut out = CMatrix::zeros(n)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                for k in 0..rhs.dim {
                    for l in 0..rhs.dim {
                        out.set(i * rhs.dim + k, j * rhs.dim + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn add(&self, rhs: &CMatrix) -> Result<CMatrix, MatrixError> {
        if self.dim != rhs.dim {
            return Err(MatrixError::DimensionMismatch(self.dim, rhs.dim));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CMatrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn sub(&self, rhs: &CMatrix) -> Result<CMatrix, MatrixError> {
        if self.dim != rhs.dim {
            return Err(MatrixError::DimensionMismatch(self.dim, rhs.dim));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CMatrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn scale(&self, s: Complex) -> CMatrix {
        CMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from another matrix.
    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        debug_assert_eq!(self.dim, rhs.dim);
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max deviation from Hermiticity, ||A - A^dag||_max.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Max deviation of A A^dag from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.mul(&self.adjoint()).expect("same dim");
        let id = CMatrix::identity(self.dim).expect("valid dim");
        prod.max_abs_diff(&id)
    }

    /// Frobenius norm of the off-diagonal part.
    fn offdiagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    s += self.get(i, j).norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

/// Unitary operator on the one- or two-spin space.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    mat: CMatrix,
}

impl Unitary {
    pub fn new(mat: CMatrix) -> Result<Unitary, MatrixError> {
        let dev = mat.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(MatrixError::NotUnitary(dev));
        }
        Ok(Unitary { mat })
    }

    pub fn identity(dim: usize) -> Unitary {
        Unitary {
            mat: CMatrix::identity(dim).expect("valid dim"),
        }
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary {
            mat: self.mat.adjoint(),
        }
    }

    /// Composition `self * rhs` (rhs acts first).
    pub fn compose(&self, rhs: &Unitary) -> Result<Unitary, MatrixError> {
        Unitary::new(self.mat.mul(&rhs.mat)?)
    }

    /// Lift a single-spin unitary into the two-spin space.
    pub fn embed(&self, target: Spin) -> Result<Unitary, MatrixError> {
        if self.dim() != 2 {
            return Err(MatrixError::UnsupportedDimension(self.dim()));
        }
        let id = CMatrix::identity(2)?;
        let mat = match target {
            Spin::One => self.mat.tensor(&id)?,
            Spin::Two => id.tensor(&self.mat)?,
        };
        Unitary::new(mat)
    }
}

/// Hermitian, unit-trace, positive semidefinite state of one or two spins.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<DensityMatrix, MatrixError> {
        let herm = mat.hermiticity_deviation();
        if herm > ALGEBRAIC_TOL {
            return Err(MatrixError::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > ALGEBRAIC_TOL || tr.im.abs() > ALGEBRAIC_TOL {
            return Err(MatrixError::NotDensity(format!(
                "trace {:.17} + {:.3e}i is not 1",
                tr.re, tr.im
            )));
        }
        let eigs = hermitian_eigenvalues(&mat)?;
        if let Some(&lo) = eigs.first() {
            if lo < -POSITIVITY_SLACK {
                return Err(MatrixError::NotDensity(format!(
                    "negative eigenvalue {lo:.3e}"
                )));
            }
        }
        Ok(DensityMatrix { mat })
    }

    /// Pure state |psi><psi| from an un-normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex]) -> Result<DensityMatrix, MatrixError> {
        let dim = amplitudes.len();
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(MatrixError::NotDensity("zero state vector".into()));
        }
        let mut mat = CMatrix::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                mat.set(i, j, amplitudes[i] * amplitudes[j].conj() / norm);
            }
        }
        DensityMatrix::new(mat)
    }

    /// Classical mixture on the computational basis.
    pub fn from_populations(populations: &[f64]) -> Result<DensityMatrix, MatrixError> {
        let values: Vec<Complex> = populations.iter().map(|&p| Complex::new(p, 0.0)).collect();
        DensityMatrix::new(CMatrix::diagonal(&values)?)
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Diagonal of the state in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat.get(i, i).re).collect()
    }

    /// Conjugation `U rho U^dag`; the result is revalidated.
    pub fn apply_unitary(&self, u: &Unitary) -> Result<DensityMatrix, MatrixError> {
        if u.dim() != self.dim() {
            return Err(MatrixError::DimensionMismatch(u.dim(), self.dim()));
        }
        let m = u.mat().mul(&self.mat)?.mul(&u.mat().adjoint())?;
        DensityMatrix::new(m)
    }

    /// Reduced state of the kept spin of a two-spin density matrix.
    pub fn partial_trace(&self, keep: Spin) -> Result<DensityMatrix, MatrixError> {
        if self.dim() != 4 {
            return Err(MatrixError::UnsupportedDimension(self.dim()));
        }
        let mut red = CMatrix::zeros(2)?;
        for a in 0..2 {
            for b in 0..2 {
                let mut s = Complex::new(0.0, 0.0);
                for c in 0..2 {
                    let (row, col) = match keep {
                        Spin::One => (2 * a + c, 2 * b + c),
                        Spin::Two => (2 * c + a, 2 * c + b),
                    };
                    s += self.mat.get(row, col);
                }
                red.set(a, b, s);
            }
        }
        DensityMatrix::new(red)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, MatrixError> {
        hermitian_eigenvalues(&self.mat)
    }
}

/// Trace distance (1/2) ||rho - sigma||_1 between two states.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, MatrixError> {
    let diff = a.mat().sub(b.mat())?;
    let eigs = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>())
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi rotations.
///
/// Each rotation annihilates one off-diagonal pair; sweeps repeat until the
/// off-diagonal Frobenius norm falls below `JACOBI_OFFDIAG_TOL` (relative to
/// the matrix scale). Input must be Hermitian within 1e-10.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>, MatrixError> {
    let herm = a.hermiticity_deviation();
    if herm > 1e-10 {
        return Err(MatrixError::NotHermitian(herm));
    }
    let n = a.dim();
    let mut m = a.clone();
    // Symmetrize away the sub-tolerance asymmetry so rotations stay exact.
    for i in 0..n {
        for j in 0..n {
            let h = (m.get(i, j) + m.get(j, i).conj()) * Complex::new(0.5, 0.0);
            m.set(i, j, h);
        }
    }
    let scale = m.max_abs().max(1.0);
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        if m.offdiagonal_norm() <= JACOBI_OFFDIAG_TOL * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.norm() <= f64::EPSILON * scale {
                    continue;
                }
                // Phase that makes the pivot real, then a real rotation.
                let phi = apq.arg();
                let b = apq.norm();
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R = P * G with P = diag(1, e^{-i phi}) in the (p, q) plane.
                let rpp = Complex::new(c, 0.0);
                let rpq = Complex::new(s, 0.0);
                let rqp = Complex::from_polar(-s, -phi);
                let rqq = Complex::from_polar(c, -phi);
                // A <- R^dag A R applied to rows/columns p and q.
                for j in 0..n {
                    let mpj = m.get(p, j);
                    let mqj = m.get(q, j);
                    m.set(p, j, rpp.conj() * mpj + rqp.conj() * mqj);
                    m.set(q, j, rpq.conj() * mpj + rqq.conj() * mqj);
                }
                for i in 0..n {
                    let mip = m.get(i, p);
                    let miq = m.get(i, q);
                    m.set(i, p, mip * rpp + miq * rqp);
                    m.set(i, q, mip * rpq + miq * rqq);
                }
            }
        }
    }
    if m.offdiagonal_norm() > JACOBI_OFFDIAG_TOL * scale {
        return Err(MatrixError::NoConvergence);
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eigs)
}

/// Diagonal evolution e^{-i H t} for a Hamiltonian diagonal in the
/// computational basis, given its diagonal energies.
pub fn mat_exp_diag_phase(h_diag: &[f64], t: f64) -> Result<Unitary, MatrixError> {
    let values: Vec<Complex> = h_diag
        .iter()
        .map(|&h| Complex::from_polar(1.0, -h * t))
        .collect();
    Unitary::new(CMatrix::diagonal(&values)?)
}
