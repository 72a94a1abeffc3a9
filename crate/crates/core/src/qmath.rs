//! Dense complex linear algebra for the 2x2 and 4x4 Hermitian operators that
//! appear in single- and two-qubit Born-rule evaluation.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (hermiticity, trace, completeness).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue positivity.
pub const POSITIVITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix of dimension 2 or 4, stored row-major.
///
/// Two-qubit operators use the index `row_a * 2 + row_b` for `a ⊗ b`, so the
/// first tensor factor always acts on party 1.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [Complex64; 16],
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<(f64, f64)>> = (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| (self[(r, c)].re, self[(r, c)].im))
                    .collect()
            })
            .collect();
        f.debug_struct("ComplexMatrix")
            .field("dim", &self.dim)
            .field("rows", &rows)
            .finish()
    }
}

impl ComplexMatrix {
    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn new(dim: usize, entries: &[Complex64]) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let mut data = [ZERO; 16];
        data[..entries.len()].copy_from_slice(entries);
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(dim, &entries)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: [ZERO; 16],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    /// Rank-one projector `|v⟩⟨v|` (the vector is used as given, not normalized).
    pub fn projector(v: &[Complex64]) -> Result<Self> {
        let mut m = Self::zeros(v.len())?;
        for r in 0..v.len() {
            for c in 0..v.len() {
                m[(r, c)] = v[r] * v[c].conj();
            }
        }
        Ok(m)
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("static shape")
    }

    pub fn pauli_y() -> Self {
        Self::new(
            2,
            &[
                ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                ZERO,
            ],
        )
        .expect("static shape")
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("static shape")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = *self;
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(r, c)] = self[(c, r)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = *self;
        for z in out.data.iter_mut() {
            *z *= factor;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        same_dim(self, rhs)?;
        let n = self.dim;
        let mut out = Self::zeros(n)?;
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] = (0..n).map(|k| self[(r, k)] * rhs[(k, c)]).sum();
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        same_dim(self, rhs)?;
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += *b;
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        same_dim(self, rhs)?;
        Ok(self
            .entries()
            .iter()
            .zip(rhs.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("same shape")
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Conjugation `u · self · u†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.checked_mul(self)?.checked_mul(&u.adjoint())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.dim && c < self.dim);
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.dim && c < self.dim);
        &mut self.data[r * self.dim + c]
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs)
            .expect("dimension mismatch in matrix addition")
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> Self {
        self.checked_add(&rhs.scale(-ONE))
            .expect("dimension mismatch in matrix subtraction")
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs)
            .expect("dimension mismatch in matrix product")
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim == b.dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        })
    }
}

/// Kronecker product of two single-qubit operators.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim,
            });
        }
    }
    let mut out = ComplexMatrix::zeros(4)?;
    for ra in 0..2 {
        for ca in 0..2 {
            for rb in 0..2 {
                for cb in 0..2 {
                    out[(ra * 2 + rb, ca * 2 + cb)] = a[(ra, ca)] * b[(rb, cb)];
                }
            }
        }
    }
    Ok(out)
}

/// `Re Tr(a · b)` for Hermitian `a`, `b`.
///
/// The trace of a product of Hermitian matrices is real; an imaginary residue
/// above [`ALGEBRA_TOL`] (relative to the magnitudes involved) means one of the
/// inputs was not Hermitian.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let n = a.dim;
    let mut acc = ZERO;
    let mut scale = 0.0_f64;
    for r in 0..n {
        for k in 0..n {
            let t = a[(r, k)] * b[(k, r)];
            scale = scale.max(t.norm());
            acc += t;
        }
    }
    if acc.im.abs() > ALGEBRA_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian(
            a.hermiticity_error().max(b.hermiticity_error()),
        ));
    }
    Ok(acc.re)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The `n x n` Hermitian `A + iB` is mapped to the real symmetric
/// `[[A, -B], [B, A]]`, whose spectrum is that of the original with every
/// eigenvalue doubled; cyclic Jacobi rotations diagonalize the embedding and
/// every second sorted eigenvalue is kept.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let herm_err = a.hermiticity_error();
    if herm_err > ALGEBRA_TOL {
        return Err(Error::NotHermitian(herm_err));
    }
    let n = a.dim;
    let m = 2 * n;
    let mut s = vec![0.0_f64; m * m];
    for r in 0..n {
        for c in 0..n {
            // symmetrize away the sub-tolerance anti-Hermitian residue
            let z = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
            s[r * m + c] = z.re;
            s[(r + n) * m + (c + n)] = z.re;
            s[r * m + (c + n)] = -z.im;
            s[(r + n) * m + c] = z.im;
        }
    }
    let mut eig = jacobi_symmetric(&mut s, m);
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig.into_iter().step_by(2).collect())
}

/// Cyclic Jacobi eigenvalue iteration on a real symmetric `m x m` matrix
/// (row-major, overwritten).
fn jacobi_symmetric(s: &mut [f64], m: usize) -> Vec<f64> {
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..m)
            .flat_map(|p| (0..m).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| s[p * m + q] * s[p * m + q])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = s[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let skp = s[k * m + p];
                    let skq = s[k * m + q];
                    s[k * m + p] = c * skp - sn * skq;
                    s[k * m + q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let spk = s[p * m + k];
                    let sqk = s[q * m + k];
                    s[p * m + k] = c * spk - sn * sqk;
                    s[q * m + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..m).map(|i| s[i * m + i]).collect()
}

/// Validated single-qubit density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    density: ComplexMatrix,
}

impl QubitState {
    pub fn new(density: ComplexMatrix) -> Result<Self> {
        if density.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: density.dim,
            });
        }
        let herm = density.hermiticity_error();
        if herm > ALGEBRA_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (error {herm:e})"
            )));
        }
        let tr = density.trace();
        if (tr - ONE).norm() > ALGEBRA_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eigenvalues(&density)?[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { density })
    }

    /// Pure state from a (normalized) amplitude vector.
    pub fn pure(amplitudes: [Complex64; 2]) -> Result<Self> {
        Self::new(ComplexMatrix::projector(&amplitudes)?)
    }

    /// `(1 + r·σ) / 2`; `|r| ≤ 1` is required for positivity.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        Self::new(bloch_density(r))
    }

    /// Computational basis state `|bit⟩⟨bit|`.
    pub fn basis(bit: u8) -> Self {
        let mut values = [0.0; 2];
        values[usize::from(bit & 1)] = 1.0;
        Self {
            density: ComplexMatrix::diag(&values).expect("static shape"),
        }
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    /// Expectation values `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let d = &self.density;
        [
            2.0 * d[(0, 1)].re,
            -2.0 * d[(0, 1)].im,
            (d[(0, 0)] - d[(1, 1)]).re,
        ]
    }
}

/// `(1 + r·σ) / 2` without validation.
pub(crate) fn bloch_density(r: [f64; 3]) -> ComplexMatrix {
    let half = 0.5;
    ComplexMatrix::new(
        2,
        &[
            Complex64::new(half * (1.0 + r[2]), 0.0),
            Complex64::new(half * r[0], -half * r[1]),
            Complex64::new(half * r[0], half * r[1]),
            Complex64::new(half * (1.0 - r[2]), 0.0),
        ],
    )
    .expect("static shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let i4 = ComplexMatrix::identity(4).unwrap();
        assert_eq!(tensor(&i2, &i2).unwrap(), i4);
    }

    #[test]
    fn basis_projector_placement() {
        let p0 = ComplexMatrix::diag(&[1.0, 0.0]).unwrap();
        let p1 = ComplexMatrix::diag(&[0.0, 1.0]).unwrap();
        let t = tensor(&p0, &p1).unwrap();
        assert_eq!(t, ComplexMatrix::diag(&[0.0, 1.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn bit_flip_by_conjugation() {
        let p0 = ComplexMatrix::diag(&[1.0, 0.0]).unwrap();
        let p1 = ComplexMatrix::diag(&[0.0, 1.0]).unwrap();
        let xx = tensor(&ComplexMatrix::pauli_x(), &ComplexMatrix::pauli_x()).unwrap();
        let rho = tensor(&p0, &p0).unwrap();
        let flipped = rho.conjugate_by(&xx).unwrap();
        assert_eq!(flipped, tensor(&p1, &p1).unwrap());
    }

    #[test]
    fn tensor_rejects_four_dimensional_factor() {
        let i4 = ComplexMatrix::identity(4).unwrap();
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert!(matches!(
            tensor(&i4, &i2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_product_examples() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let p0 = ComplexMatrix::diag(&[1.0, 0.0]).unwrap();
        assert_eq!(trace_product(&i2, &p0).unwrap(), 1.0);

        let plus = ComplexMatrix::projector(&[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let minus = ComplexMatrix::projector(&[c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)]).unwrap();
        assert!(trace_product(&plus, &minus).unwrap().abs() < 1e-15);

        // cos(π/8)|0⟩ + sin(π/8)|1⟩ has ⟨0|ρ|0⟩ = cos²(π/8)
        let psi = ComplexMatrix::projector(&[c((PI / 8.0).cos()), c((PI / 8.0).sin())]).unwrap();
        let expected = (2.0 + 2f64.sqrt()) / 4.0;
        assert!((trace_product(&psi, &p0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.8535533906).abs() < 1e-10);
    }

    #[test]
    fn trace_product_dimension_mismatch() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let i4 = ComplexMatrix::identity(4).unwrap();
        assert!(trace_product(&i2, &i4).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let d = ComplexMatrix::diag(&[0.0, 1.0]).unwrap();
        let e = hermitian_eigenvalues(&d).unwrap();
        assert!((e[0] - 0.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);

        let e = hermitian_eigenvalues(&ComplexMatrix::pauli_x()).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);

        let psi = ComplexMatrix::projector(&[c((PI / 8.0).cos()), c((PI / 8.0).sin())]).unwrap();
        let e = hermitian_eigenvalues(&psi).unwrap();
        assert!(e[0].abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);

        let e = hermitian_eigenvalues(&ComplexMatrix::pauli_y()).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_reject_non_hermitian() {
        let m = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn qubit_state_validation() {
        assert!(QubitState::from_bloch([0.0, 0.0, 1.0]).is_ok());
        assert!(QubitState::from_bloch([0.0, 0.0, 1.5]).is_err());
        let bad_trace = ComplexMatrix::diag(&[1.0, 1.0]).unwrap();
        assert!(QubitState::new(bad_trace).is_err());
        let state = QubitState::from_bloch([0.3, -0.4, 0.5]).unwrap();
        let r = state.bloch();
        assert!((r[0] - 0.3).abs() < 1e-15 && (r[1] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn constructors_reject_bad_shapes() {
        assert!(matches!(
            ComplexMatrix::zeros(3),
            Err(Error::UnsupportedDimension(3))
        ));
        assert!(ComplexMatrix::from_real(2, &[1.0, 2.0, 3.0]).is_err());
        assert!(matches!(
            ComplexMatrix::from_real(2, &[f64::NAN, 0.0, 0.0, 0.0]),
            Err(Error::NonFinite)
        ));
    }

    fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-1.0f64..1.0, dim * dim * 2).prop_map(move |raw| {
            let mut m = ComplexMatrix::zeros(dim).unwrap();
            for r in 0..dim {
                for c in r..dim {
                    let k = 2 * (r * dim + c);
                    let z = if r == c {
                        Complex64::new(raw[k], 0.0)
                    } else {
                        Complex64::new(raw[k], raw[k + 1])
                    };
                    m[(r, c)] = z;
                    m[(c, r)] = z.conj();
                }
            }
            m
        })
    }

    fn any_matrix2() -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-1.0f64..1.0, 8).prop_map(|raw| {
            let entries: Vec<Complex64> =
                raw.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            ComplexMatrix::new(2, &entries).unwrap()
        })
    }

    proptest! {
        #[test]
        fn tensor_is_bilinear(a in any_matrix2(), b in any_matrix2(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let alpha = Complex64::new(re, im);
            let lhs = tensor(&a.scale(alpha), &b).unwrap();
            let rhs = tensor(&a, &b).unwrap().scale(alpha);
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
            let lhs = tensor(&a, &b.scale(alpha)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
        }

        #[test]
        fn trace_product_symmetric(a in hermitian(4), b in hermitian(4)) {
            let ab = trace_product(&a, &b).unwrap();
            let ba = trace_product(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
        }

        #[test]
        fn eigenvalues_match_trace_and_determinant(a in hermitian(2)) {
            let e = hermitian_eigenvalues(&a).unwrap();
            let tr = a.trace().re;
            let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re;
            prop_assert!((e[0] + e[1] - tr).abs() <= 1e-9);
            prop_assert!((e[0] * e[1] - det).abs() <= 1e-9);
            prop_assert!(e[0] <= e[1]);
        }

        #[test]
        fn eigenvalue_sum_is_trace_in_four_dimensions(a in hermitian(4)) {
            let e = hermitian_eigenvalues(&a).unwrap();
            prop_assert!((e.iter().sum::<f64>() - a.trace().re).abs() <= 1e-9);
            prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
