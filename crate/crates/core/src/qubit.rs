//! Single-qubit linear algebra: 2×2 complex matrices, pure states and
//! density matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{invalid, precondition, Result};
use crate::scalar::Real;

/// 2×2 complex matrix stored row-major as `[a00, a01, a10, a11]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    entries: [Complex<T>; 4],
}

impl<T: Real> Mat2<T> {
    #[inline]
    pub fn new(a00: Complex<T>, a01: Complex<T>, a10: Complex<T>, a11: Complex<T>) -> Self {
        let m = Self {
            entries: [a00, a01, a10, a11],
        };
        debug_assert!(m.is_finite(), "non-finite matrix entry: {m:?}");
        m
    }

    /// Checked constructor for externally supplied entries.
    pub fn try_new(entries: [Complex<T>; 4]) -> Result<Self> {
        let m = Self { entries };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(invalid(format!("matrix entries must be finite, got {m:?}")))
        }
    }

    pub fn from_real(a00: T, a01: T, a10: T, a11: T) -> Self {
        Self::new(
            Complex::new(a00, T::zero()),
            Complex::new(a01, T::zero()),
            Complex::new(a10, T::zero()),
            Complex::new(a11, T::zero()),
        )
    }

    pub fn diag(d0: Complex<T>, d1: Complex<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(d0, z, z, d1)
    }

    pub fn identity() -> Self {
        Self::from_real(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self::from_real(T::zero(), T::zero(), T::zero(), T::zero())
    }

    /// Pauli X.
    pub fn sigma_x() -> Self {
        Self::from_real(T::zero(), T::one(), T::one(), T::zero())
    }

    /// Pauli Z.
    pub fn sigma_z() -> Self {
        Self::from_real(T::one(), T::zero(), T::zero(), -T::one())
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: [Complex<T>; 2], bra: [Complex<T>; 2]) -> Self {
        Self::new(
            ket[0] * bra[0].conj(),
            ket[0] * bra[1].conj(),
            ket[1] * bra[0].conj(),
            ket[1] * bra[1].conj(),
        )
    }

    #[inline]
    pub fn entries(&self) -> &[Complex<T>; 4] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[2 * row + col]
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    #[inline]
    pub fn dagger(&self) -> Self {
        let [a, b, c, d] = self.entries;
        Self {
            entries: [a.conj(), c.conj(), b.conj(), d.conj()],
        }
    }

    #[inline]
    pub fn trace(&self) -> Complex<T> {
        self.entries[0] + self.entries[3]
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            entries: self.entries.map(|z| z * s),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (*self - *other).max_abs()
    }

    /// `max |U U† − I|` entrywise.
    pub fn unitarity_defect(&self) -> T {
        (*self * self.dagger()).max_abs_diff(&Self::identity())
    }

    /// `max |M − M†|` entrywise.
    pub fn hermiticity_defect(&self) -> T {
        self.max_abs_diff(&self.dagger())
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale(T::lit(0.5))
    }

    /// Applies the matrix to a column vector.
    #[inline]
    pub fn apply(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        let [a, b, c, d] = self.entries;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = rhs.entries;
        Self {
            entries: [a + e, b + f, c + g, d + h],
        }
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = rhs.entries;
        Self {
            entries: [a - e, b - f, c - g, d - h],
        }
    }
}

impl<T: Real> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            entries: self.entries.map(|z| -z),
        }
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.entries;
        let [e, f, g, h] = rhs.entries;
        Self {
            entries: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h],
        }
    }
}

impl<T: Real> fmt::Display for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entries;
        write!(f, "[[{}, {}], [{}, {}]]", e[0], e[1], e[2], e[3])
    }
}

fn check_finite<T: Real>(name: &str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}

/// Real rotation `[[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn rotation<T: Real>(theta: T) -> Result<Mat2<T>> {
    check_finite("rotation angle", theta)?;
    let (s, c) = theta.sin_cos();
    Ok(Mat2::from_real(c, -s, s, c))
}

/// `diag(1, e^{iΦ})`.
pub fn phase_gate<T: Real>(phi: T) -> Result<Mat2<T>> {
    check_finite("phase angle", phi)?;
    Ok(Mat2::diag(
        Complex::new(T::one(), T::zero()),
        Complex::from_polar(T::one(), phi),
    ))
}

pub fn dagger<T: Real>(m: &Mat2<T>) -> Mat2<T> {
    m.dagger()
}

/// `AB − BA`.
pub fn commutator<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    *a * *b - *b * *a
}

/// Normalized single-qubit state vector `a0|0⟩ + a1|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState<T> {
    amplitudes: [Complex<T>; 2],
}

impl<T: Real> PureState<T> {
    /// Rejects vectors whose squared norm is off by more than the identity
    /// tolerance.
    pub fn new(a0: Complex<T>, a1: Complex<T>) -> Result<Self> {
        let norm_sqr = a0.norm_sqr() + a1.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - T::one()).abs() > T::identity_tol() {
            return Err(precondition(format!(
                "state must be normalized, |a0|²+|a1|² = {norm_sqr}"
            )));
        }
        Ok(Self {
            amplitudes: [a0, a1],
        })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(a0: Complex<T>, a1: Complex<T>) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !norm.is_finite() || norm <= T::zero() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self {
            amplitudes: [a0 / norm, a1 / norm],
        })
    }

    pub(crate) fn from_real_unchecked(a0: T, a1: T) -> Self {
        Self {
            amplitudes: [Complex::new(a0, T::zero()), Complex::new(a1, T::zero())],
        }
    }

    /// `cos ξ|0⟩ + sin ξ|1⟩`.
    pub fn from_angle(xi: T) -> Result<Self> {
        check_finite("state angle", xi)?;
        let (s, c) = xi.sin_cos();
        Ok(Self::from_real_unchecked(c, s))
    }

    pub fn zero() -> Self {
        Self::from_real_unchecked(T::one(), T::zero())
    }

    pub fn one() -> Self {
        Self::from_real_unchecked(T::zero(), T::one())
    }

    pub fn plus() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::from_real_unchecked(h, h)
    }

    pub fn minus() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::from_real_unchecked(h, -h)
    }

    #[inline]
    pub fn amplitudes(&self) -> [Complex<T>; 2] {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes[0].conj() * other.amplitudes[0]
            + self.amplitudes[1].conj() * other.amplitudes[1]
    }

    /// `U|ψ⟩`; `U` must be unitary.
    pub fn evolve(&self, u: &Mat2<T>) -> Result<Self> {
        let defect = u.unitarity_defect();
        if defect > T::unitary_tol() {
            return Err(precondition(format!(
                "operator is not unitary (defect {defect})"
            )));
        }
        Ok(Self {
            amplitudes: u.apply(self.amplitudes),
        })
    }

    /// `⟨ψ|M|ψ⟩`.
    #[inline]
    pub fn expectation(&self, m: &Mat2<T>) -> Complex<T> {
        let mv = m.apply(self.amplitudes);
        self.amplitudes[0].conj() * mv[0] + self.amplitudes[1].conj() * mv[1]
    }
}

/// Single-qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: Mat2<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, trace and positivity against the identity
    /// tolerance.
    pub fn new(matrix: Mat2<T>) -> Result<Self> {
        let tol = T::identity_tol();
        if !matrix.is_finite() {
            return Err(precondition("density matrix has non-finite entries"));
        }
        let herm = matrix.hermiticity_defect();
        if herm > tol {
            return Err(precondition(format!(
                "density matrix is not Hermitian (defect {herm})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(precondition(format!("density matrix trace is {tr}, not 1")));
        }
        let rho = Self {
            matrix: matrix.hermitian_part(),
        };
        let min_eig = rho.eigenvalues()[0];
        if min_eig < -tol {
            return Err(precondition(format!(
                "density matrix has negative eigenvalue {min_eig}"
            )));
        }
        Ok(rho)
    }

    /// Re-symmetrizes a matrix produced by a trace- and positivity-preserving
    /// operation on valid inputs.
    pub(crate) fn from_resymmetrized(matrix: Mat2<T>) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        let a = psi.amplitudes();
        Self::from_resymmetrized(Mat2::outer(a, a))
    }

    /// `I/2`.
    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Mat2::identity().scale(T::lit(0.5)),
        }
    }

    #[inline]
    pub fn matrix(&self) -> &Mat2<T> {
        &self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 2] {
        let a = self.matrix.get(0, 0).re;
        let d = self.matrix.get(1, 1).re;
        let b = self.matrix.get(0, 1);
        let half = T::lit(0.5);
        let mean = (a + d) * half;
        let radius = (((a - d) * half).powi(2) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    /// Largest entrywise deviation from another density matrix.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

pub fn density_from_pure<T: Real>(psi: &PureState<T>) -> DensityMatrix<T> {
    DensityMatrix::from_pure(psi)
}

/// `UρU†` for a unitary `U`.
pub fn conjugate_by<T: Real>(u: &Mat2<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    let defect = u.unitarity_defect();
    if defect > T::unitary_tol() {
        return Err(precondition(format!(
            "conjugating operator is not unitary (defect {defect})"
        )));
    }
    Ok(DensityMatrix::from_resymmetrized(
        *u * *rho.matrix() * u.dagger(),
    ))
}

/// `⟨ψ|ρ|ψ⟩`, clamped to [0, 1].
pub fn fidelity<T: Real>(psi: &PureState<T>, rho: &DensityMatrix<T>) -> Result<T> {
    let tol = T::identity_tol();
    let f = psi.expectation(rho.matrix());
    if f.im.abs() > tol {
        return Err(precondition(format!(
            "fidelity has imaginary residue {}",
            f.im
        )));
    }
    if f.re < -tol || f.re > T::one() + tol {
        return Err(precondition(format!("fidelity {} outside [0, 1]", f.re)));
    }
    Ok(f.re.max(T::zero()).min(T::one()))
}
