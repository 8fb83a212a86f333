//! Complex 2x2 matrices with the numerical guarantees the measurement
//! constructions lean on: a closed-form Hermitian eigensolve, positive
//! semidefinite square roots, and a right polar decomposition that is total
//! (singular input gets a deterministic unitary completion).

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for validation predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Modulus below which a vector component is treated as zero when fixing the
/// global phase of a unit vector.
const PHASE_FLOOR: f64 = 1e-12;

/// A complex 2x2 matrix stored row-major: `[a00, a01, a10, a11]`.
#[derive(Clone, Copy, PartialEq)]
pub struct Complex2x2 {
    e: [Complex64; 4],
}

impl Complex2x2 {
    pub fn new(a00: Complex64, a01: Complex64, a10: Complex64, a11: Complex64) -> Self {
        Self {
            e: [a00, a01, a10, a11],
        }
    }

    pub fn from_rows(rows: [[Complex64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn from_columns(c0: [Complex64; 2], c1: [Complex64; 2]) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    pub fn from_real(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Self::new(
            Complex64::new(a00, 0.0),
            Complex64::new(a01, 0.0),
            Complex64::new(a10, 0.0),
            Complex64::new(a11, 0.0),
        )
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diagonal(a: Complex64, b: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, b)
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: [Complex64; 2], v: [Complex64; 2]) -> Self {
        Self::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.e[2 * row + col]
    }

    pub fn entries(&self) -> [Complex64; 4] {
        self.e
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.e[0].conj(),
            self.e[2].conj(),
            self.e[1].conj(),
            self.e[3].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.e[0] + self.e[3]
    }

    pub fn det(&self) -> Complex64 {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.e[0] * v[0] + self.e[1] * v[1],
            self.e[2] * v[0] + self.e[3] * v[1],
        ]
    }

    pub fn scale(&self, s: f64) -> Self {
        *self * Complex64::new(s, 0.0)
    }

    pub fn fro_norm(&self) -> f64 {
        self.e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.e
            .iter()
            .zip(other.e.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Deviation from Hermiticity: the largest of |a01 - conj(a10)| and the
    /// imaginary parts of the diagonal.
    pub fn hermiticity_defect(&self) -> f64 {
        let off = (self.e[1] - self.e[2].conj()).norm();
        off.max(self.e[0].im.abs()).max(self.e[3].im.abs())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        match self.hermitian_eigensystem(tol) {
            Ok(eig) => eig.values[1] >= -tol,
            Err(_) => false,
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let inv = Self::new(self.e[3], -self.e[1], -self.e[2], self.e[0]) * d.inv();
        inv.is_finite().then_some(inv)
    }

    /// Singular values in descending order.
    ///
    /// The larger one comes from the eigensolve of `X^H X`; the smaller one is
    /// recovered through `s1 * s2 = |det X|`, which stays accurate when the
    /// matrix is nearly singular.
    pub fn singular_values(&self) -> [f64; 2] {
        let h = self.adjoint() * *self;
        let (values, _) = eigh_core(h.e[0].re, h.e[1], h.e[3].re);
        let s1 = values[0].max(0.0).sqrt();
        let s2 = if s1 > 0.0 {
            (self.det().norm() / s1).min(s1)
        } else {
            0.0
        };
        [s1, s2]
    }

    /// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
    ///
    /// Eigenvalues are sorted in descending order (ties broken so the vector
    /// whose first component has the larger real part comes first); each
    /// eigenvector has its first component of significant modulus made real
    /// and positive.
    pub fn hermitian_eigensystem(&self, tol: f64) -> Result<Eigensystem> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let b = 0.5 * (self.e[1] + self.e[2].conj());
        let (values, vectors) = eigh_core(self.e[0].re, b, self.e[3].re);
        Ok(Eigensystem { values, vectors })
    }

    /// Positive semidefinite square root.
    ///
    /// Eigenvalues in `[-tol, 0)` are clamped to zero; anything below `-tol`
    /// is rejected.
    pub fn psd_sqrt(&self, tol: f64) -> Result<Self> {
        let eig = self.hermitian_eigensystem(tol)?;
        if eig.values[1] < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.values[1],
            });
        }
        let s0 = eig.values[0].max(0.0).sqrt();
        let s1 = eig.values[1].max(0.0).sqrt();
        Ok(Self::outer(eig.vectors[0], eig.vectors[0]).scale(s0)
            + Self::outer(eig.vectors[1], eig.vectors[1]).scale(s1))
    }

    /// Right polar decomposition `X = V^H M` with `M = (X^H X)^(1/2)` positive
    /// semidefinite and `V` unitary.
    ///
    /// Total on finite input. When `X` is singular the unitary factor is
    /// completed deterministically: the kernel direction is mapped onto the
    /// orthogonal complement of the image, with the phase fixed so the first
    /// nonzero component of the completed image vector is real and positive.
    /// `X = 0` yields `V = I`.
    pub fn right_polar_decompose(&self) -> PolarDecomposition {
        let h = self.adjoint() * *self;
        let (values, vectors) = eigh_core(h.e[0].re, h.e[1], h.e[3].re);
        let s1 = values[0].max(0.0).sqrt();
        if s1 <= f64::MIN_POSITIVE {
            return PolarDecomposition {
                unitary: Self::identity(),
                positive: Self::zero(),
            };
        }
        // The small singular value via |det| / s1 keeps full absolute accuracy
        // for nearly singular input.
        let s2 = (self.det().norm() / s1).min(s1);
        let v1 = vectors[0];
        let v2 = vectors[1];

        let xv1 = self.apply(v1);
        let n1 = vec_norm(xv1);
        let w1 = [xv1[0] / n1, xv1[1] / n1];
        let w1perp = [-w1[1].conj(), w1[0].conj()];

        let xv2 = self.apply(v2);
        let c2 = w1perp[0].conj() * xv2[0] + w1perp[1].conj() * xv2[1];
        let w2 = if c2.norm() > 1e-12 * s1 {
            let phase = c2 / c2.norm();
            [w1perp[0] * phase, w1perp[1] * phase]
        } else {
            canonical_phase(w1perp)
        };

        let positive =
            Self::outer(v1, v1).scale(s1) + Self::outer(v2, v2).scale(s2);
        let v_adjoint = Self::outer(w1, v1) + Self::outer(w2, v2);
        PolarDecomposition {
            unitary: v_adjoint.adjoint(),
            positive,
        }
    }
}

/// Result of [`Complex2x2::right_polar_decompose`]: `X = unitary^H * positive`.
#[derive(Clone, Copy, Debug)]
pub struct PolarDecomposition {
    /// Unitary factor `V`; applying it after the raw operator recovers the
    /// positive factor (`V X = M`).
    pub unitary: Complex2x2,
    /// Positive semidefinite factor `M = (X^H X)^(1/2)`.
    pub positive: Complex2x2,
}

#[derive(Clone, Copy, Debug)]
pub struct Eigensystem {
    /// Eigenvalues in descending order.
    pub values: [f64; 2],
    /// Orthonormal eigenvectors matching `values`, phase-canonicalized.
    pub vectors: [[Complex64; 2]; 2],
}

/// Hilbert-Schmidt inner product `Tr(A^H B)`.
pub fn hs_inner(a: &Complex2x2, b: &Complex2x2) -> Complex64 {
    a.e.iter()
        .zip(b.e.iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

pub fn vec_norm(v: [Complex64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn vec_inner(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Multiply a unit vector by a global phase so that its first component of
/// modulus above `1e-12` becomes real and positive.
pub fn canonical_phase(v: [Complex64; 2]) -> [Complex64; 2] {
    let lead = if v[0].norm() > PHASE_FLOOR { v[0] } else { v[1] };
    let n = lead.norm();
    if n == 0.0 {
        return v;
    }
    let factor = lead.conj() / n;
    [v[0] * factor, v[1] * factor]
}

/// Closed-form eigensolve of the Hermitian matrix `[[a, b], [conj(b), d]]`
/// (trace/determinant formulas, no iteration).
///
/// The eigenvector of the better-separated eigenvalue is taken from whichever
/// row formula is well conditioned; the other is its orthogonal complement,
/// which keeps the pair orthonormal to machine precision.
fn eigh_core(a: f64, b: Complex64, d: f64) -> ([f64; 2], [[Complex64; 2]; 2]) {
    let half_diff = 0.5 * (a - d);
    let disc = f64::hypot(half_diff, b.norm());
    let mean = 0.5 * (a + d);
    let values = [mean + disc, mean - disc];
    if disc == 0.0 {
        // Scalar matrix: any orthonormal basis works; the standard basis obeys
        // the tie-break (larger real first component first).
        return (values, [[ONE, ZERO], [ZERO, ONE]]);
    }
    let raw = if half_diff >= 0.0 {
        // lambda_1 - d = disc + half_diff dominates.
        [Complex64::new(disc + half_diff, 0.0), b.conj()]
    } else {
        // lambda_1 - a = disc - half_diff dominates.
        [b, Complex64::new(disc - half_diff, 0.0)]
    };
    let n = vec_norm(raw);
    let v1 = [raw[0] / n, raw[1] / n];
    let v2 = [-v1[1].conj(), v1[0].conj()];
    (values, [canonical_phase(v1), canonical_phase(v2)])
}

impl Add for Complex2x2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.e[0] + rhs.e[0],
            self.e[1] + rhs.e[1],
            self.e[2] + rhs.e[2],
            self.e[3] + rhs.e[3],
        )
    }
}

impl Sub for Complex2x2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.e[0] - rhs.e[0],
            self.e[1] - rhs.e[1],
            self.e[2] - rhs.e[2],
            self.e[3] - rhs.e[3],
        )
    }
}

impl Neg for Complex2x2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.e[0], -self.e[1], -self.e[2], -self.e[3])
    }
}

impl Mul for Complex2x2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.e[0] * rhs.e[0] + self.e[1] * rhs.e[2],
            self.e[0] * rhs.e[1] + self.e[1] * rhs.e[3],
            self.e[2] * rhs.e[0] + self.e[3] * rhs.e[2],
            self.e[2] * rhs.e[1] + self.e[3] * rhs.e[3],
        )
    }
}

impl Mul<Complex64> for Complex2x2 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        Self::new(self.e[0] * s, self.e[1] * s, self.e[2] * s, self.e[3] * s)
    }
}

impl Index<(usize, usize)> for Complex2x2 {
    type Output = Complex64;
    fn index(&self, (row, col): (usize, usize)) -> &Complex64 {
        &self.e[2 * row + col]
    }
}

impl fmt::Debug for Complex2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:.6}{:+.6}i, {:.6}{:+.6}i], [{:.6}{:+.6}i, {:.6}{:+.6}i]]",
            self.e[0].re,
            self.e[0].im,
            self.e[1].re,
            self.e[1].im,
            self.e[2].re,
            self.e[2].im,
            self.e[3].re,
            self.e[3].im
        )
    }
}

// Wire format: a row-major array of four [re, im] pairs.
impl Serialize for Complex2x2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(4))?;
        for z in &self.e {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Complex2x2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MatVisitor;
        impl<'de> Visitor<'de> for MatVisitor {
            type Value = Complex2x2;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of four [re, im] pairs (row-major 2x2)")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Complex2x2, A::Error> {
                let mut e = [ZERO; 4];
                for (i, slot) in e.iter_mut().enumerate() {
                    let pair: [f64; 2] = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                    *slot = Complex64::new(pair[0], pair[1]);
                }
                if seq.next_element::<[f64; 2]>()?.is_some() {
                    return Err(de::Error::invalid_length(5, &self));
                }
                Ok(Complex2x2 { e })
            }
        }
        deserializer.deserialize_seq(MatVisitor)
    }
}
