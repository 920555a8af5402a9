//! Dense complex linear algebra for one- and two-qubit operators.
//!
//! Everything in the crate runs on 2x2 and 4x4 complex matrices, so this
//! module provides a small fixed-dimension matrix type instead of pulling in a
//! general-purpose solver: a closed-form Hermitian eigensolver for 2x2, a
//! cyclic Jacobi eigensolver for 4x4, tensor products, partial traces, and
//! POVM validation. Entries are stored as `num_complex::Complex64` (re, im)
//! pairs in row-major order.

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance for user-facing numerical assertions (PSD floors, sum checks,
/// reconstruction residuals).
pub const ALGEBRA_TOL: f64 = 1e-9;

/// Tolerance for internal symmetrization and convergence targets.
pub const SYM_TOL: f64 = 1e-12;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Bloch vectors
// ---------------------------------------------------------------------------

/// A real 3-vector in Bloch space. Not necessarily unit length: measurement
/// axes are unit vectors, but weighted Bloch parts of POVM elements are not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", from = "[f64; 3]")]
pub struct BlochVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVec {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVec { x, y, z }
    }

    /// Builds a unit axis, verifying the norm to within `ALGEBRA_TOL` and then
    /// renormalizing so stored axes satisfy the tighter invariant. Vectors
    /// already unit to a few ulp are kept bit-for-bit, which makes the
    /// canonicalization idempotent (a stored axis survives a save/load cycle
    /// unchanged).
    pub fn unit(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = BlochVec { x, y, z };
        let n = v.norm();
        if !n.is_finite() || (n - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::Validation(format!(
                "axis ({x}, {y}, {z}) is not unit length (norm = {n})"
            )));
        }
        if (n - 1.0).abs() <= 16.0 * f64::EPSILON {
            return Ok(v);
        }
        Ok(v.scale(1.0 / n))
    }

    pub fn zero() -> Self {
        BlochVec::new(0.0, 0.0, 0.0)
    }

    pub fn dot(&self, o: &BlochVec) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add(&self, o: &BlochVec) -> BlochVec {
        BlochVec::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(&self, s: f64) -> BlochVec {
        BlochVec::new(s * self.x, s * self.y, s * self.z)
    }

    pub fn neg(&self) -> BlochVec {
        self.scale(-1.0)
    }

    /// Unit vector in the same direction, or `None` for (numerically) zero.
    pub fn normalized(&self) -> Option<BlochVec> {
        let n = self.norm();
        if n <= SYM_TOL {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }
}

impl From<BlochVec> for [f64; 3] {
    fn from(v: BlochVec) -> Self {
        [v.x, v.y, v.z]
    }
}

impl From<[f64; 3]> for BlochVec {
    fn from(a: [f64; 3]) -> Self {
        BlochVec::new(a[0], a[1], a[2])
    }
}

// ---------------------------------------------------------------------------
// Complex matrices
// ---------------------------------------------------------------------------

/// Dense complex matrix of dimension 2 or 4, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<C>,
}

impl CMat {
    /// Zero matrix. `dim` must be 2 or 4.
    pub fn zero(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::Validation(format!(
                "matrix dimension must be 2 or 4, got {dim}"
            )));
        }
        Ok(CMat {
            dim,
            data: vec![c(0.0, 0.0); dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = CMat::zero(dim)?;
        for i in 0..dim {
            m.set(i, i, c(1.0, 0.0));
        }
        Ok(m)
    }

    /// Builds a matrix from nested rows of entries.
    pub fn from_rows(rows: &[Vec<C>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = CMat::zero(dim)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Validation(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Ok(m)
    }

    /// Rank-one projector |v><v| from an unnormalized state vector of length 2 or 4.
    pub fn outer(v: &[C]) -> Result<Self> {
        let dim = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= SYM_TOL {
            return Err(Error::Validation("state vector has zero norm".into()));
        }
        let mut m = CMat::zero(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, v[i] * v[j].conj() / norm2);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.dim + j] = v;
    }

    pub fn add(&self, o: &CMat) -> CMat {
        assert_eq!(self.dim, o.dim, "dimension mismatch in add");
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a + b)
            .collect();
        CMat {
            dim: self.dim,
            data,
        }
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        assert_eq!(self.dim, o.dim, "dimension mismatch in sub");
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a - b)
            .collect();
        CMat {
            dim: self.dim,
            data,
        }
    }

    pub fn scale(&self, s: C) -> CMat {
        CMat {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(c(s, 0.0))
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        assert_eq!(self.dim, o.dim, "dimension mismatch in mul");
        let d = self.dim;
        let mut out = CMat {
            dim: d,
            data: vec![c(0.0, 0.0); d * d],
        };
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + a * o.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        let d = self.dim;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute value.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise absolute difference against `o`.
    pub fn max_abs_diff(&self, o: &CMat) -> f64 {
        self.sub(o).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) <= 2.0 * tol
    }

    /// Hermitian part (M + M^dagger)/2.
    pub fn hermitized(&self) -> CMat {
        self.add(&self.dagger()).scale_re(0.5)
    }

    /// Real expectation `<v|M|v>` for a normalized state vector.
    pub fn expectation(&self, v: &[C]) -> f64 {
        let d = self.dim;
        assert_eq!(v.len(), d, "state vector length mismatch");
        let mut acc = c(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += v[i].conj() * self.get(i, j) * v[j];
            }
        }
        acc.re
    }
}

// Serialized as a nested array of [re, im] pairs; used when certificates that
// carry operators are emitted as JSON.
impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut rows = serializer.serialize_seq(Some(self.dim))?;
        for i in 0..self.dim {
            let row: Vec<[f64; 2]> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    [z.re, z.im]
                })
                .collect();
            rows.serialize_element(&row)?;
        }
        rows.end()
    }
}

// ---------------------------------------------------------------------------
// Pauli basis
// ---------------------------------------------------------------------------

pub fn identity2() -> CMat {
    CMat::identity(2).expect("dim 2 is valid")
}

pub fn sigma_x() -> CMat {
    CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
        .expect("static entries")
}

pub fn sigma_y() -> CMat {
    CMat::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
        .expect("static entries")
}

pub fn sigma_z() -> CMat {
    CMat::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]])
        .expect("static entries")
}

/// eta * (n . sigma) for a unit Bloch axis `n` and sharpness `eta` in [0, 1].
///
/// The result is Hermitian and traceless with eigenvalues +/- eta; the sharp
/// case eta = 1 is the usual projective +/-1-outcome observable.
pub fn pauli_from_bloch(n: &BlochVec, eta: f64) -> Result<CMat> {
    let axis = BlochVec::unit(n.x, n.y, n.z)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Validation(format!(
            "sharpness eta must lie in [0, 1], got {eta}"
        )));
    }
    let m = CMat::from_rows(&[
        vec![c(axis.z, 0.0), c(axis.x, -axis.y)],
        vec![c(axis.x, axis.y), c(-axis.z, 0.0)],
    ])?;
    Ok(m.scale_re(eta))
}

/// Bloch decomposition of a 2x2 Hermitian matrix: returns (t, w) with
/// M = t*I + w . sigma.
pub fn bloch_of(m: &CMat) -> (f64, BlochVec) {
    assert_eq!(m.dim(), 2, "bloch_of expects a 2x2 matrix");
    let t = m.trace().re / 2.0;
    let w = BlochVec::new(
        (m.get(0, 1) + m.get(1, 0)).re / 2.0,
        (m.get(1, 0) - m.get(0, 1)).im / 2.0,
        (m.get(0, 0) - m.get(1, 1)).re / 2.0,
    );
    (t, w)
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) with matching orthonormal eigenvectors stored as
/// the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenPair {
    /// Column `k` as a state vector.
    pub fn vector(&self, k: usize) -> Vec<C> {
        (0..self.vectors.dim())
            .map(|i| self.vectors.get(i, k))
            .collect()
    }

    /// Sum of values[k] * |v_k><v_k|; used by tests to check reconstruction.
    pub fn reconstruct(&self) -> CMat {
        let d = self.vectors.dim();
        let mut out = CMat::zero(d).expect("valid dim");
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let v = out.get(i, j)
                        + self.vectors.get(i, k)
                            * self.vectors.get(j, k).conj()
                            * c(self.values[k], 0.0);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian 2x2 or 4x4 matrix.
///
/// 2x2 uses the closed form (trace/2 +/- radius); 4x4 uses cyclic Jacobi
/// rotations (a phase step to make the pivot real followed by a real Givens
/// rotation) until the off-diagonal Frobenius norm falls below 1e-12.
/// Non-Hermitian input (beyond the 1e-12 symmetrization tolerance) is a
/// validation error.
pub fn herm_eigen(m: &CMat) -> Result<EigenPair> {
    let dev = m.max_abs_diff(&m.dagger()) / 2.0;
    if dev > SYM_TOL {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (max deviation {dev:.3e})"
        )));
    }
    let h = m.hermitized();
    match h.dim() {
        2 => Ok(eigen2(&h)),
        4 => eigen_jacobi(&h),
        d => Err(Error::Validation(format!("unsupported dimension {d}"))),
    }
}

fn eigen2(h: &CMat) -> EigenPair {
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = h.get(0, 1);
    let mid = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let (lo, hi) = (mid - r, mid + r);

    let mut vecs = CMat::zero(2).expect("dim 2");
    if b.norm() <= 1e-15 {
        // Already diagonal; order columns by the diagonal entries.
        if a <= d {
            vecs.set(0, 0, c(1.0, 0.0));
            vecs.set(1, 1, c(1.0, 0.0));
        } else {
            vecs.set(1, 0, c(1.0, 0.0));
            vecs.set(0, 1, c(1.0, 0.0));
        }
    } else {
        for (k, lam) in [lo, hi].into_iter().enumerate() {
            // (b, lam - a) solves (H - lam)v = 0 when b != 0.
            let v0 = b;
            let v1 = c(lam - a, 0.0);
            let n = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
            vecs.set(0, k, v0 / n);
            vecs.set(1, k, v1 / n);
        }
    }
    EigenPair {
        values: vec![lo, hi],
        vectors: vecs,
    }
}

fn off_diag_norm(h: &CMat) -> f64 {
    let d = h.dim();
    let mut s = 0.0;
    for p in 0..d {
        for q in 0..d {
            if p != q {
                s += h.get(p, q).norm_sqr();
            }
        }
    }
    s.sqrt()
}

const JACOBI_MAX_SWEEPS: usize = 60;

fn eigen_jacobi(hin: &CMat) -> Result<EigenPair> {
    let d = hin.dim();
    let mut h = hin.clone();
    let mut v = CMat::identity(d)?;
    let scale = h.max_abs().max(1.0);

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diag_norm(&h) <= SYM_TOL {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let hpq = h.get(p, q);
                if hpq.norm() <= 1e-18 * scale {
                    continue;
                }
                // Phase step: right-multiply by diag(.., e^{-i arg}, ..) at q so
                // the pivot becomes real positive. H <- D^dag H D, V <- V D.
                let phase = c(0.0, -hpq.arg()).exp();
                for i in 0..d {
                    let x = h.get(i, q) * phase;
                    h.set(i, q, x);
                }
                for j in 0..d {
                    let x = h.get(q, j) * phase.conj();
                    h.set(q, j, x);
                }
                for i in 0..d {
                    let x = v.get(i, q) * phase;
                    v.set(i, q, x);
                }

                // Real Jacobi rotation on the (p, q) plane.
                let app = h.get(p, p).re;
                let aqq = h.get(q, q).re;
                let apq = h.get(p, q).re; // real after the phase step
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;

                // Columns: H <- H G with G = [[c, s], [-s, c]] on (p, q).
                for i in 0..d {
                    let hip = h.get(i, p);
                    let hiq = h.get(i, q);
                    h.set(i, p, hip * cs - hiq * sn);
                    h.set(i, q, hip * sn + hiq * cs);
                }
                // Rows: H <- G^T H.
                for j in 0..d {
                    let hpj = h.get(p, j);
                    let hqj = h.get(q, j);
                    h.set(p, j, hpj * cs - hqj * sn);
                    h.set(q, j, hpj * sn + hqj * cs);
                }
                // Clean the pivot pair explicitly.
                h.set(p, q, c(0.0, 0.0));
                h.set(q, p, c(0.0, 0.0));

                for i in 0..d {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * cs - viq * sn);
                    v.set(i, q, vip * sn + viq * cs);
                }
            }
        }
    }
    if !converged && off_diag_norm(&h) > SYM_TOL {
        return Err(Error::Internal(format!(
            "Jacobi eigensolver failed to converge in {JACOBI_MAX_SWEEPS} sweeps \
             (off-diagonal norm {:.3e})",
            off_diag_norm(&h)
        )));
    }

    // Sort ascending, permuting the eigenvector columns alongside.
    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| h.get(i, i).re).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).expect("finite eigenvalues"));
    let mut values = Vec::with_capacity(d);
    let mut vectors = CMat::zero(d)?;
    for (k, &src) in order.iter().enumerate() {
        values.push(diag[src]);
        for i in 0..d {
            vectors.set(i, k, v.get(i, src));
        }
    }
    Ok(EigenPair { values, vectors })
}

// ---------------------------------------------------------------------------
// Tensor structure
// ---------------------------------------------------------------------------

/// Kronecker product of two 2x2 matrices, ordered so the first factor is the
/// "left" qubit: (A (x) B)[2a+b, 2a'+b'] = A[a, a'] B[b, b'].
pub fn tensor(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::Validation(
            "tensor expects two 2x2 factors".into(),
        ));
    }
    let mut out = CMat::zero(4)?;
    for i in 0..2 {
        for ip in 0..2 {
            for j in 0..2 {
                for jp in 0..2 {
                    out.set(2 * i + j, 2 * ip + jp, a.get(i, ip) * b.get(j, jp));
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace over the first (left) qubit of a 4x4 operator.
pub fn partial_trace_a(r: &CMat) -> Result<CMat> {
    if r.dim() != 4 {
        return Err(Error::Validation("partial trace expects a 4x4 operator".into()));
    }
    let mut out = CMat::zero(2)?;
    for b in 0..2 {
        for bp in 0..2 {
            let mut acc = c(0.0, 0.0);
            for a in 0..2 {
                acc += r.get(2 * a + b, 2 * a + bp);
            }
            out.set(b, bp, acc);
        }
    }
    Ok(out)
}

/// Partial trace over the second (right) qubit of a 4x4 operator.
pub fn partial_trace_b(r: &CMat) -> Result<CMat> {
    if r.dim() != 4 {
        return Err(Error::Validation("partial trace expects a 4x4 operator".into()));
    }
    let mut out = CMat::zero(2)?;
    for a in 0..2 {
        for ap in 0..2 {
            let mut acc = c(0.0, 0.0);
            for b in 0..2 {
                acc += r.get(2 * a + b, 2 * ap + b);
            }
            out.set(a, ap, acc);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// POVM validation
// ---------------------------------------------------------------------------

/// Outcome of a POVM check: whether the element list is a valid POVM and the
/// largest violation found across all checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PovmCheck {
    pub valid: bool,
    /// Largest violation across Hermiticity, positivity (most negative
    /// eigenvalue magnitude), and completeness (max deviation of the sum
    /// from the identity).
    pub max_violation: f64,
}

/// Checks that `elems` forms a POVM: every element Hermitian and positive
/// semidefinite within `ALGEBRA_TOL`, elements all of one dimension, and the
/// sum equal to the identity within `ALGEBRA_TOL`.
pub fn is_valid_povm(elems: &[CMat]) -> Result<PovmCheck> {
    if elems.is_empty() {
        return Err(Error::Validation("POVM must have at least one element".into()));
    }
    let dim = elems[0].dim();
    if elems.iter().any(|e| e.dim() != dim) {
        return Err(Error::Validation(
            "POVM elements must share one dimension".into(),
        ));
    }
    let mut violation: f64 = 0.0;
    let mut sum = CMat::zero(dim)?;
    for e in elems {
        violation = violation.max(e.max_abs_diff(&e.dagger()) / 2.0);
        let eig = herm_eigen(&e.hermitized())?;
        let min = eig.values[0];
        if min < 0.0 {
            violation = violation.max(-min);
        }
        sum = sum.add(e);
    }
    violation = violation.max(sum.max_abs_diff(&CMat::identity(dim)?));
    Ok(PovmCheck {
        valid: violation <= ALGEBRA_TOL,
        max_violation: violation,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQ3: f64 = 1.732_050_807_568_877_2;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!(
            (a - b).abs() <= tol,
            "{what}: {a} vs {b} (|diff| = {:.3e})",
            (a - b).abs()
        );
    }

    /// Independent 2x2 eigenvalue oracle via the characteristic polynomial.
    fn char_poly_eigs2(m: &CMat) -> (f64, f64) {
        let tr = m.trace().re;
        let det = (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
        let mut m = CMat::zero(dim).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
            }
        }
        m.hermitized()
    }

    #[test]
    fn pauli_from_bloch_z_axis_is_sigma_z() {
        let m = pauli_from_bloch(&BlochVec::new(0.0, 0.0, 1.0), 1.0).unwrap();
        assert_eq!(m.max_abs_diff(&sigma_z()), 0.0);
    }

    #[test]
    fn pauli_from_bloch_trine_axis_matches_entries() {
        // Axis (sqrt(3)/2, 0, -1/2) at eta = 1: [[-1/2, sqrt(3)/2], [sqrt(3)/2, 1/2]].
        let m = pauli_from_bloch(&BlochVec::new(SQ3 / 2.0, 0.0, -0.5), 1.0).unwrap();
        let expect = CMat::from_rows(&[
            vec![c(-0.5, 0.0), c(SQ3 / 2.0, 0.0)],
            vec![c(SQ3 / 2.0, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(m.max_abs_diff(&expect) <= 1e-12);
    }

    #[test]
    fn pauli_from_bloch_eta_scales_eigenvalues() {
        let m = pauli_from_bloch(&BlochVec::new(0.0, 1.0, 0.0), 0.5).unwrap();
        let eig = herm_eigen(&m).unwrap();
        let (lo, hi) = char_poly_eigs2(&m);
        assert_close(eig.values[0], lo, 1e-12, "low eigenvalue vs char poly");
        assert_close(eig.values[1], hi, 1e-12, "high eigenvalue vs char poly");
        assert_close(eig.values[0], -0.5, 1e-12, "low eigenvalue");
        assert_close(eig.values[1], 0.5, 1e-12, "high eigenvalue");
    }

    #[test]
    fn pauli_from_bloch_rejects_non_unit_axis() {
        let err = pauli_from_bloch(&BlochVec::new(0.0, 0.0, 2.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "got {err:?}");
        let err = pauli_from_bloch(&BlochVec::new(0.0, 0.0, 1.0), 1.5).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "got {err:?}");
    }

    #[test]
    fn herm_eigen_sigma_z_spectrum_and_vectors() {
        let eig = herm_eigen(&sigma_z()).unwrap();
        assert_eq!(eig.values, vec![-1.0, 1.0]);
        // Ascending order puts |1> first for sigma_z.
        assert_close(eig.vector(0)[1].norm(), 1.0, 1e-12, "|1> component");
        assert_close(eig.vector(1)[0].norm(), 1.0, 1e-12, "|0> component");
    }

    #[test]
    fn herm_eigen_mixed_pauli_top_eigenvalue() {
        // (sigma_x + sigma_y + sigma_z)/3 has largest eigenvalue 1/sqrt(3).
        let m = sigma_x().add(&sigma_y()).add(&sigma_z()).scale_re(1.0 / 3.0);
        let eig = herm_eigen(&m).unwrap();
        assert_close(eig.values[1], 1.0 / SQ3, 1e-12, "top eigenvalue");
    }

    #[test]
    fn herm_eigen_rejects_non_hermitian() {
        let m = CMat::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.5, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(herm_eigen(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn jacobi_diagonal_4x4_matches_brute_force_max() {
        // Diagonal operator: the spectrum is just the diagonal.
        let mut m = CMat::zero(4).unwrap();
        for (i, v) in [0.3, -1.2, 2.5, 0.9].iter().enumerate() {
            m.set(i, i, c(*v, 0.0));
        }
        let eig = herm_eigen(&m).unwrap();
        assert_close(eig.values[3], 2.5, 1e-12, "max of diagonal");
        assert_close(eig.values[0], -1.2, 1e-12, "min of diagonal");
    }

    #[test]
    fn tensor_identity_and_sigma_z_products() {
        let i4 = tensor(&identity2(), &identity2()).unwrap();
        assert!(i4.max_abs_diff(&CMat::identity(4).unwrap()) <= 1e-15);
        let zz = tensor(&sigma_z(), &sigma_z()).unwrap();
        for (i, v) in [1.0, -1.0, -1.0, 1.0].iter().enumerate() {
            assert_close(zz.get(i, i).re, *v, 1e-15, "diagonal of z(x)z");
        }
    }

    #[test]
    fn tensor_expectation_on_entangled_state() {
        // |psi> = (|00> - |11>)/sqrt(2); <psi| sigma_x (x) sigma_x |psi> = -1.
        let s = 1.0 / 2.0_f64.sqrt();
        let psi = vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-s, 0.0)];
        let xx = tensor(&sigma_x(), &sigma_x()).unwrap();
        assert_close(xx.expectation(&psi), -1.0, 1e-12, "<xx> on (|00>-|11>)/sqrt2");
    }

    #[test]
    fn partial_trace_recovers_reduced_states() {
        // Product state: Tr_A(rho (x) tau) = tau (trace of rho is 1).
        let rho = CMat::outer(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let tau = CMat::outer(&[c(0.6_f64.sqrt(), 0.0), c(0.4_f64.sqrt(), 0.0)]).unwrap();
        let prod = tensor(&rho, &tau).unwrap();
        assert!(partial_trace_a(&prod).unwrap().max_abs_diff(&tau) <= 1e-12);
        assert!(partial_trace_b(&prod).unwrap().max_abs_diff(&rho) <= 1e-12);

        // Maximally entangled state reduces to I/2.
        let s = 1.0 / 2.0_f64.sqrt();
        let ent = CMat::outer(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-s, 0.0)]).unwrap();
        let half_i = identity2().scale_re(0.5);
        assert!(partial_trace_a(&ent).unwrap().max_abs_diff(&half_i) <= 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_contraction_oracle() {
        // Independent loop-sum oracle on a random 4x4 operator.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = random_hermitian(&mut rng, 4);
        let got = partial_trace_a(&r).unwrap();
        for bq in 0..2 {
            for bp in 0..2 {
                let expect = r.get(bq, bp) + r.get(2 + bq, 2 + bp);
                assert!((got.get(bq, bp) - expect).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn povm_accepts_projective_pair_and_rejects_overcomplete_sum() {
        let p = CMat::outer(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let q = CMat::outer(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let ok = is_valid_povm(&[p, q]).unwrap();
        assert!(ok.valid);
        assert!(ok.max_violation <= 1e-12);

        let bad = is_valid_povm(&[identity2(), identity2()]).unwrap();
        assert!(!bad.valid);
        assert_close(bad.max_violation, 1.0, 1e-12, "sum deviation for {I, I}");
    }

    #[test]
    fn povm_rejects_mixed_dimensions() {
        let err = is_valid_povm(&[identity2(), CMat::identity(4).unwrap()]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    proptest! {
        #[test]
        fn eigen_reconstruction_is_tight(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for &dim in &[2usize, 4] {
                let m = random_hermitian(&mut rng, dim);
                let eig = herm_eigen(&m).unwrap();
                prop_assert!(eig.reconstruct().max_abs_diff(&m) <= ALGEBRA_TOL);
                // Ascending order.
                for w in eig.values.windows(2) {
                    prop_assert!(w[0] <= w[1] + 1e-14);
                }
                // Orthonormal columns.
                let gram = eig.vectors.dagger().mul(&eig.vectors);
                prop_assert!(gram.max_abs_diff(&CMat::identity(dim).unwrap()) <= 1e-10);
            }
        }

        #[test]
        fn sharp_observable_squares_to_identity(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let zc: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - zc * zc).sqrt();
            let n = BlochVec::new(r * phi.cos(), r * phi.sin(), zc);
            let m = pauli_from_bloch(&n, 1.0).unwrap();
            prop_assert!(m.mul(&m).max_abs_diff(&identity2()) <= 1e-12);
        }

        #[test]
        fn partial_trace_of_tensor_recovers_scaled_factor(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(&mut rng, 2);
            let b = random_hermitian(&mut rng, 2);
            let t = tensor(&a, &b).unwrap();
            let ta = partial_trace_a(&t).unwrap();
            prop_assert!(ta.max_abs_diff(&b.scale_re(a.trace().re)) <= 1e-12);
            let tb = partial_trace_b(&t).unwrap();
            prop_assert!(tb.max_abs_diff(&a.scale_re(b.trace().re)) <= 1e-12);
            // Trace preservation.
            prop_assert!((ta.trace() - t.trace()).norm() <= 1e-12);
        }
    }
}
