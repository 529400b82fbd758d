//! Dense small-matrix algebra for Q-tensors in dimension d = 2 or 3.
//!
//! A `Mat` is a plain d x d real matrix; a `QTensor` is a `Mat` that is
//! symmetric and traceless by construction (membership in the space of
//! admissible order tensors is enforced by explicit projection rather than by
//! a reduced parametrization, so constraint drift elsewhere stays measurable).
//!
//! All operations are pure functions on value types.

use crate::coefficients::MaterialCoefficients;
use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Dense d x d real matrix (d = 2 or 3), stored in a fixed 3x3 block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    d: usize,
    e: [[f64; MAX_DIM]; MAX_DIM],
}

impl Mat {
    pub fn zeros(d: usize) -> Mat {
        debug_assert!(d == 2 || d == 3);
        Mat {
            d,
            e: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(d: usize) -> Mat {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.e[i][i] = 1.0;
        }
        m
    }

    /// Builds a matrix entry by entry from `f(i, j)`.
    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.e[i][j] = f(i, j);
            }
        }
        m
    }

    /// Builds a 2x2 matrix from rows.
    pub fn from_rows2(rows: [[f64; 2]; 2]) -> Mat {
        Mat::from_fn(2, |i, j| rows[i][j])
    }

    /// Builds a 3x3 matrix from rows.
    pub fn from_rows3(rows: [[f64; 3]; 3]) -> Mat {
        Mat::from_fn(3, |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.d && j < self.d);
        self.e[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.d && j < self.d);
        self.e[i][j] = v;
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.d, |i, j| self.e[j][i])
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.d, other.d);
        Mat::from_fn(self.d, |i, j| self.e[i][j] + other.e[i][j])
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!(self.d, other.d);
        Mat::from_fn(self.d, |i, j| self.e[i][j] - other.e[i][j])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat::from_fn(self.d, |i, j| s * self.e[i][j])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.d, other.d);
        let d = self.d;
        Mat::from_fn(d, |i, j| (0..d).map(|l| self.e[i][l] * other.e[l][j]).sum())
    }

    pub fn trace(&self) -> f64 {
        (0..self.d).map(|i| self.e[i][i]).sum()
    }

    /// Squared Frobenius norm |M|^2 = sum_ij M_ij^2.
    pub fn norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                s += self.e[i][j] * self.e[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.d {
            for j in 0..self.d {
                m = m.max(self.e[i][j].abs());
            }
        }
        m
    }

    /// Largest |M_ij - M_ji| over all entry pairs.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                m = m.max((self.e[i][j] - self.e[j][i]).abs());
            }
        }
        m
    }

    /// Largest |M_ij + M_ji| over off-diagonal pairs plus |M_ii| on the
    /// diagonal; zero exactly for skew-symmetric matrices.
    pub fn max_skew_defect(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.d {
            m = m.max(self.e[i][i].abs());
            for j in (i + 1)..self.d {
                m = m.max((self.e[i][j] + self.e[j][i]).abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        for i in 0..self.d {
            for j in 0..self.d {
                if !self.e[i][j].is_finite() {
                    return false;
                }
            }
        }
        true
    }
}

/// Symmetric traceless d x d matrix, the local nematic order parameter.
///
/// Both constraints hold exactly: construction goes through
/// [`sym_traceless_project`], which symmetrizes entry pairs with one shared
/// expression and closes the trace on the last diagonal entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QTensor(Mat);

impl QTensor {
    pub fn zero(d: usize) -> QTensor {
        QTensor(Mat::zeros(d))
    }

    pub fn mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }
}

impl std::ops::Deref for QTensor {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

/// Orthogonal projection onto symmetric traceless matrices:
/// P(M) = (M + M^T)/2 - (tr M / d) I.
///
/// Idempotent on `QTensor` inputs. The projected trace is closed exactly by
/// writing the last diagonal entry as minus the sum of the others.
pub fn sym_traceless_project(m: &Mat) -> Result<QTensor> {
    if !m.is_finite() {
        return Err(Error::NonFinite("sym_traceless_project input"));
    }
    let d = m.d;
    let t = m.trace() / d as f64;
    let mut p = Mat::zeros(d);
    for i in 0..d {
        p.e[i][i] = m.e[i][i] - t;
        for j in (i + 1)..d {
            let v = 0.5 * (m.e[i][j] + m.e[j][i]);
            p.e[i][j] = v;
            p.e[j][i] = v;
        }
    }
    let partial: f64 = (0..d - 1).map(|i| p.e[i][i]).sum();
    p.e[d - 1][d - 1] = -partial;
    Ok(QTensor(p))
}

/// Commutator [M, N] = MN - NM.
pub fn commutator(m: &Mat, n: &Mat) -> Result<Mat> {
    if m.d != n.d {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {}x{} with {}x{}",
            m.d, m.d, n.d, n.d
        )));
    }
    Ok(m.matmul(n).sub(&n.matmul(m)))
}

/// Entrywise inner product sum_ij M_ij N_ij = tr(M N^T); equals tr(MN) for
/// symmetric N.
pub fn frobenius(m: &Mat, n: &Mat) -> Result<f64> {
    if m.d != n.d {
        return Err(Error::DimensionMismatch(format!(
            "frobenius of {}x{} with {}x{}",
            m.d, m.d, n.d, n.d
        )));
    }
    let mut s = 0.0;
    for i in 0..m.d {
        for j in 0..m.d {
            s += m.e[i][j] * n.e[i][j];
        }
    }
    Ok(s)
}

/// Bulk free-energy density
/// psi_B(Q) = (a/2) tr(Q^2) - (b/3) tr(Q^3) + (c/4) (tr Q^2)^2.
pub fn bulk_potential(q: &QTensor, c: &MaterialCoefficients) -> f64 {
    let q2 = q.matmul(q);
    let t2 = q2.trace();
    let t3 = q2.matmul(q).trace();
    0.5 * c.a * t2 - c.b / 3.0 * t3 + 0.25 * c.c * t2 * t2
}

/// Molecular field -aQ + b(Q^2 - (1/d)|Q|^2 I) - c Q |Q|^2, the negative
/// bulk-potential gradient projected back onto symmetric traceless matrices.
pub fn molecular_field(q: &QTensor, c: &MaterialCoefficients) -> QTensor {
    let d = q.dim();
    let q2 = q.matmul(q);
    let t2 = q2.trace();
    let mut h = Mat::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let b_part = q2.e[i][j] - if i == j { t2 / d as f64 } else { 0.0 };
            h.e[i][j] = -c.a * q.e[i][j] + c.b * b_part - c.c * q.e[i][j] * t2;
        }
    }
    sym_traceless_project(&h).expect("molecular field of finite Q is finite")
}

/// Co-rotational time flux N = Qdot - [Omega, Q].
///
/// `omega` must be skew-symmetric within 1e-12.
pub fn corotational_flux(qdot: &QTensor, omega: &Mat, q: &QTensor) -> Result<QTensor> {
    let defect = omega.max_skew_defect();
    if !(defect <= 1e-12) {
        return Err(Error::NotSkew(defect));
    }
    let comm = commutator(omega, q.mat())?;
    sym_traceless_project(&qdot.sub(&comm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(a: f64, b: f64, c: f64) -> MaterialCoefficients {
        MaterialCoefficients {
            a,
            b,
            c,
            j: 1.0,
            l: 1.0,
            beta1: 0.0,
            beta4: 1.0,
            beta5: 0.0,
            beta6: 0.0,
            mu1: 1.0,
            mu2: 0.0,
            mu2_tilde: 0.0,
        }
    }

    #[test]
    fn projection_of_zero_and_identity() {
        let z = sym_traceless_project(&Mat::zeros(2)).unwrap();
        assert_eq!(z.norm_sq(), 0.0);
        let p = sym_traceless_project(&Mat::identity(2)).unwrap();
        assert_eq!(p.norm_sq(), 0.0);
    }

    #[test]
    fn projection_hand_value() {
        // [[1,2],[0,0]] -> [[0.5,1],[1,-0.5]]
        let m = Mat::from_rows2([[1.0, 2.0], [0.0, 0.0]]);
        let p = sym_traceless_project(&m).unwrap();
        assert_eq!(p.get(0, 0), 0.5);
        assert_eq!(p.get(0, 1), 1.0);
        assert_eq!(p.get(1, 0), 1.0);
        assert_eq!(p.get(1, 1), -0.5);
    }

    #[test]
    fn projection_rejects_non_finite() {
        let mut m = Mat::zeros(2);
        m.set(0, 1, f64::NAN);
        assert!(sym_traceless_project(&m).is_err());
    }

    #[test]
    fn projection_idempotent_random() {
        let mut rng = 12345u64;
        let mut next = || {
            // xorshift, good enough for test data
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        for d in [2usize, 3] {
            for _ in 0..1000 {
                let m = Mat::from_fn(d, |_, _| next());
                let p = sym_traceless_project(&m).unwrap();
                let pp = sym_traceless_project(p.mat()).unwrap();
                assert!(pp.sub(p.mat()).max_abs() <= 1e-15);
                assert_eq!(p.trace(), 0.0);
                assert_eq!(p.max_asymmetry(), 0.0);
            }
        }
    }

    #[test]
    fn commutator_trivial_and_hand_value() {
        let m = Mat::from_rows2([[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(commutator(&m, &m).unwrap().max_abs(), 0.0);
        assert_eq!(commutator(&Mat::identity(2), &m).unwrap().max_abs(), 0.0);
        let n = Mat::from_rows2([[0.0, -1.0], [1.0, 0.0]]);
        let c = commutator(&m, &n).unwrap();
        assert_eq!(c.get(0, 0), 2.0);
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.get(1, 0), 0.0);
        assert_eq!(c.get(1, 1), -2.0);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        assert!(commutator(&Mat::zeros(2), &Mat::zeros(3)).is_err());
    }

    #[test]
    fn frobenius_basics() {
        let n = Mat::from_rows2([[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(frobenius(&Mat::zeros(2), &n).unwrap(), 0.0);
        assert_eq!(
            frobenius(&Mat::identity(3), &Mat::identity(3)).unwrap(),
            3.0
        );
    }

    #[test]
    fn frobenius_symmetric_against_skew_vanishes() {
        let mut rng = 99u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((rng >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for d in [2usize, 3] {
            for _ in 0..200 {
                let m = Mat::from_fn(d, |_, _| next());
                let b = m.add(&m.transpose()).scale(0.5);
                let c = m.sub(&m.transpose()).scale(0.5);
                assert!(frobenius(&b, &c).unwrap().abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn bulk_potential_symbolic_2d() {
        // Q = diag(s, -s): psi = a s^2 + c s^4 (the cubic invariant vanishes).
        let c = coeffs(1.3, 0.7, 2.1);
        for s in [0.0, 0.4, -1.2] {
            let q = sym_traceless_project(&Mat::from_rows2([[s, 0.0], [0.0, -s]])).unwrap();
            let expect = c.a * s * s + c.c * s * s * s * s;
            assert!((bulk_potential(&q, &c) - expect).abs() <= 1e-14 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn bulk_potential_symbolic_3d() {
        // Q = s diag(2,-1,-1): independent scalar evaluation of the three
        // invariants: tr Q^2 = 6 s^2, tr Q^3 = 6 s^3, (tr Q^2)^2 = 36 s^4.
        let c = coeffs(0.9, 1.1, 0.6);
        let s = 0.37;
        let q = sym_traceless_project(&Mat::from_fn(3, |i, j| {
            if i != j {
                0.0
            } else if i == 0 {
                2.0 * s
            } else {
                -s
            }
        }))
        .unwrap();
        let expect =
            0.5 * c.a * 6.0 * s * s - c.b / 3.0 * 6.0 * s * s * s + 0.25 * c.c * 36.0 * s.powi(4);
        assert!((bulk_potential(&q, &c) - expect).abs() <= 1e-14);
    }

    #[test]
    fn molecular_field_linear_case() {
        let c = coeffs(2.0, 0.0, 0.0);
        let q = sym_traceless_project(&Mat::from_rows2([[0.3, 0.8], [0.8, -0.3]])).unwrap();
        let h = molecular_field(&q, &c);
        assert!(h.sub(&q.scale(-2.0)).max_abs() <= 1e-15);
    }

    #[test]
    fn molecular_field_symbolic_diag() {
        // d=2, Q = diag(s,-s): b-term vanishes, H = diag(-as - 2cs^3, ...).
        let c = coeffs(1.5, 0.9, 0.8);
        let s = 0.6;
        let q = sym_traceless_project(&Mat::from_rows2([[s, 0.0], [0.0, -s]])).unwrap();
        let h = molecular_field(&q, &c);
        let expect = -c.a * s - c.c * s * (2.0 * s * s);
        assert!((h.get(0, 0) - expect).abs() <= 1e-14);
        assert!((h.get(1, 1) + expect).abs() <= 1e-14);
        assert!(h.get(0, 1).abs() <= 1e-14);
    }

    #[test]
    fn corotational_flux_cases() {
        let q = sym_traceless_project(&Mat::from_rows2([[1.0, 0.0], [0.0, -1.0]])).unwrap();
        let qdot = sym_traceless_project(&Mat::from_rows2([[0.2, 0.5], [0.5, -0.2]])).unwrap();

        // Omega = 0 passes Qdot through.
        let n = corotational_flux(&qdot, &Mat::zeros(2), &q).unwrap();
        assert!(n.sub(qdot.mat()).max_abs() <= 1e-15);

        // Qdot = 0, diagonal Q, standard rotation generator: -[Omega, Q] by hand.
        // Omega = [[0,1],[-1,0]], [Omega,Q] = [[0,-2],[-2,0]].
        let omega = Mat::from_rows2([[0.0, 1.0], [-1.0, 0.0]]);
        let n = corotational_flux(&QTensor::zero(2), &omega, &q).unwrap();
        assert_eq!(n.get(0, 1), 2.0);
        assert_eq!(n.get(1, 0), 2.0);
        assert_eq!(n.get(0, 0), 0.0);

        // Non-skew omega is rejected.
        let bad = Mat::from_rows2([[0.0, 1.0], [-1.0 + 1e-6, 0.0]]);
        assert!(corotational_flux(&qdot, &bad, &q).is_err());
    }
}
