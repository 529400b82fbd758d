//! Material coefficients, admissibility relations, and the well-posedness
//! regime classifier.
//!
//! The twelve model constants are gated by three nested coefficient
//! conditions:
//!
//! ```text
//! baseline:    a > 0, J > 0, L > 0, beta1 >= 0, beta4 > 0, mu1 > 0,
//!              beta6 - beta5 = mu2                      (Parodi)
//! entropy:     baseline strict parts, beta5 + beta6 = 0,
//!              (mu2~ - mu2)^2 < 8 beta4 mu1
//! condition H: (mu2~ - mu2)^2 + 4 mu2^2 < 8 beta4 mu1
//! ```
//!
//! Condition (H) certifies coercivity of the dissipation quadratic form
//!
//! ```text
//! F(X,Y,Z) = (1/2) beta4 |X|^2 + mu1 (|Y|^2 + |Z|^2)
//!            - (1/2)(mu2~ - mu2) X:Y - mu2 X:Z
//! ```
//!
//! through positive semidefiniteness of a 3x3 Hessian carrying slack
//! margins (delta0, delta1).
//!
//! Strict inequalities are tested with exact floating-point comparison;
//! equality constraints (which arrive as parsed decimals) get 1e-12 slack.
//! The boundary case (mu2~ - mu2)^2 = 8 beta4 mu1 counts as entropy-fail.

use crate::error::{Error, Result};
use crate::tensor::Mat;

/// Slack for equality constraints read from configuration text.
pub const EQ_TOL: f64 = 1e-12;

/// The twelve material constants of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialCoefficients {
    /// Bulk-potential quadratic constant (must be positive).
    pub a: f64,
    /// Bulk-potential cubic constant.
    pub b: f64,
    /// Bulk-potential quartic constant.
    pub c: f64,
    /// Inertial constant J > 0 multiplying the second material derivative.
    pub j: f64,
    /// Elastic (one-constant) diffusion coefficient L > 0.
    pub l: f64,
    pub beta1: f64,
    pub beta4: f64,
    pub beta5: f64,
    pub beta6: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// The molecular-field coupling viscosity; equals `mu2` in the original
    /// formulation of the model, kept independent here.
    pub mu2_tilde: f64,
}

/// Solution-theory capabilities implied by the coefficient gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Capability {
    /// Local-in-time solutions for arbitrarily large initial energy.
    LargeDataLocal,
    /// Local-in-time solutions for small initial energy (always available).
    SmallDataLocal,
    /// Global-in-time solutions for small initial energy.
    GlobalSmallData,
    /// Exponential decay of the energy on the periodic domain.
    TorusDecay,
}

impl Capability {
    pub fn name(&self) -> &'static str {
        match self {
            Capability::LargeDataLocal => "LargeDataLocal",
            Capability::SmallDataLocal => "SmallDataLocal",
            Capability::GlobalSmallData => "GlobalSmallData",
            Capability::TorusDecay => "TorusDecay",
        }
    }
}

/// Outcome of the regime classification.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeReport {
    pub parodi_ok: bool,
    pub entropy_ok: bool,
    pub condition_h_ok: bool,
    /// Whether mu2~ = mu2 (within [`EQ_TOL`]).
    pub mu2_equal: bool,
    /// Coercivity margins, present exactly when Condition (H) holds.
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
    pub capabilities: Vec<Capability>,
}

impl RegimeReport {
    pub fn has(&self, cap: Capability) -> bool {
        self.capabilities.contains(&cap)
    }
}

impl MaterialCoefficients {
    /// Checks the always-required relations; returns an error naming the
    /// first violated one.
    pub fn validate_baseline(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::Coefficients(format!(
                "a > 0 required (a = {})",
                self.a
            )));
        }
        if !(self.j > 0.0) {
            return Err(Error::Coefficients(format!(
                "J > 0 required (J = {})",
                self.j
            )));
        }
        if !(self.l > 0.0) {
            return Err(Error::Coefficients(format!(
                "L > 0 required (L = {})",
                self.l
            )));
        }
        if !(self.beta1 >= 0.0) {
            return Err(Error::Coefficients(format!(
                "beta1 >= 0 required (beta1 = {})",
                self.beta1
            )));
        }
        if !(self.beta4 > 0.0) {
            return Err(Error::Coefficients(format!(
                "beta4 > 0 required (beta4 = {})",
                self.beta4
            )));
        }
        if !(self.mu1 > 0.0) {
            return Err(Error::Coefficients(format!(
                "mu1 > 0 required (mu1 = {})",
                self.mu1
            )));
        }
        if !self.check_parodi() {
            return Err(Error::Coefficients(format!(
                "Parodi relation beta6 - beta5 = mu2 violated ({} - {} != {})",
                self.beta6, self.beta5, self.mu2
            )));
        }
        Ok(())
    }

    /// Parodi relation beta6 - beta5 = mu2, within [`EQ_TOL`].
    pub fn check_parodi(&self) -> bool {
        (self.beta6 - self.beta5 - self.mu2).abs() <= EQ_TOL
    }

    /// Entropy inequality: beta1 >= 0, beta4 > 0, mu1 > 0, beta5 + beta6 = 0,
    /// and (mu2~ - mu2)^2 < 8 beta4 mu1 (strict).
    pub fn check_entropy(&self) -> bool {
        let m = self.mu2_tilde - self.mu2;
        self.beta1 >= 0.0
            && self.beta4 > 0.0
            && self.mu1 > 0.0
            && (self.beta5 + self.beta6).abs() <= EQ_TOL
            && m * m < 8.0 * self.beta4 * self.mu1
    }

    /// Condition (H): (mu2~ - mu2)^2 + 4 mu2^2 < 8 beta4 mu1 (strict).
    pub fn check_condition_h(&self) -> bool {
        let m = self.mu2_tilde - self.mu2;
        m * m + 4.0 * self.mu2 * self.mu2 < 8.0 * self.beta4 * self.mu1
    }

    /// Dissipation quadratic form
    /// F(X,Y,Z) = (1/2) beta4 |X|^2 + mu1(|Y|^2 + |Z|^2)
    ///            - (1/2)(mu2~ - mu2) X:Y - mu2 X:Z.
    pub fn quadratic_form_f(&self, x: &Mat, y: &Mat, z: &Mat) -> Result<f64> {
        if x.dim() != y.dim() || x.dim() != z.dim() {
            return Err(Error::DimensionMismatch(
                "quadratic form arguments must share a dimension".into(),
            ));
        }
        let xy = crate::tensor::frobenius(x, y)?;
        let xz = crate::tensor::frobenius(x, z)?;
        Ok(
            0.5 * self.beta4 * x.norm_sq() + self.mu1 * (y.norm_sq() + z.norm_sq())
                - 0.5 * (self.mu2_tilde - self.mu2) * xy
                - self.mu2 * xz,
        )
    }

    /// Margin Hessian at slack (delta0, delta1):
    ///
    /// ```text
    /// [ (1-d0) b4        -(m2~-m2)/2    -m2     ]
    /// [ -(m2~-m2)/2      2 m1 (1-d1)     0      ]
    /// [ -m2               0              2 m1   ]
    /// ```
    ///
    /// Positive semidefinite iff all eigenvalues >= -1e-12.
    pub fn hessian_psd(&self, delta0: f64, delta1: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&delta0) || !(0.0..=1.0).contains(&delta1) {
            return Err(Error::InvalidParameter(format!(
                "delta0, delta1 must lie in [0, 1] (got {delta0}, {delta1})"
            )));
        }
        let m = self.mu2_tilde - self.mu2;
        let h = [
            [(1.0 - delta0) * self.beta4, -0.5 * m, -self.mu2],
            [-0.5 * m, 2.0 * self.mu1 * (1.0 - delta1), 0.0],
            [-self.mu2, 0.0, 2.0 * self.mu1],
        ];
        let eigs = sym3_eigenvalues(h);
        Ok(eigs.iter().all(|&e| e >= -1e-12))
    }

    /// Largest common slack delta0 = delta1 in (0, 1] keeping the margin
    /// Hessian positive semidefinite, found by bisection to absolute
    /// tolerance 1e-10. Absent when Condition (H) fails.
    pub fn coercivity_margins(&self) -> Option<(f64, f64)> {
        if !self.check_condition_h() {
            return None;
        }
        let psd = |d: f64| self.hessian_psd(d, d).expect("delta within range");
        if psd(1.0) {
            return Some((1.0, 1.0));
        }
        // The Hessian decreases in Loewner order as delta grows, so
        // feasibility is monotone and bisection applies.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        debug_assert!(psd(lo));
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if psd(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some((lo, lo))
    }

    /// Classifies the regime per the coefficient gates. Baseline violations
    /// are errors naming the violated relation.
    pub fn classify_regime(&self) -> Result<RegimeReport> {
        self.validate_baseline()?;
        let entropy_ok = self.check_entropy();
        let condition_h_ok = self.check_condition_h();
        let mu2_equal = (self.mu2_tilde - self.mu2).abs() <= EQ_TOL;
        let symmetric_viscous_part_zero = (self.beta5 + self.beta6).abs() <= EQ_TOL;
        let m = self.mu2_tilde - self.mu2;
        let h_inequality = m * m < 8.0 * self.beta4 * self.mu1;

        let margins = self.coercivity_margins();
        let (delta0, delta1) = match margins {
            Some((d0, d1)) => (Some(d0), Some(d1)),
            None => (None, None),
        };

        let mut capabilities = vec![Capability::SmallDataLocal];
        if symmetric_viscous_part_zero && condition_h_ok {
            capabilities.push(Capability::LargeDataLocal);
        }
        let global = h_inequality || mu2_equal;
        if global {
            capabilities.push(Capability::GlobalSmallData);
            capabilities.push(Capability::TorusDecay);
        }
        capabilities.sort();

        Ok(RegimeReport {
            parodi_ok: self.check_parodi(),
            entropy_ok,
            condition_h_ok,
            mu2_equal,
            delta0,
            delta1,
            capabilities,
        })
    }
}

/// Eigenvalues of a symmetric 3x3 matrix in ascending order, by the
/// trigonometric closed form (Smith's method).
pub fn sym3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        let mut e = [m[0][0], m[1][1], m[2][2]];
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return e;
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| (m[i][j] - if i == j { q } else { 0.0 }) / p;
    let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut e = [e1, e2, e3];
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}
