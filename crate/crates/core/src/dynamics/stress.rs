//! Strain/vorticity decomposition and the three stress tensors.
//!
//! Index conventions (fixed once, used everywhere): gradients carry entries
//! (A + Omega)_ij = d_j u_i, i.e.
//!
//! ```text
//! A_ij     = (d_j u_i + d_i u_j) / 2      (symmetric, traceless for div u = 0)
//! Omega_ij = (d_j u_i - d_i u_j) / 2      (skew-symmetric)
//! ```
//!
//! and stress divergences are row-wise, (div S)_i = d_j S_ij. This choice
//! makes the L2 cancellations of the energy balance hold discretely (the
//! test suite checks them).
//!
//! The stress operations here evaluate the raw pointwise formulas
//!
//! ```text
//! Sigma1 = -L grad Q (.) grad Q,   (grad Q (.) grad Q)_ij = d_i Q_kl d_j Q_kl
//! Sigma2 = beta1 Q tr(QA) + beta5 A Q + beta6 Q A
//! Sigma3 = (mu2/2) N + mu1 [Q, N],   N = R - [Omega, Q]
//! ```
//!
//! without dealiasing or mollification; the right-hand-side assembly in
//! `rhs` applies those cutoffs where the approximating system places them.

use rayon::prelude::*;

use crate::coefficients::MaterialCoefficients;
use crate::spectral::{MatrixField, ScalarField, VectorField};

/// Raw stresses of a state, mainly for inspection and tests.
#[derive(Clone, Debug)]
pub struct StressSet {
    pub sigma1: MatrixField,
    pub sigma2: MatrixField,
    pub sigma3: MatrixField,
}

/// Physical samples of every component of a matrix field.
pub(crate) fn matrix_phys(m: &MatrixField) -> Vec<Vec<f64>> {
    m.components().par_iter().map(|c| c.to_physical()).collect()
}

pub(crate) fn vector_phys(u: &VectorField) -> Vec<Vec<f64>> {
    (0..u.dim())
        .into_par_iter()
        .map(|i| u.comp(i).to_physical())
        .collect()
}

/// Builds a matrix field from d*d physical component arrays.
pub(crate) fn matrix_from_phys(
    grid: &std::sync::Arc<crate::spectral::Grid>,
    d: usize,
    data: Vec<Vec<f64>>,
) -> MatrixField {
    let comps: Vec<ScalarField> = data
        .into_par_iter()
        .map(|samples| ScalarField::from_physical(grid, &samples).expect("sizes match"))
        .collect();
    MatrixField::from_components(d, comps).expect("component count is d*d")
}

/// Strain rate A and vorticity Omega of a velocity field, computed
/// spectrally.
pub fn strain_and_vorticity(u: &VectorField) -> (MatrixField, MatrixField) {
    let grid = u.grid().clone();
    let d = u.dim();
    let mut a = MatrixField::zeros(&grid);
    let mut w = MatrixField::zeros(&grid);
    for i in 0..d {
        for j in 0..d {
            let dj_ui = u.comp(i).derivative(j).expect("axis < d");
            let di_uj = u.comp(j).derivative(i).expect("axis < d");
            *a.comp_mut(i, j) = dj_ui.add(&di_uj).scale(0.5);
            *w.comp_mut(i, j) = dj_ui.sub(&di_uj).scale(0.5);
        }
    }
    (a, w)
}

/// Elastic (distortion) stress -L grad Q (.) grad Q.
pub fn ericksen_stress(q: &MatrixField, l: f64) -> MatrixField {
    let grid = q.grid().clone();
    let d = q.dim();
    let size = grid.size();
    // d_axis Q_kl in physical space, indexed [ (k*d + l)*d + axis ]
    let grads: Vec<Vec<f64>> = (0..d * d * d)
        .into_par_iter()
        .map(|idx| {
            let axis = idx % d;
            let kl = idx / d;
            q.components()[kl]
                .derivative(axis)
                .expect("axis < d")
                .to_physical()
        })
        .collect();
    let mut out = vec![vec![0.0; size]; d * d];
    for i in 0..d {
        for j in 0..d {
            let dst = &mut out[i * d + j];
            for kl in 0..d * d {
                let gi = &grads[kl * d + i];
                let gj = &grads[kl * d + j];
                for (p, v) in dst.iter_mut().enumerate() {
                    *v -= l * gi[p] * gj[p];
                }
            }
        }
    }
    matrix_from_phys(&grid, d, out)
}

/// Viscous stress beta1 Q tr(QA) + beta5 A Q + beta6 Q A, pointwise.
pub fn viscous_stress(q: &MatrixField, a: &MatrixField, c: &MaterialCoefficients) -> MatrixField {
    let grid = q.grid().clone();
    let d = q.dim();
    let size = grid.size();
    let qp = matrix_phys(q);
    let ap = matrix_phys(a);
    let mut out = vec![vec![0.0; size]; d * d];
    for p in 0..size {
        // tr(QA) = Q : A for symmetric factors
        let mut qa_tr = 0.0;
        for i in 0..d {
            for j in 0..d {
                qa_tr += qp[i * d + j][p] * ap[j * d + i][p];
            }
        }
        for i in 0..d {
            for j in 0..d {
                let mut aq = 0.0;
                let mut qa = 0.0;
                for l in 0..d {
                    aq += ap[i * d + l][p] * qp[l * d + j][p];
                    qa += qp[i * d + l][p] * ap[l * d + j][p];
                }
                out[i * d + j][p] =
                    c.beta1 * qp[i * d + j][p] * qa_tr + c.beta5 * aq + c.beta6 * qa;
            }
        }
    }
    matrix_from_phys(&grid, d, out)
}

/// Co-rotational stress (mu2/2) N + mu1 [Q, N] with N = R - [Omega, Q],
/// pointwise.
pub fn corotational_stress(
    q: &MatrixField,
    r: &MatrixField,
    omega: &MatrixField,
    c: &MaterialCoefficients,
) -> MatrixField {
    let grid = q.grid().clone();
    let d = q.dim();
    let size = grid.size();
    let qp = matrix_phys(q);
    let rp = matrix_phys(r);
    let wp = matrix_phys(omega);
    let mut out = vec![vec![0.0; size]; d * d];
    let mut n = vec![0.0; 9];
    for p in 0..size {
        for i in 0..d {
            for j in 0..d {
                let mut comm = 0.0;
                for l in 0..d {
                    comm +=
                        wp[i * d + l][p] * qp[l * d + j][p] - qp[i * d + l][p] * wp[l * d + j][p];
                }
                n[i * 3 + j] = rp[i * d + j][p] - comm;
            }
        }
        for i in 0..d {
            for j in 0..d {
                let mut qn_comm = 0.0;
                for l in 0..d {
                    qn_comm += qp[i * d + l][p] * n[l * 3 + j] - n[i * 3 + l] * qp[l * d + j][p];
                }
                out[i * d + j][p] = 0.5 * c.mu2 * n[i * 3 + j] + c.mu1 * qn_comm;
            }
        }
    }
    matrix_from_phys(&grid, d, out)
}

/// Raw stress triple of a state.
pub fn stress_set(state: &super::FlowState, c: &MaterialCoefficients) -> StressSet {
    let (a, omega) = strain_and_vorticity(&state.u);
    StressSet {
        sigma1: ericksen_stress(&state.q, c.l),
        sigma2: viscous_stress(&state.q, &a, c),
        sigma3: corotational_stress(&state.q, &state.r, &omega, c),
    }
}
