//! Right-hand sides of the mollified evolution equations.
//!
//! Every nonlinear product is formed in physical space, two-thirds
//! dealiased, and passed through the sharp cutoff J_eps exactly where the
//! approximating system places it:
//!
//! ```text
//! u:  dt u + P J(u.grad u) - (b4/2) Lap u
//!       = P div[ J(-L gradQ (.) gradQ + b1 Q tr(QA) + b5 AQ + b6 QA)
//!                + (mu2/2) (R - J[Omega,Q]) + mu1 J[Q, R - [Omega,Q]] ]
//! Q:  dt Q = R - J(u.grad Q)
//! R:  J_c (dt R + J(u.grad R))
//!       = -mu1 R + L Lap Q - a Q + b J(QQ) - (b/d) tr(J(QQ)) I
//!         - c J(Q tr(QQ)) + (mu2~/2) A + mu1 J[Omega, Q]
//! ```
//!
//! (`J_c` is the inertial constant; `J` the cutoff; A is a Fourier
//! multiplier of the state's u and stays inside its spectral support, so it
//! carries no cutoff of its own.) With eps = 0 the cutoff reduces to
//! dealiasing alone.

use crate::coefficients::MaterialCoefficients;
use crate::dynamics::stress::{matrix_from_phys, matrix_phys, strain_and_vorticity, vector_phys};
use crate::dynamics::FlowState;
use crate::spectral::{MatrixField, ScalarField, VectorField};

/// Explicitly-integrated part of the time derivative: everything except the
/// per-mode stiff linear terms ((b4/2) Lap on u; the damped-oscillator pair
/// on (Q, R)). `dr` is already divided by the inertial constant.
pub(crate) struct ExplicitRhs {
    pub du: VectorField,
    pub dq: MatrixField,
    pub dr: MatrixField,
}

fn cut_matrix(m: MatrixField, eps: f64) -> MatrixField {
    let m = m.dealias();
    if eps > 0.0 {
        m.mollify(eps).expect("eps > 0")
    } else {
        m
    }
}

fn cut_vector(v: VectorField, eps: f64) -> VectorField {
    let v = v.dealias();
    if eps > 0.0 {
        v.mollify(eps).expect("eps > 0")
    } else {
        v
    }
}

pub(crate) fn explicit_rhs(state: &FlowState, c: &MaterialCoefficients) -> ExplicitRhs {
    let grid = state.grid().clone();
    let d = grid.dim();
    let size = grid.size();
    let eps = state.eps;

    // Physical tables.
    let up = vector_phys(&state.u);
    let qp = matrix_phys(&state.q);
    let rp = matrix_phys(&state.r);
    let (a_spec, _omega_spec) = strain_and_vorticity(&state.u);
    let ap = matrix_phys(&a_spec);
    // d_j u_i, indexed i*d + j
    let mut gup: Vec<Vec<f64>> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            gup.push(
                state
                    .u
                    .comp(i)
                    .derivative(j)
                    .expect("axis < d")
                    .to_physical(),
            );
        }
    }
    // d_axis Q_ij and d_axis R_ij, indexed (i*d + j)*d + axis
    let mut gqp: Vec<Vec<f64>> = Vec::with_capacity(d * d * d);
    let mut grp: Vec<Vec<f64>> = Vec::with_capacity(d * d * d);
    for ij in 0..d * d {
        for axis in 0..d {
            gqp.push(
                state.q.components()[ij]
                    .derivative(axis)
                    .unwrap()
                    .to_physical(),
            );
            grp.push(
                state.r.components()[ij]
                    .derivative(axis)
                    .unwrap()
                    .to_physical(),
            );
        }
    }

    // Pointwise products.
    let mut adv_u = vec![vec![0.0; size]; d];
    let mut adv_q = vec![vec![0.0; size]; d * d];
    let mut adv_r = vec![vec![0.0; size]; d * d];
    // -L gradQ (.) gradQ + b1 Q tr(QA) + b5 AQ + b6 QA (shared cutoff)
    let mut stress_m = vec![vec![0.0; size]; d * d];
    let mut comm_oq = vec![vec![0.0; size]; d * d];
    let mut comm_big = vec![vec![0.0; size]; d * d];
    let mut qq = vec![vec![0.0; size]; d * d];
    let mut cubic = vec![vec![0.0; size]; d * d];

    let mut n_loc = [0.0f64; 9]; // R - [Omega, Q] at a point
    for p in 0..size {
        // advection of u
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..d {
                s += up[j][p] * gup[i * d + j][p];
            }
            adv_u[i][p] = s;
        }
        // advection of Q and R
        for ij in 0..d * d {
            let mut sq = 0.0;
            let mut sr = 0.0;
            for axis in 0..d {
                sq += up[axis][p] * gqp[ij * d + axis][p];
                sr += up[axis][p] * grp[ij * d + axis][p];
            }
            adv_q[ij][p] = sq;
            adv_r[ij][p] = sr;
        }
        // tr(QA) and tr(QQ)
        let mut qa_tr = 0.0;
        let mut qq_tr = 0.0;
        for i in 0..d {
            for j in 0..d {
                qa_tr += qp[i * d + j][p] * ap[j * d + i][p];
                qq_tr += qp[i * d + j][p] * qp[j * d + i][p];
            }
        }
        // Omega_ij = (d_j u_i - d_i u_j)/2 from the gradient table
        for i in 0..d {
            for j in 0..d {
                let mut comm = 0.0;
                for l in 0..d {
                    let w_il = 0.5 * (gup[i * d + l][p] - gup[l * d + i][p]);
                    let w_lj = 0.5 * (gup[l * d + j][p] - gup[j * d + l][p]);
                    comm += w_il * qp[l * d + j][p] - qp[i * d + l][p] * w_lj;
                }
                comm_oq[i * d + j][p] = comm;
                n_loc[i * 3 + j] = rp[i * d + j][p] - comm;
            }
        }
        for i in 0..d {
            for j in 0..d {
                // gradQ (.) gradQ
                let mut erick = 0.0;
                for kl in 0..d * d {
                    erick += gqp[kl * d + i][p] * gqp[kl * d + j][p];
                }
                // AQ and QA
                let mut aq = 0.0;
                let mut qa = 0.0;
                let mut q2 = 0.0;
                let mut qn = 0.0;
                for l in 0..d {
                    aq += ap[i * d + l][p] * qp[l * d + j][p];
                    qa += qp[i * d + l][p] * ap[l * d + j][p];
                    q2 += qp[i * d + l][p] * qp[l * d + j][p];
                    qn += qp[i * d + l][p] * n_loc[l * 3 + j] - n_loc[i * 3 + l] * qp[l * d + j][p];
                }
                stress_m[i * d + j][p] =
                    -c.l * erick + c.beta1 * qp[i * d + j][p] * qa_tr + c.beta5 * aq + c.beta6 * qa;
                comm_big[i * d + j][p] = qn;
                qq[i * d + j][p] = q2;
                cubic[i * d + j][p] = qp[i * d + j][p] * qq_tr;
            }
        }
    }

    // Back to spectral space with the cutoffs in place.
    let adv_u = cut_vector(
        VectorField::from_components(
            adv_u
                .into_iter()
                .map(|v| ScalarField::from_physical(&grid, &v).unwrap())
                .collect(),
        )
        .unwrap(),
        eps,
    );
    let adv_q = cut_matrix(matrix_from_phys(&grid, d, adv_q), eps);
    let adv_r = cut_matrix(matrix_from_phys(&grid, d, adv_r), eps);
    let stress_m = cut_matrix(matrix_from_phys(&grid, d, stress_m), eps);
    let comm_oq = cut_matrix(matrix_from_phys(&grid, d, comm_oq), eps);
    let comm_big = cut_matrix(matrix_from_phys(&grid, d, comm_big), eps);
    let qq = cut_matrix(matrix_from_phys(&grid, d, qq), eps);
    let cubic = cut_matrix(matrix_from_phys(&grid, d, cubic), eps);

    // Total stress: J(...) + (mu2/2)(R - J[Omega,Q]) + mu1 J[Q, R - [Omega,Q]]
    let mut sigma = stress_m;
    sigma.add_assign_scaled(&state.r, 0.5 * c.mu2);
    sigma.add_assign_scaled(&comm_oq, -0.5 * c.mu2);
    sigma.add_assign_scaled(&comm_big, c.mu1);

    // du = P[ -J(u.grad u) + div sigma ]
    let mut du = sigma.divergence();
    du.add_assign_scaled(&adv_u, -1.0);
    let du = du.leray_project();

    // dq = -J(u.grad Q)
    let dq = adv_q.scale(-1.0);

    // dr = (1/J_c)[ -J_c J(u.grad R) + b J(QQ) - (b/d) tr(J(QQ)) I
    //               - c J(Q tr QQ) + (mu2~/2) A + mu1 J[Omega,Q] ]
    let mut dr = adv_r.scale(-c.j);
    dr.add_assign_scaled(&qq, c.b);
    let qq_tr = qq.trace_field();
    for i in 0..d {
        dr.comp_mut(i, i).add_assign_scaled(&qq_tr, -c.b / d as f64);
    }
    dr.add_assign_scaled(&cubic, -c.c);
    dr.add_assign_scaled(&a_spec, 0.5 * c.mu2_tilde);
    dr.add_assign_scaled(&comm_oq, c.mu1);
    let dr = dr.scale(1.0 / c.j);

    ExplicitRhs { du, dq, dr }
}

/// Velocity equation right side: P[-J(u.grad u) + div(Sigma1+Sigma2+Sigma3)
/// mollified per the approximating system] + (beta4/2) Lap u. Pressure is
/// eliminated by the Leray projection.
pub fn rhs_velocity(state: &FlowState, c: &MaterialCoefficients) -> VectorField {
    let ex = explicit_rhs(state, c);
    let mut out = ex.du;
    for i in 0..state.u.dim() {
        out.comp_mut(i)
            .add_assign_scaled(&state.u.comp(i).laplacian(), 0.5 * c.beta4);
    }
    out
}

/// Order-parameter equation right side: the full J_c dt R, with the
/// advection of R moved to the right:
///
/// ```text
/// J_c dt R = -J_c J(u.grad R) - mu1 R + L Lap Q - a Q + molecular terms
///            + (mu2~/2) A + mu1 J[Omega, Q].
/// ```
///
/// The result is symmetric traceless within rounding for admissible states.
pub fn rhs_qtensor(state: &FlowState, c: &MaterialCoefficients) -> MatrixField {
    let ex = explicit_rhs(state, c);
    let d = state.q.dim();
    let mut out = ex.dr.scale(c.j);
    for i in 0..d {
        for j in 0..d {
            let mut lin = state.q.comp(i, j).laplacian().scale(c.l);
            lin.add_assign_scaled(state.q.comp(i, j), -c.a);
            lin.add_assign_scaled(state.r.comp(i, j), -c.mu1);
            out.comp_mut(i, j).add_assign_scaled(&lin, 1.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;

    fn coeffs() -> MaterialCoefficients {
        MaterialCoefficients {
            a: 1.0,
            b: 0.5,
            c: 1.0,
            j: 0.5,
            l: 1.0,
            beta1: 0.1,
            beta4: 2.0,
            beta5: -0.5,
            beta6: 0.5,
            mu1: 1.0,
            mu2: 1.0,
            mu2_tilde: 1.0,
        }
    }

    #[test]
    fn zero_state_has_zero_rhs() {
        let g = Grid::new(2, 16).unwrap();
        let st = FlowState::zero(&g, 0.0);
        let c = coeffs();
        let du = rhs_velocity(&st, &c);
        let dq = rhs_qtensor(&st, &c);
        assert!(du.comp(0).max_abs_coef() == 0.0);
        assert!(du.comp(1).max_abs_coef() == 0.0);
        assert!(dq.components().iter().all(|f| f.max_abs_coef() == 0.0));
    }

    #[test]
    fn qtensor_rhs_linear_symbol() {
        // u = 0, b = c = 0: per mode, J dtR = (L Lap - a) Q - mu1 R.
        let g = Grid::new(2, 16).unwrap();
        let mut st = FlowState::zero(&g, 0.0);
        let mut c = coeffs();
        c.b = 0.0;
        c.c = 0.0;
        st.q.comp_mut(0, 1)
            .set_mode_pair(&[2, 1], Complex64::new(0.3, -0.1));
        st.q.comp_mut(1, 0)
            .set_mode_pair(&[2, 1], Complex64::new(0.3, -0.1));
        st.r.comp_mut(0, 1)
            .set_mode_pair(&[2, 1], Complex64::new(-0.2, 0.05));
        st.r.comp_mut(1, 0)
            .set_mode_pair(&[2, 1], Complex64::new(-0.2, 0.05));
        let rhs = rhs_qtensor(&st, &c);
        let ksq = 5.0;
        let expect = st.q.comp(0, 1).mode(&[2, 1]) * (-c.l * ksq - c.a)
            + st.r.comp(0, 1).mode(&[2, 1]) * (-c.mu1);
        let got = rhs.comp(0, 1).mode(&[2, 1]);
        assert!((got - expect).norm() <= 1e-13);
    }

    #[test]
    fn velocity_rhs_manufactured_advection() {
        // Q = 0, u = (sin x2, sin x1):
        // u.grad u = (sin x1 cos x2, cos x1 sin x2), and the viscous part is
        // -(beta4/2) u. Check rhs = P(-u.grad u) - (beta4/2) u mode by mode.
        let g = Grid::new(2, 32).unwrap();
        let c = coeffs();
        let mut st = FlowState::zero(&g, 0.0);
        *st.u.comp_mut(0) = crate::spectral::ScalarField::from_fn(&g, |x| x[1].sin());
        *st.u.comp_mut(1) = crate::spectral::ScalarField::from_fn(&g, |x| x[0].sin());
        let rhs = rhs_velocity(&st, &c);

        let adv = VectorField::from_components(vec![
            crate::spectral::ScalarField::from_fn(&g, |x| x[0].sin() * x[1].cos()),
            crate::spectral::ScalarField::from_fn(&g, |x| x[0].cos() * x[1].sin()),
        ])
        .unwrap();
        let mut expect = adv.scale(-1.0).leray_project();
        expect.add_assign_scaled(&st.u, -0.5 * c.beta4);
        for i in 0..2 {
            let err = rhs.comp(i).sub(expect.comp(i)).max_abs_coef();
            assert!(err <= 1e-12, "component {i}: {err}");
        }
    }

    #[test]
    fn qtensor_rhs_manufactured_cubic() {
        // u = 0, Q = sin(x1) diag(1,-1): the quadratic invariant term
        // vanishes, tr(QQ) = 2 sin^2 x1, and
        //   J dtR = [(-L - a) sin x1 - 2c sin^3 x1] diag(1,-1) - mu1 R.
        let g = Grid::new(2, 32).unwrap();
        let mut c = coeffs();
        c.mu2_tilde = 0.0;
        c.mu2 = 0.0;
        c.beta5 = 0.0;
        c.beta6 = 0.0;
        let mut st = FlowState::zero(&g, 0.0);
        *st.q.comp_mut(0, 0) = crate::spectral::ScalarField::from_fn(&g, |x| x[0].sin());
        *st.q.comp_mut(1, 1) = crate::spectral::ScalarField::from_fn(&g, |x| -x[0].sin());
        let rhs = rhs_qtensor(&st, &c);
        let expect = crate::spectral::ScalarField::from_fn(&g, |x| {
            (-c.l - c.a) * x[0].sin() - 2.0 * c.c * x[0].sin().powi(3)
        });
        let err = rhs.comp(0, 0).sub(&expect).max_abs_coef();
        assert!(err <= 1e-12, "{err}");
        let err11 = rhs.comp(1, 1).add(&expect).max_abs_coef();
        assert!(err11 <= 1e-12, "{err11}");
        assert!(rhs.comp(0, 1).max_abs_coef() <= 1e-13);
    }
}
