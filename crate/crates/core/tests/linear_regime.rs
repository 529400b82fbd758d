//! Exactness of the stepper's per-mode linear integration, pinned against
//! the closed-form oscillator and heat solutions.

use num_complex::Complex64;
use qsflow_core::coefficients::MaterialCoefficients;
use qsflow_core::dynamics::{step, FlowState};
use qsflow_core::oracle::damped_mode_exact;
use qsflow_core::spectral::Grid;

fn coeffs(mu1: f64, j: f64) -> MaterialCoefficients {
    MaterialCoefficients {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        j,
        l: 1.0,
        beta1: 0.0,
        beta4: 2.0,
        beta5: 0.0,
        beta6: 0.0,
        mu1,
        mu2: 0.0,
        mu2_tilde: 0.0,
    }
}

/// u = 0, b = c = 0, single Q mode: 100 steps against the exact damped
/// oscillator, across the three damping branches.
#[test]
fn q_mode_matches_exact_oscillator() {
    let g = Grid::new(2, 16).unwrap();
    let k = [1i64, 0];
    // kappa = L|k|^2 + a = 2 with J = 0.5: critical at mu1 = 2.
    for (label, mu1) in [("underdamped", 0.4), ("critical", 2.0), ("overdamped", 5.0)] {
        let c = coeffs(mu1, 0.5);
        let (q0, r0) = (0.8, -0.3);
        let mut st = FlowState::zero(&g, 0.0);
        // diagonal Q aligned with k keeps single-mode stress divergences in
        // the gradient subspace, so u stays identically zero
        for (sign, ij) in [(1.0, (0, 0)), (-1.0, (1, 1))] {
            st.q.comp_mut(ij.0, ij.1)
                .set_mode_pair(&k, Complex64::new(0.5 * sign * q0, 0.0));
            st.r.comp_mut(ij.0, ij.1)
                .set_mode_pair(&k, Complex64::new(0.5 * sign * r0, 0.0));
        }
        let dt = 0.01;
        let mut cur = st;
        for _ in 0..100 {
            cur = step(&cur, dt, &c).unwrap();
        }
        let t = 1.0;
        let (qe, re) = damped_mode_exact(&k, q0, r0, &c, t);
        let qn = 2.0 * cur.q.comp(0, 0).mode(&k).re;
        let rn = 2.0 * cur.r.comp(0, 0).mode(&k).re;
        assert!((qn - qe).abs() <= 1e-10, "{label}: q {qn} vs exact {qe}");
        assert!((rn - re).abs() <= 1e-10, "{label}: r {rn} vs exact {re}");
        // flow must not have been excited
        assert!(cur.u.comp(0).max_abs_coef() <= 1e-13);
        assert!(cur.u.comp(1).max_abs_coef() <= 1e-13);
    }
}

/// Q = 0, single divergence-free u mode: per-step decay is the heat factor
/// exp(-(beta4/2)|k|^2 dt) to rounding.
#[test]
fn u_mode_matches_heat_symbol() {
    let g = Grid::new(2, 16).unwrap();
    let c = coeffs(1.0, 0.5);
    let k = [0i64, 2];
    let mut st = FlowState::zero(&g, 0.0);
    st.u.comp_mut(0)
        .set_mode_pair(&k, Complex64::new(0.0, -0.35));
    let dt = 0.005;
    let steps = 100;
    let mut cur = st;
    for _ in 0..steps {
        cur = step(&cur, dt, &c).unwrap();
    }
    let expect = 0.35 * (-0.5 * c.beta4 * 4.0 * dt * steps as f64).exp();
    let got = cur.u.comp(0).mode(&k).norm();
    assert!(
        (got - expect).abs() <= 1e-12 * expect.max(1e-30),
        "got {got}, expect {expect}"
    );
    // Q and R stay identically zero
    assert!(cur.q.components().iter().all(|f| f.max_abs_coef() == 0.0));
    assert!(cur.r.components().iter().all(|f| f.max_abs_coef() == 0.0));
}
