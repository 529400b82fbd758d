//! Property tests for the algebraic and spectral invariants.

use proptest::prelude::*;
use qsflow_core::coefficients::MaterialCoefficients;
use qsflow_core::oracle::{mc_min_entropy_form, mc_min_f};
use qsflow_core::spectral::{l2_inner, Grid, ScalarField, SobolevNorms, VectorField};
use qsflow_core::tensor::{commutator, frobenius, sym_traceless_project, Mat};

fn mat2(entries: [f64; 4]) -> Mat {
    Mat::from_rows2([[entries[0], entries[1]], [entries[2], entries[3]]])
}

fn mat3(e: [f64; 9]) -> Mat {
    Mat::from_rows3([[e[0], e[1], e[2]], [e[3], e[4], e[5]], [e[6], e[7], e[8]]])
}

fn entry() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_idempotent_2d(e in prop::array::uniform4(entry())) {
        let p = sym_traceless_project(&mat2(e)).unwrap();
        let pp = sym_traceless_project(p.mat()).unwrap();
        prop_assert!(pp.sub(p.mat()).max_abs() <= 1e-13 * (1.0 + p.max_abs()));
    }

    #[test]
    fn projection_idempotent_3d(e in prop::array::uniform9(entry())) {
        let p = sym_traceless_project(&mat3(e)).unwrap();
        let pp = sym_traceless_project(p.mat()).unwrap();
        prop_assert!(pp.sub(p.mat()).max_abs() <= 1e-13 * (1.0 + p.max_abs()));
    }

    /// [Omega, Q] is symmetric and traceless for symmetric traceless Q and
    /// skew Omega (to 1e-13 in floating point).
    #[test]
    fn commutator_with_skew_is_symmetric_traceless(
        qe in prop::array::uniform9(entry()),
        we in prop::array::uniform9(entry()),
    ) {
        let q = sym_traceless_project(&mat3(qe)).unwrap();
        let w0 = mat3(we);
        let w = w0.sub(&w0.transpose()).scale(0.5);
        let c = commutator(&w, q.mat()).unwrap();
        let scale = 1.0 + q.max_abs() * w.max_abs();
        prop_assert!(c.max_asymmetry() <= 1e-13 * scale);
        prop_assert!(c.trace().abs() <= 1e-13 * scale);
    }

    /// [Q, N] : A = 0 for symmetric A (skew-symmetry of the commutator of
    /// symmetric matrices).
    #[test]
    fn commutator_of_symmetric_orthogonal_to_symmetric(
        qe in prop::array::uniform9(entry()),
        ne in prop::array::uniform9(entry()),
        ae in prop::array::uniform9(entry()),
    ) {
        let q = sym_traceless_project(&mat3(qe)).unwrap();
        let n = sym_traceless_project(&mat3(ne)).unwrap();
        let a0 = mat3(ae);
        let a = a0.add(&a0.transpose()).scale(0.5);
        let c = commutator(q.mat(), n.mat()).unwrap();
        let scale = 1.0 + q.max_abs() * n.max_abs() * a.max_abs();
        prop_assert!(frobenius(&c, &a).unwrap().abs() <= 1e-12 * scale);
    }

    /// Q : Omega = 0 for symmetric Q and skew Omega.
    #[test]
    fn symmetric_orthogonal_to_skew(
        qe in prop::array::uniform9(entry()),
        we in prop::array::uniform9(entry()),
    ) {
        let q = sym_traceless_project(&mat3(qe)).unwrap();
        let w0 = mat3(we);
        let w = w0.sub(&w0.transpose()).scale(0.5);
        let scale = 1.0 + q.max_abs() * w.max_abs();
        prop_assert!(frobenius(q.mat(), &w).unwrap().abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Leray projection is idempotent and self-adjoint in L2, and commutes
    /// with the mollifier; the mollifier commutes with derivatives.
    #[test]
    fn leray_and_mollifier_properties(seed in 0u64..1000) {
        let g = Grid::new(2, 16).unwrap();
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            (s as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let mk = |next: &mut dyn FnMut() -> f64| {
            let samples: Vec<f64> = (0..g.size()).map(|_| next()).collect();
            ScalarField::from_physical(&g, &samples).unwrap()
        };
        let u = VectorField::from_components(vec![mk(&mut next), mk(&mut next)]).unwrap();
        let v = VectorField::from_components(vec![mk(&mut next), mk(&mut next)]).unwrap();

        let pu = u.leray_project();
        let ppu = pu.leray_project();
        for i in 0..2 {
            prop_assert!(ppu.comp(i).sub(pu.comp(i)).max_abs_coef() <= 1e-11);
        }
        prop_assert!(pu.max_divergence_coef() <= 1e-13);

        // self-adjointness: <Pu, v> = <u, Pv>
        let pv = v.leray_project();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for i in 0..2 {
            lhs += l2_inner(pu.comp(i), v.comp(i));
            rhs += l2_inner(u.comp(i), pv.comp(i));
        }
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));

        // mollifier commutes with derivative and with the projection
        let eps = 0.21;
        let f = mk(&mut next);
        let a = f.mollify(eps).unwrap().derivative(0).unwrap();
        let b = f.derivative(0).unwrap().mollify(eps).unwrap();
        prop_assert!(a.sub(&b).max_abs_coef() <= 1e-12);
        let mu = u.mollify(eps).unwrap().leray_project();
        let um = u.leray_project().mollify(eps).unwrap();
        for i in 0..2 {
            prop_assert!(mu.comp(i).sub(um.comp(i)).max_abs_coef() <= 1e-12);
        }

        // Sobolev norm is monotone nondecreasing in s
        let mut prev = 0.0;
        for s in 0..4 {
            let n = f.sobolev_norm(s);
            prop_assert!(n >= prev);
            prev = n;
        }
    }
}

/// The entropy inequality's strict part agrees with feasibility of the
/// two-variable slack Hessian (the form with the Z row removed), probed by
/// Monte-Carlo over random coefficient sets.
#[test]
fn entropy_strict_part_matches_two_variable_form() {
    let mut s = 42u64;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s as f64 / u64::MAX as f64) * 4.0
    };
    let mut agreements = 0;
    for trial in 0..1000 {
        let c = MaterialCoefficients {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            j: 1.0,
            l: 1.0,
            beta1: 0.0,
            beta4: 0.1 + next(),
            beta5: 0.0,
            beta6: 0.0,
            mu1: 0.1 + next(),
            mu2: 0.0,
            mu2_tilde: next() - 2.0,
        };
        let m = c.mu2_tilde - c.mu2;
        let strict = m * m < 8.0 * c.beta4 * c.mu1;
        // skip near-boundary sets where sampling noise decides the sign
        if (m * m - 8.0 * c.beta4 * c.mu1).abs() < 1e-3 {
            continue;
        }
        let min = mc_min_entropy_form(&c, 20_000, trial).unwrap();
        assert_eq!(
            min >= -1e-9,
            strict,
            "trial {trial}: min {min}, strict {strict}"
        );
        agreements += 1;
    }
    assert!(agreements > 900);
}

/// Condition-(H) agrees with Monte-Carlo positivity of the full form at the
/// reported coercivity margins, over random coefficient sets.
#[test]
fn condition_h_matches_monte_carlo_at_margins() {
    let mut s = 7u64;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s as f64 / u64::MAX as f64) * 3.0
    };
    for trial in 0..200 {
        let mu2 = next() - 1.5;
        let c = MaterialCoefficients {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            j: 1.0,
            l: 1.0,
            beta1: 0.0,
            beta4: 0.2 + next(),
            beta5: -0.5 * mu2,
            beta6: 0.5 * mu2,
            mu1: 0.2 + next(),
            mu2,
            mu2_tilde: next() - 1.5,
        };
        let m = c.mu2_tilde - c.mu2;
        let gap = m * m + 4.0 * c.mu2 * c.mu2 - 8.0 * c.beta4 * c.mu1;
        if gap.abs() < 1e-3 {
            continue;
        }
        let holds = c.check_condition_h();
        let min = mc_min_f(&c, 100_000, 1000 + trial).unwrap();
        assert_eq!(min >= -1e-9, holds, "trial {trial}: min {min}");
        if holds {
            // at the reported margins the form dominates the weighted |X|^2
            // and |Y|^2 layers: F - d0 (b4/2)|X|^2 - d1 mu1 |Y|^2 >= -1e-9
            // over random unit triples
            let (d0, d1) = c.coercivity_margins().unwrap();
            assert!(c.hessian_psd(d0, d1).unwrap());
            let mut s = 1000 + trial;
            let mut next = move || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s as f64 / u64::MAX as f64) * 2.0 - 1.0
            };
            for _ in 0..500 {
                let mut draw = || {
                    let mut m = qsflow_core::tensor::Mat::zeros(3);
                    for i in 0..3 {
                        for j in 0..3 {
                            m.set(i, j, next());
                        }
                    }
                    m
                };
                let (x, y, z) = (draw(), draw(), draw());
                let norm = (x.norm_sq() + y.norm_sq() + z.norm_sq()).sqrt();
                if norm == 0.0 {
                    continue;
                }
                let (x, y, z) = (
                    x.scale(1.0 / norm),
                    y.scale(1.0 / norm),
                    z.scale(1.0 / norm),
                );
                let f = c.quadratic_form_f(&x, &y, &z).unwrap();
                let dominated = f - d0 * 0.5 * c.beta4 * x.norm_sq() - d1 * c.mu1 * y.norm_sq();
                assert!(
                    dominated >= -1e-9,
                    "trial {trial}: weighted form {dominated} below budget"
                );
            }
        }
    }
}
