//! Runtime evaluation of the analysis functionals.
//!
//! All quantities are evaluated spectrally through [`SobolevNorms`] except
//! the entropy-production integrals, which use physical-space quadrature:
//!
//! ```text
//! E      = ||u||_Hs^2 + J ||Qdot||_Hs^2 + L ||grad Q||_Hs^2 + a ||Q||_Hs^2
//! D      = ||grad u||_Hs^2 + ||Qdot||_Hs^2 + b1 sum_{|al|<=s} ||d^al A : Q||_L2^2
//! A_fn   = ||u||_Hdot_s^2 + ||Qdot||_Hs^2 + ||grad Q||_Hs^2 + ||Q||_Hs^2
//! E_eta  = ||u||^2 + J(1-eta)||Qdot||^2 + L||grad Q||^2 + (a - J eta)||Q||^2
//!          + J eta ||Qdot + Q||^2          (all H^s)
//! D_glob = ||grad u||_Hs^2 + ||Qdot||_Hs^2 + ||grad Q||_Hs^2 + ||Q||_Hs^2
//! ```
//!
//! `Qdot` always means the state's R field.

use crate::coefficients::MaterialCoefficients;
use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::spectral::{multi_indices, quadrature, ScalarField, SobolevNorms};

/// One time sample of every diagnostic.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation_local: f64,
    pub functional_a: f64,
    pub modified_energy: f64,
    pub dissipation_global: f64,
    pub entropy_total: f64,
    pub entropy_terms: [f64; 5],
    pub trace_drift: f64,
    pub symm_drift: f64,
    pub div_drift: f64,
}

/// Per-term breakdown of the entropy production.
#[derive(Clone, Copy, Debug)]
pub struct EntropyBreakdown {
    /// b1 int (Q:A)^2, (b4/2) int |grad u|^2, (b5+b6) int tr(Q A^2),
    /// mu1 int |N|^2, ((mu2~-mu2)/2) int A : N, with N = R - [Omega, Q].
    pub terms: [f64; 5],
    pub total: f64,
}

/// Energy functional E(t) at Sobolev order `s`.
pub fn energy(state: &FlowState, c: &MaterialCoefficients, s: usize) -> f64 {
    state.u.hs_norm_sq(s)
        + c.j * state.r.hs_norm_sq(s)
        + c.l * state.q.grad_hs_norm_sq(s)
        + c.a * state.q.hs_norm_sq(s)
}

/// Local dissipation functional D(t). The b1 sum applies each multi-index
/// derivative to A before the contraction with Q; the contraction is formed
/// in physical space and dealiased.
pub fn dissipation_local(state: &FlowState, c: &MaterialCoefficients, s: usize) -> f64 {
    let mut total = state.u.grad_hs_norm_sq(s) + state.r.hs_norm_sq(s);
    if c.beta1 != 0.0 {
        let (a, _) = crate::dynamics::strain_and_vorticity(&state.u);
        let d = state.q.dim();
        let grid = state.grid().clone();
        let qp: Vec<Vec<f64>> = state
            .q
            .components()
            .iter()
            .map(|f| f.to_physical())
            .collect();
        for alpha in multi_indices(grid.dim(), s, 0) {
            let mut contraction = vec![0.0; grid.size()];
            for i in 0..d {
                for j in 0..d {
                    let da = a.comp(i, j).multi_derivative(&alpha).to_physical();
                    let q = &qp[i * d + j];
                    for (p, v) in contraction.iter_mut().enumerate() {
                        *v += q[p] * da[p];
                    }
                }
            }
            let f = ScalarField::from_physical(&grid, &contraction)
                .expect("sizes match")
                .dealias();
            total += c.beta1 * f.l2_norm_sq();
        }
    }
    total
}

/// The functional A(t) controlling the a priori estimate.
pub fn functional_a(state: &FlowState, s: usize) -> f64 {
    state.u.hs_dot_norm_sq(s)
        + state.r.hs_norm_sq(s)
        + state.q.grad_hs_norm_sq(s)
        + state.q.hs_norm_sq(s)
}

/// Admissible upper bound for eta: the computable caps of the eta bound,
/// (1/2) min(1, a/J). (The analysis carries a third cap built from proof
/// constants with no computable definition; it is not representable here
/// and is documented as omitted.)
pub fn eta_admissible_max(c: &MaterialCoefficients) -> f64 {
    0.5 * (1.0f64).min(c.a / c.j)
}

/// Default eta: a quarter of min(1, a/J), safely inside the admissible range.
pub fn eta_default(c: &MaterialCoefficients) -> f64 {
    0.25 * (1.0f64).min(c.a / c.j)
}

/// Modified (instant) energy E_eta(t).
pub fn modified_energy(
    state: &FlowState,
    c: &MaterialCoefficients,
    s: usize,
    eta: f64,
) -> Result<f64> {
    let max = eta_admissible_max(c);
    if !(eta > 0.0 && eta <= max) {
        return Err(Error::InvalidParameter(format!(
            "eta = {eta} outside the admissible range (0, {max}]"
        )));
    }
    let mut rq = state.r.clone();
    rq.add_assign_scaled(&state.q, 1.0);
    Ok(state.u.hs_norm_sq(s)
        + c.j * (1.0 - eta) * state.r.hs_norm_sq(s)
        + c.l * state.q.grad_hs_norm_sq(s)
        + (c.a - c.j * eta) * state.q.hs_norm_sq(s)
        + c.j * eta * rq.hs_norm_sq(s))
}

/// Term-wise equivalence constants: C1 E <= E_eta <= C2 E for admissible
/// eta, with C1 = 1 - eta max(1, J/a), C2 = 1 + eta max(1, J/a).
pub fn equivalence_constants(c: &MaterialCoefficients, eta: f64) -> (f64, f64) {
    let m = (1.0f64).max(c.j / c.a) * eta;
    (1.0 - m, 1.0 + m)
}

/// Global dissipative rate, which adds damping of Q itself.
pub fn dissipation_global(state: &FlowState, s: usize) -> f64 {
    state.u.grad_hs_norm_sq(s)
        + state.r.hs_norm_sq(s)
        + state.q.grad_hs_norm_sq(s)
        + state.q.hs_norm_sq(s)
}

/// Entropy production with per-term breakdown (physical-space quadrature).
pub fn entropy_production(state: &FlowState, c: &MaterialCoefficients) -> EntropyBreakdown {
    let grid = state.grid().clone();
    let d = grid.dim();
    let size = grid.size();
    let qp: Vec<Vec<f64>> = state
        .q
        .components()
        .iter()
        .map(|f| f.to_physical())
        .collect();
    let rp: Vec<Vec<f64>> = state
        .r
        .components()
        .iter()
        .map(|f| f.to_physical())
        .collect();
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

    let mut int_qa_sq = vec![0.0; size];
    let mut int_gu_sq = vec![0.0; size];
    let mut int_qaa = vec![0.0; size];
    let mut int_n_sq = vec![0.0; size];
    let mut int_an = vec![0.0; size];
    let mut a_loc = [0.0f64; 9];
    let mut n_loc = [0.0f64; 9];
    for p in 0..size {
        for i in 0..d {
            for j in 0..d {
                a_loc[i * 3 + j] = 0.5 * (gup[i * d + j][p] + gup[j * d + i][p]);
            }
        }
        let mut qa = 0.0;
        let mut gu2 = 0.0;
        for i in 0..d {
            for j in 0..d {
                qa += qp[i * d + j][p] * a_loc[j * 3 + i];
                gu2 += gup[i * d + j][p] * gup[i * d + j][p];
            }
        }
        // N = R - [Omega, Q]
        for i in 0..d {
            for j in 0..d {
                let mut comm = 0.0;
                for l in 0..d {
                    let w_il = 0.5 * (gup[i * d + l][p] - gup[l * d + i][p]);
                    let w_lj = 0.5 * (gup[l * d + j][p] - gup[j * d + l][p]);
                    comm += w_il * qp[l * d + j][p] - qp[i * d + l][p] * w_lj;
                }
                n_loc[i * 3 + j] = rp[i * d + j][p] - comm;
            }
        }
        let mut qaa = 0.0;
        let mut n2 = 0.0;
        let mut an = 0.0;
        for i in 0..d {
            for j in 0..d {
                n2 += n_loc[i * 3 + j] * n_loc[i * 3 + j];
                an += a_loc[i * 3 + j] * n_loc[i * 3 + j];
                // tr(Q A A) = Q_ij (A A)_ji
                let mut aa = 0.0;
                for l in 0..d {
                    aa += a_loc[j * 3 + l] * a_loc[l * 3 + i];
                }
                qaa += qp[i * d + j][p] * aa;
            }
        }
        int_qa_sq[p] = qa * qa;
        int_gu_sq[p] = gu2;
        int_qaa[p] = qaa;
        int_n_sq[p] = n2;
        int_an[p] = an;
    }

    let terms = [
        c.beta1 * quadrature(&grid, &int_qa_sq),
        0.5 * c.beta4 * quadrature(&grid, &int_gu_sq),
        (c.beta5 + c.beta6) * quadrature(&grid, &int_qaa),
        c.mu1 * quadrature(&grid, &int_n_sq),
        0.5 * (c.mu2_tilde - c.mu2) * quadrature(&grid, &int_an),
    ];
    EntropyBreakdown {
        terms,
        total: terms.iter().sum(),
    }
}

/// Full diagnostics sample of a state.
pub fn record(
    state: &FlowState,
    c: &MaterialCoefficients,
    s: usize,
    eta: f64,
) -> Result<DiagnosticsRecord> {
    let ent = entropy_production(state, c);
    let drift = state.constraint_drift();
    Ok(DiagnosticsRecord {
        t: state.t,
        energy: energy(state, c, s),
        dissipation_local: dissipation_local(state, c, s),
        functional_a: functional_a(state, s),
        modified_energy: modified_energy(state, c, s, eta)?,
        dissipation_global: dissipation_global(state, s),
        entropy_total: ent.total,
        entropy_terms: ent.terms,
        trace_drift: drift.trace,
        symm_drift: drift.symm,
        div_drift: drift.div,
    })
}

/// Exponential-decay fit of a positive time series.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    /// Prefactor relative to the first sample: exp(intercept) / v(0).
    pub c2: f64,
    /// Decay rate (negated slope of the log-linear fit).
    pub c3: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    /// Set when the series is flat enough that r^2 is meaningless.
    pub degenerate: bool,
}

/// Least-squares line fit on (t, log v) over `window` (default: the second
/// half of the series, skipping transients). Requires at least 10 samples
/// and positive values inside the window.
pub fn fit_decay(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    if series.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs at least 10 samples (got {})",
            series.len()
        )));
    }
    let t0 = series.first().unwrap().0;
    let t1 = series.last().unwrap().0;
    let window = window.unwrap_or((0.5 * (t0 + t1), t1));
    let v0 = series.first().unwrap().1;
    if !(v0 > 0.0) {
        return Err(Error::InvalidParameter(
            "decay fit needs a positive initial value".into(),
        ));
    }

    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .map(|&(t, v)| (t, v))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "decay window [{}, {}] holds {} samples; need at least 10",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "nonpositive value {v} at t = {t} inside the decay window"
        )));
    }

    let n = pts.len() as f64;
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, v.ln())).collect();
    let mean_t = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let degenerate = ss_tot <= 1e-20 * n;
    let r_squared = if degenerate {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        c2: intercept.exp() / v0,
        c3: -slope,
        r_squared,
        window,
        degenerate,
    })
}
