//! Initial data construction.
//!
//! Every kind produces a divergence-free zero-mean velocity, symmetric
//! traceless Q and R, fields mollified to the configured eps (and always
//! dealiased), and a final rescaling so that the initial energy
//! E_in = ||u||_Hs^2 + J ||R||_Hs^2 + L ||grad Q||_Hs^2 + a ||Q||_Hs^2
//! matches the requested value. Construction is deterministic: a fixed seed
//! reproduces the state bit for bit.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::coefficients::MaterialCoefficients;
use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::spectral::{Grid, MatrixField, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    /// Random coefficients with Gaussian spectral decay exp(-|k|^2 / 2 w^2).
    RandomSmooth,
    /// A single cosine mode at the configured wavevector.
    SingleMode,
    /// Fixed low-mode profile with closed-form right-hand sides, used by the
    /// verification suite.
    Manufactured,
}

/// Which of the three fields the initial data populates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldMask {
    pub u: bool,
    pub q: bool,
    pub r: bool,
}

impl Default for FieldMask {
    fn default() -> Self {
        FieldMask {
            u: true,
            q: true,
            r: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InitialSpec {
    pub kind: InitialKind,
    /// Requested initial energy E_in (see module docs); 0 gives the zero state.
    pub target_energy: f64,
    pub seed: u64,
    /// Sobolev order s used in the energy.
    pub sobolev_order: usize,
    /// Mollifier parameter carried into the state (0 = off).
    pub eps: f64,
    /// Spectral decay width for `RandomSmooth`.
    pub decay_width: f64,
    /// Wavevector for `SingleMode` (unused axes zero).
    pub mode: [i64; 3],
    pub fields: FieldMask,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            kind: InitialKind::RandomSmooth,
            target_energy: 1e-2,
            seed: 1,
            sobolev_order: 2,
            eps: 0.0,
            decay_width: 2.0,
            mode: [1, 0, 0],
            fields: FieldMask::default(),
        }
    }
}

/// Random band-limited scalar field: independent uniform complex amplitudes
/// with Gaussian spectral decay, conjugate-symmetrized, supported strictly
/// inside the dealiasing ball, zero mean.
fn random_band_limited(grid: &Arc<Grid>, rng: &mut ChaCha12Rng, width: f64) -> ScalarField {
    let n = grid.n() as i64;
    let mut f = ScalarField::zeros(grid);
    for lin in 0..grid.size() {
        let k = grid.wavevector(lin);
        if k == [0, 0, 0] {
            continue;
        }
        if k.iter().any(|&ki| 3 * ki.abs() > n) {
            continue;
        }
        let neg: Vec<i64> = (0..grid.dim()).map(|a| -k[a]).collect();
        let nidx = grid.index_of_mode(&neg).expect("inside dealias ball");
        if lin > nidx {
            continue; // the conjugate partner fills this slot
        }
        let amp = (-grid.k_norm_sq(lin) / (2.0 * width * width)).exp();
        let re = amp * (rng.gen::<f64>() * 2.0 - 1.0);
        let im = amp * (rng.gen::<f64>() * 2.0 - 1.0);
        if lin == nidx {
            f.coef_mut()[lin] = Complex64::new(re, 0.0);
        } else {
            f.coef_mut()[lin] = Complex64::new(re, im);
            f.coef_mut()[nidx] = Complex64::new(re, -im);
        }
    }
    f
}

fn unit_perp(k: [i64; 3], d: usize) -> [f64; 3] {
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    if d == 2 {
        let norm = (kf[0] * kf[0] + kf[1] * kf[1]).sqrt();
        [-kf[1] / norm, kf[0] / norm, 0.0]
    } else {
        // cross k with the least-aligned basis vector
        let abs = [kf[0].abs(), kf[1].abs(), kf[2].abs()];
        let e = if abs[0] <= abs[1] && abs[0] <= abs[2] {
            [1.0, 0.0, 0.0]
        } else if abs[1] <= abs[2] {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let v = [
            kf[1] * e[2] - kf[2] * e[1],
            kf[2] * e[0] - kf[0] * e[2],
            kf[0] * e[1] - kf[1] * e[0],
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / norm, v[1] / norm, v[2] / norm]
    }
}

/// Unit-norm symmetric traceless matrix aligned with k:
/// M = (k_hat k_hat^T - I/d) / |k_hat k_hat^T - I/d|. M k is parallel to k,
/// which keeps single-mode stress divergences inside the gradient subspace
/// annihilated by the Leray projection.
fn aligned_q_matrix(k: [i64; 3], d: usize) -> [[f64; 3]; 3] {
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    let norm = (kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2]).sqrt();
    let kh = [kf[0] / norm, kf[1] / norm, kf[2] / norm];
    let mut m = [[0.0; 3]; 3];
    let scale = 1.0 / (1.0 - 1.0 / d as f64).sqrt();
    for i in 0..d {
        for j in 0..d {
            m[i][j] = scale * (kh[i] * kh[j] - if i == j { 1.0 / d as f64 } else { 0.0 });
        }
    }
    m
}

pub fn make_initial_data(
    spec: &InitialSpec,
    grid: &Arc<Grid>,
    c: &MaterialCoefficients,
) -> Result<FlowState> {
    let d = grid.dim();
    let mut state = FlowState::zero(grid, spec.eps);

    match spec.kind {
        InitialKind::RandomSmooth => {
            let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
            for i in 0..d {
                *state.u.comp_mut(i) = random_band_limited(grid, &mut rng, spec.decay_width);
            }
            for ij in 0..d * d {
                state.q.components_mut()[ij] =
                    random_band_limited(grid, &mut rng, spec.decay_width);
            }
            for ij in 0..d * d {
                state.r.components_mut()[ij] =
                    random_band_limited(grid, &mut rng, spec.decay_width);
            }
        }
        InitialKind::SingleMode => {
            let k = spec.mode;
            if k[..d].iter().all(|&ki| ki == 0) {
                return Err(Error::InvalidParameter(
                    "single-mode initial data needs a nonzero wavevector".into(),
                ));
            }
            let v = unit_perp(k, d);
            for i in 0..d {
                state
                    .u
                    .comp_mut(i)
                    .set_mode_pair(&k[..d], Complex64::new(0.5 * v[i], 0.0));
            }
            let m = aligned_q_matrix(k, d);
            for i in 0..d {
                for j in 0..d {
                    state
                        .q
                        .comp_mut(i, j)
                        .set_mode_pair(&k[..d], Complex64::new(0.5 * m[i][j], 0.0));
                    state
                        .r
                        .comp_mut(i, j)
                        .set_mode_pair(&k[..d], Complex64::new(0.5 * m[i][j], 0.0));
                }
            }
        }
        InitialKind::Manufactured => {
            // u = (sin x2, sin x1) in 2-d, (sin x2, sin x3, sin x1) in 3-d;
            // Q = sin(x1) diag(1,-1[,0]) / sqrt(2); R = 0.
            for i in 0..d {
                let axis = (i + 1) % d;
                *state.u.comp_mut(i) = ScalarField::from_fn(grid, |x| x[axis].sin());
            }
            let inv = 1.0 / 2.0f64.sqrt();
            *state.q.comp_mut(0, 0) = ScalarField::from_fn(grid, |x| inv * x[0].sin());
            *state.q.comp_mut(1, 1) = ScalarField::from_fn(grid, |x| -inv * x[0].sin());
        }
    }

    if !spec.fields.u {
        state.u = VectorField::zeros(grid);
    }
    if !spec.fields.q {
        state.q = MatrixField::zeros(grid);
    }
    if !spec.fields.r {
        state.r = MatrixField::zeros(grid);
    }

    // Enforce the structural constraints, then restrict the spectrum.
    state.u = state.u.leray_project();
    state.q = state.q.sym_traceless_projected();
    state.r = state.r.sym_traceless_projected();
    state.u = state.u.dealias();
    state.q = state.q.dealias();
    state.r = state.r.dealias();
    if spec.eps > 0.0 {
        state.u = state.u.mollify(spec.eps)?;
        state.q = state.q.mollify(spec.eps)?;
        state.r = state.r.mollify(spec.eps)?;
    }

    // Scale to the requested initial energy (quadratic form, so the scale
    // factor is a square root).
    if spec.target_energy == 0.0 {
        return Ok(state.scale(0.0));
    }
    if !(spec.target_energy > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial energy must be nonnegative (got {})",
            spec.target_energy
        )));
    }
    let e1 = crate::diagnostics::energy(&state, c, spec.sobolev_order);
    if e1 == 0.0 {
        return Err(Error::InvalidParameter(
            "initial data is identically zero; cannot scale to a positive energy".into(),
        ));
    }
    Ok(state.scale((spec.target_energy / e1).sqrt()))
}
