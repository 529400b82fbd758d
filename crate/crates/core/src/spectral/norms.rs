//! Spectral Sobolev norms.
//!
//! With integer order s, the norms follow the multi-index definition
//!
//! ```text
//! ||f||_{H^s}^2    = sum_{|alpha| <= s} ||d^alpha f||_{L^2}^2
//! ||f||_{Hdot^s}^2 = sum_{1 <= |alpha| <= s} ||d^alpha f||_{L^2}^2
//! ```
//!
//! where the sum runs over all distinct multi-indices WITHOUT multinomial
//! weights, taken literally (so e.g. the |alpha| = 2 layer in 2-d
//! contributes k1^4 + k1^2 k2^2 + k2^4 per mode, not |k|^4). Diagnostics
//! built on these norms are self-consistent under that convention.
//!
//! L^2 norms use the physical-space measure on [0, 2pi)^d, i.e. the
//! Parseval constant (2pi)^d relative to the coefficient sum.

use crate::spectral::field::{MatrixField, ScalarField, VectorField};
use crate::spectral::grid::{Grid, TAU};

/// All multi-indices alpha in N^d with min_order <= |alpha| <= s,
/// lexicographic.
pub fn multi_indices(d: usize, s: usize, min_order: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    let s = s as u32;
    for a0 in 0..=s {
        for a1 in 0..=(s - a0) {
            if d == 2 {
                if (a0 + a1) as usize >= min_order {
                    out.push([a0, a1, 0]);
                }
            } else {
                for a2 in 0..=(s - a0 - a1) {
                    if (a0 + a1 + a2) as usize >= min_order {
                        out.push([a0, a1, a2]);
                    }
                }
            }
        }
    }
    out
}

/// Per-mode weight sum_alpha prod_i k_i^(2 alpha_i) for a multi-index list.
fn mode_weight(k: &[i64; 3], alphas: &[[u32; 3]]) -> f64 {
    let mut w = 0.0;
    for alpha in alphas {
        let mut p = 1.0;
        for axis in 0..3 {
            let kk = (k[axis] * k[axis]) as f64;
            for _ in 0..alpha[axis] {
                p *= kk;
            }
        }
        w += p;
    }
    w
}

fn weighted_sum(f: &ScalarField, alphas: &[[u32; 3]]) -> f64 {
    let grid = f.grid();
    let vol = TAU.powi(grid.dim() as i32);
    let mut total = 0.0;
    for (lin, c) in f.coef().iter().enumerate() {
        let k = grid.wavevector(lin);
        total += mode_weight(&k, alphas) * c.norm_sqr();
    }
    vol * total
}

fn weighted_grad_sum(f: &ScalarField, alphas: &[[u32; 3]]) -> f64 {
    let grid = f.grid();
    let vol = TAU.powi(grid.dim() as i32);
    let mut total = 0.0;
    for (lin, c) in f.coef().iter().enumerate() {
        let k = grid.wavevector(lin);
        total += grid.k_norm_sq(lin) * mode_weight(&k, alphas) * c.norm_sqr();
    }
    vol * total
}

/// Sobolev norms of spectral fields; matrix and vector fields sum over
/// components.
pub trait SobolevNorms {
    /// H^s norm (includes the L^2 layer).
    fn sobolev_norm(&self, s: usize) -> f64 {
        self.hs_norm_sq(s).sqrt()
    }
    /// Homogeneous Hdot^s norm (derivative layers 1..=s only).
    fn hs_dot_norm(&self, s: usize) -> f64 {
        self.hs_dot_norm_sq(s).sqrt()
    }
    fn hs_norm_sq(&self, s: usize) -> f64;
    fn hs_dot_norm_sq(&self, s: usize) -> f64;
    /// ||grad f||_{H^s}^2, computed with the |k|^2 multiplier.
    fn grad_hs_norm_sq(&self, s: usize) -> f64;
    fn l2_norm_sq(&self) -> f64 {
        self.hs_norm_sq(0)
    }
}

impl SobolevNorms for ScalarField {
    fn hs_norm_sq(&self, s: usize) -> f64 {
        weighted_sum(self, &multi_indices(self.grid().dim(), s, 0))
    }
    fn hs_dot_norm_sq(&self, s: usize) -> f64 {
        weighted_sum(self, &multi_indices(self.grid().dim(), s, 1))
    }
    fn grad_hs_norm_sq(&self, s: usize) -> f64 {
        weighted_grad_sum(self, &multi_indices(self.grid().dim(), s, 0))
    }
}

impl SobolevNorms for VectorField {
    fn hs_norm_sq(&self, s: usize) -> f64 {
        let alphas = multi_indices(self.grid().dim(), s, 0);
        (0..self.dim())
            .map(|i| weighted_sum(self.comp(i), &alphas))
            .sum()
    }
    fn hs_dot_norm_sq(&self, s: usize) -> f64 {
        let alphas = multi_indices(self.grid().dim(), s, 1);
        (0..self.dim())
            .map(|i| weighted_sum(self.comp(i), &alphas))
            .sum()
    }
    fn grad_hs_norm_sq(&self, s: usize) -> f64 {
        let alphas = multi_indices(self.grid().dim(), s, 0);
        (0..self.dim())
            .map(|i| weighted_grad_sum(self.comp(i), &alphas))
            .sum()
    }
}

impl SobolevNorms for MatrixField {
    fn hs_norm_sq(&self, s: usize) -> f64 {
        let alphas = multi_indices(self.grid().dim(), s, 0);
        self.components()
            .iter()
            .map(|c| weighted_sum(c, &alphas))
            .sum()
    }
    fn hs_dot_norm_sq(&self, s: usize) -> f64 {
        let alphas = multi_indices(self.grid().dim(), s, 1);
        self.components()
            .iter()
            .map(|c| weighted_sum(c, &alphas))
            .sum()
    }
    fn grad_hs_norm_sq(&self, s: usize) -> f64 {
        let alphas = multi_indices(self.grid().dim(), s, 0);
        self.components()
            .iter()
            .map(|c| weighted_grad_sum(c, &alphas))
            .sum()
    }
}

/// Physical-space quadrature of a sample array: (2pi/n)^d sum f(x_p).
pub fn quadrature(grid: &Grid, samples: &[f64]) -> f64 {
    grid.cell_volume() * samples.iter().sum::<f64>()
}

/// Real L2 inner product <a, b> = (2pi)^d sum_k Re(a(k) conj(b(k))).
pub fn l2_inner(a: &ScalarField, b: &ScalarField) -> f64 {
    assert!(a.grid().same(b.grid()));
    let vol = TAU.powi(a.grid().dim() as i32);
    vol * a
        .coef()
        .iter()
        .zip(b.coef())
        .map(|(x, y)| (x * y.conj()).re)
        .sum::<f64>()
}
