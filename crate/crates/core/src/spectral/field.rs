//! Scalar, vector, and matrix fields with spectral-primary storage.
//!
//! A field holds its Fourier coefficients; physical samples are produced on
//! demand. Real-valuedness is maintained by construction: fields built from
//! physical samples have conjugate-symmetric coefficients, and every
//! spectral operation here uses multipliers that preserve that symmetry.
//! Transforms return new values; a field is never mutated by two operations
//! at once.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::grid::Grid;

/// Scalar field sampled on a [`Grid`], stored as Fourier coefficients.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    coef: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> ScalarField {
        ScalarField {
            grid: grid.clone(),
            coef: vec![Complex64::new(0.0, 0.0); grid.size()],
        }
    }

    /// Forward transform: physical samples -> spectral field.
    pub fn from_physical(grid: &Arc<Grid>, samples: &[f64]) -> Result<ScalarField> {
        if samples.len() != grid.size() {
            return Err(Error::GridMismatch(format!(
                "{} samples on a grid of size {}",
                samples.len(),
                grid.size()
            )));
        }
        let mut coef: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.forward_transform(&mut coef);
        Ok(ScalarField {
            grid: grid.clone(),
            coef,
        })
    }

    /// Builds a field by evaluating `f` at every grid point.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        let samples: Vec<f64> = (0..grid.size())
            .map(|lin| f(&grid.point(lin)[..grid.dim()]))
            .collect();
        ScalarField::from_physical(grid, &samples).expect("sample count matches grid")
    }

    pub fn from_spectral(grid: &Arc<Grid>, coef: Vec<Complex64>) -> Result<ScalarField> {
        if coef.len() != grid.size() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients on a grid of size {}",
                coef.len(),
                grid.size()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            coef,
        })
    }

    /// Inverse transform: spectral field -> physical samples (real parts;
    /// the imaginary residue of a conjugate-symmetric field is rounding).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coef.clone();
        self.grid.inverse_transform(&mut data);
        data.into_iter().map(|v| v.re).collect()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coef(&self) -> &[Complex64] {
        &self.coef
    }

    pub fn coef_mut(&mut self) -> &mut [Complex64] {
        &mut self.coef
    }

    pub fn mode(&self, k: &[i64]) -> Complex64 {
        self.coef[self.grid.index_of_mode(k).expect("mode on grid")]
    }

    /// Sets c(k) = v and c(-k) = conj(v), keeping the field real-valued.
    pub fn set_mode_pair(&mut self, k: &[i64], v: Complex64) {
        let d = self.grid.dim();
        let idx = self.grid.index_of_mode(k).expect("mode on grid");
        let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
        self.coef[idx] = v;
        if let Ok(nidx) = self.grid.index_of_mode(&neg[..d]) {
            if nidx != idx {
                self.coef[nidx] = v.conj();
            } else {
                self.coef[idx] = Complex64::new(v.re, 0.0);
            }
        }
    }

    /// Spectral derivative along `axis`: multiplication by i k_axis.
    /// The self-conjugate Nyquist plane is zeroed to keep the result
    /// real-valued.
    pub fn derivative(&self, axis: usize) -> Result<ScalarField> {
        let d = self.grid.dim();
        if axis >= d {
            return Err(Error::InvalidParameter(format!(
                "derivative axis {axis} on a {d}-dimensional grid"
            )));
        }
        let nyquist = -((self.grid.n() / 2) as i64);
        let mut out = self.clone();
        for (lin, v) in out.coef.iter_mut().enumerate() {
            let k = self.grid.wavevector(lin);
            if k[axis] == nyquist {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, k[axis] as f64);
            }
        }
        Ok(out)
    }

    /// Multi-index derivative d^alpha: multiplication by
    /// prod_axis (i k_axis)^(alpha_axis), with the Nyquist plane zeroed
    /// along any differentiated axis (as in [`ScalarField::derivative`]).
    pub fn multi_derivative(&self, alpha: &[u32; 3]) -> ScalarField {
        let nyquist = -((self.grid.n() / 2) as i64);
        let mut out = self.clone();
        for (lin, v) in out.coef.iter_mut().enumerate() {
            let k = self.grid.wavevector(lin);
            let mut factor = Complex64::new(1.0, 0.0);
            for axis in 0..self.grid.dim() {
                if alpha[axis] == 0 {
                    continue;
                }
                if k[axis] == nyquist {
                    factor = Complex64::new(0.0, 0.0);
                    break;
                }
                for _ in 0..alpha[axis] {
                    factor *= Complex64::new(0.0, k[axis] as f64);
                }
            }
            *v *= factor;
        }
        out
    }

    /// Multiplication by -|k|^2.
    pub fn laplacian(&self) -> ScalarField {
        let mut out = self.clone();
        for (lin, v) in out.coef.iter_mut().enumerate() {
            *v *= -self.grid.k_norm_sq(lin);
        }
        out
    }

    /// Sharp spectral cutoff: zeroes every mode with |k| > 1/eps.
    pub fn mollify(&self, eps: f64) -> Result<ScalarField> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mollifier parameter must be positive (got {eps})"
            )));
        }
        let mut out = self.clone();
        for (lin, v) in out.coef.iter_mut().enumerate() {
            if self.grid.k_norm_sq(lin) * eps * eps > 1.0 {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    /// Two-thirds rule: zeroes every mode with any 3|k_i| > n.
    pub fn dealias(&self) -> ScalarField {
        let n = self.grid.n() as i64;
        let mut out = self.clone();
        for (lin, v) in out.coef.iter_mut().enumerate() {
            let k = self.grid.wavevector(lin);
            if k.iter().any(|&ki| 3 * ki.abs() > n) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        let mut out = self.clone();
        for v in out.coef.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        assert!(self.grid.same(&other.grid));
        let mut out = self.clone();
        for (v, w) in out.coef.iter_mut().zip(&other.coef) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        assert!(self.grid.same(&other.grid));
        let mut out = self.clone();
        for (v, w) in out.coef.iter_mut().zip(&other.coef) {
            *v -= w;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &ScalarField, s: f64) {
        assert!(self.grid.same(&other.grid));
        for (v, w) in self.coef.iter_mut().zip(&other.coef) {
            *v += w * s;
        }
    }

    /// Parseval L2 norm squared: (2pi)^d sum |c(k)|^2.
    pub fn l2_norm_sq(&self) -> f64 {
        let vol = super::grid::TAU.powi(self.grid.dim() as i32);
        vol * self.coef.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.coef.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coef
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Max |c(-k) - conj(c(k))| over all modes with representable -k.
    pub fn conj_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for lin in 0..self.grid.size() {
            let k = self.grid.wavevector(lin);
            let neg: Vec<i64> = (0..self.grid.dim()).map(|a| -k[a]).collect();
            if let Ok(nidx) = self.grid.index_of_mode(&neg) {
                worst = worst.max((self.coef[nidx] - self.coef[lin].conj()).norm());
            }
        }
        worst
    }
}

/// Velocity-type field with d scalar components.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: &Arc<Grid>) -> VectorField {
        VectorField {
            comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<VectorField> {
        let d = comps[0].grid().dim();
        if comps.len() != d || comps.iter().any(|c| !c.grid().same(comps[0].grid())) {
            return Err(Error::GridMismatch(
                "vector components must share one grid, one per dimension".into(),
            ));
        }
        Ok(VectorField { comps })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.comps[i]
    }

    pub fn divergence(&self) -> ScalarField {
        let mut div = ScalarField::zeros(self.grid());
        for (axis, c) in self.comps.iter().enumerate() {
            div = div.add(&c.derivative(axis).expect("axis < d"));
        }
        div
    }

    /// Leray projection onto divergence-free fields: per mode k != 0,
    /// u_hat <- u_hat - k (k . u_hat) / |k|^2; the zero mode is unchanged.
    /// The self-conjugate Nyquist planes are zeroed, matching the
    /// derivative convention, so the projected divergence vanishes under
    /// the same convention.
    pub fn leray_project(&self) -> VectorField {
        let grid = self.grid().clone();
        let d = grid.dim();
        let nyquist = -((grid.n() / 2) as i64);
        let mut out = self.clone();
        for lin in 0..grid.size() {
            let k = grid.wavevector(lin);
            if k[..d].iter().any(|&ki| ki == nyquist) {
                for axis in 0..d {
                    out.comps[axis].coef_mut()[lin] = Complex64::new(0.0, 0.0);
                }
                continue;
            }
            let ksq = grid.k_norm_sq(lin);
            if ksq == 0.0 {
                continue;
            }
            let mut dot = Complex64::new(0.0, 0.0);
            for axis in 0..d {
                dot += out.comps[axis].coef()[lin] * k[axis] as f64;
            }
            let p = dot / ksq;
            for axis in 0..d {
                out.comps[axis].coef_mut()[lin] -= p * k[axis] as f64;
            }
        }
        out
    }

    pub fn mollify(&self, eps: f64) -> Result<VectorField> {
        Ok(VectorField {
            comps: self
                .comps
                .iter()
                .map(|c| c.mollify(eps))
                .collect::<Result<_>>()?,
        })
    }

    pub fn dealias(&self) -> VectorField {
        VectorField {
            comps: self.comps.iter().map(|c| c.dealias()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> VectorField {
        VectorField {
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &VectorField, s: f64) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.add_assign_scaled(b, s);
        }
    }

    /// Largest |k . u_hat(k)| over all modes.
    pub fn max_divergence_coef(&self) -> f64 {
        self.divergence().max_abs_coef()
    }

    /// Magnitude of the mean (zero-mode) velocity.
    pub fn mean_magnitude(&self) -> f64 {
        let zero = vec![0i64; self.dim()];
        self.comps
            .iter()
            .map(|c| c.mode(&zero).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    /// Max pointwise Euclidean magnitude in physical space.
    pub fn max_pointwise_norm(&self) -> f64 {
        let phys: Vec<Vec<f64>> = self.comps.iter().map(|c| c.to_physical()).collect();
        let mut worst = 0.0f64;
        for lin in 0..self.grid().size() {
            let s: f64 = phys.iter().map(|p| p[lin] * p[lin]).sum();
            worst = worst.max(s);
        }
        worst.sqrt()
    }
}

/// Matrix-valued field with d x d scalar components (row-major).
#[derive(Clone, Debug)]
pub struct MatrixField {
    d: usize,
    comps: Vec<ScalarField>,
}

impl MatrixField {
    pub fn zeros(grid: &Arc<Grid>) -> MatrixField {
        let d = grid.dim();
        MatrixField {
            d,
            comps: (0..d * d).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(d: usize, comps: Vec<ScalarField>) -> Result<MatrixField> {
        if comps.len() != d * d || comps.iter().any(|c| !c.grid().same(comps[0].grid())) {
            return Err(Error::GridMismatch(
                "matrix field needs d*d components on one grid".into(),
            ));
        }
        Ok(MatrixField { d, comps })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn comp(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i * self.d + j]
    }

    pub fn comp_mut(&mut self, i: usize, j: usize) -> &mut ScalarField {
        &mut self.comps[i * self.d + j]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField] {
        &mut self.comps
    }

    pub fn trace_field(&self) -> ScalarField {
        let mut t = ScalarField::zeros(self.grid());
        for i in 0..self.d {
            t = t.add(self.comp(i, i));
        }
        t
    }

    /// Row divergence (div M)_i = sum_j d_j M_ij.
    pub fn divergence(&self) -> VectorField {
        let comps = (0..self.d)
            .map(|i| {
                let mut s = ScalarField::zeros(self.grid());
                for j in 0..self.d {
                    s = s.add(&self.comp(i, j).derivative(j).expect("axis < d"));
                }
                s
            })
            .collect();
        VectorField::from_components(comps).expect("components share grid")
    }

    /// Pointwise symmetric-traceless projection, applied mode by mode
    /// (the projection is linear, so it acts directly on coefficients).
    pub fn sym_traceless_projected(&self) -> MatrixField {
        let d = self.d;
        let mut out = self.clone();
        let trace = self.trace_field();
        for i in 0..d {
            for j in 0..d {
                let sym = self.comp(i, j).add(self.comp(j, i)).scale(0.5);
                let c = if i == j {
                    sym.sub(&trace.scale(1.0 / d as f64))
                } else {
                    sym
                };
                *out.comp_mut(i, j) = c;
            }
        }
        out
    }

    pub fn mollify(&self, eps: f64) -> Result<MatrixField> {
        Ok(MatrixField {
            d: self.d,
            comps: self
                .comps
                .iter()
                .map(|c| c.mollify(eps))
                .collect::<Result<_>>()?,
        })
    }

    pub fn dealias(&self) -> MatrixField {
        MatrixField {
            d: self.d,
            comps: self.comps.iter().map(|c| c.dealias()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> MatrixField {
        MatrixField {
            d: self.d,
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &MatrixField) -> MatrixField {
        MatrixField {
            d: self.d,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MatrixField) -> MatrixField {
        MatrixField {
            d: self.d,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &MatrixField, s: f64) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.add_assign_scaled(b, s);
        }
    }

    /// Max pointwise |tr M| in physical space.
    pub fn pointwise_trace_max(&self) -> f64 {
        self.trace_field()
            .to_physical()
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Max pointwise |M_ij - M_ji| in physical space.
    pub fn pointwise_asymmetry_max(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                let diff = self.comp(i, j).sub(self.comp(j, i));
                for v in diff.to_physical() {
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }
}
