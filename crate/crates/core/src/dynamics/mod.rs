//! Evolution of the coupled flow/order-parameter state.
//!
//! The state is the triple (u, Q, R) at a time t, where R = Qdot is the
//! material derivative of Q (so the initial-value interface takes exactly
//! (u_in, Q_in, Qdot_in)); the partial time derivative of Q is recovered as
//! R - u.grad Q when needed. `eps` is the sharp-cutoff mollifier parameter
//! of the approximating system; eps = 0 disables mollification and leaves
//! only two-thirds dealiasing on nonlinear products.

mod initial;
mod rhs;
mod stepper;
mod stress;

pub use initial::{make_initial_data, FieldMask, InitialKind, InitialSpec};
pub use rhs::{rhs_qtensor, rhs_velocity};
pub use stepper::{step, suggested_dt};
pub use stress::{
    corotational_stress, ericksen_stress, strain_and_vorticity, stress_set, viscous_stress,
    StressSet,
};

use std::sync::Arc;

use crate::spectral::{Grid, MatrixField, VectorField};

/// The evolving triple (u, Q, R) at time `t`.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    /// Velocity; divergence-free.
    pub u: VectorField,
    /// Order parameter; symmetric traceless within monitored drift.
    pub q: MatrixField,
    /// Material derivative of Q.
    pub r: MatrixField,
    /// Mollifier parameter (0 disables mollification beyond dealiasing).
    pub eps: f64,
}

/// Max-norm constraint violations of a state.
#[derive(Clone, Copy, Debug)]
pub struct ConstraintDrift {
    /// Max pointwise |tr Q|.
    pub trace: f64,
    /// Max pointwise |Q_ij - Q_ji|.
    pub symm: f64,
    /// Max |k . u_hat(k)| over modes.
    pub div: f64,
}

impl FlowState {
    pub fn zero(grid: &Arc<Grid>, eps: f64) -> FlowState {
        FlowState {
            t: 0.0,
            u: VectorField::zeros(grid),
            q: MatrixField::zeros(grid),
            r: MatrixField::zeros(grid),
            eps,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn constraint_drift(&self) -> ConstraintDrift {
        ConstraintDrift {
            trace: self
                .q
                .pointwise_trace_max()
                .max(self.r.pointwise_trace_max()),
            symm: self
                .q
                .pointwise_asymmetry_max()
                .max(self.r.pointwise_asymmetry_max()),
            div: self.u.max_divergence_coef(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.q.is_finite() && self.r.is_finite()
    }

    pub fn scale(&self, s: f64) -> FlowState {
        FlowState {
            t: self.t,
            u: self.u.scale(s),
            q: self.q.scale(s),
            r: self.r.scale(s),
            eps: self.eps,
        }
    }
}
