//! Radial conformally flat Yamabe gradient solitons: parameter algebra, closed
//! forms, profile shooting, curvature identities and the fast-diffusion flow.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod fd;
pub mod flow;
pub mod interp;
pub mod ode;
pub mod par;
pub mod params;
pub mod profile;
pub mod report;

pub use curvature::{CurvatureError, CurvatureReport, SecondDerivative};
pub use flow::{FlowConfig, FlowError, FlowState, FlowTrajectory};
pub use params::{barenblatt_params, derive_params, ClosedForm, ParamError, SolitonClass, SolitonParams};
pub use profile::{AsymptoticReport, CylindricalProfile, ProfileError, RadialProfile, RateKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}
