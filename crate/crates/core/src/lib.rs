//! Vector cross products, discretized higher-dimensional knot spaces and
//! the weak L2 geometry they carry.
//!
//! The crate is organised bottom-up:
//!
//! - [`vcp`]: linear r-fold vector cross products on R^m and the complex
//!   structure they induce on orthogonal complements of (r-1)-planes.
//! - [`ambient`]: flat ambient spaces (R^m, flat tori) with a parallel VCP
//!   field, or a twisted non-parallel one used as a control.
//! - [`immersion`]: closed (r-1)-manifolds sampled on periodic grids and
//!   their tangent frames, volumes and mean curvature.
//! - [`knot`]: the weak L2 metric, the almost complex structure J, the
//!   transgressed 2-form, connections, brackets and the tensors built on them.
//! - [`verification`]: convergence sweeps with pass/fail verdicts.

pub mod ambient;
pub mod error;
pub mod immersion;
pub mod knot;
mod linalg;
pub mod octonion;
pub mod vcp;
pub mod verification;

pub use ambient::{AmbientSpace, Topology, VcpField};
pub use error::{Error, Result};
pub use immersion::{DiscreteImmersion, NormalField, ParamGrid, Stencil, TangentFrame};
pub use knot::{
    ConnectionKind, ExtensionRule, KnotPoint, KnotSpace, KnotTangent, KnotVectorFieldScheme,
    VectorField,
};
pub use vcp::{induced_complex_structure, verify_vcp_axioms, AxiomReport, LinearVcp, OrientedPlane, VcpKind};
pub use verification::{fit_rate, run_experiment, ExperimentSpec, VerificationReport};

pub mod linear {
    //! Re-exported slice helpers used by downstream crates and tests.
    pub use crate::linalg::{dot, max_abs, norm, permutation_invariant_sum};
}
