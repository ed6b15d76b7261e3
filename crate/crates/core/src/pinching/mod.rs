//! Extrinsic pinching quantities: the radial field `X`, moment of inertia,
//! center of mass, extrinsic radius, pinching gaps and the explicit-constant
//! estimates built on them.

mod center;
mod fields;
mod gaps;
mod bounds;

pub use center::{
    ambient_centroid, center_field, center_of_mass, diameter, extrinsic_radius, minimax_center,
    ExtrinsicRadius,
};
pub use fields::{moment_of_inertia, x_field, XField};
pub use gaps::{pinching_gaps, GapSummary, PinchingInvariants, N};
pub use bounds::{
    pinching_fields, verify_bounds, PinchingFields, BoundVerdicts, DIV_TOL, GLOBAL_TOL, BOUND_TOL,
    PROP_TOL, PSI_CHAIN_TOL,
};
