//! Allowed and forbidden directions of jet ideals.

mod allow;
mod forbid;

pub use allow::{
    allow_overapprox, allow_overapprox_with, allow_transform_check, dehomogenize, homogeneous_on_patch,
    int_matrix, AllowOptions, AllowResult, CircleDirection, DirectionSet, PatchStatus, StatusPatch,
    TransformReport,
};
pub use forbid::{
    certificate_holds_at, forbidden_certificate_search, whole_sphere_certificate, ForbidOptions, ForbidOutcome,
    ForbiddenCertificate,
};
