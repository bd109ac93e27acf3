//! Desk-scale numerical toolkit for functional volume-product inequalities.
//!
//! The crate samples log-concave functions on uniform grids, computes their
//! polar functions through discrete Legendre conjugates, and verifies the
//! Santalo-product bounds that relate a function, its polar, and half-space
//! mass splits. A companion star-body module covers the geometric corollary
//! (volume products of a body and its polar). Everything is deterministic:
//! seeded generators, fixed reduction orders, and reproducible outputs.

pub mod grid;
pub mod polar;
pub mod instances;
pub mod report;
pub mod starbody;
pub mod theorems;

pub use grid::{GridBox, GridError, GridFunction, HalfspaceStats, Hyperplane};
pub use polar::{
    duality_margin, legendre_1d, legendre_nd, polar_function, polar_function_using, PolarError,
    TransformMethod, TransformResult,
};
pub use instances::{
    logconcave_mixture_fn, Instance, InstanceError, InstanceKind, InstanceSidecar, InstanceSpec,
};

pub use starbody::{
    ball_body, ball_constants, cosine_perturbed_body, cross_polytope_body, cube_body,
    default_phi_box, ellipsoid_body, random_star_body, verify_cn_identity, verify_lutwak,
    AngularGrid, BallConstants, BodyError, LutwakReport, StarBody,
};

pub use report::{
    reports_to_csv, reports_to_json, BoxMeta, GridMeta, ReportRow, Theorem, VerificationReport,
};
pub use theorems::{
    construct_split, median_reduction, reduce_dimension, santalo_point_search, santalo_product,
    two_pi_pow, verify_induction_step, verify_lemma_gm, verify_shift_identity, verify_thm2,
    verify_thm3_lambda, verify_thm3_median, DimensionReduction, SearchResult, SplitData,
    SquareMatrix, VerifyError,
};
