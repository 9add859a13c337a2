//! Positive definite functions on an interval, their RKHS, Mercer operators,
//! self-adjoint extensions and dyadic bases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dyadic;
pub mod elliptic;
pub mod error;
pub mod extension;
pub mod kernel;
pub mod linalg;
pub mod mercer;
pub mod quad;
pub mod rkhs;
pub mod roots;
pub mod special;

pub use dyadic::{
    build_onb, expand, membership_by_coefficients, orthonormality_defect, parseval_norm, projection_interpolation,
    DyadicIndex, DyadicMembership, ExpansionCoefficients, OnbElement, Projection,
};
pub use elliptic::{
    bspline_operator_bound, distributional_derivative_check, elliptic_descriptor, ellipticity_check,
    solve_transcendental, support_check, verify_against_mercer, EllipticDescriptor, TranscendentalRoot,
    TranscendentalSpec,
};
pub use error::{Error, Result};
pub use extension::{
    boundary_condition_check, defect_vectors, discrete_isometry_check, extend_type1, extension_measure, g_r_extension,
    sample_via_spectrum, solve_theta_spectrum, unitary_evolve, DefectPair, IsometryReport, SpectralExpansion,
    ThetaRoot, ThetaSpectrum, TypeOneExtension, TypeTwoExtension,
};
pub use kernel::{
    bochner_transform, check_positive_definite, concentration, deficiency_indices, evaluate_kernel, gram_matrix,
    second_moment, Concentration, KernelFamily, KernelTable, MeasureOnInterval, MomentReport, MomentVerdict, PdKernel,
    PsdReport, SpectralMeasure, TailDescriptor,
};
pub use mercer::{
    apply_operator, discretize, greens_inverse_apply, volterra_apply, MercerDecomposition, NystromConfig,
};
pub use num_complex::Complex64;
pub use rkhs::{
    element_from_measure, exp_inner_product, inner_product_combo, inner_product_smoothed, membership_test,
    reproducing_eval, smooth, Bump, RkhsElement, SampledElement, TestFunction, Verdict,
};
