//! Exact polynomial calculus on `S_{N,1}`.

mod decomposition;
mod function;
mod operators;
mod ortho;
mod univariate;

pub use decomposition::{
    canonical_representation, l4_ratio, random_polynomial, random_single_coordinate,
    trial_decomposition, verify_chaos_sandwich, verify_seig, Decomposition, SandwichReport,
};
pub use function::{simplex_moment, MultiIndex, PolyFunction};
pub use operators::{
    beta_factor, conditional_expectation_pk, correlation_k, p0_apply, pair_average, pk_univariate,
};
pub use ortho::{
    build_ortho_basis, kappa_closed_form, nu_inner_f64, operator_p0_second_eigenvalue, phi_value,
    verify_k_spectrum, KSpectrumReport, OrthoPolyBasis, P0Spectrum,
};
pub use univariate::UniPoly;
