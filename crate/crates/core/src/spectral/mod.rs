//! Dirichlet forms, Galerkin gap estimates and the trial-space checks.

mod assembly;
mod basis;
mod forms;
mod galerkin;
mod lemmas;
mod report;
mod weights;

pub use assembly::{exact_capable, form_matrix, gram_matrix, pair_matrix, quad_matrix, FormKind, MomentField};
pub use basis::{invariant_basis, symmetric_basis, TrialBasis};
pub use galerkin::{
    closed_form_candidate, degree_sweep, galerkin_gap, galerkin_gap_delta, galerkin_gap_gamma,
    galerkin_gap_gamma_tilde, report_exact, Arithmetic, GalerkinOptions, GalerkinSystem,
};
pub use report::{Method, SpectralReport};
pub use weights::{big_w, minorant, minorant_poly, moment_exact, moment_f64, slice_weight, w_tilde, Weight};
pub use forms::{bilinear_form, dirichlet_form_e, form_g, form_g_tilde, FormValue};
pub use lemmas::{g_tilde_ratios, verify_decomposition_lemmas, LemmaCheck, LemmaConfig, LemmaReport};
