use num_rational::BigRational;
use serde::Serialize;

use super::assembly::{exact_capable, form_matrix, FormKind};
use super::basis::TrialBasis;
use crate::error::{Error, Result};
use crate::poly::PolyFunction;
use crate::scalar::ratio_to_f64;

const DEGREE_CAP: usize = 8;

/// A form evaluated on concrete functions; `exact` is set when every moment was rational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormValue {
    pub value: f64,
    #[serde(skip)]
    pub exact: Option<BigRational>,
}

/// `Q(f, g)` for the chosen form; `f` and `g` live on the simplex with the
/// given mean energy.
pub fn bilinear_form(kind: FormKind, f: &PolyFunction, g: &PolyFunction, gamma: f64, mean_energy: f64) -> Result<FormValue> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch(f.n(), g.n()));
    }
    let degree = f.degree().max(g.degree()) as usize;
    if degree > DEGREE_CAP {
        return Err(Error::DegreeCap { degree, cap: DEGREE_CAP });
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParam(format!("gamma must lie in [0,1], got {gamma}")));
    }
    let basis = TrialBasis::generic(f.n(), mean_energy, vec![f.clone(), g.clone()]);
    if exact_capable(kind, gamma) {
        let a = form_matrix::<BigRational>(&basis, kind, gamma)?;
        let v = a[0][1].clone();
        Ok(FormValue { value: ratio_to_f64(&v), exact: Some(v) })
    } else {
        let a = form_matrix::<f64>(&basis, kind, gamma)?;
        Ok(FormValue { value: a[0][1], exact: None })
    }
}

/// The Dirichlet form `E(f, f)` of the exchange generator.
pub fn dirichlet_form_e(f: &PolyFunction, gamma: f64, mean_energy: f64) -> Result<FormValue> {
    bilinear_form(FormKind::Dirichlet, f, f, gamma, mean_energy)
}

/// `G(f, f) = (1/N) sum_k E[w_N(eta_k) (f - P_k f)^2]` on `S_{N,1}`.
pub fn form_g(f: &PolyFunction, gamma: f64) -> Result<FormValue> {
    bilinear_form(FormKind::G, f, f, gamma, 1.0)
}

/// `G` with the weights replaced by the quadratic minorant. Errors if the
/// result exceeds `G(f, f)`, which would mean the minorant is wrong.
pub fn form_g_tilde(f: &PolyFunction, gamma: f64) -> Result<FormValue> {
    let t = bilinear_form(FormKind::GTilde, f, f, gamma, 1.0)?;
    let g = form_g(f, gamma)?;
    let holds = match (&t.exact, &g.exact) {
        (Some(a), Some(b)) => a <= b,
        _ => t.value <= g.value + 1e-10 * g.value.abs().max(1.0),
    };
    if !holds {
        return Err(Error::InvalidParam(format!("minorant form {} exceeds G = {}", t.value, g.value)));
    }
    Ok(t)
}
