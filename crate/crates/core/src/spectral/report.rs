use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GalerkinExact,
    GalerkinQuadrature,
    Autocorrelation,
    ClosedForm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::GalerkinExact => "galerkin-exact",
            Method::GalerkinQuadrature => "galerkin-quadrature",
            Method::Autocorrelation => "autocorrelation",
            Method::ClosedForm => "closed-form",
        })
    }
}

/// One spectral estimate with optional bracket and free-form notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub gamma: f64,
    pub n: usize,
    pub e: f64,
    pub method: Method,
    /// Which quantity: `delta`, `gamma`, `gamma-tilde` or an observable decay rate.
    pub quantity: String,
    pub degree: Option<usize>,
    pub dof: Option<usize>,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Exact value as `p/q` when known.
    pub exact: Option<String>,
    pub notes: Vec<String>,
}

impl SpectralReport {
    pub fn new(gamma: f64, n: usize, e: f64, method: Method, quantity: &str, value: f64) -> Self {
        Self {
            gamma,
            n,
            e,
            method,
            quantity: quantity.to_string(),
            degree: None,
            dof: None,
            value,
            lower: None,
            upper: None,
            exact: None,
            notes: Vec::new(),
        }
    }

    pub fn bracket_consistent(&self) -> bool {
        self.lower.is_none_or(|l| l <= self.value) && self.upper.is_none_or(|u| self.value <= u)
    }

    pub const CSV_HEADER: &'static str = "gamma,N,E,method,degree,value,lower,upper";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.12},{},{}",
            self.gamma,
            self.n,
            self.e,
            self.method,
            self.degree.map(|d| d.to_string()).unwrap_or_default(),
            self.value,
            opt(self.lower),
            opt(self.upper)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_bracket() {
        let mut r = SpectralReport::new(0.5, 4, 1.0, Method::GalerkinExact, "delta", 1.25);
        r.degree = Some(3);
        r.lower = Some(1.0);
        assert!(r.bracket_consistent());
        assert_eq!(r.csv_row(), "0.5,4,1,galerkin-exact,3,1.250000000000,1.000000000000,");
        r.upper = Some(1.2);
        assert!(!r.bracket_consistent());
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains("\"galerkin-exact\""));
    }
}
