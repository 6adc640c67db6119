//! Closed-form lower bounds on the gaps, the inductive product chain and
//! rigorous evaluation of the infinite products it produces.

mod products;
mod verify;

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{int, rat, ratio_to_f64};
use crate::simplex::ModelParams;
use crate::spectral::{galerkin_gap_gamma, report_exact};

pub use products::{
    gamma1_limit, n0_for_constant, n0_interpolation, small_n_delta_bound, summability_gate, GateReport, ProductBound,
    TailMajorant,
};
pub use verify::{verify_minorant, verify_weight_bounds, MinorantReport, WeightBoundReport};

/// One named bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub gamma: f64,
    pub n: Option<usize>,
    pub value: f64,
    /// Exact value as `p/q` when rational.
    pub exact: Option<String>,
    /// Which argument the bound comes from.
    pub anchor: String,
    /// False for entries kept for comparison that are not proven bounds.
    pub rigorous: bool,
    pub notes: String,
}

impl BoundEntry {
    fn new(name: &str, gamma: f64, n: Option<usize>, value: f64, anchor: &str, rigorous: bool, notes: &str) -> Self {
        Self {
            name: name.into(),
            gamma,
            n,
            value,
            exact: None,
            anchor: anchor.into(),
            rigorous,
            notes: notes.into(),
        }
    }

    fn exact(mut self, r: &BigRational) -> Self {
        self.exact = Some(format!("{}/{}", r.numer(), r.denom()));
        self
    }
}

/// Named bounds in insertion order, exportable as CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundLedger {
    pub entries: Vec<BoundEntry>,
}

impl BoundLedger {
    pub const CSV_HEADER: &'static str = "name,gamma,N,value,anchor,notes";

    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: BoundEntry) {
        self.entries.push(e);
    }

    pub fn extend(&mut self, es: impl IntoIterator<Item = BoundEntry>) {
        self.entries.extend(es);
    }

    pub fn get(&self, name: &str, n: Option<usize>) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name && e.n == n)
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|e| e.value.is_finite())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            let n = e.n.map(|n| n.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{:.15},{},{}", e.name, e.gamma, n, e.value, csv_field(&e.anchor), csv_field(&e.notes));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("gamma must lie in [0,1], got {gamma}")))
    }
}

/// `1 - 1/N - 2/N^2`, the exact `Gamma_{0,N}`.
pub fn gamma0_exact(n: usize) -> BigRational {
    let n = n as i64;
    rat(n * n - n - 2, n * n)
}

/// `1 - 1/(N-1) - 2/(N(N-1))`
pub fn gamma1_lower(n: usize) -> BigRational {
    let n = n as i64;
    BigRational::one() - rat(1, n - 1) - rat(2, n * (n - 1))
}

/// `(1 - (1-gamma)/(N-1)) (1 - 1/(N-1) - 2/(N(N-1)))`
pub fn interpolation_product(gamma: f64, n: usize) -> f64 {
    let nm1 = n as f64 - 1.0;
    (1.0 - (1.0 - gamma) / nm1) * ratio_to_f64(&gamma1_lower(n))
}

/// `1 - ((2-gamma)N + 2gamma - 1)/(N-1)^2`, the expansion of the interpolation
/// product with its positive cross term dropped.
pub fn interpolation_expanded(gamma: f64, n: usize) -> f64 {
    let nf = n as f64;
    1.0 - ((2.0 - gamma) * nf + 2.0 * gamma - 1.0) / ((nf - 1.0) * (nf - 1.0))
}

/// `1 - ((2-gamma)N - 3)/(N-1)^2`. Not a valid bound; kept for comparison.
pub fn interpolation_as_printed(gamma: f64, n: usize) -> f64 {
    let nf = n as f64;
    1.0 - ((2.0 - gamma) * nf - 3.0) / ((nf - 1.0) * (nf - 1.0))
}

/// `(N/(N-1))^{gamma-2} (1 - 3/(N-1)^2)`, from the pointwise weight bounds.
pub fn weight_comparison(gamma: f64, n: usize) -> f64 {
    let nf = n as f64;
    (nf / (nf - 1.0)).powf(gamma - 2.0) * (1.0 - 3.0 / ((nf - 1.0) * (nf - 1.0)))
}

/// All closed-form lower bounds on `Gamma_{gamma,N}` that apply.
pub fn gamma_lower_bounds(gamma: f64, n: usize) -> Result<Vec<BoundEntry>> {
    check_gamma(gamma)?;
    if n < 3 {
        return Err(Error::InvalidParam("Gamma bounds need N >= 3".into()));
    }
    let mut out = Vec::new();
    if gamma == 0.0 {
        let v = gamma0_exact(n);
        out.push(
            BoundEntry::new("gamma0-exact", gamma, Some(n), ratio_to_f64(&v), "P0 second eigenvalue", true, "equality")
                .exact(&v),
        );
    }
    if gamma == 1.0 {
        let v = gamma1_lower(n);
        out.push(
            BoundEntry::new("gamma1", gamma, Some(n), ratio_to_f64(&v), "projection comparison", true, "")
                .exact(&v),
        );
    }
    out.push(BoundEntry::new(
        "interpolation",
        gamma,
        Some(n),
        interpolation_product(gamma, n),
        "weight interpolation from gamma = 1",
        true,
        "",
    ));
    out.push(BoundEntry::new(
        "interpolation-expanded",
        gamma,
        Some(n),
        interpolation_expanded(gamma, n),
        "weight interpolation from gamma = 1",
        true,
        "weaker than the product form",
    ));
    out.push(BoundEntry::new(
        "interpolation-as-printed",
        gamma,
        Some(n),
        interpolation_as_printed(gamma, n),
        "weight interpolation from gamma = 1",
        false,
        "simplification with the wrong constant; not a bound",
    ));
    out.push(BoundEntry::new(
        "weight-comparison",
        gamma,
        Some(n),
        weight_comparison(gamma, n),
        "pointwise weight bounds",
        true,
        "",
    ));
    Ok(out)
}

/// Largest rigorous closed-form lower bound on `Gamma_{gamma,N}`.
pub fn best_gamma_lower(gamma: f64, n: usize) -> Result<f64> {
    Ok(gamma_lower_bounds(gamma, n)?
        .iter()
        .filter(|e| e.rigorous)
        .map(|e| e.value)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Where the chain takes its `Gamma_{gamma,N}` values from.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSource {
    /// Best rigorous closed form at each `N`.
    ClosedForm,
    /// Galerkin estimates at the given degree. Rigorous only where the
    /// estimate is certified equal to a proven value.
    Galerkin { degree: usize },
    /// Caller-supplied values for `N = 3, 4, ...`, rigorous or not.
    Values { values: Vec<f64>, rigorous: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub n: usize,
    pub gamma_value: f64,
    /// `(N/(N-1)) Gamma_N`
    pub factor: f64,
    pub delta_lower: f64,
    pub exact: Option<String>,
    pub rigorous: bool,
}

/// `Delta_N >= Delta_{N-1} (N/(N-1)) Gamma_N` multiplied out from `Delta_2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaChain {
    pub gamma: f64,
    pub base: f64,
    pub steps: Vec<ChainStep>,
    /// First `N` at which a `Gamma` value was not positive.
    pub collapsed_at: Option<usize>,
    /// Enclosure of `lim_N` of the chain, when the product converges.
    pub limit: Option<ProductBound>,
    pub notes: Vec<String>,
}

impl DeltaChain {
    pub fn last(&self) -> Option<&ChainStep> {
        self.steps.last()
    }

    pub fn at(&self, n: usize) -> Option<&ChainStep> {
        self.steps.iter().find(|s| s.n == n)
    }

    pub fn ledger(&self) -> BoundLedger {
        let mut l = BoundLedger::new();
        l.push(BoundEntry::new("delta-base", self.gamma, Some(2), self.base, "two-particle gap", true, ""));
        for s in &self.steps {
            let mut e = BoundEntry::new(
                "delta-chain",
                self.gamma,
                Some(s.n),
                s.delta_lower,
                "induction product",
                s.rigorous,
                if s.rigorous { "" } else { "uses Galerkin estimates; empirical" },
            );
            e.exact = s.exact.clone();
            l.push(e);
        }
        if let Some(b) = &self.limit {
            let note = format!("enclosure [{:.9}, {:.9}]", b.lower, b.upper);
            l.push(BoundEntry::new("delta-limit", self.gamma, None, b.lower, "partial product with certified tail", true, &note));
        }
        l
    }
}

/// `Delta_{gamma,2} = 2^{gamma+1}`
pub fn delta_two(gamma: f64) -> f64 {
    2f64.powf(gamma + 1.0)
}

pub fn delta_chain(gamma: f64, n_max: usize, source: &GammaSource) -> Result<DeltaChain> {
    check_gamma(gamma)?;
    if n_max < 2 {
        return Err(Error::InvalidParam("chain needs N >= 2".into()));
    }
    let base = delta_two(gamma);
    let mut chain = DeltaChain { gamma, base, steps: Vec::new(), collapsed_at: None, limit: None, notes: Vec::new() };
    // exact rationals survive while every factor is rational
    let mut exact: Option<BigRational> = match gamma {
        g if g == 0.0 => Some(int(2)),
        g if g == 1.0 => Some(int(4)),
        _ => None,
    };
    let mut value = base;
    let mut rigorous = true;
    for n in 3..=n_max {
        let (g, g_exact, g_rig) = match source {
            GammaSource::ClosedForm => {
                if gamma == 0.0 || gamma == 1.0 {
                    let v = if gamma == 0.0 { gamma0_exact(n) } else { gamma1_lower(n) };
                    (ratio_to_f64(&v), Some(v), true)
                } else {
                    (best_gamma_lower(gamma, n)?, None, true)
                }
            }
            GammaSource::Galerkin { degree } => {
                let params = ModelParams::new(gamma, n, 1.0)?;
                let r = galerkin_gap_gamma(&params, *degree)?;
                let ex = report_exact(&r);
                // certified values at gamma = 0 are proven equal to Gamma itself
                let rig = gamma == 0.0 && ex.as_ref() == Some(&gamma0_exact(n));
                (r.value, ex.filter(|_| rig), rig)
            }
            GammaSource::Values { values, rigorous } => {
                let v = *values
                    .get(n - 3)
                    .ok_or_else(|| Error::InvalidParam(format!("no Gamma value supplied for N = {n}")))?;
                (v, None, *rigorous)
            }
        };
        rigorous &= g_rig;
        let nf = n as f64;
        let factor = nf / (nf - 1.0) * g;
        if g <= 0.0 && chain.collapsed_at.is_none() {
            chain.collapsed_at = Some(n);
            chain.notes.push(format!("Gamma value {g} at N = {n} is not positive; the chain gives 0 from here"));
        }
        value = if chain.collapsed_at.is_some() { 0.0 } else { value * factor };
        exact = match (exact, g_exact) {
            (Some(d), Some(ge)) if chain.collapsed_at.is_none() => Some(d * rat(n as i64, n as i64 - 1) * ge),
            _ => None,
        };
        if let Some(d) = &exact {
            value = ratio_to_f64(d);
        }
        chain.steps.push(ChainStep {
            n,
            gamma_value: g,
            factor,
            delta_lower: value,
            exact: exact.as_ref().map(|d| format!("{}/{}", d.numer(), d.denom())),
            rigorous,
        });
    }
    if gamma == 1.0 && *source == GammaSource::ClosedForm {
        chain.limit = Some(gamma1_limit(1_000_000)?);
    }
    if !rigorous {
        chain.notes.push("chain uses Galerkin upper estimates of Gamma; values are empirical, not bounds".into());
    }
    Ok(chain)
}

/// Exact `Delta_{0,N}` from the chain, for `N <= n_max`.
pub fn delta0_exact(n: usize) -> Result<BigRational> {
    let chain = delta_chain(0.0, n.max(2), &GammaSource::ClosedForm)?;
    if n == 2 {
        return Ok(int(2));
    }
    chain
        .at(n)
        .and_then(|s| s.exact.as_ref())
        .and_then(|s| {
            let (p, q) = s.split_once('/')?;
            Some(BigRational::new(p.parse().ok()?, q.parse().ok()?))
        })
        .filter(|v| !v.is_zero())
        .ok_or_else(|| Error::InvalidParam("no exact chain value".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_bound_examples() {
        let b = gamma_lower_bounds(0.0, 4).unwrap();
        assert_eq!(b[0].exact.as_deref(), Some("5/8"));
        let b = gamma_lower_bounds(1.0, 5).unwrap();
        assert_eq!(b[0].exact.as_deref(), Some("13/20"));
        assert!((interpolation_as_printed(0.5, 5) - 0.71875).abs() < 1e-15);
        // at gamma = 1 the interpolation product is the gamma = 1 bound
        assert!((interpolation_product(1.0, 7) - ratio_to_f64(&gamma1_lower(7))).abs() < 1e-15);
        for n in 3..30 {
            for g in [0.0, 0.3, 0.5, 1.0] {
                assert!(interpolation_expanded(g, n) <= interpolation_product(g, n) + 1e-15);
            }
        }
    }

    #[test]
    fn flat_chain_telescopes() {
        for n in 2..=20 {
            let want = rat(2 * (n as i64 + 1), 3 * (n as i64 - 1));
            assert_eq!(delta0_exact(n).unwrap(), want, "N={n}");
        }
        let c = delta_chain(0.0, 7, &GammaSource::ClosedForm).unwrap();
        assert_eq!(c.at(7).unwrap().exact.as_deref(), Some("8/9"));
    }

    #[test]
    fn chain_collapse_is_reported() {
        let c = delta_chain(0.5, 5, &GammaSource::Values { values: vec![0.5, -0.1, 0.9], rigorous: false }).unwrap();
        assert_eq!(c.collapsed_at, Some(4));
        assert_eq!(c.at(5).unwrap().delta_lower, 0.0);
        assert!(!c.at(3).unwrap().rigorous);
    }

    #[test]
    fn ledger_csv() {
        let mut l = BoundLedger::new();
        l.extend(gamma_lower_bounds(0.5, 5).unwrap());
        let csv = l.to_csv();
        assert!(csv.starts_with(BoundLedger::CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + l.entries.len());
        assert!(l.all_finite());
    }
}
