use serde::Serialize;

use super::{check_gamma, delta_two, interpolation_product};
use crate::error::{Error, Result};

/// Two-sided enclosure of an infinite product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductBound {
    /// Factors multiplied explicitly.
    pub terms: usize,
    pub partial: f64,
    pub tail_lower: f64,
    pub tail_upper: f64,
    pub lower: f64,
    pub upper: f64,
    pub notes: Vec<String>,
}

/// Slack on a floating sum of `terms` logarithms.
fn log_sum_slack(terms: usize, sum: f64) -> f64 {
    (terms as f64 + 16.0) * f64::EPSILON * (sum.abs() + 1.0)
}

/// `4 prod_{j >= 3} (1 - 3/(j-1)^2)`, the `gamma = 1` chain limit.
///
/// Factors `k = 2..=m` (with `k = j - 1`) are summed in log space. For the
/// tail, `x_k = 3/k^2 <= 1/2` and `log(1 - x) >= -x - x^2` give
/// `log tail >= -3/m - 3/m^3`, while `log(1 - x) <= -x` gives
/// `log tail <= -3/(m+1)`.
pub fn gamma1_limit(m: usize) -> Result<ProductBound> {
    if m < 2 {
        return Err(Error::InvalidParam("need at least one factor".into()));
    }
    let log_partial: f64 = (2..=m).map(|k| (-3.0 / (k as f64 * k as f64)).ln_1p()).sum();
    let slack = log_sum_slack(m, log_partial);
    let mf = m as f64;
    let tail_lower = (-3.0 / mf - 3.0 / (mf * mf * mf)).exp();
    let tail_upper = (-3.0 / (mf + 1.0)).exp();
    let round = 1.0 - 4.0 * f64::EPSILON;
    let lower = 4.0 * (log_partial - slack).exp() * tail_lower * round;
    let upper = 4.0 * (log_partial + slack).exp() * tail_upper / round;
    Ok(ProductBound {
        terms: m - 1,
        partial: 4.0 * log_partial.exp(),
        tail_lower,
        tail_upper,
        lower,
        upper,
        notes: vec![format!(
            "partial product to j = {}; tail bounded by log(1-x) >= -x - x^2 and sum_(k>m) 3/k^2 < 3/m",
            m + 1
        )],
    })
}

/// `(2/N)^{1-gamma} Delta_{gamma,2} prod_{j>=3}(1 - 3/(j-1)^2)`, a lower bound
/// on `Delta_{gamma,N}` that is valid for every `N >= 3` but decays with `N`.
pub fn small_n_delta_bound(gamma: f64, n: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if n < 2 {
        return Err(Error::InvalidParam("need N >= 2".into()));
    }
    if n == 2 {
        return Ok(delta_two(gamma));
    }
    let prod = gamma1_limit(1_000_000)?.lower / 4.0;
    Ok((2.0 / n as f64).powf(1.0 - gamma) * delta_two(gamma) * prod)
}

/// `A_N <= c N^{-p}` for every `N` past the explicit values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailMajorant {
    pub c: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub n0: usize,
    pub n_last: usize,
    /// `prod_{N=n0}^{n_last} (N/(N-1))(1 - 1/N - A_N)`
    pub partial: f64,
    pub tail_lower: f64,
    /// Certified lower bound on the infinite product.
    pub limit_lower: f64,
    pub passes: bool,
    pub notes: Vec<String>,
}

/// Decides whether `prod_{N >= n0} (N/(N-1))(1 - 1/N - A_N)` is certified
/// positive, given `A_N` for `N = n0 .. n0 + a.len() - 1` and a majorant for
/// the rest.
pub fn summability_gate(a: &[f64], n0: usize, tail: TailMajorant) -> Result<GateReport> {
    if n0 < 3 {
        return Err(Error::InvalidParam("the chain starts at N >= 3".into()));
    }
    if a.is_empty() {
        return Err(Error::InvalidParam("need at least one explicit A_N".into()));
    }
    let mut log_partial = 0.0;
    let mut notes = Vec::new();
    for (i, &an) in a.iter().enumerate() {
        let n = (n0 + i) as f64;
        if !(0.0..(n - 1.0) / n).contains(&an) {
            return Err(Error::Domain { value: an, lo: 0.0, hi: (n - 1.0) / n });
        }
        log_partial += (-(n / (n - 1.0)) * an).ln_1p();
    }
    let n_last = n0 + a.len() - 1;
    let partial = log_partial.exp();
    let mut report = GateReport { n0, n_last, partial, tail_lower: 0.0, limit_lower: 0.0, passes: false, notes: Vec::new() };
    if !(tail.c >= 0.0 && tail.c.is_finite()) {
        return Err(Error::InvalidParam(format!("bad majorant constant {}", tail.c)));
    }
    if tail.c == 0.0 {
        report.tail_lower = 1.0;
    } else if tail.p <= 1.0 {
        notes.push(format!("majorant N^-{} is not summable; the product may vanish", tail.p));
    } else {
        let l = n_last as f64;
        let r = (l + 1.0) / l;
        // x_N = (N/(N-1)) A_N <= r c N^{-p} for N > L
        let x_first = r * tail.c * (l + 1.0).powf(-tail.p);
        if x_first > 0.5 {
            notes.push("majorant exceeds 1/2 just past the explicit range; supply more explicit values".into());
        } else {
            let s1 = r * tail.c * l.powf(1.0 - tail.p) / (tail.p - 1.0);
            let s2 = r * r * tail.c * tail.c * l.powf(1.0 - 2.0 * tail.p) / (2.0 * tail.p - 1.0);
            report.tail_lower = (-s1 - s2).exp();
        }
    }
    let slack = log_sum_slack(a.len(), log_partial);
    report.limit_lower = (log_partial - slack).exp() * report.tail_lower * (1.0 - 4.0 * f64::EPSILON);
    report.passes = report.limit_lower > 0.0;
    report.notes = notes;
    Ok(report)
}

/// Least `N >= 3` with `1 - 1/N - c N^{-3/2} > 0`.
pub fn n0_for_constant(c: f64) -> Result<usize> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParam(format!("bad constant {c}")));
    }
    (3..10_000_000usize)
        .find(|&n| {
            let nf = n as f64;
            1.0 - 1.0 / nf - c * nf.powf(-1.5) > 0.0
        })
        .ok_or_else(|| Error::InvalidParam(format!("no N0 below 10^7 for c = {c}")))
}

/// Least `N >= 3` at which the interpolation lower bound on `Gamma` is positive.
pub fn n0_interpolation(gamma: f64) -> Result<usize> {
    check_gamma(gamma)?;
    (3..1000usize)
        .find(|&n| interpolation_product(gamma, n) > 0.0)
        .ok_or_else(|| Error::InvalidParam("interpolation bound never positive".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma1_limit_encloses_the_sine_product() {
        // prod_{k>=1} (1 - z^2/k^2) = sin(pi z)/(pi z); drop k = 1, z = sqrt 3
        let z = 3f64.sqrt() * std::f64::consts::PI;
        let oracle = 4.0 * z.sin() / z / (1.0 - 3.0);
        for m in [10, 1000, 1_000_000] {
            let b = gamma1_limit(m).unwrap();
            assert!(b.lower <= oracle && oracle <= b.upper, "m={m}: {} {oracle} {}", b.lower, b.upper);
        }
        let b = gamma1_limit(1_000_000).unwrap();
        assert!(b.upper - b.lower < 1e-5);
        assert!((0.25..=0.30).contains(&b.lower));
    }

    #[test]
    fn gate_examples() {
        let power = |c: f64, p: f64, n0: usize, len: usize| -> Vec<f64> {
            (n0..n0 + len).map(|n| c * (n as f64).powf(-p)).collect()
        };
        let g = summability_gate(&power(1.0, 1.5, 4, 100), 4, TailMajorant { c: 1.0, p: 1.5 }).unwrap();
        assert!(g.passes && g.limit_lower > 0.0 && g.limit_lower <= g.partial);
        let g = summability_gate(&power(2.0, 1.0, 4, 100), 4, TailMajorant { c: 2.0, p: 1.0 }).unwrap();
        assert!(!g.passes);
        let g = summability_gate(&[0.0; 10], 3, TailMajorant { c: 0.0, p: 2.0 }).unwrap();
        assert!(g.passes && (g.limit_lower - 1.0).abs() < 1e-12);
        assert!(summability_gate(&[0.9], 3, TailMajorant { c: 0.0, p: 2.0 }).is_err());
    }

    #[test]
    fn n0_selection() {
        assert_eq!(n0_for_constant(0.0).unwrap(), 3);
        let n0 = n0_for_constant(10.0).unwrap();
        let f = |n: f64| 1.0 - 1.0 / n - 10.0 * n.powf(-1.5);
        assert!(f(n0 as f64) > 0.0 && f(n0 as f64 - 1.0) <= 0.0);
        assert_eq!(n0_interpolation(0.5).unwrap(), 3);
    }

    #[test]
    fn small_n_bound_decays_like_n_to_gamma_minus_one() {
        let a = small_n_delta_bound(0.5, 8).unwrap();
        let b = small_n_delta_bound(0.5, 32).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!((small_n_delta_bound(1.0, 50).unwrap() - gamma1_limit(1_000_000).unwrap().lower).abs() < 1e-15);
    }
}
