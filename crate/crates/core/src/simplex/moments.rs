use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, ratio_to_f64, Scalar};

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Mixed moment `E[prod eta_j^{a_j}]` of the flat Dirichlet measure on the
/// simplex of `n` coordinates summing to `total`:
/// `total^{|a|} (n-1)! prod a_j! / (n-1+|a|)!`.
pub fn flat_moment<T: Scalar>(n: usize, total: &T, exps: &[u32]) -> T {
    let deg: u32 = exps.iter().sum();
    let mut num = T::one();
    for &a in exps {
        for r in 2..=a {
            num = num * T::from_i64(r as i64);
        }
    }
    let mut den = T::one();
    for r in 0..deg {
        den = den * T::from_i64((n as u32 + r) as i64);
        num = num * total.clone();
    }
    num / den
}

/// `E[prod x_j^{e_j}]` for `x = total * Dirichlet(conc)` with real exponents.
pub fn dirichlet_real_moment(conc: &[f64], exps: &[f64], total: f64) -> f64 {
    debug_assert_eq!(conc.len(), exps.len());
    let c: f64 = conc.iter().sum();
    let e: f64 = exps.iter().sum();
    let mut log = ln_gamma(c) - ln_gamma(c + e);
    for (&cj, &ej) in conc.iter().zip(exps) {
        if ej != 0.0 {
            log += ln_gamma(cj + ej) - ln_gamma(cj);
        }
    }
    if e != 0.0 {
        log += e * total.ln();
    }
    log.exp()
}

/// `E[(eta_i + eta_j)^gamma * eta^exps]` under the flat measure with the given total.
///
/// The pair splits as `(beta s, (1-beta) s)` with `beta` uniform and independent of
/// `(s, rest) ~ total * Dirichlet(2, 1, ..., 1)`.
pub fn pair_weighted_moment(total: f64, i: usize, j: usize, gamma: f64, exps: &[u32]) -> f64 {
    let n = exps.len();
    let (a, b) = (exps[i], exps[j]);
    let beta = (ln_fact(a) + ln_fact(b) - ln_fact(a + b + 1)).exp();
    let mut conc = Vec::with_capacity(n - 1);
    let mut ex = Vec::with_capacity(n - 1);
    conc.push(2.0);
    ex.push(gamma + (a + b) as f64);
    for (k, &c) in exps.iter().enumerate() {
        if k != i && k != j {
            conc.push(1.0);
            ex.push(c as f64);
        }
    }
    beta * dirichlet_real_moment(&conc, &ex, total)
}

/// `E[(total - eta_k)^gamma * eta^exps]` under the flat measure with the given total.
pub fn slice_weighted_moment(total: f64, k: usize, gamma: f64, exps: &[u32]) -> f64 {
    let n = exps.len();
    let rest: Vec<u32> = exps
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &c)| c)
        .collect();
    let c: u32 = rest.iter().sum();
    let outer = dirichlet_real_moment(&[1.0, (n - 1) as f64], &[exps[k] as f64, gamma + c as f64], total);
    let inner = flat_moment::<f64>(n - 1, &1.0, &rest);
    outer * inner
}

fn ln_fact(a: u32) -> f64 {
    ln_gamma(a as f64 + 1.0)
}

/// A moment value with its exact rational form when it was computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub value: f64,
    pub exact: Option<BigRational>,
}

/// Exact moment oracle for the flat Dirichlet (uniform) measure on `S_{N,E}`.
#[derive(Debug, Clone)]
pub struct DirichletMomentOracle {
    n: usize,
    total: BigRational,
}

/// Above this value of `N + |a|` the oracle switches to log-Gamma arithmetic.
pub const EXACT_MOMENT_LIMIT: u32 = 64;

impl DirichletMomentOracle {
    /// Oracle for `N` particles at mean energy `E`; `E` is taken as the exact
    /// binary rational of the float.
    pub fn new(n: usize, mean_energy: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParam("need at least one coordinate".into()));
        }
        let e = BigRational::from_float(mean_energy)
            .filter(|e| e > &BigRational::zero())
            .ok_or_else(|| Error::InvalidParam(format!("bad mean energy {mean_energy}")))?;
        Ok(Self { n, total: e * int(n as i64) })
    }

    pub fn with_total(n: usize, total: BigRational) -> Self {
        Self { n, total }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> &BigRational {
        &self.total
    }

    fn check(&self, a: &[u32]) -> Result<()> {
        if a.len() > self.n {
            return Err(Error::InvalidParam(format!(
                "multi-index of length {} for {} particles",
                a.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// `E[prod eta_j^{a_j}]`; exact while `N + |a| <= 64`, log-Gamma beyond.
    pub fn moment(&self, a: &[u32]) -> Result<MomentValue> {
        self.check(a)?;
        let deg: u32 = a.iter().sum();
        if self.n as u32 + deg <= EXACT_MOMENT_LIMIT {
            let exact = self.moment_exact(a)?;
            Ok(MomentValue { value: ratio_to_f64(&exact), exact: Some(exact) })
        } else {
            let n = self.n as f64;
            let d = deg as f64;
            let mut log = ln_gamma(n) - ln_gamma(n + d) + d * ratio_to_f64(&self.total).ln();
            for &x in a {
                log += ln_fact(x);
            }
            Ok(MomentValue { value: log.exp(), exact: None })
        }
    }

    pub fn moment_exact(&self, a: &[u32]) -> Result<BigRational> {
        self.check(a)?;
        Ok(flat_moment::<BigRational>(self.n, &self.total, a))
    }

    pub fn moment_f64(&self, a: &[u32]) -> f64 {
        flat_moment::<f64>(self.n, &ratio_to_f64(&self.total), a)
    }

    /// Audit dump: one line per multi-index, `a1,a2,... decimal p/q`.
    pub fn dump(&self, indices: &[Vec<u32>]) -> Result<String> {
        let mut out = String::new();
        for a in indices {
            let m = self.moment(a)?;
            let key: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            let exact = m
                .exact
                .as_ref()
                .map(|r| format!("{}/{}", r.numer(), r.denom()))
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!("{} {:.17e} {}\n", key.join(","), m.value, exact));
        }
        Ok(out)
    }
}

/// The marginal law `nu_N` of one coordinate under `sigma_N` on `[0, N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarginalLaw {
    pub n_particles: usize,
}

impl MarginalLaw {
    pub fn new(n_particles: usize) -> Result<Self> {
        if n_particles < 2 {
            return Err(Error::InvalidParam("marginal law needs N >= 2".into()));
        }
        Ok(Self { n_particles })
    }

    /// Density `((N-1)/N) (1 - eta/N)^{N-2}` on `[0, N]`.
    pub fn density(&self, eta: f64) -> Result<f64> {
        let n = self.n_particles as f64;
        if !(0.0..=n).contains(&eta) {
            return Err(Error::Domain { value: eta, lo: 0.0, hi: n });
        }
        Ok((n - 1.0) / n * (1.0 - eta / n).powi(self.n_particles as i32 - 2))
    }

    /// Exact `int eta^k d nu_N = N^k k! (N-1)! / (k+N-1)!`.
    pub fn moment(&self, k: u32) -> BigRational {
        marginal_moment(self.n_particles, k)
    }
}

pub fn marginal_moment(n: usize, k: u32) -> BigRational {
    let mut r = BigRational::one();
    let nn = BigInt::from(n);
    for j in 1..=k {
        r = r * BigRational::new(&nn * BigInt::from(j), BigInt::from(n as u32 + j - 1));
    }
    r
}

/// Which closed-form conditional moment to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionalOrder {
    /// `E[eta_i^2 | eta_j = eta]`
    SecondGivenOne,
    /// `E[eta_i^2 | eta_j = eta, eta_k = xi]`
    SecondGivenTwo,
    /// `E[eta_i^4 | eta_j = eta]`
    FourthGivenOne,
}

/// Uniform caps valid for all `N >= 3`, in the order of [`ConditionalOrder`].
pub const CONDITIONAL_CAPS: [f64; 3] = [3.0, 9.0, 24.0];

impl ConditionalOrder {
    pub fn cap(self) -> f64 {
        match self {
            ConditionalOrder::SecondGivenOne => CONDITIONAL_CAPS[0],
            ConditionalOrder::SecondGivenTwo => CONDITIONAL_CAPS[1],
            ConditionalOrder::FourthGivenOne => CONDITIONAL_CAPS[2],
        }
    }
}

/// Conditional moments of one coordinate given one or two others, on `S_N`
/// (mean energy 1). `fixed` holds the conditioning values.
pub fn conditional_moment(n: usize, order: ConditionalOrder, fixed: &[f64]) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParam("conditional moments need N >= 3".into()));
    }
    let nf = n as f64;
    let need = if order == ConditionalOrder::SecondGivenTwo { 2 } else { 1 };
    if fixed.len() != need {
        return Err(Error::InvalidParam(format!("expected {need} conditioning values")));
    }
    let used: f64 = fixed.iter().sum();
    if fixed.iter().any(|&x| x < 0.0) || used > nf {
        return Err(Error::Domain { value: used, lo: 0.0, hi: nf });
    }
    let r = nf - used;
    Ok(match order {
        ConditionalOrder::SecondGivenOne => 2.0 * r * r / (nf * (nf - 1.0)),
        ConditionalOrder::SecondGivenTwo => 2.0 * r * r / ((nf - 1.0) * (nf - 2.0)),
        ConditionalOrder::FourthGivenOne => {
            24.0 * r.powi(4) / ((nf + 2.0) * (nf + 1.0) * nf * (nf - 1.0))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn marginal_density_values() {
        assert_eq!(MarginalLaw::new(2).unwrap().density(1.0).unwrap(), 0.5);
        assert!((MarginalLaw::new(3).unwrap().density(0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(MarginalLaw::new(5).unwrap().density(5.0).unwrap(), 0.0);
        assert!(MarginalLaw::new(3).unwrap().density(3.5).is_err());
        assert!(MarginalLaw::new(3).unwrap().density(-0.1).is_err());
    }

    #[test]
    fn dirichlet_moment_examples() {
        let o3 = DirichletMomentOracle::new(3, 1.0).unwrap();
        assert_eq!(o3.moment_exact(&[1]).unwrap(), int(1));
        assert_eq!(o3.moment_exact(&[2]).unwrap(), rat(3, 2));
        assert_eq!(o3.moment_exact(&[]).unwrap(), int(1));
        let o4 = DirichletMomentOracle::new(4, 1.0).unwrap();
        assert_eq!(o4.moment_exact(&[1, 1]).unwrap(), rat(4, 5));
        assert!(o4.moment(&[1, 1, 1, 1, 1]).is_err());
    }

    #[test]
    fn log_gamma_branch_agrees_with_exact() {
        let o = DirichletMomentOracle::new(60, 1.0).unwrap();
        let a = [3, 2, 1];
        let fast = o.moment(&a).unwrap();
        assert!(fast.exact.is_none());
        let exact = ratio_to_f64(&o.moment_exact(&a).unwrap());
        assert!((fast.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn marginal_moment_examples() {
        assert_eq!(marginal_moment(7, 1), int(1));
        assert_eq!(marginal_moment(3, 2), rat(3, 2));
        assert!(ratio_to_f64(&marginal_moment(100, 4)) <= 24.0);
    }

    #[test]
    fn marginal_moment_bounded_by_exponential() {
        let mut fact = 1.0;
        for k in 1..=8u32 {
            fact *= k as f64;
            for n in 3..40 {
                assert!(ratio_to_f64(&marginal_moment(n, k)) <= fact + 1e-12);
            }
        }
    }

    #[test]
    fn conditional_moment_examples() {
        use ConditionalOrder::*;
        assert!((conditional_moment(3, SecondGivenOne, &[1.5]).unwrap() - 0.75).abs() < 1e-15);
        let v = conditional_moment(4, SecondGivenOne, &[0.0]).unwrap();
        assert!((v - 32.0 / 12.0).abs() < 1e-14 && v <= 3.0);
        let v = conditional_moment(5, FourthGivenOne, &[1.0]).unwrap();
        assert!((v - 24.0 * 256.0 / 840.0).abs() < 1e-12 && v <= 24.0);
        assert!(conditional_moment(4, SecondGivenTwo, &[3.0, 2.0]).is_err());
        assert!(conditional_moment(2, SecondGivenOne, &[1.0]).is_err());
    }

    #[test]
    fn conditional_caps_hold() {
        use ConditionalOrder::*;
        for n in 3..30 {
            let nf = n as f64;
            for i in 0..=20 {
                let eta = nf * i as f64 / 20.0;
                assert!(conditional_moment(n, SecondGivenOne, &[eta]).unwrap() <= 3.0 + 1e-12);
                assert!(conditional_moment(n, FourthGivenOne, &[eta]).unwrap() <= 24.0 + 1e-12);
                let xi = (nf - eta) / 2.0;
                assert!(conditional_moment(n, SecondGivenTwo, &[eta, xi]).unwrap() <= 9.0 + 1e-12);
            }
        }
    }

    #[test]
    fn weighted_moments_reduce_to_flat() {
        let exps = [2, 1, 0, 1];
        let flat = flat_moment::<f64>(4, &4.0, &exps);
        assert!((pair_weighted_moment(4.0, 0, 1, 0.0, &exps) - flat).abs() < 1e-12);
        assert!((slice_weighted_moment(4.0, 2, 0.0, &exps) - flat).abs() < 1e-12);
        // gamma = 1: (eta_0 + eta_1) * eta^exps expanded by hand
        let lhs = pair_weighted_moment(4.0, 0, 1, 1.0, &exps);
        let rhs = flat_moment::<f64>(4, &4.0, &[3, 1, 0, 1]) + flat_moment::<f64>(4, &4.0, &[2, 2, 0, 1]);
        assert!((lhs - rhs).abs() < 1e-11);
        let lhs = slice_weighted_moment(4.0, 3, 1.0, &exps);
        let rhs = 4.0 * flat - flat_moment::<f64>(4, &4.0, &[2, 1, 0, 2]);
        assert!((lhs - rhs).abs() < 1e-11);
    }
}
