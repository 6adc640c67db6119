use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use super::UniPoly;
use crate::error::{Error, Result};
use crate::scalar::{int, ratio_to_f64};

pub type MultiIndex = Vec<u32>;

/// Polynomial observable on `S_{N,1}`: sparse map from exponent vectors
/// (length `N`) to exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyFunction {
    n: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// `E[eta^a]` under the uniform measure on `S_{N,1}`.
pub fn simplex_moment(n: usize, a: &[u32]) -> BigRational {
    let deg: u32 = a.iter().sum();
    let mut num = BigInt::one();
    for &x in a {
        if x > 1 {
            num *= factorial(x);
        }
    }
    let nn = BigInt::from(n);
    let mut den = BigInt::one();
    for r in 0..deg {
        num *= &nn;
        den *= BigInt::from(n as u32 + r);
    }
    BigRational::new(num, den)
}

impl PolyFunction {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, BigRational::one())
    }

    pub fn monomial(n: usize, exps: MultiIndex, c: BigRational) -> Result<Self> {
        if exps.len() != n {
            return Err(Error::DimensionMismatch(exps.len(), n));
        }
        let mut p = Self::zero(n);
        p.add_term(exps, c);
        Ok(p)
    }

    /// `eta_k`
    pub fn coordinate(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Index { index: k, n });
        }
        let mut e = vec![0; n];
        e[k] = 1;
        Self::monomial(n, e, BigRational::one())
    }

    /// `p(eta_k)` for a univariate `p`.
    pub fn from_univariate(n: usize, k: usize, p: &UniPoly) -> Result<Self> {
        if k >= n {
            return Err(Error::Index { index: k, n });
        }
        let mut out = Self::zero(n);
        for (d, c) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; n];
            e[k] = d as u32;
            out.add_term(e, c.clone());
        }
        Ok(out)
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, BigRational)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::DimensionMismatch(e.len(), n));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, BigRational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero as a polynomial in `N` variables (not modulo the constraint).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, e: MultiIndex, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same(&self, o: &PolyFunction) {
        assert_eq!(self.n, o.n, "polynomials on simplices of different dimension");
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                ratio_to_f64(c)
                    * e.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product::<f64>()
            })
            .sum()
    }

    pub fn eval_exact(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&a, xi) in e.iter().zip(x) {
                for _ in 0..a {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    /// `E[f]` under the uniform measure on `S_{N,1}`.
    pub fn expectation(&self) -> BigRational {
        self.terms
            .iter()
            .map(|(e, c)| c * simplex_moment(self.n, e))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn centered(&self) -> Self {
        let m = self.expectation();
        self - &PolyFunction::constant(self.n, m)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.n), |acc, _| &acc * self)
    }

    /// `g(eta) = f(eta / e)`, carrying an observable on `S_{N,1}` to `S_{N,e}`.
    pub fn pullback_scale(&self, e: &BigRational) -> Self {
        let inv = BigRational::one() / e;
        let mut out = Self::zero(self.n);
        for (ex, c) in &self.terms {
            let d: u32 = ex.iter().sum();
            let mut f = c.clone();
            for _ in 0..d {
                f *= &inv;
            }
            out.add_term(ex.clone(), f);
        }
        out
    }

    /// `sum_{j in coords} eta_j^k`
    pub fn power_sum(n: usize, coords: impl IntoIterator<Item = usize>, k: u32) -> Self {
        let mut out = Self::zero(n);
        for j in coords {
            let mut e = vec![0; n];
            e[j] = k;
            out.add_term(e, BigRational::one());
        }
        out
    }

    /// Canonical form modulo `sum eta_j = N`: `eta_N` is eliminated.
    pub fn reduce(&self) -> Self {
        let n = self.n;
        let mut last = Self::constant(n, int(n as i64));
        for j in 0..n - 1 {
            let mut e = vec![0; n];
            e[j] = 1;
            last.add_term(e, -BigRational::one());
        }
        let mut powers = vec![Self::one(n)];
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            let m = e[n - 1] as usize;
            if m == 0 {
                out.add_term(e.clone(), c.clone());
                continue;
            }
            while powers.len() <= m {
                let next = &powers[powers.len() - 1] * &last;
                powers.push(next);
            }
            let mut head = e.clone();
            head[n - 1] = 0;
            for (pe, pc) in &powers[m].terms {
                let ee: MultiIndex = head.iter().zip(pe).map(|(a, b)| a + b).collect();
                out.add_term(ee, c * pc);
            }
        }
        out
    }

    /// Equality as functions on the simplex.
    pub fn eq_on_simplex(&self, o: &PolyFunction) -> bool {
        (self - o).reduce().is_zero()
    }

    /// `<f, g>` under the uniform measure on `S_{N,1}`.
    pub fn inner(&self, o: &PolyFunction) -> BigRational {
        self.check_same(o);
        let mut acc = BigRational::zero();
        let mut scratch = vec![0u32; self.n];
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                for ((s, a), b) in scratch.iter_mut().zip(e1).zip(e2) {
                    *s = a + b;
                }
                acc += c1 * c2 * simplex_moment(self.n, &scratch);
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> BigRational {
        self.inner(self)
    }

    /// The univariate polynomial in `eta_k` if `f` depends on `eta_k` only.
    pub fn as_univariate(&self, k: usize) -> Option<UniPoly> {
        let mut c: Vec<BigRational> = Vec::new();
        for (e, v) in &self.terms {
            if e.iter().enumerate().any(|(j, &a)| j != k && a > 0) {
                return None;
            }
            let d = e[k] as usize;
            if c.len() <= d {
                c.resize(d + 1, BigRational::zero());
            }
            c[d] += v;
        }
        Some(UniPoly::new(c))
    }

    /// Multi-index string `a1,a2,...,aN`.
    pub fn index_key(e: &[u32]) -> String {
        e.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Add for &PolyFunction {
    type Output = PolyFunction;
    fn add(self, o: &PolyFunction) -> PolyFunction {
        self.check_same(o);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &PolyFunction {
    type Output = PolyFunction;
    fn sub(self, o: &PolyFunction) -> PolyFunction {
        self.check_same(o);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &PolyFunction {
    type Output = PolyFunction;
    fn mul(self, o: &PolyFunction) -> PolyFunction {
        self.check_same(o);
        let mut out = PolyFunction::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: MultiIndex = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &PolyFunction {
    type Output = PolyFunction;
    fn neg(self) -> PolyFunction {
        self.scale(&-BigRational::one())
    }
}

impl fmt::Display for PolyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(j, &a)| if a == 1 { format!("e{}", j + 1) } else { format!("e{}^{a}", j + 1) })
                    .collect();
                if vars.is_empty() {
                    format!("{c}")
                } else {
                    format!("({c})*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for PolyFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            m.serialize_entry(&Self::index_key(e), &format!("{}/{}", c.numer(), c.denom()))?;
        }
        m.end()
    }
}

fn parse_ratio(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let q: BigInt = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if q.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(p, q))
}

impl<'de> Deserialize<'de> for PolyFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(d)?;
        let mut n = None;
        let mut terms = Vec::with_capacity(raw.len());
        for (k, v) in raw {
            let e: MultiIndex = k
                .split(',')
                .map(|a| a.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| de::Error::custom(format!("bad multi-index {k:?}")))?;
            match n {
                None => n = Some(e.len()),
                Some(m) if m != e.len() => {
                    return Err(de::Error::custom("multi-indices of different lengths"))
                }
                _ => {}
            }
            terms.push((e, parse_ratio(&v).map_err(de::Error::custom)?));
        }
        let n = n.ok_or_else(|| de::Error::custom("empty polynomial has no dimension"))?;
        PolyFunction::from_terms(n, terms).map_err(de::Error::custom)
    }
}
