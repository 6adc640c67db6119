use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{PolyFunction, UniPoly};
use crate::error::{Error, Result};
use crate::scalar::int;

fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn binomial(n: u32, k: u32) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `E[eta_i^a eta_j^b | eta_i + eta_j = s] = a! b! / (a+b+1)! s^{a+b}`.
pub fn beta_factor(a: u32, b: u32) -> BigRational {
    BigRational::new(factorial(a) * factorial(b), factorial(a + b + 1))
}

/// `[f]^{(i,j)}`: conditional expectation given every coordinate outside the
/// pair, i.e. the average over uniform repartitions of `eta_i + eta_j`.
pub fn pair_average(f: &PolyFunction, i: usize, j: usize) -> Result<PolyFunction> {
    let n = f.n();
    if i >= n || j >= n {
        return Err(Error::Index { index: i.max(j), n });
    }
    if i == j {
        return Err(Error::InvalidParam("pair average needs two distinct particles".into()));
    }
    let mut out = PolyFunction::zero(n);
    for (e, c) in f.terms() {
        let (a, b) = (e[i], e[j]);
        if a + b == 0 {
            out.add_term(e.clone(), c.clone());
            continue;
        }
        let w = c * beta_factor(a, b);
        let m = a + b;
        for r in 0..=m {
            let mut ee = e.clone();
            ee[i] = r;
            ee[j] = m - r;
            out.add_term(ee, &w * BigRational::from_integer(binomial(m, r)));
        }
    }
    Ok(out)
}

/// `P_k f` as a polynomial in the single variable `eta_k`.
///
/// Given `eta_k`, the other coordinates are uniform on the slice of total
/// `N - eta_k`, so `E[prod_{j != k} eta_j^{c_j} | eta_k] = (N - eta_k)^C (N-2)! prod c_j! / (N-2+C)!`.
pub fn pk_univariate(f: &PolyFunction, k: usize) -> Result<UniPoly> {
    let n = f.n();
    if k >= n {
        return Err(Error::Index { index: k, n });
    }
    // (a, C) -> accumulated coefficient
    let mut groups: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
    for (e, c) in f.terms() {
        let mut num = BigInt::one();
        let mut cc = 0;
        for (j, &x) in e.iter().enumerate() {
            if j != k {
                cc += x;
                if x > 1 {
                    num *= factorial(x);
                }
            }
        }
        let mut den = BigInt::one();
        for r in 0..cc {
            den *= BigInt::from(n as u32 - 1 + r);
        }
        let w = c * BigRational::new(num, den);
        *groups.entry((e[k], cc)).or_insert_with(BigRational::zero) += w;
    }
    let slice = UniPoly::new(vec![int(n as i64), -BigRational::one()]);
    let mut powers = vec![UniPoly::constant(BigRational::one())];
    let mut out = UniPoly::zero();
    for ((a, cc), w) in groups {
        if w.is_zero() {
            continue;
        }
        while powers.len() <= cc as usize {
            let next = powers[powers.len() - 1].mul(&slice);
            powers.push(next);
        }
        let t = UniPoly::monomial(a as usize).mul(&powers[cc as usize]).scale(&w);
        out = out.add(&t);
    }
    Ok(out)
}

/// `P_k f = E[f | eta_k]` as a polynomial on the simplex.
pub fn conditional_expectation_pk(f: &PolyFunction, k: usize) -> Result<PolyFunction> {
    let u = pk_univariate(f, k)?;
    PolyFunction::from_univariate(f.n(), k, &u)
}

/// `K phi (eta) = E[phi(eta_1) | eta_N = eta]` on `S_{N,1}`.
pub fn correlation_k(phi: &UniPoly, n: usize) -> Result<UniPoly> {
    if n < 2 {
        return Err(Error::InvalidParam("K needs N >= 2".into()));
    }
    let f = PolyFunction::from_univariate(n, 0, phi)?;
    pk_univariate(&f, n - 1)
}

/// `P^{(0)} f = (1/N) sum_k P_k f`.
pub fn p0_apply(f: &PolyFunction) -> Result<PolyFunction> {
    let n = f.n();
    let mut out = PolyFunction::zero(n);
    for k in 0..n {
        out = &out + &conditional_expectation_pk(f, k)?;
    }
    Ok(out.scale(&BigRational::new(BigInt::one(), BigInt::from(n))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn coord(n: usize, k: usize) -> PolyFunction {
        PolyFunction::coordinate(n, k).unwrap()
    }

    #[test]
    fn pair_average_examples() {
        let n = 4;
        let f = pair_average(&coord(n, 0), 0, 1).unwrap();
        let want = (&coord(n, 0) + &coord(n, 1)).scale(&rat(1, 2));
        assert_eq!(f, want);
        assert_eq!(pair_average(&coord(n, 2), 0, 1).unwrap(), coord(n, 2));
        // eta_i^2 -> (eta_i + eta_j)^2 / 3
        let sq = pair_average(&coord(n, 0).pow(2), 0, 1).unwrap();
        let s = &coord(n, 0) + &coord(n, 1);
        assert_eq!(sq, s.pow(2).scale(&rat(1, 3)));
        assert!(pair_average(&coord(n, 0), 1, 1).is_err());
    }

    #[test]
    fn pk_examples() {
        for n in 3..8 {
            let ni = n as i64;
            let f = conditional_expectation_pk(&coord(n, 1), 0).unwrap();
            let want = UniPoly::new(vec![rat(ni, ni - 1), rat(-1, ni - 1)]);
            assert_eq!(f.as_univariate(0).unwrap(), want);
            let g = pk_univariate(&coord(n, 1).pow(2), 0).unwrap();
            let slice = UniPoly::new(vec![int(ni), int(-1)]);
            assert_eq!(g, slice.pow(2).scale(&rat(2, ni * (ni - 1))));
        }
        let phi = PolyFunction::from_univariate(5, 2, &UniPoly::monomial(3)).unwrap();
        assert_eq!(conditional_expectation_pk(&phi, 2).unwrap(), phi);
    }

    #[test]
    fn k_monomial_action() {
        // K p_n = (N - eta)^n n! (N-2)! / (n+N-2)!
        for n in [3usize, 4, 5, 9] {
            for d in 0..6u32 {
                let k = correlation_k(&UniPoly::monomial(d as usize), n).unwrap();
                let c = BigRational::new(
                    factorial(d) * factorial(n as u32 - 2),
                    factorial(d + n as u32 - 2),
                );
                let want = UniPoly::new(vec![int(n as i64), int(-1)]).pow(d).scale(&c);
                assert_eq!(k, want);
            }
        }
        let k1 = correlation_k(&UniPoly::monomial(1), 4).unwrap();
        assert_eq!(k1.eval(&int(1)), int(1));
        let k2 = correlation_k(&UniPoly::monomial(2), 5).unwrap();
        assert_eq!(k2, UniPoly::new(vec![int(5), int(-1)]).pow(2).scale(&rat(1, 10)));
    }

    #[test]
    fn p0_keeps_single_coordinate_sums() {
        let n = 4;
        let f = &coord(n, 0) - &coord(n, 1);
        let g = p0_apply(&f).unwrap();
        // P^(0) acts on the antisymmetric linear sector by (1 - kappa_1) / N
        let want = f.scale(&rat(1, 3));
        assert!(g.eq_on_simplex(&want));
    }
}
