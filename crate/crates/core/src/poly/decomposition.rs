use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use super::operators::pk_univariate;
use super::ortho::build_ortho_basis;
use super::{PolyFunction, UniPoly};
use crate::error::{Error, Result};
use crate::scalar::{int, ratio_to_f64};

/// `f = s + g + h`: `s` collects the `phi_1(eta_k)` components, `g` the higher
/// single-coordinate components and `h` is annihilated by every `P_k`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub s: PolyFunction,
    pub g: PolyFunction,
    pub h: PolyFunction,
    /// Weights of `phi_1(eta_k)` in `s`; they sum to zero.
    pub alphas: Vec<f64>,
    /// `coeffs[k][m]`: coefficient of the monic `pi_m(eta_k)` (entry 0 unused).
    pub coeffs: Vec<Vec<BigRational>>,
    pub degree: usize,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.s.n()
    }

    /// `rho_k = sum_m coeffs[k][m] pi_m`.
    pub fn rho(&self, k: usize) -> UniPoly {
        let basis = build_ortho_basis(self.n(), self.degree.max(1)).expect("basis was built before");
        (1..=self.degree).fold(UniPoly::zero(), |acc, m| acc.add(&basis.monic(m).scale(&self.coeffs[k][m])))
    }

    /// `p = s + g`, the projection onto single-coordinate functions.
    pub fn p(&self) -> PolyFunction {
        &self.s + &self.g
    }

    /// `sum_k ||rho_k||^2_{nu_N}`
    pub fn rho_norm_sum(&self) -> BigRational {
        let basis = build_ortho_basis(self.n(), self.degree.max(1)).expect("basis was built before");
        let mut acc = BigRational::zero();
        for row in &self.coeffs {
            for (m, c) in row.iter().enumerate().skip(1) {
                acc += c * c * basis.norm_sq(m);
            }
        }
        acc
    }
}

/// Splits a centered polynomial into `s + g + h`.
///
/// The projection onto `span{pi_m(eta_k)}` uses that its Gram matrix is block
/// diagonal in `m` with blocks `h_m ((1 - kappa_m) I + kappa_m J)`.
pub fn trial_decomposition(f: &PolyFunction) -> Result<Decomposition> {
    let n = f.n();
    if n < 3 {
        return Err(Error::InvalidParam("trial decomposition needs N >= 3".into()));
    }
    if !f.expectation().is_zero() {
        return Err(Error::InvalidParam("trial function must have mean zero".into()));
    }
    let d = (f.degree() as usize).max(1);
    let basis = build_ortho_basis(n, d)?;
    let proj: Vec<UniPoly> = (0..n).map(|k| pk_univariate(f, k)).collect::<Result<_>>()?;
    let nn = int(n as i64);
    let one = BigRational::one();
    let mut coeffs = vec![vec![BigRational::zero(); d + 1]; n];
    for m in 1..=d {
        let pm = basis.monic(m);
        let b: Vec<BigRational> = proj.iter().map(|u| u.nu_inner(pm, n)).collect();
        let total = b.iter().fold(BigRational::zero(), |a, x| a + x);
        let kappa = basis.kappa(m);
        let diag = basis.norm_sq(m) * (&one - &kappa);
        let shift = if m == 1 {
            // the block is singular; sum_k pi_1(eta_k) = 0, pick the zero-sum solution
            &total / &nn
        } else {
            &total * &kappa / (&one + (&nn - &one) * &kappa)
        };
        for k in 0..n {
            coeffs[k][m] = (&b[k] - &shift) / &diag;
        }
    }
    let mut s = PolyFunction::zero(n);
    let mut g = PolyFunction::zero(n);
    for (k, row) in coeffs.iter().enumerate() {
        s = &s + &PolyFunction::from_univariate(n, k, &basis.monic(1).scale(&row[1]))?;
        for (m, c) in row.iter().enumerate().skip(2) {
            g = &g + &PolyFunction::from_univariate(n, k, &basis.monic(m).scale(c))?;
        }
    }
    let h = &(f - &s) - &g;
    let root_h1 = ratio_to_f64(basis.norm_sq(1)).sqrt();
    let alphas = coeffs.iter().map(|r| ratio_to_f64(&r[1]) * root_h1).collect();
    Ok(Decomposition { s, g, h, alphas, coeffs, degree: d })
}

/// Canonical `rho_1..rho_N` of a centered sum of single-coordinate functions.
pub fn canonical_representation(f: &PolyFunction) -> Result<Vec<UniPoly>> {
    let dec = trial_decomposition(f)?;
    if !dec.h.reduce().is_zero() {
        return Err(Error::NotInSingleCoordinateSpace(ratio_to_f64(&dec.h.norm_sq()).sqrt()));
    }
    Ok((0..f.n()).map(|k| dec.rho(k)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub n_particles: usize,
    pub norm_sq: f64,
    pub rho_norm_sum: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// `(1 - 2/N) sum ||rho_j||^2 <= ||f||^2 <= (1 + 2/N) sum ||rho_j||^2`, checked exactly.
pub fn verify_chaos_sandwich(f: &PolyFunction) -> Result<SandwichReport> {
    let n = f.n();
    let dec = trial_decomposition(f)?;
    if !dec.h.reduce().is_zero() {
        return Err(Error::NotInSingleCoordinateSpace(ratio_to_f64(&dec.h.norm_sq()).sqrt()));
    }
    let norm = f.norm_sq();
    let rho = dec.rho_norm_sum();
    let two_over_n = BigRational::new(BigInt::from(2), BigInt::from(n));
    let lower = &rho * (BigRational::one() - &two_over_n);
    let upper = &rho * (BigRational::one() + &two_over_n);
    Ok(SandwichReport {
        n_particles: n,
        norm_sq: ratio_to_f64(&norm),
        rho_norm_sum: ratio_to_f64(&rho),
        lower: ratio_to_f64(&lower),
        upper: ratio_to_f64(&upper),
        holds: lower <= norm && norm <= upper,
    })
}

/// `P_k s = N/(N-1) alpha_k phi_1(eta_k)` for every `k`, checked exactly.
pub fn verify_seig(dec: &Decomposition) -> Result<bool> {
    let n = dec.n();
    let basis = build_ortho_basis(n, 1)?;
    let factor = BigRational::new(BigInt::from(n), BigInt::from(n - 1));
    for k in 0..n {
        let lhs = pk_univariate(&dec.s, k)?;
        let rhs = basis.monic(1).scale(&(&factor * &dec.coeffs[k][1]));
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `||s||_4 / (N^{1/2} ||s||_2)`
pub fn l4_ratio(s: &PolyFunction) -> f64 {
    let l2 = ratio_to_f64(&s.norm_sq()).sqrt();
    if l2 == 0.0 {
        return 0.0;
    }
    let l4 = ratio_to_f64(&s.pow(2).norm_sq()).powf(0.25);
    l4 / ((s.n() as f64).sqrt() * l2)
}

fn small_ratio<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    let p: i64 = rng.random_range(-9..=9);
    let q: i64 = rng.random_range(1..=4);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Random element of `span{pi_m(eta_k) : 1 <= m <= degree}`.
pub fn random_single_coordinate<R: Rng + ?Sized>(n: usize, degree: usize, rng: &mut R) -> Result<PolyFunction> {
    let basis = build_ortho_basis(n, degree.max(1))?;
    let mut f = PolyFunction::zero(n);
    for k in 0..n {
        for m in 1..=degree {
            let c = small_ratio(rng);
            f = &f + &PolyFunction::from_univariate(n, k, &basis.monic(m).scale(&c))?;
        }
    }
    Ok(f)
}

/// Random centered polynomial of total degree at most `degree` with up to
/// `terms` monomials.
pub fn random_polynomial<R: Rng + ?Sized>(n: usize, degree: u32, terms: usize, rng: &mut R) -> PolyFunction {
    let mut f = PolyFunction::zero(n);
    for _ in 0..terms {
        let deg = rng.random_range(1..=degree);
        let mut e = vec![0u32; n];
        for _ in 0..deg {
            e[rng.random_range(0..n)] += 1;
        }
        f.add_term(e, small_ratio(rng));
    }
    f.centered()
}
