use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::UniPoly;
use crate::scalar::int;
use crate::simplex::{flat_moment, pair_weighted_moment, slice_weighted_moment};

/// Weight multiplying a quadratic form term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Flat,
    /// `(eta_i + eta_j)^gamma`
    Pair { i: usize, j: usize, gamma: f64 },
    /// `w_N(eta_k) = ((N - eta_k)/(N - 1))^gamma` on `S_{N,1}`
    Slice { k: usize, gamma: f64 },
    /// Quadratic minorant `m_N(eta_k)` of the slice weight
    Minorant { k: usize, gamma: f64 },
}

impl Weight {
    /// Coordinates the weight depends on.
    pub fn coords(&self) -> Vec<usize> {
        match *self {
            Weight::Flat => vec![],
            Weight::Pair { i, j, .. } => vec![i, j],
            Weight::Slice { k, .. } | Weight::Minorant { k, .. } => vec![k],
        }
    }

    /// Whether moments against this weight are rational.
    pub fn is_exact(&self) -> bool {
        match *self {
            Weight::Flat | Weight::Minorant { .. } => true,
            Weight::Pair { gamma, .. } | Weight::Slice { gamma, .. } => gamma == 0.0 || gamma == 1.0,
        }
    }
}

/// `((N - eta)/(N - 1))^gamma`
pub fn slice_weight(n: usize, gamma: f64, eta: f64) -> f64 {
    ((n as f64 - eta) / (n as f64 - 1.0)).max(0.0).powf(gamma)
}

/// `m_N(eta) = 1 + gamma u - (1 - gamma) u^2` with `u = (1 - eta)/(N - 1)`.
pub fn minorant(n: usize, gamma: f64, eta: f64) -> f64 {
    let u = (1.0 - eta) / (n as f64 - 1.0);
    1.0 + gamma * u - (1.0 - gamma) * u * u
}

/// The minorant as an exact polynomial in `eta`.
pub fn minorant_poly(n: usize, gamma: f64) -> Result<UniPoly> {
    let g = BigRational::from_float(gamma).ok_or_else(|| Error::InvalidParam(format!("bad gamma {gamma}")))?;
    let nm1 = int(n as i64 - 1);
    let u = UniPoly::new(vec![BigRational::one() / &nm1, -BigRational::one() / &nm1]);
    let one = UniPoly::constant(BigRational::one());
    Ok(one.add(&u.scale(&g)).sub(&u.mul(&u).scale(&(BigRational::one() - g))))
}

/// `W(eta) = (1/N) sum_k w_N(eta_k)`
pub fn big_w(energies: &[f64], gamma: f64) -> f64 {
    let n = energies.len();
    energies.iter().map(|&e| slice_weight(n, gamma, e)).sum::<f64>() / n as f64
}

/// `(1/N) sum_k m_N(eta_k)`
pub fn w_tilde(energies: &[f64], gamma: f64) -> f64 {
    let n = energies.len();
    energies.iter().map(|&e| minorant(n, gamma, e)).sum::<f64>() / n as f64
}

fn bump(exps: &[u32], k: usize, by: u32) -> Vec<u32> {
    let mut e = exps.to_vec();
    e[k] += by;
    e
}

/// `E[weight * eta^exps]` under the uniform measure with the given total.
pub fn moment_f64(n: usize, total: f64, w: &Weight, exps: &[u32]) -> f64 {
    match *w {
        Weight::Flat => flat_moment::<f64>(n, &total, exps),
        Weight::Pair { i, j, gamma } => {
            if gamma == 0.0 {
                flat_moment::<f64>(n, &total, exps)
            } else {
                pair_weighted_moment(total, i, j, gamma, exps)
            }
        }
        Weight::Slice { k, gamma } => {
            let scale = (n as f64 - 1.0) * total / n as f64;
            if gamma == 0.0 {
                flat_moment::<f64>(n, &total, exps)
            } else {
                slice_weighted_moment(total, k, gamma, exps) / scale.powf(gamma)
            }
        }
        Weight::Minorant { k, gamma } => {
            let nm1 = n as f64 - 1.0;
            let c = [
                1.0 + gamma / nm1 - (1.0 - gamma) / (nm1 * nm1),
                -gamma / nm1 + 2.0 * (1.0 - gamma) / (nm1 * nm1),
                -(1.0 - gamma) / (nm1 * nm1),
            ];
            (0..3).map(|r| c[r] * flat_moment::<f64>(n, &total, &bump(exps, k, r as u32))).sum()
        }
    }
}

/// Exact `E[weight * eta^exps]`; `None` when the weight has an irrational moment.
pub fn moment_exact(n: usize, total: &BigRational, w: &Weight, exps: &[u32]) -> Option<BigRational> {
    let flat = |e: &[u32]| flat_moment::<BigRational>(n, total, e);
    match *w {
        Weight::Flat => Some(flat(exps)),
        Weight::Pair { i, j, gamma } => match gamma {
            g if g == 0.0 => Some(flat(exps)),
            g if g == 1.0 => Some(flat(&bump(exps, i, 1)) + flat(&bump(exps, j, 1))),
            _ => None,
        },
        Weight::Slice { k, gamma } => match gamma {
            g if g == 0.0 => Some(flat(exps)),
            g if g == 1.0 => {
                let nn = int(n as i64);
                let scale = (&nn - BigRational::one()) * total / &nn;
                Some((total * flat(exps) - flat(&bump(exps, k, 1))) / scale)
            }
            _ => None,
        },
        Weight::Minorant { k, gamma } => {
            let p = minorant_poly(n, gamma).ok()?;
            let mut acc = BigRational::zero();
            for (r, c) in p.coeffs().iter().enumerate() {
                acc += c * flat(&bump(exps, k, r as u32));
            }
            Some(acc)
        }
    }
}
