use std::collections::HashMap;

use num_rational::BigRational;
use rayon::prelude::*;

use super::basis::TrialBasis;
use super::weights::{moment_exact, moment_f64, Weight};
use crate::error::{Error, Result};
use crate::poly::{conditional_expectation_pk, pair_average, MultiIndex, PolyFunction};
use crate::scalar::{int, Scalar};

/// Which quadratic form to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// The Dirichlet form of the generator.
    Dirichlet,
    /// The one-step form `G` with weights `w_N(eta_k)`.
    G,
    /// `G` with the weights replaced by the quadratic minorant.
    GTilde,
}

/// Moment evaluation in the chosen arithmetic.
pub trait MomentField: Scalar {
    fn weighted_moment(n: usize, total: &BigRational, w: &Weight, exps: &[u32]) -> Result<Self>;
}

impl MomentField for f64 {
    fn weighted_moment(n: usize, total: &BigRational, w: &Weight, exps: &[u32]) -> Result<Self> {
        Ok(moment_f64(n, crate::scalar::ratio_to_f64(total), w, exps))
    }
}

impl MomentField for BigRational {
    fn weighted_moment(n: usize, total: &BigRational, w: &Weight, exps: &[u32]) -> Result<Self> {
        moment_exact(n, total, w, exps)
            .ok_or_else(|| Error::InvalidParam(format!("weight {w:?} has no exact moments")))
    }
}

/// Canonical moment key: exponents on the weight coordinates in place, the
/// rest sorted (the flat measure is exchangeable).
fn canonical(exps: &[u32], special: &[usize]) -> MultiIndex {
    let mut rest: Vec<u32> = exps
        .iter()
        .enumerate()
        .filter(|(j, _)| !special.contains(j))
        .map(|(_, &a)| a)
        .collect();
    rest.sort_unstable_by(|a, b| b.cmp(a));
    let mut key: MultiIndex = special.iter().map(|&j| exps[j]).collect();
    key.extend(rest);
    key
}

/// `A_{ab} = E[w f_a f_b]` for all pairs, via a dense moment table over the
/// union of monomial supports.
pub fn quad_matrix<T: MomentField>(
    funcs: &[PolyFunction],
    n: usize,
    total: &BigRational,
    w: &Weight,
) -> Result<Vec<Vec<T>>> {
    let special = w.coords();
    pair_matrix(funcs, n, &special, |e| T::weighted_moment(n, total, w, e))
}

/// `A_{ab} = L(f_a f_b)` for a linear functional `L` given on monomials.
///
/// `L` must be invariant under permutations of the coordinates outside
/// `special`; it is evaluated once per canonical exponent vector.
pub fn pair_matrix<T: Scalar>(
    funcs: &[PolyFunction],
    n: usize,
    special: &[usize],
    eval: impl Fn(&[u32]) -> Result<T> + Sync,
) -> Result<Vec<Vec<T>>> {
    let mut index: HashMap<&MultiIndex, usize> = HashMap::new();
    let mut monos: Vec<&MultiIndex> = Vec::new();
    let rows: Vec<Vec<(usize, T)>> = funcs
        .iter()
        .map(|f| {
            f.terms()
                .iter()
                .map(|(e, c)| {
                    let id = *index.entry(e).or_insert_with(|| {
                        monos.push(e);
                        monos.len() - 1
                    });
                    (id, T::from_ratio(c))
                })
                .collect()
        })
        .collect();
    let s = monos.len();
    // distinct canonical keys first, so each moment is evaluated once
    let mut keys: HashMap<MultiIndex, usize> = HashMap::new();
    let mut key_list: Vec<MultiIndex> = Vec::new();
    let mut table = vec![0usize; s * s];
    let mut sum = vec![0u32; n];
    for a in 0..s {
        for b in a..s {
            for ((x, p), q) in sum.iter_mut().zip(monos[a]).zip(monos[b]) {
                *x = p + q;
            }
            let k = canonical(&sum, special);
            let id = match keys.get(&k) {
                Some(&id) => id,
                None => {
                    key_list.push(k.clone());
                    keys.insert(k, key_list.len() - 1);
                    key_list.len() - 1
                }
            };
            table[a * s + b] = id;
            table[b * s + a] = id;
        }
    }
    let values: Vec<T> = key_list
        .par_iter()
        .map(|k| {
            // rebuild a representative exponent vector from the canonical key
            let mut e = vec![0u32; n];
            for (slot, &j) in special.iter().enumerate() {
                e[j] = k[slot];
            }
            let mut rest = k[special.len()..].iter();
            for (j, x) in e.iter_mut().enumerate() {
                if !special.contains(&j) {
                    *x = *rest.next().expect("key length matches dimension");
                }
            }
            eval(&e)
        })
        .collect::<Result<_>>()?;
    let m = funcs.len();
    let mut out: Vec<Vec<T>> = (0..m)
        .into_par_iter()
        .map(|a| {
            (0..m)
                .map(|b| {
                    if b < a {
                        return T::zero();
                    }
                    let mut acc = T::zero();
                    for (i, ci) in &rows[a] {
                        for (j, cj) in &rows[b] {
                            acc += ci.clone() * cj.clone() * values[table[i * s + j]].clone();
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    for a in 0..m {
        for b in 0..a {
            out[a][b] = out[b][a].clone();
        }
    }
    Ok(out)
}

fn axpy<T: Scalar>(acc: &mut [Vec<T>], s: &T, x: &[Vec<T>]) {
    for (ra, rx) in acc.iter_mut().zip(x) {
        for (a, v) in ra.iter_mut().zip(rx) {
            *a += s.clone() * v.clone();
        }
    }
}

fn total_of(basis: &TrialBasis) -> Result<BigRational> {
    BigRational::from_float(basis.mean_energy)
        .map(|e| e * int(basis.n as i64))
        .ok_or_else(|| Error::InvalidParam("bad mean energy".into()))
}

/// Gram matrix `E[f_a f_b]`.
pub fn gram_matrix<T: MomentField>(basis: &TrialBasis) -> Result<Vec<Vec<T>>> {
    quad_matrix(&basis.functions, basis.n, &total_of(basis)?, &Weight::Flat)
}

/// Form matrix `Q(f_a, f_b)` summed over the orbits of the basis.
pub fn form_matrix<T: MomentField>(basis: &TrialBasis, kind: FormKind, gamma: f64) -> Result<Vec<Vec<T>>> {
    let n = basis.n;
    let total = total_of(basis)?;
    let m = basis.functions.len();
    let mut acc = vec![vec![T::zero(); m]; m];
    match kind {
        FormKind::Dirichlet => {
            if n < 2 {
                return Err(Error::InvalidParam("need N >= 2".into()));
            }
            // N / C(N,2) = 2 / (N-1)
            let c = T::from_ratio(&BigRational::new(2.into(), (n as i64 - 1).into()));
            for &(i, j, mult) in &basis.pair_orbits {
                let w = Weight::Pair { i, j, gamma };
                let avg: Vec<PolyFunction> =
                    basis.functions.iter().map(|f| pair_average(f, i, j)).collect::<Result<_>>()?;
                let q1: Vec<Vec<T>> = quad_matrix(&basis.functions, n, &total, &w)?;
                let q2: Vec<Vec<T>> = quad_matrix(&avg, n, &total, &w)?;
                let s = c.clone() * T::from_i64(mult as i64);
                axpy(&mut acc, &s, &q1);
                axpy(&mut acc, &(-s), &q2);
            }
        }
        FormKind::G | FormKind::GTilde => {
            if total != int(n as i64) {
                return Err(Error::InvalidParam("G forms are defined at mean energy 1".into()));
            }
            if n < 3 {
                return Err(Error::InvalidParam("G forms need N >= 3".into()));
            }
            let inv_n = T::from_ratio(&BigRational::new(1.into(), (n as i64).into()));
            for &(k, mult) in &basis.single_orbits {
                let w = if kind == FormKind::G {
                    Weight::Slice { k, gamma }
                } else {
                    Weight::Minorant { k, gamma }
                };
                let proj: Vec<PolyFunction> =
                    basis.functions.iter().map(|f| conditional_expectation_pk(f, k)).collect::<Result<_>>()?;
                let q1: Vec<Vec<T>> = quad_matrix(&basis.functions, n, &total, &w)?;
                let q2: Vec<Vec<T>> = quad_matrix(&proj, n, &total, &w)?;
                let s = inv_n.clone() * T::from_i64(mult as i64);
                axpy(&mut acc, &s, &q1);
                axpy(&mut acc, &(-s), &q2);
            }
        }
    }
    Ok(acc)
}

/// Whether the form can be assembled in exact rational arithmetic.
pub fn exact_capable(kind: FormKind, gamma: f64) -> bool {
    match kind {
        FormKind::GTilde => BigRational::from_float(gamma).is_some(),
        _ => gamma == 0.0 || gamma == 1.0,
    }
}

/// Rough cost of an exact assembly: squared number of stored coefficients.
pub fn exact_cost(basis: &TrialBasis) -> usize {
    let nnz: usize = basis.functions.iter().map(|f| f.len()).sum();
    nnz * nnz
}
