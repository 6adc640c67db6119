use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::poly::{build_ortho_basis, PolyFunction};

/// Trial functions for a Galerkin problem together with the orbit structure
/// of particle pairs and single particles under the symmetry they respect.
#[derive(Debug, Clone)]
pub struct TrialBasis {
    pub n: usize,
    pub mean_energy: f64,
    pub degree: usize,
    pub functions: Vec<PolyFunction>,
    pub labels: Vec<String>,
    /// `(i, j, multiplicity)`: one representative per pair orbit.
    pub pair_orbits: Vec<(usize, usize, u64)>,
    /// `(k, multiplicity)`: one representative per particle orbit.
    pub single_orbits: Vec<(usize, u64)>,
}

impl TrialBasis {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Treats arbitrary functions with no assumed symmetry.
    pub fn generic(n: usize, mean_energy: f64, functions: Vec<PolyFunction>) -> Self {
        let degree = functions.iter().map(|f| f.degree() as usize).max().unwrap_or(0);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j, 1));
            }
        }
        let labels = (0..functions.len()).map(|k| format!("f{k}")).collect();
        Self {
            n,
            mean_energy,
            degree,
            functions,
            labels,
            pair_orbits: pairs,
            single_orbits: (0..n).map(|k| (k, 1)).collect(),
        }
    }
}

fn compositions(m: usize, budget: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if cur.len() == m {
        out.push(cur.clone());
        return;
    }
    for a in 0..=budget {
        cur.push(a);
        compositions(m, budget - a, out, cur);
        cur.pop();
    }
}

/// Exponent vectors `b_2..b_K` with `sum k b_k <= budget`.
fn power_patterns(kmax: usize, budget: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(k: usize, kmax: usize, budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k > kmax {
            out.push(cur.clone());
            return;
        }
        for b in 0..=budget / k {
            cur.push(b);
            rec(k + 1, kmax, budget - k * b, cur, out);
            cur.pop();
        }
    }
    rec(2, kmax, budget, &mut Vec::new(), &mut out);
    out
}

fn check(n: usize, degree: usize, mean_energy: f64) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::InvalidParam("need N >= 2".into()));
    }
    if degree < 1 {
        return Err(Error::InvalidParam("degree must be >= 1".into()));
    }
    if degree > 8 {
        return Err(Error::DegreeCap { degree, cap: 8 });
    }
    BigRational::from_float(mean_energy)
        .filter(|e| *e > BigRational::from_integer(0.into()))
        .ok_or_else(|| Error::InvalidParam(format!("bad mean energy {mean_energy}")))
}

/// Polynomials of degree `<= d` invariant under permutations of the last
/// `N - m` particles, `m = min(d, N - 1)`, with constants removed.
///
/// Every symmetry type of polynomial of degree `<= d` contains a vector fixed
/// by this subgroup, so the lowest Rayleigh quotient over this subspace equals
/// the one over all polynomials of degree `<= d`.
pub fn invariant_basis(n: usize, degree: usize, mean_energy: f64) -> Result<TrialBasis> {
    let e = check(n, degree, mean_energy)?;
    let m = degree.min(n - 1);
    let t = n - m;
    build(n, m, t, degree, &e, mean_energy)
}

/// Fully symmetric polynomials of degree `<= d` (power sums), constants removed.
pub fn symmetric_basis(n: usize, degree: usize, mean_energy: f64) -> Result<TrialBasis> {
    let e = check(n, degree, mean_energy)?;
    build(n, 0, n, degree, &e, mean_energy)
}

fn build(n: usize, m: usize, t: usize, degree: usize, e: &BigRational, mean_energy: f64) -> Result<TrialBasis> {
    let ortho = build_ortho_basis(n, degree)?;
    let kmax = t.min(degree);
    let trailing: Vec<usize> = (m..n).collect();
    // centered power sums of the trailing block on S_{N,1}
    let mut powers = Vec::new();
    for k in 2..=kmax {
        let p = PolyFunction::power_sum(n, trailing.iter().copied(), k as u32);
        powers.push(p.centered());
    }
    let mut functions = Vec::new();
    let mut labels = Vec::new();
    for pat in power_patterns(kmax.max(1), degree) {
        let pat: Vec<usize> = if kmax >= 2 { pat } else { Vec::new() };
        let used: usize = pat.iter().enumerate().map(|(i, b)| (i + 2) * b).sum();
        if used > degree {
            continue;
        }
        let mut lead = Vec::new();
        compositions(m, degree - used, &mut lead, &mut Vec::new());
        for a in lead {
            if a.iter().all(|&x| x == 0) && pat.iter().all(|&b| b == 0) {
                continue;
            }
            let mut f = PolyFunction::one(n);
            let mut label = Vec::new();
            for (i, &ai) in a.iter().enumerate() {
                if ai > 0 {
                    f = &f * &PolyFunction::from_univariate(n, i, ortho.monic(ai))?;
                    label.push(format!("pi{ai}(e{})", i + 1));
                }
            }
            for (idx, &b) in pat.iter().enumerate() {
                if b > 0 {
                    f = &f * &powers[idx].pow(b as u32);
                    label.push(format!("q{}^{b}", idx + 2));
                }
            }
            functions.push(f.centered().pullback_scale(e));
            labels.push(label.join("*"));
        }
        if kmax < 2 {
            break;
        }
    }
    let mut pair_orbits = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            pair_orbits.push((i, j, 1));
        }
        if t >= 1 {
            pair_orbits.push((i, m, t as u64));
        }
    }
    if t >= 2 {
        pair_orbits.push((m, m + 1, (t * (t - 1) / 2) as u64));
    }
    let mut single_orbits: Vec<(usize, u64)> = (0..m).map(|k| (k, 1)).collect();
    if t >= 1 {
        single_orbits.push((m, t as u64));
    }
    Ok(TrialBasis { n, mean_energy, degree, functions, labels, pair_orbits, single_orbits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        // N = 14, d = 3: 19 leading monomials, 4 with q2, 1 with q3
        assert_eq!(invariant_basis(14, 3, 1.0).unwrap().len(), 24);
        assert_eq!(invariant_basis(2, 1, 1.0).unwrap().len(), 1);
        // N = 3, d = 2: all polynomials in eta_1, eta_2 of degree <= 2 minus constants
        assert_eq!(invariant_basis(3, 2, 1.0).unwrap().len(), 5);
        assert_eq!(symmetric_basis(6, 4, 1.0).unwrap().len(), 4);
    }

    #[test]
    fn orbit_multiplicities_cover_everything() {
        for (n, d) in [(5, 2), (8, 3), (3, 4)] {
            let b = invariant_basis(n, d, 1.0).unwrap();
            let pairs: u64 = b.pair_orbits.iter().map(|o| o.2).sum();
            let singles: u64 = b.single_orbits.iter().map(|o| o.1).sum();
            assert_eq!(pairs as usize, n * (n - 1) / 2);
            assert_eq!(singles as usize, n);
        }
    }

    #[test]
    fn functions_are_centered() {
        let b = invariant_basis(5, 3, 1.0).unwrap();
        for f in &b.functions {
            assert!(num_traits::Zero::is_zero(&f.expectation()));
        }
    }
}
