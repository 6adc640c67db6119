use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::operators::{correlation_k, pk_univariate};
use super::{PolyFunction, UniPoly};
use crate::error::{Error, Result};
use crate::linalg::{determinant, generalized_eigenvalues, independent_columns, submatrix, to_f64_matrix, RatMatrix};
use crate::scalar::{ratio_from_f64, ratio_to_f64};

/// Orthogonal polynomials for `nu_N` up to a given degree.
///
/// The monic polynomials `pi_n` and their squared norms `h_n` are kept exactly;
/// the orthonormal `phi_n = pi_n / sqrt(h_n)` is irrational in general and is
/// only produced in floating point.
#[derive(Debug, Clone)]
pub struct OrthoPolyBasis {
    n_particles: usize,
    monic: Vec<UniPoly>,
    norms: Vec<BigRational>,
}

impl OrthoPolyBasis {
    fn build(n: usize, max_degree: usize) -> Self {
        let mut monic: Vec<UniPoly> = Vec::with_capacity(max_degree + 1);
        let mut norms: Vec<BigRational> = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let mut p = UniPoly::monomial(d);
            for (q, h) in monic.iter().zip(&norms) {
                let c = UniPoly::monomial(d).nu_inner(q, n) / h;
                p = p.sub(&q.scale(&c));
            }
            let h = p.nu_inner(&p, n);
            monic.push(p);
            norms.push(h);
        }
        Self { n_particles: n, monic, norms }
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn max_degree(&self) -> usize {
        self.monic.len() - 1
    }

    /// Monic orthogonal polynomial `pi_n`.
    pub fn monic(&self, n: usize) -> &UniPoly {
        &self.monic[n]
    }

    /// `h_n = ||pi_n||^2` in `L^2(nu_N)`.
    pub fn norm_sq(&self, n: usize) -> &BigRational {
        &self.norms[n]
    }

    /// Coefficients of the orthonormal `phi_n` (positive leading coefficient).
    pub fn phi_coeffs(&self, n: usize) -> Vec<f64> {
        let s = ratio_to_f64(&self.norms[n]).sqrt();
        self.monic[n].to_f64().into_iter().map(|c| c / s).collect()
    }

    pub fn phi(&self, n: usize, x: f64) -> f64 {
        self.monic[n].eval_f64(x) / ratio_to_f64(&self.norms[n]).sqrt()
    }

    /// Closed-form eigenvalue `kappa_n = (-1)^n n! (N-2)! / (n+N-2)!` of `K`.
    pub fn kappa(&self, n: usize) -> BigRational {
        kappa_closed_form(self.n_particles, n)
    }
}

pub fn kappa_closed_form(n_particles: usize, n: usize) -> BigRational {
    let mut r = BigRational::one();
    for j in 1..=n {
        r = r * BigRational::new(BigInt::from(j), BigInt::from(j + n_particles - 2));
    }
    if n % 2 == 1 {
        -r
    } else {
        r
    }
}

type BasisCache = RwLock<HashMap<(usize, usize), Arc<OrthoPolyBasis>>>;

fn cache() -> &'static BasisCache {
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Exact Gram-Schmidt on `1, x, x^2, ...` under `nu_N`; cached per `(N, degree)`.
pub fn build_ortho_basis(n: usize, max_degree: usize) -> Result<Arc<OrthoPolyBasis>> {
    if n < 2 {
        return Err(Error::InvalidParam("orthogonal basis needs N >= 2".into()));
    }
    if max_degree < 1 {
        return Err(Error::InvalidParam("max_degree must be >= 1".into()));
    }
    if max_degree >= n.max(2) + 64 {
        return Err(Error::DegreeCap { degree: max_degree, cap: n + 63 });
    }
    if let Some(b) = cache().read().expect("basis cache poisoned").get(&(n, max_degree)) {
        return Ok(b.clone());
    }
    let b = Arc::new(OrthoPolyBasis::build(n, max_degree));
    cache()
        .write()
        .expect("basis cache poisoned")
        .entry((n, max_degree))
        .or_insert_with(|| b.clone());
    Ok(b)
}

#[derive(Debug, Clone, Serialize)]
pub struct KSpectrumReport {
    pub n_particles: usize,
    pub max_degree: usize,
    /// Eigenvalue measured from `K pi_n`, as `p/q`.
    pub measured: Vec<String>,
    pub measured_f64: Vec<f64>,
    pub eigenfunctions_exact: bool,
    pub matches_closed_form: bool,
    pub monotone: bool,
}

impl KSpectrumReport {
    pub fn passed(&self) -> bool {
        self.eigenfunctions_exact && self.matches_closed_form && self.monotone
    }
}

/// Applies `K` to every basis polynomial and checks `K pi_n = kappa_n pi_n` exactly.
pub fn verify_k_spectrum(n: usize, max_degree: usize) -> Result<KSpectrumReport> {
    let basis = build_ortho_basis(n, max_degree)?;
    let mut measured = Vec::new();
    let mut exact = true;
    let mut closed = true;
    for d in 0..=max_degree {
        let p = basis.monic(d);
        let kp = correlation_k(p, n)?;
        // pi_n is monic, so the eigenvalue is the leading coefficient of K pi_n
        let kappa = kp.coeff(d);
        exact &= kp == p.scale(&kappa);
        closed &= kappa == basis.kappa(d);
        measured.push(kappa);
    }
    let monotone = measured.windows(2).all(|w| w[1].abs() <= w[0].abs());
    Ok(KSpectrumReport {
        n_particles: n,
        max_degree,
        measured: measured.iter().map(|k| format!("{}/{}", k.numer(), k.denom())).collect(),
        measured_f64: measured.iter().map(ratio_to_f64).collect(),
        eigenfunctions_exact: exact,
        matches_closed_form: closed,
        monotone,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct P0Spectrum {
    pub n_particles: usize,
    pub max_degree: usize,
    /// Eigenvalues of `P^{(0)}` on `span{1, pi_n(eta_k)}`, largest first.
    pub eigenvalues: Vec<f64>,
    pub second: f64,
    pub expected_second: f64,
    pub branch_value: f64,
    pub branch_present: bool,
    /// `det(A - mu G) = 0` exactly for `mu = 1/N + 2/N^2`.
    pub expected_second_is_exact_eigenvalue: bool,
}

/// Second largest eigenvalue of `P^{(0)} = (1/N) sum_k P_k` on single-coordinate polynomials.
pub fn operator_p0_second_eigenvalue(n: usize, max_degree: usize) -> Result<P0Spectrum> {
    if n < 3 {
        return Err(Error::InvalidParam("P^(0) spectrum needs N >= 3".into()));
    }
    let basis = build_ortho_basis(n, max_degree)?;
    let mut funcs = vec![PolyFunction::one(n)];
    for k in 0..n {
        for d in 1..=max_degree {
            funcs.push(PolyFunction::from_univariate(n, k, basis.monic(d))?);
        }
    }
    let m = funcs.len();
    let proj: Vec<Vec<UniPoly>> = funcs
        .iter()
        .map(|f| (0..n).map(|k| pk_univariate(f, k)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let inv_n = BigRational::new(BigInt::one(), BigInt::from(n));
    let mut gram: RatMatrix = vec![vec![BigRational::zero(); m]; m];
    let mut form: RatMatrix = vec![vec![BigRational::zero(); m]; m];
    for a in 0..m {
        for b in a..m {
            let g = funcs[a].inner(&funcs[b]);
            let mut s = BigRational::zero();
            for k in 0..n {
                s += proj[a][k].nu_inner(&proj[b][k], n);
            }
            let s = s * &inv_n;
            gram[a][b] = g.clone();
            gram[b][a] = g;
            form[a][b] = s.clone();
            form[b][a] = s;
        }
    }
    let keep = independent_columns(&gram);
    let g = submatrix(&gram, &keep);
    let f = submatrix(&form, &keep);
    let mut eig = generalized_eigenvalues(&to_f64_matrix(&f), &to_f64_matrix(&g))?;
    eig.reverse();
    let nf = n as f64;
    let expected = 1.0 / nf + 2.0 / (nf * nf);
    let branch = 1.0 / nf + 1.0 / (nf * (nf - 1.0));
    let branch_present = eig.iter().any(|&e| (e - branch).abs() < 1e-10);
    let mu = BigRational::new(BigInt::from(n + 2), BigInt::from(n * n));
    let shifted: RatMatrix = f
        .iter()
        .zip(&g)
        .map(|(fr, gr)| fr.iter().zip(gr).map(|(x, y)| x - &mu * y).collect())
        .collect();
    let exact = determinant(&shifted).is_zero();
    let second = eig.get(1).copied().unwrap_or(f64::NAN);
    Ok(P0Spectrum {
        n_particles: n,
        max_degree,
        eigenvalues: eig,
        second,
        expected_second: expected,
        branch_value: branch,
        branch_present,
        expected_second_is_exact_eigenvalue: exact,
    })
}

/// Orthonormal `phi_n` evaluated in floating point, for external checks.
pub fn phi_value(n_particles: usize, degree: usize, x: f64) -> Result<f64> {
    Ok(build_ortho_basis(n_particles, degree.max(1))?.phi(degree, x))
}

/// Exact `<p, q>_{nu_N}` for floats given as dyadic rationals.
pub fn nu_inner_f64(n: usize, p: &[f64], q: &[f64]) -> Option<f64> {
    let to = |v: &[f64]| -> Option<UniPoly> {
        Some(UniPoly::new(v.iter().map(|&c| ratio_from_f64(c)).collect::<Option<Vec<_>>>()?))
    };
    Some(ratio_to_f64(&to(p)?.nu_inner(&to(q)?, n)))
}
