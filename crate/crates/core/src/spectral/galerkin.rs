use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;

use super::assembly::{exact_capable, exact_cost, form_matrix, gram_matrix, FormKind};
use super::basis::{invariant_basis, symmetric_basis, TrialBasis};
use super::report::{Method, SpectralReport};
use crate::error::{Error, Result};
use crate::linalg::{classify_symmetric, generalized_eigen, to_f64_matrix, RatMatrix};
use crate::scalar::{int, rat, ratio_to_f64};
use crate::simplex::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arithmetic {
    /// Exact when the weights allow it and the system is small enough.
    #[default]
    Auto,
    Exact,
    Float,
}

/// Above this many coefficient products the automatic mode switches to `f64`.
const EXACT_BUDGET: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GalerkinOptions {
    pub degree: usize,
    /// Restrict to fully symmetric trial functions.
    pub symmetrize: bool,
    pub arithmetic: Arithmetic,
}

impl GalerkinOptions {
    pub fn new(degree: usize) -> Self {
        Self { degree, symmetrize: false, arithmetic: Arithmetic::Auto }
    }
}

/// Form and Gram matrices of a trial basis, exact when assembled exactly.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub basis: TrialBasis,
    pub kind: FormKind,
    pub gamma: f64,
    pub form_matrix: DMatrix<f64>,
    pub gram_matrix: DMatrix<f64>,
    pub exact: Option<(RatMatrix, RatMatrix)>,
}

impl GalerkinSystem {
    pub fn assemble(basis: TrialBasis, kind: FormKind, gamma: f64, arithmetic: Arithmetic) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParam(format!("gamma must lie in [0,1], got {gamma}")));
        }
        if basis.is_empty() {
            return Err(Error::InvalidParam("empty trial basis".into()));
        }
        let exact = match arithmetic {
            Arithmetic::Exact => {
                if !exact_capable(kind, gamma) {
                    return Err(Error::InvalidParam(format!("no exact moments for gamma = {gamma}")));
                }
                true
            }
            Arithmetic::Float => false,
            Arithmetic::Auto => exact_capable(kind, gamma) && exact_cost(&basis) <= EXACT_BUDGET,
        };
        if exact {
            let a: RatMatrix = form_matrix::<BigRational>(&basis, kind, gamma)?;
            let g: RatMatrix = gram_matrix::<BigRational>(&basis)?;
            let d = classify_symmetric(&g);
            if !d.positive_semidefinite || d.rank < g.len() {
                return Err(Error::NotPositiveDefinite);
            }
            Ok(Self {
                form_matrix: to_f64_matrix(&a),
                gram_matrix: to_f64_matrix(&g),
                exact: Some((a, g)),
                basis,
                kind,
                gamma,
            })
        } else {
            let a = form_matrix::<f64>(&basis, kind, gamma)?;
            let g = gram_matrix::<f64>(&basis)?;
            let m = a.len();
            Ok(Self {
                form_matrix: DMatrix::from_fn(m, m, |i, j| a[i][j]),
                gram_matrix: DMatrix::from_fn(m, m, |i, j| g[i][j]),
                exact: None,
                basis,
                kind,
                gamma,
            })
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let sym = |m: &DMatrix<f64>| (m - m.transpose()).amax() <= tol * m.amax().max(1.0);
        sym(&self.form_matrix) && sym(&self.gram_matrix)
    }

    /// Generalized eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(generalized_eigen(&self.form_matrix, &self.gram_matrix)?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.eigenvalues()?
            .first()
            .copied()
            .ok_or_else(|| Error::EigenSolver("no eigenvalues".into()))
    }

    /// Exact test that `lambda` is the smallest generalized eigenvalue:
    /// `A - lambda G` is positive semidefinite and singular.
    pub fn certify_min(&self, lambda: &BigRational) -> Option<bool> {
        let (a, g) = self.exact.as_ref()?;
        let shifted: RatMatrix = a
            .iter()
            .zip(g)
            .map(|(ra, rg)| ra.iter().zip(rg).map(|(x, y)| x - lambda * y).collect())
            .collect();
        let d = classify_symmetric(&shifted);
        Some(d.positive_semidefinite && d.rank < shifted.len())
    }

    /// Exact `lambda` with `A - lambda G` positive semidefinite, i.e. a value
    /// not above the smallest eigenvalue.
    pub fn certify_lower(&self, lambda: &BigRational) -> Option<bool> {
        let (a, g) = self.exact.as_ref()?;
        let shifted: RatMatrix = a
            .iter()
            .zip(g)
            .map(|(ra, rg)| ra.iter().zip(rg).map(|(x, y)| x - lambda * y).collect())
            .collect();
        Some(classify_symmetric(&shifted).positive_semidefinite)
    }
}

fn quantity(kind: FormKind) -> &'static str {
    match kind {
        FormKind::Dirichlet => "delta",
        FormKind::G => "gamma",
        FormKind::GTilde => "gamma-tilde",
    }
}

/// Closed-form values known for the gaps at `gamma` in `{0, 1}` and `N = 2`.
pub fn closed_form_candidate(kind: FormKind, gamma: f64, n: usize, degree: usize) -> Option<BigRational> {
    let ni = n as i64;
    match kind {
        FormKind::Dirichlet if n == 2 && gamma == 0.0 => Some(int(2)),
        FormKind::Dirichlet if n == 2 && gamma == 1.0 => Some(int(4)),
        FormKind::Dirichlet if gamma == 0.0 && degree >= 2 => Some(rat(2 * (ni + 1), 3 * (ni - 1))),
        FormKind::G | FormKind::GTilde if gamma == 0.0 && degree >= 2 && n >= 3 => {
            Some(rat(ni * ni - ni - 2, ni * ni))
        }
        _ => None,
    }
}

/// Smallest Galerkin eigenvalue of the chosen form; an upper bound on its gap.
pub fn galerkin_gap(params: &ModelParams, kind: FormKind, opts: &GalerkinOptions) -> Result<SpectralReport> {
    params.validate()?;
    let n = params.n_particles;
    let e = if kind == FormKind::Dirichlet { params.mean_energy } else { 1.0 };
    if kind != FormKind::Dirichlet && (params.mean_energy - 1.0).abs() > 0.0 {
        return Err(Error::InvalidParam("G forms are defined at mean energy 1".into()));
    }
    let basis = if opts.symmetrize {
        symmetric_basis(n, opts.degree, e)?
    } else {
        invariant_basis(n, opts.degree, e)?
    };
    if basis.is_empty() {
        return Err(Error::InvalidParam("no symmetric trial functions at this degree".into()));
    }
    let sys = GalerkinSystem::assemble(basis, kind, params.gamma, opts.arithmetic)?;
    let value = sys.min_eigenvalue()?;
    let method = if sys.is_exact() { Method::GalerkinExact } else { Method::GalerkinQuadrature };
    let mut r = SpectralReport::new(params.gamma, n, e, method, quantity(kind), value);
    r.degree = Some(opts.degree);
    r.dof = Some(sys.dim());
    r.upper = Some(value);
    if opts.symmetrize {
        r.notes.push("symmetric sector only".into());
    } else {
        r.notes.push("variational upper bound over all polynomials of this degree".into());
    }
    if e == 1.0 {
        if let Some(c) = closed_form_candidate(kind, params.gamma, n, opts.degree) {
            if sys.certify_min(&c) == Some(true) {
                r.exact = Some(format!("{}/{}", c.numer(), c.denom()));
                r.notes.push("minimum certified exactly".into());
            }
        }
    }
    Ok(r)
}

pub fn galerkin_gap_delta(params: &ModelParams, max_degree: usize, symmetrize: bool) -> Result<SpectralReport> {
    let opts = GalerkinOptions { degree: max_degree, symmetrize, arithmetic: Arithmetic::Auto };
    galerkin_gap(params, FormKind::Dirichlet, &opts)
}

pub fn galerkin_gap_gamma(params: &ModelParams, max_degree: usize) -> Result<SpectralReport> {
    galerkin_gap(params, FormKind::G, &GalerkinOptions::new(max_degree))
}

pub fn galerkin_gap_gamma_tilde(params: &ModelParams, max_degree: usize) -> Result<SpectralReport> {
    galerkin_gap(params, FormKind::GTilde, &GalerkinOptions::new(max_degree))
}

/// Galerkin values for degrees `1..=max_degree`, with a note on each row
/// recording whether the sequence is still non-increasing.
pub fn degree_sweep(params: &ModelParams, kind: FormKind, max_degree: usize, symmetrize: bool) -> Result<Vec<SpectralReport>> {
    let mut out: Vec<SpectralReport> = Vec::new();
    for d in 1..=max_degree {
        let opts = GalerkinOptions { degree: d, symmetrize, arithmetic: Arithmetic::Auto };
        let mut r = match galerkin_gap(params, kind, &opts) {
            Ok(r) => r,
            Err(Error::InvalidParam(msg)) if symmetrize && msg.contains("no symmetric") => continue,
            Err(e) => return Err(e),
        };
        if let Some(prev) = out.last() {
            let ok = r.value <= prev.value + 1e-10 * prev.value.abs().max(1.0);
            r.notes.push(format!("monotone in degree: {ok}"));
        }
        out.push(r);
    }
    Ok(out)
}

/// Value check helper: the exact rational of a report, if any.
pub fn report_exact(r: &SpectralReport) -> Option<BigRational> {
    let s = r.exact.as_ref()?;
    let (p, q) = s.split_once('/')?;
    let v = BigRational::new(p.parse().ok()?, q.parse().ok()?);
    (!v.is_zero() || ratio_to_f64(&v) == 0.0).then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, n: usize) -> ModelParams {
        ModelParams::new(g, n, 1.0).unwrap()
    }

    #[test]
    fn two_particles() {
        for g in [0.0, 0.25, 0.5, 1.0] {
            let r = galerkin_gap_delta(&p(g, 2), 1, false).unwrap();
            assert!((r.value - 2f64.powf(g + 1.0)).abs() < 1e-10, "{g}: {}", r.value);
        }
        assert_eq!(galerkin_gap_delta(&p(1.0, 2), 1, false).unwrap().exact.as_deref(), Some("4/1"));
    }

    #[test]
    fn flat_gap_small() {
        for n in 3..6 {
            let r = galerkin_gap_delta(&p(0.0, n), 2, false).unwrap();
            let want = 2.0 * (n as f64 + 1.0) / (3.0 * (n as f64 - 1.0));
            assert!((r.value - want).abs() < 1e-10, "N={n}: {} vs {want}", r.value);
            assert!(r.exact.is_some());
        }
    }

    #[test]
    fn gamma_form_flat() {
        let r = galerkin_gap_gamma(&p(0.0, 4), 2).unwrap();
        assert!((r.value - 0.625).abs() < 1e-10);
        assert_eq!(r.exact.as_deref(), Some("5/8"));
    }

    #[test]
    fn float_and_exact_agree() {
        let b = invariant_basis(4, 2, 1.0).unwrap();
        let ex = GalerkinSystem::assemble(b.clone(), FormKind::Dirichlet, 1.0, Arithmetic::Exact).unwrap();
        let fl = GalerkinSystem::assemble(b, FormKind::Dirichlet, 1.0, Arithmetic::Float).unwrap();
        assert!((ex.min_eigenvalue().unwrap() - fl.min_eigenvalue().unwrap()).abs() < 1e-10);
        assert!(ex.is_symmetric(1e-12) && fl.is_symmetric(1e-12));
    }
}
