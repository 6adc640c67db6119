use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use super::{Configuration, MarginalLaw, ModelParams};
use crate::error::{Error, Result};

pub type SimRng = ChaCha8Rng;

/// Independent generator for `stream` under a common seed.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normalized(mut v: Vec<f64>, n: usize, mean_energy: f64) -> Configuration {
    let total = n as f64 * mean_energy;
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x *= total / s);
    Configuration { energies: v, mean_energy }
}

/// Draws from the uniform measure on `S_{N,E}` by normalizing i.i.d. exponentials.
pub fn sample_uniform<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Configuration {
    let n = params.n_particles;
    let v: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    normalized(v, n, params.mean_energy)
}

/// Draws from the Gamma(`alpha`, 1) product measure conditioned on `sum = N E`.
pub fn sample_gamma_dirichlet<R: Rng + ?Sized>(
    alpha: f64,
    params: &ModelParams,
    rng: &mut R,
) -> Result<Configuration> {
    let g = Gamma::new(alpha, 1.0)
        .map_err(|e| Error::InvalidParam(format!("alpha = {alpha}: {e}")))?;
    let n = params.n_particles;
    let v: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    Ok(normalized(v, n, params.mean_energy))
}

/// Draws one coordinate from `nu_N` (scaled Beta(1, N-1) on `[0, N]`).
pub fn sample_marginal<R: Rng + ?Sized>(law: &MarginalLaw, rng: &mut R) -> f64 {
    let n = law.n_particles as f64;
    let u: f64 = rng.random();
    n * (1.0 - (1.0 - u).powf(1.0 / (n - 1.0)))
}

/// `T_N(eta, xi) = ((N-eta)/(N-1) xi_1, ..., (N-eta)/(N-1) xi_{N-1}, eta)`.
pub fn slice_map(eta: f64, xi: &Configuration) -> Result<Configuration> {
    let m = xi.n();
    let n = (m + 1) as f64;
    if (xi.mean_energy() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParam("slice_map needs xi at mean energy 1".into()));
    }
    if !(0.0..=n).contains(&eta) {
        return Err(Error::Domain { value: eta, lo: 0.0, hi: n });
    }
    let f = (n - eta) / (n - 1.0);
    let mut v: Vec<f64> = xi.energies().iter().map(|x| f * x).collect();
    v.push(eta);
    Ok(Configuration { energies: v, mean_energy: 1.0 })
}

/// `S_t(eta) = eta / t`; the mean energy becomes `E / t`.
pub fn rescale(config: &Configuration, t: f64) -> Result<Configuration> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParam(format!("scale factor must be positive, got {t}")));
    }
    Ok(Configuration {
        energies: config.energies().iter().map(|x| x / t).collect(),
        mean_energy: config.mean_energy() / t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_two_sample, MeanEstimate};

    fn params(n: usize, e: f64) -> ModelParams {
        ModelParams::new(0.0, n, e).unwrap()
    }

    #[test]
    fn uniform_sample_is_on_simplex() {
        let p = params(7, 2.5);
        let mut rng = stream_rng(1, 0);
        for _ in 0..1000 {
            let c = sample_uniform(&p, &mut rng);
            let s: f64 = c.energies().iter().sum();
            assert!((s - 17.5).abs() < 1e-12);
            assert!(c.energies().iter().all(|&x| x >= 0.0));
            assert!(Configuration::new(c.energies().to_vec(), 2.5).is_ok());
        }
    }

    #[test]
    fn slice_map_examples() {
        let ones = Configuration::uniform_point(4, 1.0).unwrap();
        let c = slice_map(1.0, &ones).unwrap();
        assert!(c.energies().iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let c = slice_map(5.0, &ones).unwrap();
        assert_eq!(c.energies(), &[0.0, 0.0, 0.0, 0.0, 5.0]);
        let xi = Configuration::new(vec![0.4, 1.6], 1.0).unwrap();
        let c = slice_map(0.6, &xi).unwrap();
        for (a, b) in c.energies().iter().zip([0.48, 1.92, 0.6]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(slice_map(3.1, &xi).is_err());
    }

    #[test]
    fn rescale_examples() {
        let c = Configuration::new(vec![0.5, 1.5], 1.0).unwrap();
        assert_eq!(rescale(&c, 1.0).unwrap(), c);
        let r = rescale(&c, 0.5).unwrap();
        assert_eq!(r.mean_energy(), 2.0);
        assert_eq!(r.energies(), &[1.0, 3.0]);
        assert!(rescale(&c, 0.0).is_err());
    }

    #[test]
    fn marginal_sampler_mean() {
        let law = MarginalLaw::new(5).unwrap();
        let mut rng = stream_rng(3, 0);
        let xs: Vec<f64> = (0..200_000).map(|_| sample_marginal(&law, &mut rng)).collect();
        let m = MeanEstimate::from_iid(&xs);
        assert!((m.mean - 1.0).abs() < 3.0 * m.std_err);
    }

    #[test]
    fn gamma_alpha_one_matches_uniform() {
        let p = params(4, 1.0);
        let mut r1 = stream_rng(5, 0);
        let mut r2 = stream_rng(5, 1);
        let a: Vec<f64> = (0..20_000).map(|_| sample_uniform(&p, &mut r1).energies()[0]).collect();
        let b: Vec<f64> = (0..20_000)
            .map(|_| sample_gamma_dirichlet(1.0, &p, &mut r2).unwrap().energies()[0])
            .collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.01);
        assert!(sample_gamma_dirichlet(0.0, &p, &mut r2).is_err());
    }
}
