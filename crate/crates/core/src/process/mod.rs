//! The continuous-time exchange jump process: collisions, rates, Gillespie
//! simulation and trajectory-based estimators.

mod autocorr;
mod trajectory;

pub use autocorr::{autocorrelation_gap, sample_on_grid, AutocorrelationConfig};
pub use trajectory::{CollisionEvent, Trajectory, RENORMALIZE_EVERY};

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::simplex::{Configuration, ModelParams};

/// Repartitions `eta_i + eta_j` as `((1 - alpha) s, alpha s)` in place.
pub(crate) fn apply_collision(energies: &mut [f64], i: usize, j: usize, alpha: f64) {
    let s = energies[i] + energies[j];
    let ei = (1.0 - alpha) * s;
    energies[i] = ei;
    energies[j] = s - ei;
}

/// Post-collision configuration: the pair total is redistributed with a
/// fraction `1 - alpha` going to `i` and `alpha` to `j`.
pub fn collide(config: &Configuration, i: usize, j: usize, alpha: f64) -> Result<Configuration> {
    let n = config.n();
    if i >= n || j >= n {
        return Err(Error::Index { index: i.max(j), n });
    }
    if i == j {
        return Err(Error::InvalidParam("a collision needs two distinct particles".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain { value: alpha, lo: 0.0, hi: 1.0 });
    }
    let mut out = config.clone();
    apply_collision(out.energies_mut(), i, j, alpha);
    Ok(out)
}

/// `lambda_{ij} = N / C(N,2) (eta_i + eta_j)^gamma` for `i < j`, in lexicographic order.
pub fn pair_rates(energies: &[f64], gamma: f64, out: &mut Vec<f64>) {
    let n = energies.len();
    let c = n as f64 / (n * (n - 1) / 2) as f64;
    out.clear();
    for i in 0..n {
        for j in i + 1..n {
            let s = energies[i] + energies[j];
            out.push(if gamma == 0.0 { c } else { c * s.powf(gamma) });
        }
    }
}

/// Total jump rate `Lambda(eta) = sum_{i<j} lambda_{ij}`.
pub fn total_rate(config: &Configuration, gamma: f64) -> f64 {
    let mut r = Vec::new();
    pair_rates(config.energies(), gamma, &mut r);
    r.iter().sum()
}

fn pair_of(index: usize, n: usize) -> (usize, usize) {
    let mut k = index;
    for i in 0..n {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair index out of range")
}

/// Gillespie simulation up to `t_end`; the trajectory keeps every event before `t_end`.
pub fn simulate<R: Rng + ?Sized>(
    params: &ModelParams,
    initial: &Configuration,
    t_end: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    params.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParam(format!("t_end must be positive, got {t_end}")));
    }
    if initial.n() != params.n_particles {
        return Err(Error::DimensionMismatch(initial.n(), params.n_particles));
    }
    let n = initial.n();
    let mut state = initial.clone();
    let mut rates = Vec::with_capacity(n * (n - 1) / 2);
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        pair_rates(state.energies(), params.gamma, &mut rates);
        let total: f64 = rates.iter().sum();
        let wait: f64 = Exp1.sample(rng);
        t += wait / total;
        if t >= t_end {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = rates.len() - 1;
        for (k, r) in rates.iter().enumerate() {
            acc += r;
            if target < acc {
                pick = k;
                break;
            }
        }
        // skip zero-rate pairs that rounding might land on
        while rates[pick] == 0.0 && pick > 0 {
            pick -= 1;
        }
        let (i, j) = pair_of(pick, n);
        let alpha: f64 = rng.random();
        apply_collision(state.energies_mut(), i, j, alpha);
        events.push(CollisionEvent { time: t, i, j, alpha });
        if events.len() % RENORMALIZE_EVERY == 0 {
            state.renormalize();
        }
    }
    Ok(Trajectory::new(params.clone(), initial.clone(), events, t_end))
}
