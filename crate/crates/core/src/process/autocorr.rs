use rand::Rng;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::simplex::stream_rng;
use crate::spectral::{Method, SpectralReport};

#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrelationConfig {
    /// Sampling step; lags are `k * dt` for `k = 0..=max_lag`.
    pub dt: f64,
    pub max_lag: usize,
    /// Initial stretch of every trajectory that is discarded.
    pub burn_in: f64,
    pub bootstrap: usize,
    /// Block length (in samples) for the block bootstrap.
    pub block_len: usize,
    /// Correlations below this level are treated as noise.
    pub floor: f64,
    pub min_samples: usize,
    pub seed: u64,
}

impl Default for AutocorrelationConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            max_lag: 40,
            burn_in: 0.0,
            bootstrap: 200,
            block_len: 400,
            floor: 0.05,
            min_samples: 2_000,
            seed: 0,
        }
    }
}

/// Values of `observable` along the piecewise-constant path at `burn_in + k dt`.
pub fn sample_on_grid(traj: &Trajectory, observable: &dyn Fn(&[f64]) -> f64, dt: f64, burn_in: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    let at = |k: u64| burn_in + k as f64 * dt;
    traj.for_each_interval(|a, b, s| {
        if at(k) < a {
            return;
        }
        let v = observable(s);
        while at(k) >= a && at(k) < b {
            out.push(v);
            k += 1;
        }
    });
    out
}

/// Lagged products and pair counts of one block, about the given mean.
fn lag_sums(x: &[f64], mean: f64, max_lag: usize) -> (Vec<f64>, Vec<f64>) {
    let mut sums = vec![0.0; max_lag + 1];
    let mut counts = vec![0.0; max_lag + 1];
    for k in 0..=max_lag.min(x.len().saturating_sub(1)) {
        let mut s = 0.0;
        for t in 0..x.len() - k {
            s += (x[t] - mean) * (x[t + k] - mean);
        }
        sums[k] = s;
        counts[k] = (x.len() - k) as f64;
    }
    (sums, counts)
}

fn correlations(parts: &[(Vec<f64>, Vec<f64>)], max_lag: usize) -> Vec<f64> {
    let mut c = vec![0.0; max_lag + 1];
    let mut n = vec![0.0; max_lag + 1];
    for (s, k) in parts {
        for l in 0..=max_lag {
            c[l] += s[l];
            n[l] += k[l];
        }
    }
    let c0 = c[0] / n[0];
    (0..=max_lag).map(|l| if n[l] > 0.0 { c[l] / n[l] / c0 } else { f64::NAN }).collect()
}

/// Least-squares slope of `ln rho` against lag over `lo..=hi`.
fn fit_rate(rho: &[f64], dt: f64, lo: usize, hi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&k| rho[k] > 0.0)
        .map(|k| (k as f64 * dt, rho[k].ln()))
        .collect();
    if pts.len() < 2 || pts.len() < hi - lo + 1 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Fit window: lags above the noise floor, trimmed to the stretch where the
/// local slope stays within 25% of its median.
fn plateau(rho: &[f64], dt: f64, floor: f64) -> Option<(usize, usize)> {
    let mut last = 0;
    while last + 1 < rho.len() && rho[last + 1] > floor {
        last += 1;
    }
    if last < 2 {
        return if last == 1 { Some((0, 1)) } else { None };
    }
    let slopes: Vec<f64> = (0..last).map(|k| -(rho[k + 1].ln() - rho[k].ln()) / dt).collect();
    let mut sorted = slopes.clone();
    sorted.sort_by(f64::total_cmp);
    let med = sorted[sorted.len() / 2];
    let ok: Vec<bool> = slopes.iter().map(|s| (s - med).abs() <= 0.25 * med.abs()).collect();
    // longest run of consistent local slopes
    let (mut best, mut cur) = ((0, 0, 0usize), (0, 0usize));
    for (k, &good) in ok.iter().enumerate() {
        if good {
            if cur.1 == 0 {
                cur.0 = k;
            }
            cur.1 += 1;
            if cur.1 > best.2 {
                best = (cur.0, k + 1, cur.1);
            }
        } else {
            cur.1 = 0;
        }
    }
    if best.2 == 0 {
        Some((0, last))
    } else {
        Some((best.0, best.1))
    }
}

/// Decay rate of the equilibrium autocorrelation of `observable`, fitted on a
/// log scale, with a block-bootstrap percentile interval.
///
/// This measures how fast this particular observable decorrelates. It matches
/// the gap only when the observable overlaps the slowest mode.
pub fn autocorrelation_gap(
    trajectories: &[Trajectory],
    observable: &dyn Fn(&[f64]) -> f64,
    config: &AutocorrelationConfig,
) -> Result<SpectralReport> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InsufficientData("no trajectories".into()))?;
    let params = first.params().clone();
    let series: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|t| sample_on_grid(t, observable, config.dt, config.burn_in))
        .collect();
    let total: usize = series.iter().map(Vec::len).sum();
    if total < config.min_samples.max(10 * config.max_lag) {
        return Err(Error::InsufficientData(format!(
            "{total} grid samples, need at least {}",
            config.min_samples.max(10 * config.max_lag)
        )));
    }
    let mean = series.iter().flatten().sum::<f64>() / total as f64;
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = series
        .iter()
        .flat_map(|s| s.chunks(config.block_len.max(config.max_lag + 2)))
        .filter(|b| b.len() > config.max_lag)
        .map(|b| lag_sums(b, mean, config.max_lag))
        .collect();
    let whole: Vec<(Vec<f64>, Vec<f64>)> = series.iter().map(|s| lag_sums(s, mean, config.max_lag)).collect();
    let rho = correlations(&whole, config.max_lag);
    let (lo, hi) = plateau(&rho, config.dt, config.floor)
        .ok_or_else(|| Error::InsufficientData("autocorrelation drops below the noise floor at the first lag".into()))?;
    let rate = fit_rate(&rho, config.dt, lo, hi)
        .ok_or_else(|| Error::InsufficientData("fit window too short".into()))?;

    let mut rng = stream_rng(config.seed, 0);
    let mut reps = Vec::with_capacity(config.bootstrap);
    if blocks.len() >= 2 {
        for _ in 0..config.bootstrap {
            let pick: Vec<(Vec<f64>, Vec<f64>)> =
                (0..blocks.len()).map(|_| blocks[rng.random_range(0..blocks.len())].clone()).collect();
            if let Some(r) = fit_rate(&correlations(&pick, config.max_lag), config.dt, lo, hi) {
                reps.push(r);
            }
        }
    }
    reps.sort_by(f64::total_cmp);
    let q = |p: f64| reps[((reps.len() - 1) as f64 * p).round() as usize];
    let mut report = SpectralReport::new(
        params.gamma,
        params.n_particles,
        params.mean_energy,
        Method::Autocorrelation,
        "decay-rate",
        rate,
    );
    if reps.len() >= 20 {
        report.lower = Some(q(0.025).min(rate));
        report.upper = Some(q(0.975).max(rate));
    }
    report.dof = Some(total);
    report.notes.push(format!(
        "heuristic decay rate of the observable; fit window lags {:.4}..{:.4}",
        lo as f64 * config.dt,
        hi as f64 * config.dt
    ));
    report.notes.push(format!("block bootstrap: {} replicates, block length {}", reps.len(), config.block_len));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_of_pure_exponential() {
        let rho: Vec<f64> = (0..30).map(|k| (-2.0 * 0.05 * k as f64).exp()).collect();
        let (lo, hi) = plateau(&rho, 0.05, 0.05).unwrap();
        assert!(hi > lo);
        let r = fit_rate(&rho, 0.05, lo, hi).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn grid_sampling_of_static_path() {
        let p = crate::simplex::ModelParams::new(0.0, 2, 1.0).unwrap();
        let init = crate::simplex::Configuration::new(vec![0.5, 1.5], 1.0).unwrap();
        let tr = Trajectory::new(p, init, Vec::new(), 1.0);
        let v = sample_on_grid(&tr, &|s: &[f64]| s[0], 0.1, 0.0);
        assert_eq!(v.len(), 10);
        assert!(v.iter().all(|&x| x == 0.5));
    }
}
