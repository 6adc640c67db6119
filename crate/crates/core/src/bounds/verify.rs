use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::{sample_uniform, ModelParams};
use crate::spectral::{big_w, minorant};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorantReport {
    pub gamma: f64,
    pub points: usize,
    /// Smallest `(1+x)^gamma - (1 + gamma x - (1-gamma) x^2)` seen.
    pub min_difference: f64,
    pub argmin: f64,
    /// Inflection point of the difference.
    pub x_star: f64,
    /// `m_N >= 0` on `[0, N]`, positive on `[0, N)`, for every tested `N`.
    pub positive_on_simplex: bool,
    pub passes: bool,
}

fn difference(gamma: f64, x: f64) -> f64 {
    (1.0 + x).powf(gamma) - (1.0 + gamma * x - (1.0 - gamma) * x * x)
}

/// Checks `(1+x)^gamma >= 1 + gamma x - (1-gamma) x^2` on `(-1, 1000]` and
/// the sign of the minorant `m_N` on `[0, N]` for `N = 3..=64`.
pub fn verify_minorant<R: Rng + ?Sized>(gamma: f64, samples: usize, rng: &mut R) -> Result<MinorantReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParam(format!("minorant check needs gamma in (0,1), got {gamma}")));
    }
    let x_star = (gamma / 2.0).powf(1.0 / (2.0 - gamma)) - 1.0;
    let mut xs: Vec<f64> = vec![-1.0, x_star, 0.0, 1.0, 1000.0];
    xs.extend((1..2000).map(|i| -1.0 + 2.0 * i as f64 / 2000.0));
    xs.extend((0..=200).map(|i| 10f64.powf(3.0 * i as f64 / 200.0)));
    xs.extend((0..samples).map(|_| {
        let u: f64 = rng.random();
        // half in (-1, 1], half log-spread up to 1000
        if rng.random::<bool>() {
            -1.0 + 2.0 * u
        } else {
            10f64.powf(3.0 * u)
        }
    }));
    let mut min_difference = f64::INFINITY;
    let mut argmin = 0.0;
    let mut ok = true;
    for &x in &xs {
        let d = difference(gamma, x);
        // rounding in the quadratic scales with x^2
        let slack = 8.0 * f64::EPSILON * (1.0 + x * x);
        if d < -slack {
            ok = false;
        }
        if d < min_difference {
            min_difference = d;
            argmin = x;
        }
    }
    let mut positive_on_simplex = true;
    for n in 3..=64usize {
        let nf = n as f64;
        for i in 0..=400 {
            let eta = nf * i as f64 / 400.0;
            let m = minorant(n, gamma, eta);
            let good = if i == 400 { m.abs() < 1e-12 } else { m > 0.0 };
            positive_on_simplex &= good;
        }
    }
    Ok(MinorantReport {
        gamma,
        points: xs.len(),
        min_difference,
        argmin,
        x_star,
        positive_on_simplex,
        passes: ok && positive_on_simplex,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightBoundReport {
    pub gamma: f64,
    pub n: usize,
    pub samples: usize,
    pub lower: f64,
    pub min_seen: f64,
    pub max_seen: f64,
    /// `W` at `(N, 0, ..., 0)` equals the lower bound.
    pub extreme_equality: bool,
    pub passes: bool,
    pub notes: Vec<String>,
}

/// Checks `((N-1)/N)^{1-gamma} <= W(eta) <= 1` on samples of the uniform
/// measure, the uniform point and the extreme point.
pub fn verify_weight_bounds<R: Rng + ?Sized>(gamma: f64, n: usize, samples: usize, rng: &mut R) -> Result<WeightBoundReport> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParam(format!("weight bounds need gamma in (0,1], got {gamma}")));
    }
    if n < 2 {
        return Err(Error::InvalidParam("need N >= 2".into()));
    }
    let nf = n as f64;
    let lower = ((nf - 1.0) / nf).powf(1.0 - gamma);
    let tol = 1e-12;
    let params = ModelParams::new(gamma, n, 1.0)?;
    let mut extreme = vec![0.0; n];
    extreme[0] = nf;
    let w_ext = big_w(&extreme, gamma);
    let w_flat = big_w(&vec![1.0; n], gamma);
    let (mut lo, mut hi) = (w_ext.min(w_flat), w_ext.max(w_flat));
    for _ in 0..samples {
        let w = big_w(sample_uniform(&params, rng).energies(), gamma);
        lo = lo.min(w);
        hi = hi.max(w);
    }
    let extreme_equality = (w_ext - lower).abs() < tol;
    let mut notes = Vec::new();
    if gamma == 1.0 {
        notes.push("W = 1 identically at gamma = 1".into());
    }
    Ok(WeightBoundReport {
        gamma,
        n,
        samples,
        lower,
        min_seen: lo,
        max_seen: hi,
        extreme_equality,
        passes: lo >= lower - tol && hi <= 1.0 + tol && extreme_equality && (w_flat - 1.0).abs() < tol,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::stream_rng;

    #[test]
    fn minorant_examples() {
        assert_eq!(difference(0.5, 0.0), 0.0);
        assert!(difference(0.5, -1.0).abs() < 1e-15);
        assert!((difference(0.5, 1.0) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        for g in [0.1, 0.5, 0.9] {
            let r = verify_minorant(g, 10_000, &mut stream_rng(1, 0)).unwrap();
            assert!(r.passes, "{r:?}");
            assert!(r.x_star > -1.0 && r.x_star < 0.0);
        }
        assert!(verify_minorant(1.0, 10, &mut stream_rng(1, 0)).is_err());
    }

    #[test]
    fn weight_examples() {
        let mut rng = stream_rng(2, 0);
        let r = verify_weight_bounds(0.5, 4, 1000, &mut rng).unwrap();
        assert!(r.passes);
        assert!((r.lower - 0.75f64.sqrt()).abs() < 1e-15);
        let r = verify_weight_bounds(1.0, 5, 1000, &mut rng).unwrap();
        assert!(r.passes && (r.min_seen - 1.0).abs() < 1e-12);
    }
}
