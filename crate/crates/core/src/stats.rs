//! Small statistical helpers: means with standard errors, batch means and the
//! two-sample Kolmogorov-Smirnov test.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_iid(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_err: f64::NAN, samples: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self { mean, std_err: (var / n as f64).sqrt(), samples: n }
    }

    /// Mean of a weighted, correlated series; the error bar comes from
    /// `batches` contiguous batches of equal total weight.
    pub fn batch_means(values: &[f64], weights: &[f64], batches: usize) -> Self {
        let total: f64 = weights.iter().sum();
        let batches = batches.max(2);
        let mut sums = vec![0.0; batches];
        let mut wts = vec![0.0; batches];
        let mut acc = 0.0;
        for (&v, &w) in values.iter().zip(weights) {
            let b = (((acc + 0.5 * w) / total) * batches as f64) as usize;
            let b = b.min(batches - 1);
            sums[b] += v * w;
            wts[b] += w;
            acc += w;
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&wts)
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, w)| s / w)
            .collect();
        let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
        let k = means.len();
        let var = if k > 1 {
            means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1) as f64
        } else {
            f64::INFINITY
        };
        Self { mean, std_err: (var / k as f64).sqrt(), samples: values.len() }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_err
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    KsResult { statistic: d, p_value: kolmogorov_survival(lambda) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 200.0).collect();
        let r = ks_two_sample(&a, &b);
        assert!((r.statistic - 0.2).abs() < 1e-9);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // K(1.36) ~ 0.95, K(1.63) ~ 0.99
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn batch_means_of_constant() {
        let v = vec![2.0; 100];
        let w = vec![0.5; 100];
        let m = MeanEstimate::batch_means(&v, &w, 10);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std_err, 0.0);
    }
}
