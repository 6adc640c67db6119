//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use xchg_core::bounds::{
    best_gamma_lower, delta0_exact, delta_chain, verify_minorant, verify_weight_bounds, GammaSource,
};
use xchg_core::poly::{operator_p0_second_eigenvalue, verify_k_spectrum};
use xchg_core::process::{autocorrelation_gap, simulate, AutocorrelationConfig};
use xchg_core::simplex::{
    conditional_moment, rescale, sample_gamma_dirichlet, sample_marginal, sample_uniform, slice_map, stream_rng,
    ConditionalOrder,
};
use xchg_core::spectral::{
    galerkin_gap_delta, galerkin_gap_gamma, galerkin_gap_gamma_tilde, report_exact, verify_decomposition_lemmas,
    LemmaConfig,
};
use xchg_core::stats::{ks_two_sample, MeanEstimate};
use xchg_core::{Configuration, DirichletMomentOracle, MarginalLaw, ModelParams};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(gamma: f64, n: usize, e: f64) -> ModelParams {
    ModelParams::new(gamma, n, e).unwrap()
}

fn big(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Flat Dirichlet moment written out with factorials, independent of the oracle.
fn flat_moment_by_hand(n: usize, e: f64, a: &[u32]) -> f64 {
    let s: u32 = a.iter().sum();
    let nf = n as f64;
    (nf * e).powi(s as i32) * factorial(n as u32 - 1) * a.iter().map(|&k| factorial(k)).product::<f64>()
        / factorial(n as u32 - 1 + s)
}

fn two_particle_gap() -> Outcome {
    for g in [0.0, 0.25, 0.5, 1.0] {
        let r = galerkin_gap_delta(&params(g, 2, 1.0), 1, false).map_err(|e| e.to_string())?;
        let want = 2f64.powf(g + 1.0);
        ensure((r.value - want).abs() < 1e-10, || format!("gamma {g}: {} vs {want}", r.value))?;
        if g == 0.0 || g == 1.0 {
            let exact = report_exact(&r);
            let want = big(want as i64, 1);
            ensure(exact.as_ref() == Some(&want), || format!("gamma {g}: exact value {exact:?}"))?;
        }
    }
    Ok("2^(gamma+1) at gamma 0, 0.25, 0.5, 1; exact at 0 and 1".into())
}

fn flat_gap() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=8usize {
        let want = 2.0 * (n as f64 + 1.0) / (3.0 * (n as f64 - 1.0));
        for d in 2..=3 {
            let r = galerkin_gap_delta(&params(0.0, n, 1.0), d, false).map_err(|e| e.to_string())?;
            worst = worst.max((r.value - want).abs());
            ensure((r.value - want).abs() < 1e-8, || format!("N={n} degree {d}: {} vs {want}", r.value))?;
        }
    }
    for n in 3..=20i64 {
        let got = delta0_exact(n as usize).map_err(|e| e.to_string())?;
        let want = big(2 * (n + 1), 3 * (n - 1));
        ensure(got == want, || format!("chain at N={n}: {got} vs {want}"))?;
    }
    Ok(format!("Galerkin N=3..8 max error {worst:.1e}; chain exact for N<=20"))
}

fn k_spectrum() -> Outcome {
    for n in 3..=12usize {
        let r = verify_k_spectrum(n, 8).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("N={n}: {r:?}"))?;
        for (k, &m) in r.measured_f64.iter().enumerate() {
            let k32 = k as u32;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let want = sign * factorial(k32) * factorial(n as u32 - 2) / factorial(k32 + n as u32 - 2);
            ensure((m - want).abs() < 1e-14, || format!("N={n} n={k}: {m} vs {want}"))?;
        }
    }
    Ok("exact eigen-relations for N=3..12, n<=8; monotone |kappa|".into())
}

fn p0_spectrum() -> Outcome {
    for n in 3..=10usize {
        let s = operator_p0_second_eigenvalue(n, 3).map_err(|e| e.to_string())?;
        let nf = n as f64;
        let want = 1.0 / nf + 2.0 / (nf * nf);
        let branch = 1.0 / nf + 1.0 / (nf * (nf - 1.0));
        ensure((s.second - want).abs() < 1e-10, || format!("N={n}: second {} vs {want}", s.second))?;
        ensure(s.eigenvalues.iter().any(|&e| (e - branch).abs() < 1e-10), || {
            format!("N={n}: branch {branch} missing from {:?}", s.eigenvalues)
        })?;
        ensure(s.expected_second_is_exact_eigenvalue, || format!("N={n}: determinant not exactly zero"))?;
    }
    Ok("1/N + 2/N^2 second, branch present, N=3..10".into())
}

const SLICE_SAMPLES: usize = 1_000_000;

/// Draws `eta_N = eta` (and `eta_{N-1} = xi` when given) by composing slice maps.
fn conditioned_sample<R: Rng>(n: usize, eta: f64, xi: Option<f64>, rng: &mut R) -> Configuration {
    match xi {
        None => {
            let inner = sample_uniform(&params(0.0, n - 1, 1.0), rng);
            slice_map(eta, &inner).unwrap()
        }
        Some(xi) => {
            // the inner slice value that lands on xi after scaling by (N - eta)/(N - 1)
            let z = xi * (n as f64 - 1.0) / (n as f64 - eta);
            let mid = if n - 2 >= 2 {
                slice_map(z, &sample_uniform(&params(0.0, n - 2, 1.0), rng)).unwrap()
            } else {
                Configuration::new(vec![n as f64 - 1.0 - z, z], 1.0).unwrap()
            };
            slice_map(eta, &mid).unwrap()
        }
    }
}

fn conditional_moments() -> Outcome {
    let mut rng = stream_rng(501, 0);
    let mut checked = 0;
    let mut worst_z: f64 = 0.0;
    for n in [3usize, 5, 8] {
        let nf = n as f64;
        for frac in [0.05, 0.2, 0.4, 0.6, 0.85] {
            let eta = frac * nf;
            let xi = 0.3 * (nf - eta);
            let mut sq = Vec::with_capacity(SLICE_SAMPLES);
            let mut quart = Vec::with_capacity(SLICE_SAMPLES);
            let mut sq2 = Vec::with_capacity(SLICE_SAMPLES);
            for _ in 0..SLICE_SAMPLES {
                let c = conditioned_sample(n, eta, None, &mut rng);
                let x = c.energies()[0];
                sq.push(x * x);
                quart.push(x.powi(4));
                let c = conditioned_sample(n, eta, Some(xi), &mut rng);
                let e = c.energies();
                debug_assert!((e[n - 1] - eta).abs() < 1e-12 && (e[n - 2] - xi).abs() < 1e-9);
                sq2.push(e[0] * e[0]);
            }
            let cases = [
                (ConditionalOrder::SecondGivenOne, vec![eta], &sq),
                (ConditionalOrder::FourthGivenOne, vec![eta], &quart),
                (ConditionalOrder::SecondGivenTwo, vec![eta, xi], &sq2),
            ];
            for (order, fixed, xs) in cases {
                let want = conditional_moment(n, order, &fixed).map_err(|e| e.to_string())?;
                let m = MeanEstimate::from_iid(xs);
                // N = 3 with two values fixed leaves nothing random
                let ok = m.within(want, 3.0) || (m.mean - want).abs() < 1e-9 * want.max(1.0);
                ensure(ok, || format!("N={n} {order:?} at {fixed:?}: mc {} +- {} vs {want}", m.mean, m.std_err))?;
                ensure(want <= order.cap(), || format!("{order:?} exceeds its cap"))?;
                if m.std_err > 1e-9 * want.max(1.0) {
                    worst_z = worst_z.max((m.mean - want).abs() / m.std_err);
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} cases at 10^6 samples, largest deviation {worst_z:.2} s.e."))
}

fn scaling() -> Outcome {
    let a = galerkin_gap_delta(&params(0.5, 4, 1.0), 3, false).map_err(|e| e.to_string())?;
    let b = galerkin_gap_delta(&params(0.5, 4, 4.0), 3, false).map_err(|e| e.to_string())?;
    let ratio = b.value / a.value;
    ensure((ratio - 2.0).abs() < 1e-8, || format!("ratio {ratio}"))?;
    Ok(format!("Delta(E=4)/Delta(E=1) = {ratio:.12}"))
}

fn gamma_bracket() -> Outcome {
    let mut tightest = f64::INFINITY;
    for g in [0.0, 0.5, 1.0] {
        for n in 3..=10usize {
            let lower = best_gamma_lower(g, n).map_err(|e| e.to_string())?;
            let r = galerkin_gap_gamma(&params(g, n, 1.0), 2).map_err(|e| e.to_string())?;
            ensure(lower <= r.value + 1e-12, || format!("gamma {g} N={n}: lower {lower} above Galerkin {}", r.value))?;
            tightest = tightest.min(r.value - lower);
            if g == 0.0 {
                let nf = n as f64;
                let want = 1.0 - 1.0 / nf - 2.0 / (nf * nf);
                ensure((r.value - want).abs() < 1e-8, || format!("N={n}: Gamma_0 {} vs {want}", r.value))?;
                ensure((lower - want).abs() < 1e-12, || format!("N={n}: closed form {lower} vs {want}"))?;
            }
        }
    }
    Ok(format!("lower <= Galerkin on the grid; gamma=0 equal (min gap {tightest:.1e})"))
}

fn gamma_one_limit() -> Outcome {
    let chain = delta_chain(1.0, 60, &GammaSource::ClosedForm).map_err(|e| e.to_string())?;
    let lim = chain.limit.clone().ok_or("chain reports no limit")?;
    // prod_{k>=2}(1 - 3/k^2) = sin(pi sqrt 3)/(pi sqrt 3) / (1 - 3)
    let z = std::f64::consts::PI * 3f64.sqrt();
    let oracle = 4.0 * z.sin() / z / -2.0;
    ensure((0.25..=0.30).contains(&lim.lower), || format!("lower {} outside [0.25, 0.30]", lim.lower))?;
    ensure(lim.lower <= oracle && oracle <= lim.upper, || {
        format!("oracle {oracle} outside [{}, {}]", lim.lower, lim.upper)
    })?;
    let last = chain.last().ok_or("empty chain")?;
    ensure(last.rigorous && lim.lower <= last.delta_lower, || "chain at N=60 is below its limit".into())?;
    Ok(format!("limit in [{:.9}, {:.9}], oracle {oracle:.9}", lim.lower, lim.upper))
}

fn property_suites() -> Outcome {
    let gammas = [0.25, 0.5, 0.75];
    for g in gammas {
        let cs: Vec<f64> = (3..=14usize)
            .map(|n| {
                let r = galerkin_gap_gamma_tilde(&params(g, n, 1.0), 3)?;
                let nf = n as f64;
                Ok((1.0 - 1.0 / nf - r.value) * nf.powf(1.5))
            })
            .collect::<xchg_core::Result<_>>()
            .map_err(|e| e.to_string())?;
        ensure(cs.iter().all(|&c| c > 0.0), || format!("gamma {g}: non-positive C(N) in {cs:?}"))?;
        // index 3 is N = 6
        ensure(cs[3..].windows(2).all(|w| w[1] <= w[0]), || format!("gamma {g}: C(N) increases in {cs:?}"))?;
    }
    let cfg = LemmaConfig::default();
    let mut suites = 0;
    for g in gammas {
        let mut rng = stream_rng(901, (g * 100.0) as u64);
        let m = verify_minorant(g, 10_000, &mut rng).map_err(|e| e.to_string())?;
        ensure(m.passes, || format!("minorant at gamma {g}: {m:?}"))?;
        for n in 3..=8usize {
            let w = verify_weight_bounds(g, n, 10_000, &mut rng).map_err(|e| e.to_string())?;
            ensure(w.passes, || format!("weights at gamma {g} N={n}: {w:?}"))?;
            let r = verify_decomposition_lemmas(g, n, &cfg).map_err(|e| e.to_string())?;
            let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            ensure(failed.is_empty(), || format!("gamma {g} N={n}: failed {failed:?}"))?;
            ensure(r.trials >= 100, || format!("only {} trials", r.trials))?;
            suites += 1;
        }
    }
    Ok(format!("C(N) positive, non-increasing from N=6; {suites} lemma grids of 100 trials pass"))
}

fn simulator() -> Outcome {
    let p = params(0.5, 4, 1.0);
    let mut rng = stream_rng(1001, 0);
    let init = sample_uniform(&p, &mut rng);
    let traj = simulate(&p, &init, 1e4, &mut rng).map_err(|e| e.to_string())?;
    let oracle = DirichletMomentOracle::new(4, 1.0).map_err(|e| e.to_string())?;
    let indices: [&[u32]; 6] = [&[1], &[2], &[1, 1], &[3], &[2, 1], &[1, 1, 1]];
    let mut worst_z: f64 = 0.0;
    for a in indices {
        let want = flat_moment_by_hand(4, 1.0, a);
        ensure((oracle.moment_f64(a) - want).abs() < 1e-12, || format!("oracle disagrees at {a:?}"))?;
        let m = traj.time_average(|s| a.iter().zip(s).map(|(&k, x)| x.powi(k as i32)).product(), 50);
        ensure(m.within(want, 3.0), || format!("moment {a:?}: {} +- {} vs {want}", m.mean, m.std_err))?;
        worst_z = worst_z.max((m.mean - want).abs() / m.std_err);
    }

    let p2 = params(0.0, 2, 1.0);
    let trajs: Vec<_> = (0..8u64)
        .map(|k| {
            let mut r = stream_rng(1002, k);
            let c = sample_uniform(&p2, &mut r);
            simulate(&p2, &c, 5_000.0, &mut r)
        })
        .collect::<xchg_core::Result<_>>()
        .map_err(|e| e.to_string())?;
    let cfg = AutocorrelationConfig { seed: 1003, ..AutocorrelationConfig::default() };
    let rate = autocorrelation_gap(&trajs, &|s: &[f64]| s[0] - 1.0, &cfg).map_err(|e| e.to_string())?.value;
    ensure((rate - 2.0).abs() <= 0.2, || format!("N=2 decay rate {rate}"))?;
    Ok(format!("{} events, moments within {worst_z:.2} s.e.; N=2 decay rate {rate:.4}", traj.events().len()))
}

const KS_SAMPLES: usize = 100_000;

fn push_forward_and_gamma_scaling() -> Outcome {
    let mut pvals = Vec::new();
    for n in [3usize, 6] {
        let law = MarginalLaw::new(n).map_err(|e| e.to_string())?;
        let mut r1 = stream_rng(1101, n as u64);
        let mut r2 = stream_rng(1102, n as u64);
        let (mut a0, mut al, mut b0, mut bl) = (vec![], vec![], vec![], vec![]);
        for _ in 0..KS_SAMPLES {
            let eta = sample_marginal(&law, &mut r1);
            let xi = sample_uniform(&params(0.0, n - 1, 1.0), &mut r1);
            let c = slice_map(eta, &xi).map_err(|e| e.to_string())?;
            a0.push(c.energies()[0]);
            al.push(c.energies()[n - 1]);
            let d = sample_uniform(&params(0.0, n, 1.0), &mut r2);
            b0.push(d.energies()[0]);
            bl.push(d.energies()[n - 1]);
        }
        for (a, b, which) in [(&a0, &b0, "first"), (&al, &bl, "last")] {
            let ks = ks_two_sample(a, b);
            ensure(ks.p_value > 0.01, || format!("push-forward N={n} {which} coordinate: p = {}", ks.p_value))?;
            pvals.push(ks.p_value);
        }
    }
    let t = 2.5;
    for alpha in [1.0, 2.0] {
        for n in [3usize, 6] {
            let mut r1 = stream_rng(1103, n as u64 + (alpha as u64) * 100);
            let mut r2 = stream_rng(1104, n as u64 + (alpha as u64) * 100);
            let mut a = Vec::with_capacity(KS_SAMPLES);
            let mut b = Vec::with_capacity(KS_SAMPLES);
            for _ in 0..KS_SAMPLES {
                let c = sample_gamma_dirichlet(alpha, &params(0.0, n, 1.0), &mut r1).map_err(|e| e.to_string())?;
                // S_{1/t} moves level E to t E
                let c = rescale(&c, 1.0 / t).map_err(|e| e.to_string())?;
                a.push(c.energies()[0]);
                let d = sample_gamma_dirichlet(alpha, &params(0.0, n, t), &mut r2).map_err(|e| e.to_string())?;
                b.push(d.energies()[0]);
            }
            let ks = ks_two_sample(&a, &b);
            ensure(ks.p_value > 0.01, || format!("Gamma scaling alpha {alpha} N={n}: p = {}", ks.p_value))?;
            pvals.push(ks.p_value);
        }
    }
    let min_p = pvals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("{} KS tests, smallest p = {min_p:.3}", pvals.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "two-particle gap", budget: Some(Duration::from_secs(1)), run: two_particle_gap },
        Criterion { id: 2, name: "flat gap", budget: Some(Duration::from_secs(60)), run: flat_gap },
        Criterion { id: 3, name: "K spectrum", budget: Some(Duration::from_secs(10)), run: k_spectrum },
        Criterion { id: 4, name: "P0 spectrum", budget: Some(Duration::from_secs(30)), run: p0_spectrum },
        Criterion { id: 5, name: "conditional moments", budget: None, run: conditional_moments },
        Criterion { id: 6, name: "scaling relation", budget: None, run: scaling },
        Criterion { id: 7, name: "Gamma bracket", budget: None, run: gamma_bracket },
        Criterion { id: 8, name: "gamma=1 chain limit", budget: None, run: gamma_one_limit },
        Criterion { id: 9, name: "property suites", budget: Some(Duration::from_secs(600)), run: property_suites },
        Criterion { id: 10, name: "simulator equilibrium", budget: None, run: simulator },
        Criterion { id: 11, name: "push-forward and Gamma scaling", budget: None, run: push_forward_and_gamma_scaling },
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failures = 0;
    for c in criteria.iter().filter(|c| only.is_none_or(|k| k == c.id)) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        let took = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if took > b => Err(format!("took {:.2}s, budget {:.0}s", took.as_secs_f64(), b.as_secs_f64())),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {:<32} {:>8.2}s  {detail}", c.id, c.name, took.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("FAIL  {:>2} {:<32} {:>8.2}s  {why}", c.id, c.name, took.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
