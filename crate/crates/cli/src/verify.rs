use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Value};
use xchg_core::bounds::{best_gamma_lower, verify_minorant, verify_weight_bounds};
use xchg_core::poly::{operator_p0_second_eigenvalue, verify_k_spectrum};
use xchg_core::simplex::{
    rescale, sample_gamma_dirichlet, sample_marginal, sample_uniform, slice_map, stream_rng,
};
use xchg_core::spectral::{galerkin_gap_delta, galerkin_gap_gamma, verify_decomposition_lemmas, LemmaConfig};
use xchg_core::stats::ks_two_sample;
use xchg_core::{MarginalLaw, ModelParams};

use crate::output::{emit, num, parse_f64_list, parse_usize_grid, Meta, Table};
use crate::{CliError, CliResult, Global};

const SUITES: [&str; 8] = ["k-spectrum", "p0-spectrum", "lemmas", "minorant", "weights", "push-forward", "scaling", "bracket"];

/// KS p-values below this fail the statistical suites.
const KS_LEVEL: f64 = 0.01;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated suites, or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value = "3..8")]
    pub n: String,
    #[arg(long, default_value = "0.25,0.5,0.75")]
    pub gamma: String,
    /// Largest polynomial degree for the K spectrum.
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    /// Random trial functions per (gamma, N) in the lemma suite.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Samples per Kolmogorov-Smirnov comparison and weight check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Write every finding, with its full diagnostics, as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

struct Finding {
    suite: &'static str,
    gamma: Option<f64>,
    n: Option<usize>,
    /// `None` when the suite does not apply at these parameters.
    passed: Option<bool>,
    detail: String,
    data: Value,
}

impl Finding {
    fn new(suite: &'static str, gamma: Option<f64>, n: Option<usize>, passed: bool, detail: String) -> Self {
        Self { suite, gamma, n, passed: Some(passed), detail, data: Value::Null }
    }

    fn skip(suite: &'static str, gamma: Option<f64>, n: Option<usize>, why: &str) -> Self {
        Self { suite, gamma, n, passed: None, detail: why.into(), data: Value::Null }
    }

    fn with(mut self, data: Value) -> Self {
        self.data = data;
        self
    }

    fn status(&self) -> &'static str {
        match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        }
    }
}

#[derive(Clone, Copy)]
enum Task {
    KSpectrum(usize),
    P0(usize),
    Lemmas(f64, usize),
    Minorant(f64),
    Weights(f64, usize),
    PushForward(usize),
    Scaling(f64, usize),
    Bracket(f64, usize),
}

fn tasks(suites: &[&str], gammas: &[f64], ns: &[usize]) -> Vec<Task> {
    let mut out = Vec::new();
    for &s in suites {
        match s {
            "k-spectrum" => out.extend(ns.iter().map(|&n| Task::KSpectrum(n))),
            "p0-spectrum" => out.extend(ns.iter().map(|&n| Task::P0(n))),
            "minorant" => out.extend(gammas.iter().map(|&g| Task::Minorant(g))),
            "push-forward" => out.extend(ns.iter().map(|&n| Task::PushForward(n))),
            _ => {
                for &g in gammas {
                    for &n in ns {
                        out.push(match s {
                            "lemmas" => Task::Lemmas(g, n),
                            "weights" => Task::Weights(g, n),
                            "scaling" => Task::Scaling(g, n),
                            _ => Task::Bracket(g, n),
                        });
                    }
                }
            }
        }
    }
    out
}

fn ks_pair(a: &[f64], b: &[f64]) -> f64 {
    ks_two_sample(a, b).p_value
}

fn run_task(t: Task, index: u64, a: &VerifyArgs, g: &Global) -> CliResult<Finding> {
    let seed = g.seed;
    Ok(match t {
        Task::KSpectrum(n) => {
            if n < 3 {
                return Ok(Finding::skip("k-spectrum", None, Some(n), "needs N >= 3"));
            }
            let r = verify_k_spectrum(n, a.degree)?;
            let detail = format!("degree <= {}, kappa_1 = {}", a.degree, r.measured.get(1).cloned().unwrap_or_default());
            Finding::new("k-spectrum", None, Some(n), r.passed(), detail).with(json!(r))
        }
        Task::P0(n) => {
            if n < 3 {
                return Ok(Finding::skip("p0-spectrum", None, Some(n), "needs N >= 3"));
            }
            let s = operator_p0_second_eigenvalue(n, a.degree.clamp(2, 4))?;
            let ok = (s.second - s.expected_second).abs() < g.tol && s.branch_present && s.expected_second_is_exact_eigenvalue;
            let detail = format!("second {:.12}, expected {:.12}, branch present {}", s.second, s.expected_second, s.branch_present);
            Finding::new("p0-spectrum", None, Some(n), ok, detail).with(json!(s))
        }
        Task::Lemmas(gm, n) => {
            if !(3..=12).contains(&n) {
                return Ok(Finding::skip("lemmas", Some(gm), Some(n), "runs for 3 <= N <= 12"));
            }
            let cfg = LemmaConfig { trials: a.trials, seed: seed.wrapping_add(index), ..LemmaConfig::default() };
            let r = verify_decomposition_lemmas(gm, n, &cfg)?;
            let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let detail = if failed.is_empty() {
                format!("{} checks on {} trials", r.checks.len(), r.trials)
            } else {
                format!("failed: {}", failed.join(" "))
            };
            Finding::new("lemmas", Some(gm), Some(n), r.passed(), detail).with(json!(r))
        }
        Task::Minorant(gm) => {
            if !(gm > 0.0 && gm < 1.0) {
                let why = if gm == 1.0 { "minorant is the identity at gamma = 1" } else { "needs 0 < gamma < 1" };
                return Ok(Finding::skip("minorant", Some(gm), None, why));
            }
            let r = verify_minorant(gm, a.samples, &mut stream_rng(seed, index))?;
            let detail = format!("min difference {:.3e} at x = {:.4}", r.min_difference, r.argmin);
            Finding::new("minorant", Some(gm), None, r.passes, detail).with(json!(r))
        }
        Task::Weights(gm, n) => {
            if !(gm > 0.0 && gm <= 1.0) {
                return Ok(Finding::skip("weights", Some(gm), Some(n), "needs 0 < gamma <= 1"));
            }
            let r = verify_weight_bounds(gm, n, a.samples, &mut stream_rng(seed, index))?;
            let mut detail = format!("W in [{:.6}, {:.6}], lower {:.6}", r.min_seen, r.max_seen, r.lower);
            for note in &r.notes {
                detail.push_str("; ");
                detail.push_str(note);
            }
            Finding::new("weights", Some(gm), Some(n), r.passes, detail).with(json!(r))
        }
        Task::PushForward(n) => {
            if n < 3 {
                return Ok(Finding::skip("push-forward", None, Some(n), "needs N >= 3"));
            }
            let law = MarginalLaw::new(n)?;
            let inner = ModelParams::new(0.0, n - 1, 1.0)?;
            let outer = ModelParams::new(0.0, n, 1.0)?;
            let mut r1 = stream_rng(seed, 2 * index);
            let mut r2 = stream_rng(seed, 2 * index + 1);
            let (mut a0, mut al, mut b0, mut bl) = (vec![], vec![], vec![], vec![]);
            for _ in 0..a.samples {
                let c = slice_map(sample_marginal(&law, &mut r1), &sample_uniform(&inner, &mut r1))?;
                a0.push(c.energies()[0]);
                al.push(c.energies()[n - 1]);
                let d = sample_uniform(&outer, &mut r2);
                b0.push(d.energies()[0]);
                bl.push(d.energies()[n - 1]);
            }
            let (p0, pl) = (ks_pair(&a0, &b0), ks_pair(&al, &bl));
            let detail = format!("KS p = {p0:.4} (first), {pl:.4} (last)");
            Finding::new("push-forward", None, Some(n), p0 > KS_LEVEL && pl > KS_LEVEL, detail)
                .with(json!({ "p_first": p0, "p_last": pl, "samples": a.samples }))
        }
        Task::Scaling(gm, n) => {
            let d1 = galerkin_gap_delta(&ModelParams::new(gm, n, 1.0)?, 2, false)?.value;
            let d4 = galerkin_gap_delta(&ModelParams::new(gm, n, 4.0)?, 2, false)?.value;
            let ratio = d4 / d1;
            let want = 4f64.powf(gm);
            let mut ok = (ratio - want).abs() < g.tol * want;
            let mut pvals = Vec::new();
            let t = 2.5;
            for (k, alpha) in [1.0, 2.0].into_iter().enumerate() {
                let mut r1 = stream_rng(seed, 4 * index + 2 * k as u64);
                let mut r2 = stream_rng(seed, 4 * index + 2 * k as u64 + 1);
                let p1 = ModelParams::new(gm, n, 1.0)?;
                let pt = ModelParams::new(gm, n, t)?;
                let mut xs = Vec::with_capacity(a.samples);
                let mut ys = Vec::with_capacity(a.samples);
                for _ in 0..a.samples {
                    xs.push(rescale(&sample_gamma_dirichlet(alpha, &p1, &mut r1)?, 1.0 / t)?.energies()[0]);
                    ys.push(sample_gamma_dirichlet(alpha, &pt, &mut r2)?.energies()[0]);
                }
                pvals.push(ks_pair(&xs, &ys));
            }
            ok &= pvals.iter().all(|&p| p > KS_LEVEL);
            let detail = format!("Delta ratio {ratio:.10} (want {want:.10}); Gamma-density KS p = {:.4}, {:.4}", pvals[0], pvals[1]);
            Finding::new("scaling", Some(gm), Some(n), ok, detail)
                .with(json!({ "ratio": ratio, "expected": want, "ks_p": pvals }))
        }
        Task::Bracket(gm, n) => {
            if n < 3 {
                return Ok(Finding::skip("bracket", Some(gm), Some(n), "needs N >= 3"));
            }
            let lower = best_gamma_lower(gm, n)?;
            let est = galerkin_gap_gamma(&ModelParams::new(gm, n, 1.0)?, 2)?.value;
            let ok = lower <= est + g.tol * est.abs().max(1.0);
            let detail = format!("lower {lower:.10} <= Galerkin {est:.10}");
            Finding::new("bracket", Some(gm), Some(n), ok, detail).with(json!({ "lower": lower, "galerkin": est }))
        }
    })
}

pub fn run(a: &VerifyArgs, g: &Global) -> CliResult<()> {
    let suites: Vec<&str> = if a.suite.trim() == "all" {
        SUITES.to_vec()
    } else {
        a.suite
            .split(',')
            .map(|s| {
                let s = s.trim();
                SUITES.iter().copied().find(|k| *k == s).ok_or_else(|| {
                    CliError::Usage(format!("unknown suite {s:?}; choose from {}", SUITES.join(", ")))
                })
            })
            .collect::<CliResult<_>>()?
    };
    let gammas = parse_f64_list(&a.gamma).map_err(CliError::Usage)?;
    let ns = parse_usize_grid(&a.n).map_err(CliError::Usage)?;
    if a.trials == 0 || a.samples < 100 {
        return Err(CliError::Usage("need --trials >= 1 and --samples >= 100".into()));
    }
    let list = tasks(&suites, &gammas, &ns);
    let findings: Vec<Finding> = list
        .par_iter()
        .enumerate()
        .map(|(i, &t)| run_task(t, i as u64, a, g))
        .collect::<CliResult<_>>()?;

    let mut table = Table::new(&["suite", "gamma", "N", "status", "detail"]);
    for f in &findings {
        table.push(vec![
            Value::from(f.suite),
            f.gamma.map(num).unwrap_or(Value::Null),
            f.n.map(Value::from).unwrap_or(Value::Null),
            Value::from(f.status()),
            Value::from(f.detail.clone()),
        ]);
    }
    let meta = Meta::new("verify", g.seed)
        .param("suite", suites.join("+"))
        .param("gamma", &a.gamma)
        .param("n", &a.n)
        .param("degree", a.degree)
        .param("trials", a.trials)
        .param("samples", a.samples)
        .param("tol", g.tol);
    emit(&table.render(&meta, g.format), g.out.as_deref())?;

    let failed = findings.iter().filter(|f| f.passed == Some(false)).count();
    if let Some(path) = &a.report {
        let items: Vec<Value> = findings
            .iter()
            .map(|f| {
                json!({
                    "suite": f.suite,
                    "gamma": f.gamma,
                    "n": f.n,
                    "status": f.status(),
                    "detail": f.detail,
                    "data": f.data,
                })
            })
            .collect();
        let doc = json!({ "meta": meta.to_json(), "passed": failed == 0, "findings": items });
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        text.push('\n');
        emit(&text, Some(path))?;
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} verification finding(s) failed")));
    }
    Ok(())
}
