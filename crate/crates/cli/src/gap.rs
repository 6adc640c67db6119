use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::Value;
use xchg_core::bounds::{best_gamma_lower, delta_chain, delta_two, GammaSource};
use xchg_core::process::{autocorrelation_gap, simulate, AutocorrelationConfig};
use xchg_core::simplex::{sample_uniform, stream_rng};
use xchg_core::spectral::{galerkin_gap, Arithmetic, FormKind, GalerkinOptions, SpectralReport};
use xchg_core::ModelParams;

use crate::output::{emit, num, opt, parse_f64_list, parse_usize_grid, Meta, Table};
use crate::{CliError, CliResult, Global};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Delta,
    Gamma,
    GammaTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GapMethod {
    Galerkin,
    /// Decay rate of `eta_1 - E` along simulated trajectories (heuristic).
    Autocorrelation,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long, value_enum, default_value_t = Form::Delta)]
    pub form: Form,
    /// Comma-separated gamma values.
    #[arg(long, default_value = "0")]
    pub gamma: String,
    /// Particle counts: `a..b`, `a,b,c` or a single value.
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
    /// Polynomial degree of the trial space.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Restrict to symmetric trial functions.
    #[arg(long)]
    pub symmetrize: bool,
    #[arg(long, value_enum, default_value_t = GapMethod::Galerkin)]
    pub method: GapMethod,
    /// Trajectory length for the autocorrelation method.
    #[arg(long, default_value_t = 2000.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 8)]
    pub replicas: usize,
}

impl Form {
    fn kind(self) -> FormKind {
        match self {
            Form::Delta => FormKind::Dirichlet,
            Form::Gamma => FormKind::G,
            Form::GammaTilde => FormKind::GTilde,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Form::Delta => "delta",
            Form::Gamma => "gamma",
            Form::GammaTilde => "gamma-tilde",
        }
    }
}

/// Proven lower bound matching the form, if one is available.
fn lower_bound(form: Form, gamma: f64, n: usize, e: f64) -> CliResult<Option<f64>> {
    Ok(match form {
        Form::Delta if n == 2 => Some(delta_two(gamma) * e.powf(gamma)),
        Form::Delta => {
            let chain = delta_chain(gamma, n, &GammaSource::ClosedForm)?;
            chain.at(n).map(|s| s.delta_lower * e.powf(gamma))
        }
        Form::Gamma if n >= 3 => Some(best_gamma_lower(gamma, n)?),
        _ => None,
    })
}

fn estimate(a: &GapArgs, seed: u64, gamma: f64, n: usize) -> CliResult<SpectralReport> {
    let params = ModelParams::new(gamma, n, a.e)?.with_seed(seed);
    match a.method {
        GapMethod::Galerkin => {
            let opts = GalerkinOptions { degree: a.degree, symmetrize: a.symmetrize, arithmetic: Arithmetic::Auto };
            Ok(galerkin_gap(&params, a.form.kind(), &opts)?)
        }
        GapMethod::Autocorrelation => {
            if a.form != Form::Delta {
                return Err(CliError::Usage("the autocorrelation method estimates delta only".into()));
            }
            let trajs = (0..a.replicas as u64)
                .map(|k| {
                    let mut rng = stream_rng(seed, k);
                    let init = sample_uniform(&params, &mut rng);
                    simulate(&params, &init, a.t_end, &mut rng)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = AutocorrelationConfig { seed, ..AutocorrelationConfig::default() };
            let e = a.e;
            Ok(autocorrelation_gap(&trajs, &|s: &[f64]| s[0] - e, &cfg)?)
        }
    }
}

pub fn run(a: &GapArgs, g: &Global) -> CliResult<()> {
    let gammas = parse_f64_list(&a.gamma).map_err(CliError::Usage)?;
    let ns = parse_usize_grid(&a.n).map_err(CliError::Usage)?;
    let grid: Vec<(f64, usize)> = gammas.iter().flat_map(|&gm| ns.iter().map(move |&n| (gm, n))).collect();
    let rows: Vec<(SpectralReport, Option<f64>)> = grid
        .par_iter()
        .map(|&(gm, n)| Ok((estimate(a, g.seed, gm, n)?, lower_bound(a.form, gm, n, a.e)?)))
        .collect::<CliResult<_>>()?;

    let mut table = Table::new(&[
        "gamma", "N", "E", "form", "method", "degree", "dof", "value", "exact", "ci_lower", "ci_upper", "lower_bound",
        "bracket_ok", "c_fit", "notes",
    ]);
    for (r, lb) in rows {
        let c_fit = (a.form == Form::GammaTilde && r.n >= 3).then(|| {
            let nf = r.n as f64;
            (1.0 - 1.0 / nf - r.value) * nf.powf(1.5)
        });
        // a Galerkin value is an upper estimate; the bound must sit below it
        let bracket = lb.map(|l| l <= r.value + g.tol * r.value.abs().max(1.0));
        let (ci_lo, ci_hi) = if r.method == xchg_core::spectral::Method::Autocorrelation {
            (r.lower, r.upper)
        } else {
            (None, None)
        };
        table.push(vec![
            num(r.gamma),
            Value::from(r.n),
            num(r.e),
            Value::from(a.form.name()),
            Value::from(r.method.to_string()),
            r.degree.map(Value::from).unwrap_or(Value::Null),
            r.dof.map(Value::from).unwrap_or(Value::Null),
            num(r.value),
            r.exact.clone().map(Value::from).unwrap_or(Value::Null),
            opt(ci_lo),
            opt(ci_hi),
            opt(lb),
            bracket.map(Value::from).unwrap_or(Value::Null),
            opt(c_fit),
            Value::from(r.notes.join("; ")),
        ]);
    }
    let meta = Meta::new("gap", g.seed)
        .param("form", a.form.name())
        .param("gamma", &a.gamma)
        .param("n", &a.n)
        .param("e", a.e)
        .param("degree", a.degree)
        .param("symmetrize", a.symmetrize)
        .param("method", format!("{:?}", a.method).to_lowercase());
    let meta = if a.method == GapMethod::Autocorrelation {
        meta.param("t_end", a.t_end).param("replicas", a.replicas)
    } else {
        meta
    };
    emit(&table.render(&meta, g.format), g.out.as_deref())?;
    Ok(())
}
