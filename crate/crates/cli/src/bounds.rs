use clap::{Args, ValueEnum};
use serde_json::Value;
use xchg_core::bounds::{
    delta_chain, gamma_lower_bounds, n0_interpolation, small_n_delta_bound, BoundEntry, BoundLedger, GammaSource,
};

use crate::output::{emit, num, Meta, Table};
use crate::{CliError, CliResult, Global};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainSource {
    /// Proven closed-form Gamma lower bounds.
    Closed,
    /// Galerkin Gamma estimates; empirical except where certified.
    Galerkin,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Largest N of the chain.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Also report the large-N behaviour of the chain.
    #[arg(long)]
    pub limit: bool,
    #[arg(long, value_enum, default_value_t = ChainSource::Closed)]
    pub chain: ChainSource,
    /// Trial degree for `--chain galerkin`.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
}

fn row(e: &BoundEntry) -> Vec<Value> {
    let mut notes = e.notes.clone();
    if let Some(x) = &e.exact {
        notes = if notes.is_empty() { format!("exact {x}") } else { format!("exact {x}; {notes}") };
    }
    if !e.rigorous {
        notes = if notes.is_empty() { "not a proven bound".into() } else { format!("not a proven bound; {notes}") };
    }
    vec![
        Value::from(e.name.clone()),
        num(e.gamma),
        e.n.map(Value::from).unwrap_or(Value::Null),
        num(e.value),
        Value::from(e.anchor.clone()),
        Value::from(notes),
    ]
}

pub fn run(a: &BoundsArgs, g: &Global) -> CliResult<()> {
    if a.n < 2 {
        return Err(CliError::Usage("--n must be at least 2".into()));
    }
    let mut ledger = BoundLedger::new();
    for n in 3..=a.n {
        ledger.extend(gamma_lower_bounds(a.gamma, n)?);
    }
    let source = match a.chain {
        ChainSource::Closed => GammaSource::ClosedForm,
        ChainSource::Galerkin => GammaSource::Galerkin { degree: a.degree },
    };
    let chain = delta_chain(a.gamma, a.n, &source)?;
    ledger.extend(chain.ledger().entries);
    let mut messages = chain.notes.clone();
    if a.limit {
        if chain.limit.is_none() {
            let v = small_n_delta_bound(a.gamma, a.n)?;
            ledger.push(BoundEntry {
                name: "small-n-delta".into(),
                gamma: a.gamma,
                n: Some(a.n),
                value: v,
                exact: None,
                anchor: "weight comparison chain".into(),
                rigorous: true,
                notes: "decays like N^(gamma-1)".into(),
            });
            messages.push("no positive N-independent limit from closed forms at this gamma".into());
        }
        if a.gamma > 0.0 && a.gamma < 1.0 {
            messages.push(format!("interpolation bound positive from N0 = {}", n0_interpolation(a.gamma)?));
        }
    }
    let mut table = Table::new(&["name", "gamma", "N", "value", "anchor", "notes"]);
    for e in &ledger.entries {
        table.push(row(e));
    }
    for m in &messages {
        eprintln!("note: {m}");
    }
    let meta = Meta::new("bounds", g.seed)
        .param("gamma", a.gamma)
        .param("n", a.n)
        .param("chain", format!("{:?}", a.chain).to_lowercase())
        .param("limit", a.limit);
    emit(&table.render(&meta, g.format), g.out.as_deref())?;
    Ok(())
}
