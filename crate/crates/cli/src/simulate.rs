use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde_json::Value;
use xchg_core::process::simulate;
use xchg_core::simplex::{sample_uniform, stream_rng};
use xchg_core::{Configuration, ModelParams};

use crate::output::{emit, num, Meta, Table};
use crate::{CliError, CliResult, Global};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub n: usize,
    /// Mean energy per particle.
    #[arg(long, default_value_t = 1.0)]
    pub e: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    /// Independent trajectories, each on its own random stream.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    /// Start at the uniform point instead of an equilibrium sample.
    #[arg(long)]
    pub flat_start: bool,
    /// Batches for the batch-means error bars.
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
}

/// `traj.csv` for a single replica, `traj.3.csv` for replica 3 of several.
fn replica_path(base: &Path, k: usize, replicas: usize) -> PathBuf {
    if replicas == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{k}.{ext}"),
        None => format!("{stem}.{k}"),
    };
    base.with_file_name(name)
}

pub fn run(a: &SimulateArgs, g: &Global) -> CliResult<()> {
    if a.replicas == 0 {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }
    let params = ModelParams::new(a.gamma, a.n, a.e)?.with_seed(g.seed);
    let runs: Vec<_> = (0..a.replicas)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(g.seed, k as u64);
            let init = if a.flat_start {
                Configuration::uniform_point(a.n, a.e)?
            } else {
                sample_uniform(&params, &mut rng)
            };
            simulate(&params, &init, a.t_end, &mut rng)
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&[
        "replica", "events", "event_rate", "mean", "mean_se", "second", "second_se", "third", "third_se",
    ]);
    for (k, tr) in runs.iter().enumerate() {
        let mut row = vec![Value::from(k), Value::from(tr.events().len()), num(tr.events().len() as f64 / a.t_end)];
        for p in 1..=3 {
            let m = tr.time_average(|s| s[0].powi(p), a.batches);
            row.push(num(m.mean));
            row.push(num(m.std_err));
        }
        table.push(row);
    }
    if let Some(base) = &g.out {
        for (k, tr) in runs.iter().enumerate() {
            let path = replica_path(base, k, a.replicas);
            let w = BufWriter::new(File::create(&path)?);
            tr.write_to(w).map_err(|e| CliError::Failed(format!("writing {}: {e}", path.display())))?;
        }
    }
    let meta = Meta::new("simulate", g.seed)
        .param("gamma", a.gamma)
        .param("n", a.n)
        .param("e", a.e)
        .param("t_end", a.t_end)
        .param("replicas", a.replicas)
        .param("start", if a.flat_start { "flat" } else { "equilibrium" });
    // the summary always goes to standard output; --out holds the events
    emit(&table.render(&meta, g.format), None)?;
    Ok(())
}
