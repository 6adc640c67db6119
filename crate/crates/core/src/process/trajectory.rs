use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::apply_collision;
use crate::error::{Error, Result};
use crate::simplex::{Configuration, ModelParams};
use crate::stats::MeanEstimate;

/// The state is rescaled back onto the simplex after this many events.
pub const RENORMALIZE_EVERY: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub time: f64,
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    params: ModelParams,
    initial: Configuration,
    events: Vec<CollisionEvent>,
    t_end: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: String,
    params: ModelParams,
    initial: Vec<f64>,
    mean_energy: f64,
    t_end: f64,
    renormalize_every: usize,
    events: usize,
}

const FORMAT: &str = "xchg-trajectory";

impl Trajectory {
    pub fn new(params: ModelParams, initial: Configuration, events: Vec<CollisionEvent>, t_end: f64) -> Self {
        Self { params, initial, events, t_end }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn events(&self) -> &[CollisionEvent] {
        &self.events
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Calls `visit(t_start, t_stop, state)` for every holding interval.
    pub fn for_each_interval(&self, mut visit: impl FnMut(f64, f64, &[f64])) {
        let mut state = self.initial.clone();
        let mut t = 0.0;
        for (k, ev) in self.events.iter().enumerate() {
            visit(t, ev.time, state.energies());
            apply_collision(state.energies_mut(), ev.i, ev.j, ev.alpha);
            if (k + 1) % RENORMALIZE_EVERY == 0 {
                state.renormalize();
            }
            t = ev.time;
        }
        visit(t, self.t_end, state.energies());
    }

    /// Every visited configuration, starting with the initial one.
    pub fn states(&self) -> Vec<Configuration> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        self.for_each_interval(|_, _, s| {
            out.push(Configuration::new(s.to_vec(), self.initial.mean_energy()).expect("replayed state left the simplex"));
        });
        out
    }

    pub fn final_state(&self) -> Configuration {
        let mut state = self.initial.clone();
        self.for_each_interval(|_, _, s| state = Configuration::new(s.to_vec(), self.initial.mean_energy()).expect("replayed state left the simplex"));
        state
    }

    /// Time average of `observable` over `[0, t_end]` with a batch-means error bar.
    pub fn time_average(&self, observable: impl Fn(&[f64]) -> f64, batches: usize) -> MeanEstimate {
        let mut values = Vec::with_capacity(self.events.len() + 1);
        let mut weights = Vec::with_capacity(self.events.len() + 1);
        self.for_each_interval(|a, b, s| {
            if b > a {
                values.push(observable(s));
                weights.push(b - a);
            }
        });
        MeanEstimate::batch_means(&values, &weights, batches)
    }

    /// JSON header line, a column line, then one `time,i,j,alpha` line per event.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            format: FORMAT.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params: self.params.clone(),
            initial: self.initial.energies().to_vec(),
            mean_energy: self.initial.mean_energy(),
            t_end: self.t_end,
            renormalize_every: RENORMALIZE_EVERY,
            events: self.events.len(),
        };
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        writeln!(w, "time,i,j,alpha")?;
        for e in &self.events {
            writeln!(w, "{},{},{},{}", e.time, e.i, e.j, e.alpha)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::Parse("empty trajectory file".into()))??;
        let header: Header = serde_json::from_str(&first)?;
        if header.format != FORMAT {
            return Err(Error::Parse(format!("unknown format {:?}", header.format)));
        }
        if header.renormalize_every != RENORMALIZE_EVERY {
            return Err(Error::Parse("trajectory written with a different renormalization period".into()));
        }
        let cols = lines.next().ok_or_else(|| Error::Parse("missing column line".into()))??;
        if cols.trim() != "time,i,j,alpha" {
            return Err(Error::Parse(format!("unexpected column line {cols:?}")));
        }
        let initial = Configuration::new(header.initial, header.mean_energy)?;
        let n = initial.n();
        let mut events = Vec::with_capacity(header.events);
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("bad event on line {}: {line:?}", lineno + 3));
            let mut it = line.split(',');
            let mut next = || it.next().ok_or_else(bad);
            let time: f64 = next()?.parse().map_err(|_| bad())?;
            let i: usize = next()?.parse().map_err(|_| bad())?;
            let j: usize = next()?.parse().map_err(|_| bad())?;
            let alpha: f64 = next()?.parse().map_err(|_| bad())?;
            if i >= n || j >= n || i == j || !(0.0..=1.0).contains(&alpha) {
                return Err(bad());
            }
            events.push(CollisionEvent { time, i, j, alpha });
        }
        if events.len() != header.events {
            return Err(Error::Parse(format!("header announces {} events, found {}", header.events, events.len())));
        }
        Ok(Self { params: header.params, initial, events, t_end: header.t_end })
    }
}
