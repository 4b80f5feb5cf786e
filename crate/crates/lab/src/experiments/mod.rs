//! One runner per experiment kind. Each opens the trace, fans trajectories
//! out over the pool and appends criterion-tagged verdicts.

mod chains;
mod products;
mod spin;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use rrdo_core::ensemble::MatrixEnsemble;
use rrdo_core::rng::RngStream;
use rrdo_core::ComplexVector;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::Verdict;
use crate::trace::{Row, TraceWriter};
use crate::LabError;

/// Trajectories evaluated per parallel batch before their rows are written.
const CHUNK: usize = 256;

#[derive(Debug)]
pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub ensemble: MatrixEnsemble,
    pub verdicts: Vec<Verdict>,
    pub metrics: BTreeMap<String, Value>,
    trace_path: &'a Path,
    trace: Option<TraceWriter>,
}

impl<'a> Ctx<'a> {
    pub fn new(cfg: &'a ExperimentConfig, ensemble: MatrixEnsemble, trace_path: &'a Path) -> Self {
        Self {
            cfg,
            ensemble,
            verdicts: Vec::new(),
            metrics: BTreeMap::new(),
            trace_path,
            trace: None,
        }
    }

    pub fn steps(&self) -> usize {
        self.cfg.steps.get()
    }

    pub fn trajectories(&self) -> usize {
        self.cfg.trajectories.get()
    }

    pub fn rng(&self, trajectory: usize) -> RngStream {
        RngStream::new(self.cfg.seed, trajectory as u64)
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.cfg.tol(name)
    }

    /// Opens `trace.csv` with `trajectory,n` followed by `columns`.
    pub fn open_trace(&mut self, columns: &[String]) -> Result<(), LabError> {
        let mut header = vec!["trajectory".to_string(), "n".to_string()];
        header.extend_from_slice(columns);
        self.trace = Some(TraceWriter::create(self.trace_path, &header)?);
        Ok(())
    }

    /// Lends the open trace out so rows can be written while the context is
    /// shared with worker threads.
    pub fn take_trace(&mut self) -> TraceWriter {
        self.trace
            .take()
            .expect("trace opened before rows are written")
    }

    pub fn put_trace(&mut self, t: TraceWriter) {
        self.trace = Some(t);
    }

    pub fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }

    pub fn verdict(&mut self, v: Verdict) {
        log::info!("{}", v.line());
        self.verdicts.push(v);
    }

    /// Closes the trace; an experiment that failed before opening it leaves
    /// a header-only file.
    pub fn finish_trace(&mut self) -> Result<u64, LabError> {
        if self.trace.is_none() {
            self.open_trace(&[])?;
        }
        Ok(self.trace.take().expect("opened above").finish()?)
    }
}

/// Evaluates `f(0..count)` on the current pool in batches and hands each
/// result to `sink` in index order, so output never depends on scheduling.
pub(crate) fn fan_out<T, F, S>(count: usize, f: F, mut sink: S) -> Result<(), LabError>
where
    T: Send,
    F: Fn(usize) -> rrdo_core::Result<T> + Sync,
    S: FnMut(usize, T) -> Result<(), LabError>,
{
    for start in (0..count).step_by(CHUNK) {
        let end = (start + CHUNK).min(count);
        let out: Vec<rrdo_core::Result<T>> = (start..end).into_par_iter().map(&f).collect();
        for (i, r) in (start..end).zip(out) {
            sink(i, r?)?;
        }
    }
    Ok(())
}

pub(crate) fn dispatch(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    match ctx.cfg.experiment {
        ExperimentKind::Decay => products::decay(ctx),
        ExperimentKind::Cesaro => products::cesaro(ctx),
        ExperimentKind::ForwardLimit => products::forward_limit(ctx),
        ExperimentKind::Lyapunov => products::lyapunov(ctx),
        ExperimentKind::Markov => chains::markov(ctx),
        ExperimentKind::SpinTau => spin::spin_tau(ctx),
        ExperimentKind::SpinEnergy => spin::spin_energy(ctx),
        ExperimentKind::Factorization => spin::factorization(ctx),
    }
}

/// [`fan_out`] over the configured trajectories: `f` returns each
/// trajectory's trace rows and summary; rows go to the trace in order and
/// the summaries are returned.
pub(crate) fn traced<T, F>(ctx: &mut Ctx<'_>, f: F) -> Result<Vec<T>, LabError>
where
    T: Send,
    F: Fn(&Ctx<'_>, usize) -> rrdo_core::Result<(Vec<Row>, T)> + Sync,
{
    let mut trace = ctx.take_trace();
    let mut out = Vec::with_capacity(ctx.trajectories());
    let c = &*ctx;
    let res = fan_out(
        c.trajectories(),
        |i| f(c, i),
        |_, (rows, t)| {
            for r in &rows {
                trace.write(r)?;
            }
            out.push(t);
            Ok(())
        },
    );
    ctx.put_trace(trace);
    res.map(|_| out)
}

pub(crate) fn indexed(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("{}_{}", prefix, k)).collect()
}

/// `[[re, im], ...]`
pub(crate) fn complex_json(v: &ComplexVector) -> Value {
    Value::Array(v.as_slice().iter().map(|z| json!([z.re, z.im])).collect())
}

pub(crate) fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, |a, b| {
        if b.is_nan() {
            b
        } else if a.is_nan() {
            a
        } else {
            a.max(b)
        }
    })
}

pub(crate) fn min_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::INFINITY, |a, b| {
        if b.is_nan() {
            b
        } else if a.is_nan() {
            a
        } else {
            a.min(b)
        }
    })
}
