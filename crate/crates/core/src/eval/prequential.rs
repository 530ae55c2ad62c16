//! Test-then-train (prequential) evaluation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::OnlineClassifier;
use crate::error::{Error, Result};
use crate::streams::DataStream;

/// One checkpoint of a prequential run. Serialized as
/// `{"items":..,"acc":..,"bytes":..,"secs":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    #[serde(rename = "items")]
    pub items_seen: u64,
    /// `correct / items_seen` over every item so far.
    #[serde(rename = "acc")]
    pub cumulative_accuracy: f64,
    #[serde(rename = "bytes")]
    pub model_bytes: u64,
    #[serde(rename = "secs")]
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub records: Vec<EvalRecord>,
    /// The stream ran out before the requested number of items.
    pub truncated: bool,
    /// The model outgrew [`EvalOptions::max_bytes`]; the run stopped there.
    pub exceeded_budget: bool,
}

impl Trace {
    pub fn last(&self) -> Option<&EvalRecord> {
        self.records.last()
    }

    pub fn final_accuracy(&self) -> f64 {
        self.last().map_or(0.0, |r| r.cumulative_accuracy)
    }

    pub fn final_bytes(&self) -> u64 {
        self.last().map_or(0, |r| r.model_bytes)
    }

    /// Mean model size over checkpoints.
    pub fn avg_bytes(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.model_bytes as f64).sum::<f64>() / self.records.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    /// Record wall-clock seconds. Off by default so traces are reproducible
    /// byte for byte.
    pub timing: bool,
    /// Abort as soon as the model size after an update exceeds this.
    pub max_bytes: Option<u64>,
}

/// Scores each item with the current model, then trains on it. A record is
/// emitted every `checkpoint_every` items and after the last item.
pub fn test_then_train<M, S>(
    model: &mut M,
    stream: &mut S,
    n_items: u64,
    checkpoint_every: u64,
) -> Result<Trace>
where
    M: OnlineClassifier + ?Sized,
    S: DataStream + ?Sized,
{
    test_then_train_with(model, stream, n_items, checkpoint_every, EvalOptions::default())
}

pub fn test_then_train_with<M, S>(
    model: &mut M,
    stream: &mut S,
    n_items: u64,
    checkpoint_every: u64,
    options: EvalOptions,
) -> Result<Trace>
where
    M: OnlineClassifier + ?Sized,
    S: DataStream + ?Sized,
{
    if n_items == 0 {
        return Err(Error::domain("n_items must be at least 1"));
    }
    if checkpoint_every == 0 {
        return Err(Error::domain("checkpoint_every must be at least 1"));
    }
    let start = Instant::now();
    let mut trace = Trace::default();
    let mut correct = 0u64;
    let mut seen = 0u64;
    let record = |seen: u64, correct: u64, bytes: u64| EvalRecord {
        items_seen: seen,
        cumulative_accuracy: correct as f64 / seen as f64,
        model_bytes: bytes,
        elapsed_seconds: if options.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        },
    };
    while seen < n_items {
        let Some(sample) = stream.next_sample()? else {
            trace.truncated = true;
            break;
        };
        if model.predict_class(&sample.features)? == sample.label {
            correct += 1;
        }
        model.learn(sample)?;
        seen += 1;
        let bytes = model.model_bytes();
        if options.max_bytes.is_some_and(|max| bytes > max) {
            trace.exceeded_budget = true;
            trace.records.push(record(seen, correct, bytes));
            return Ok(trace);
        }
        if seen % checkpoint_every == 0 || seen == n_items {
            trace.records.push(record(seen, correct, bytes));
        }
    }
    if trace.truncated && seen > 0 && seen % checkpoint_every != 0 {
        trace.records.push(record(seen, correct, model.model_bytes()));
    }
    Ok(trace)
}

/// Writes one JSON object per record.
pub fn write_trace(records: &[EvalRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| io(e.into()))?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}
