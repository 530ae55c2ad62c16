//! Test-then-train evaluation, model-size accounting, Pareto summaries and
//! hyperparameter sweeps.

mod grid;
mod memory;
mod pareto;
mod prequential;
mod sweep;

pub use grid::{sample_configs, ConfigGrid};
pub use memory::{
    estimate_memory, memory_ceiling, node_bytes, window_bytes, BASE_OVERHEAD_BYTES,
    FEATURE_BYTES, LABEL_BYTES, MEMBER_OVERHEAD_BYTES, NODE_HEADER_BYTES, WEIGHT_BYTES,
};
pub use pareto::{normalized_apf, pareto_front, ParetoPoint};
pub use prequential::{
    test_then_train, test_then_train_with, write_trace, EvalOptions, EvalRecord, Trace,
};
pub use sweep::{run_sweep, write_front, write_summary, SweepOptions, SweepResult};

use crate::ensemble::EnsembleState;
use crate::error::Result;
use crate::sample::Sample;

/// A model that can be scored and then updated one item at a time.
pub trait OnlineClassifier {
    fn predict_class(&self, x: &[f64]) -> Result<usize>;

    fn learn(&mut self, sample: Sample) -> Result<()>;

    /// Model size in bytes. Defaults to 0 for models without accounting.
    fn model_bytes(&self) -> u64 {
        0
    }
}

impl OnlineClassifier for EnsembleState {
    fn predict_class(&self, x: &[f64]) -> Result<usize> {
        EnsembleState::predict_class(self, x)
    }

    fn learn(&mut self, sample: Sample) -> Result<()> {
        self.step(sample).map(|_| ())
    }

    fn model_bytes(&self) -> u64 {
        estimate_memory(self)
    }
}
