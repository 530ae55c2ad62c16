//! Shrub Ensembles for online classification.
//!
//! A shrub ensemble keeps a sliding window of recent samples, fits a small
//! decision tree on the window for every arriving item, and learns sparse
//! ensemble weights by projected gradient descent onto the probability
//! simplex with at most `M` nonzero entries.
//!
//! ```
//! use shrubs::{EnsembleConfig, EnsembleState, Sample};
//!
//! let mut model = EnsembleState::new(EnsembleConfig::new(2)).unwrap();
//! for i in 0..100 {
//!     let x = (i % 10) as f64 / 10.0;
//!     model.step(Sample::new(vec![x], usize::from(x > 0.45))).unwrap();
//! }
//! assert_eq!(model.predict_class(&[0.9]).unwrap(), 1);
//! ```
//!
//! Besides the learner the crate ships drift stream generators
//! ([`streams`]), a test-then-train harness with memory accounting and
//! Pareto summaries ([`eval`]), and the `shrubs` command-line tool
//! ([`cli`]).

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod prox;
pub mod rng;
pub mod sample;
pub mod shrub;
pub mod streams;

pub use ensemble::{
    ce_loss_gradient, loss_gradient, mse_loss_gradient, EnsembleConfig, EnsembleState, Loss,
    StepOutcome,
};
pub use error::{Error, Result};
pub use prox::{project_sparse_simplex, simplex_project, Projection, SparsityBudget};
pub use rng::RngHandle;
pub use sample::{one_hot, Sample, Window};
pub use shrub::{
    fit_shrub, gini_impurity, node_count, predict_shrub, MaxFeatures, Node, Shrub, ShrubConfig,
    Splitter,
};
