//! The Shrub Ensemble online learner.
//!
//! Every arriving sample is appended to a sliding window, a new shrub is fit
//! on the window and enters the ensemble with weight zero, the weights take
//! one gradient step on the window loss, and the result is projected onto the
//! sparse simplex. Members whose weight becomes exactly zero are dropped.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::prox::{project_sparse_simplex, SparsityBudget};
use crate::rng::RngHandle;
use crate::sample::{Sample, Window};
use std::collections::VecDeque;

use crate::shrub::{fit_presorted, Node, Shrub, ShrubConfig, SortedColumns};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    /// `(1/C) * ||f(x) - y||^2`
    Mse,
    /// `-log softmax(f(x))_y`
    CrossEntropy,
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mse" => Ok(Loss::Mse),
            "ce" | "cross_entropy" => Ok(Loss::CrossEntropy),
            other => Err(Error::config(format!("unknown loss '{other}', expected mse or ce"))),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Mse => "mse",
            Loss::CrossEntropy => "ce",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Maximum number of members with nonzero weight (M).
    pub max_members: usize,
    /// Sliding window capacity (B).
    pub window: usize,
    /// Gradient step size.
    pub alpha: f64,
    pub n_classes: usize,
    pub loss: Loss,
    pub shrub: ShrubConfig,
    /// Fit a new shrub every `train_every` items.
    pub train_every: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    /// Default configuration for a problem with `n_classes` classes.
    pub fn new(n_classes: usize) -> Self {
        Self {
            max_members: 32,
            window: 256,
            alpha: 0.1,
            n_classes,
            loss: Loss::Mse,
            shrub: ShrubConfig::default(),
            train_every: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_members == 0 {
            return Err(Error::config("M must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::config("window size must be at least 1"));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::config(format!(
                "step size must be positive and finite, got {}",
                self.alpha
            )));
        }
        if self.n_classes < 2 {
            return Err(Error::config("need at least 2 classes"));
        }
        if self.train_every == 0 {
            return Err(Error::config("train_every must be at least 1"));
        }
        self.shrub.validate()
    }

    pub fn budget(&self) -> SparsityBudget {
        SparsityBudget::new(self.max_members).expect("validated")
    }
}

/// What a single [`EnsembleState::step`] did to the member list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepOutcome {
    /// A new shrub was fit on this item.
    pub trained: bool,
    /// The new shrub survived projection.
    pub added: bool,
    /// Number of members dropped (zero weight after projection). Includes the
    /// new shrub when it did not survive.
    pub pruned: usize,
}

#[derive(Debug, Clone)]
pub struct EnsembleState {
    config: EnsembleConfig,
    window: Window,
    shrubs: Vec<Shrub>,
    weights: Vec<f64>,
    items_seen: u64,
    rng: RngHandle,
    /// Window columns in sorted order, so fitting skips the presort.
    sorted: SortedColumns,
    /// Count of samples ever pushed into the window; the next sample's id.
    next_id: u64,
    /// Per-member leaf assignments of the window, parallel to `shrubs`.
    caches: Vec<LeafCache>,
}

/// Leaf ordinals of every window sample (oldest first) for one member, plus
/// the member's leaf distributions laid out flat by ordinal.
#[derive(Debug, Clone)]
struct LeafCache {
    leaves: VecDeque<u32>,
    ordinal: Vec<u32>,
    table: Vec<f64>,
}

impl LeafCache {
    fn new(shrub: &Shrub) -> Self {
        let mut ordinal = vec![u32::MAX; shrub.node_count()];
        let mut table = Vec::new();
        for (id, node) in shrub.nodes().iter().enumerate() {
            if let Node::Leaf { distribution, .. } = node {
                ordinal[id] = (table.len() / distribution.len()) as u32;
                table.extend_from_slice(distribution);
            }
        }
        Self {
            leaves: VecDeque::new(),
            ordinal,
            table,
        }
    }

    fn push(&mut self, shrub: &Shrub, x: &[f64]) {
        self.leaves.push_back(self.ordinal[shrub.leaf_index(x)]);
    }
}

impl EnsembleState {
    pub fn new(config: EnsembleConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            window: Window::new(config.window)?,
            rng: RngHandle::new(config.seed),
            config,
            shrubs: Vec::new(),
            weights: Vec::new(),
            items_seen: 0,
            sorted: SortedColumns::default(),
            next_id: 0,
            caches: Vec::new(),
        })
    }

    /// Builds a state with a prescribed window, members and weights.
    ///
    /// `window` is pushed oldest first. The weights must lie on the simplex
    /// with at most M entries.
    pub fn from_parts(
        config: EnsembleConfig,
        window: Vec<Sample>,
        shrubs: Vec<Shrub>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let mut state = Self::new(config)?;
        if shrubs.len() != weights.len() {
            return Err(Error::domain("shrubs and weights differ in length"));
        }
        if shrubs.len() > state.config.max_members {
            return Err(Error::domain("more members than the budget M"));
        }
        if !shrubs.is_empty() {
            let sum: f64 = weights.iter().sum();
            if weights.iter().any(|&w| !(w > 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::domain("weights must be positive and sum to 1"));
            }
        }
        for s in &shrubs {
            if s.n_classes() != state.config.n_classes {
                return Err(Error::domain("shrub class count differs from config"));
            }
        }
        if let Some(s) = shrubs.iter().find(|s| window.first().is_some_and(|x| x.dim() != s.n_features())) {
            return Err(Error::DimensionMismatch {
                expected: s.n_features(),
                got: window[0].dim(),
            });
        }
        for sample in window {
            state.check_sample(&sample)?;
            state.push_sample(sample)?;
        }
        state.caches = shrubs
            .iter()
            .map(|s| {
                let mut cache = LeafCache::new(s);
                for x in state.window.iter() {
                    cache.push(s, &x.features);
                }
                cache
            })
            .collect();
        state.shrubs = shrubs;
        state.weights = weights;
        Ok(state)
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn shrubs(&self) -> &[Shrub] {
        &self.shrubs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    /// Feature dimensionality, known once the first sample (or member) is seen.
    pub fn dim(&self) -> Option<usize> {
        self.window
            .dim()
            .or_else(|| self.shrubs.first().map(Shrub::n_features))
    }

    /// `(members, total node count)`.
    pub fn ensemble_size(&self) -> (usize, usize) {
        (
            self.shrubs.len(),
            self.shrubs.iter().map(Shrub::node_count).sum(),
        )
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        match self.dim() {
            Some(d) if d != x.len() => Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            }),
            _ => Ok(()),
        }
    }

    fn check_sample(&self, sample: &Sample) -> Result<()> {
        self.check_dim(&sample.features)?;
        if sample.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite feature value"));
        }
        if sample.label >= self.config.n_classes {
            return Err(Error::LabelOutOfRange {
                label: sample.label,
                classes: self.config.n_classes,
            });
        }
        Ok(())
    }

    /// Weighted vote `sum_i w_i h_i(x)`; uniform when the ensemble is empty.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let c = self.config.n_classes;
        if self.shrubs.is_empty() {
            return Ok(vec![1.0 / c as f64; c]);
        }
        let mut out = vec![0.0; c];
        for (shrub, &w) in self.shrubs.iter().zip(&self.weights) {
            for (o, p) in out.iter_mut().zip(shrub.distribution(x)) {
                *o += w * p;
            }
        }
        Ok(out)
    }

    /// Arg-max of [`predict`](Self::predict), lowest class index on ties.
    pub fn predict_class(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict(x)?))
    }

    /// Appends to the window and keeps the sorted columns and the per-member
    /// leaf caches aligned with it.
    fn push_sample(&mut self, sample: Sample) -> Result<()> {
        if self.next_id == 0 {
            self.sorted = SortedColumns::new(sample.dim());
        }
        let id = self.next_id;
        for (shrub, cache) in self.shrubs.iter().zip(&mut self.caches) {
            cache.push(shrub, &sample.features);
        }
        self.sorted.insert(&sample, id);
        self.next_id += 1;
        if let Some(evicted) = self.window.push(sample)? {
            let evicted_id = id - self.window.capacity() as u64;
            self.sorted.remove(&evicted, evicted_id);
            for cache in &mut self.caches {
                cache.leaves.pop_front();
            }
        }
        Ok(())
    }

    /// Processes one sample.
    pub fn step(&mut self, sample: Sample) -> Result<StepOutcome> {
        self.check_sample(&sample)?;
        self.push_sample(sample)?;
        self.items_seen += 1;
        let mut outcome = StepOutcome::default();

        if (self.items_seen - 1) % self.config.train_every as u64 == 0 {
            let first_id = self.next_id - self.window.len() as u64;
            let (shrub, assignment) = fit_presorted(
                self.window.as_slice(),
                &self.sorted,
                first_id,
                &self.config.shrub,
                self.config.n_classes,
                &mut self.rng,
            )?;
            let mut cache = LeafCache::new(&shrub);
            cache.leaves = assignment.into_iter().map(|id| cache.ordinal[id]).collect();
            self.shrubs.push(shrub);
            self.weights.push(0.0);
            self.caches.push(cache);
            outcome.trained = true;
        }
        if self.shrubs.is_empty() {
            return Ok(outcome);
        }

        for cache in &mut self.caches {
            cache.leaves.make_contiguous();
        }
        let labels: Vec<usize> = self.window.iter().map(|s| s.label).collect();
        let (_, grad) = gradient_core(
            self.config.loss,
            &self.weights,
            self.config.n_classes,
            &labels,
            &members(&self.caches),
        );
        let stepped: Vec<f64> = self
            .weights
            .iter()
            .zip(&grad)
            .map(|(w, g)| w - self.config.alpha * g)
            .collect();

        let projection = project_sparse_simplex(&stepped, self.config.budget())?;
        let newest = self.shrubs.len() - 1;
        let mut slots: Vec<Option<(Shrub, LeafCache)>> = self
            .shrubs
            .drain(..)
            .zip(self.caches.drain(..))
            .map(Some)
            .collect();
        self.weights.clear();
        for &i in &projection.order {
            let w = projection.weights[i];
            if w > 0.0 {
                let (shrub, cache) = slots[i].take().expect("permutation");
                self.shrubs.push(shrub);
                self.caches.push(cache);
                self.weights.push(w);
                if outcome.trained && i == newest {
                    outcome.added = true;
                }
            } else {
                outcome.pruned += 1;
            }
        }
        Ok(outcome)
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Loss and weight gradient for `loss` over `batch`.
pub fn loss_gradient<'a>(
    loss: Loss,
    shrubs: &[Shrub],
    weights: &[f64],
    batch: impl IntoIterator<Item = &'a Sample>,
    n_classes: usize,
) -> Result<(f64, Vec<f64>)> {
    if shrubs.len() != weights.len() {
        return Err(Error::domain("shrubs and weights differ in length"));
    }
    if n_classes < 2 {
        return Err(Error::domain("need at least 2 classes"));
    }
    if let Some(s) = shrubs.iter().find(|s| s.n_classes() != n_classes) {
        return Err(Error::domain(format!(
            "shrub predicts {} classes, expected {n_classes}",
            s.n_classes()
        )));
    }
    let batch: Vec<&Sample> = batch.into_iter().collect();
    if batch.is_empty() {
        return Err(Error::domain("loss over an empty batch"));
    }
    for sample in &batch {
        if sample.label >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: sample.label,
                classes: n_classes,
            });
        }
        if let Some(s) = shrubs.iter().find(|s| s.n_features() != sample.dim()) {
            return Err(Error::DimensionMismatch {
                expected: s.n_features(),
                got: sample.dim(),
            });
        }
    }
    let caches: Vec<LeafCache> = shrubs
        .iter()
        .map(|s| {
            let mut cache = LeafCache::new(s);
            for x in &batch {
                cache.push(s, &x.features);
            }
            cache.leaves.make_contiguous();
            cache
        })
        .collect();
    let labels: Vec<usize> = batch.iter().map(|s| s.label).collect();
    Ok(gradient_core(loss, weights, n_classes, &labels, &members(&caches)))
}

fn members(caches: &[LeafCache]) -> Vec<Member<'_>> {
    caches
        .iter()
        .map(|m| (m.leaves.as_slices().0, m.table.as_slice()))
        .collect()
}

/// Mean squared error `1/(|B| C) sum ||f(x) - y||^2` and its weight gradient
/// `2/(|B| C) sum_i sum_c (f(x_i)_c - y_ic) h_j(x_i)_c`.
pub fn mse_loss_gradient<'a>(
    shrubs: &[Shrub],
    weights: &[f64],
    batch: impl IntoIterator<Item = &'a Sample>,
    n_classes: usize,
) -> Result<(f64, Vec<f64>)> {
    loss_gradient(Loss::Mse, shrubs, weights, batch, n_classes)
}

/// Cross-entropy of the softmax of the raw ensemble output,
/// `-(1/|B|) sum log softmax(f(x_i))_{y_i}`, and its weight gradient
/// `(1/|B|) sum_i sum_c (softmax(f(x_i))_c - y_ic) h_j(x_i)_c`.
pub fn ce_loss_gradient<'a>(
    shrubs: &[Shrub],
    weights: &[f64],
    batch: impl IntoIterator<Item = &'a Sample>,
    n_classes: usize,
) -> Result<(f64, Vec<f64>)> {
    loss_gradient(Loss::CrossEntropy, shrubs, weights, batch, n_classes)
}

/// Fills `r` with `f - y` and returns `||f - y||^2`.
fn mse_residual(f: &[f64], y: usize, r: &mut [f64]) -> f64 {
    let mut l = 0.0;
    for c in 0..f.len() {
        let target = if c == y { 1.0 } else { 0.0 };
        r[c] = f[c] - target;
        l += r[c] * r[c];
    }
    l
}

/// Fills `r` with `softmax(f) - y` and returns `-log softmax(f)_y`.
fn ce_residual(f: &[f64], y: usize, r: &mut [f64]) -> f64 {
    let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = f.iter().map(|v| (v - max).exp()).sum();
    let log_z = max + z.ln();
    for c in 0..f.len() {
        let p = (f[c] - log_z).exp();
        r[c] = p - if c == y { 1.0 } else { 0.0 };
    }
    log_z - f[y]
}

/// Calls `$f::<C>` for the common class counts so the per-row loops get a
/// fixed trip count, and `$f::<0>` (runtime width) otherwise.
macro_rules! dispatch {
    ($c:expr, $f:ident, ($($arg:expr),*)) => {
        match $c {
            2 => $f::<2>($c, $($arg),*),
            3 => $f::<3>($c, $($arg),*),
            4 => $f::<4>($c, $($arg),*),
            5 => $f::<5>($c, $($arg),*),
            6 => $f::<6>($c, $($arg),*),
            7 => $f::<7>($c, $($arg),*),
            8 => $f::<8>($c, $($arg),*),
            10 => $f::<10>($c, $($arg),*),
            _ => $f::<0>($c, $($arg),*),
        }
    };
}

/// `f_i += w * table[leaf_i]` for every row.
#[inline(always)]
fn accumulate<const C: usize>(c: usize, f: &mut [f64], leaves: &[u32], table: &[f64], w: f64) {
    let c = if C == 0 { c } else { C };
    for (fi, &leaf) in f.chunks_exact_mut(c).zip(leaves) {
        let k = leaf as usize * c;
        for (fc, hc) in fi.iter_mut().zip(&table[k..k + c]) {
            *fc += w * hc;
        }
    }
}

/// `sum_i <r_i, table[leaf_i]>`, accumulated per class.
#[inline(always)]
fn correlate<const C: usize>(c: usize, r: &[f64], leaves: &[u32], table: &[f64]) -> f64 {
    let c = if C == 0 { c } else { C };
    let mut acc = [0.0; 16];
    if c <= 16 {
        for (ri, &leaf) in r.chunks_exact(c).zip(leaves) {
            let k = leaf as usize * c;
            for ((a, x), y) in acc.iter_mut().zip(ri).zip(&table[k..k + c]) {
                *a += x * y;
            }
        }
        return acc[..c].iter().sum();
    }
    let mut g = 0.0;
    for (ri, &leaf) in r.chunks_exact(c).zip(leaves) {
        let k = leaf as usize * c;
        g += ri.iter().zip(&table[k..k + c]).map(|(x, y)| x * y).sum::<f64>();
    }
    g
}

/// Member predictions over a batch: the leaf ordinal of every sample and the
/// leaf distributions laid out `C` per leaf.
type Member<'a> = (&'a [u32], &'a [f64]);

/// Loss and gradient over the samples with `labels`. Inputs are assumed
/// valid and nonempty.
fn gradient_core(
    loss: Loss,
    weights: &[f64],
    n_classes: usize,
    labels: &[usize],
    members: &[Member<'_>],
) -> (f64, Vec<f64>) {
    let residual = match loss {
        Loss::Mse => mse_residual,
        Loss::CrossEntropy => ce_residual,
    };
    let c = n_classes;
    let n = labels.len();
    // ensemble outputs, then residuals in place, one row of C per sample
    let mut f = vec![0.0; n * c];
    for (&w, &(leaves, table)) in weights.iter().zip(members) {
        dispatch!(c, accumulate, (&mut f, leaves, table, w));
    }
    let mut r = vec![0.0; c];
    let mut total = 0.0;
    for (fi, &y) in f.chunks_exact_mut(c).zip(labels) {
        total += residual(fi, y, &mut r);
        fi.copy_from_slice(&r);
    }
    let scale = match loss {
        Loss::Mse => 1.0 / (n as f64 * c as f64),
        Loss::CrossEntropy => 1.0 / n as f64,
    };
    let grad_scale = match loss {
        Loss::Mse => 2.0 * scale,
        Loss::CrossEntropy => scale,
    };
    let grad = members
        .iter()
        .map(|&(leaves, table)| dispatch!(c, correlate, (&f, leaves, table)) * grad_scale)
        .collect();
    (total * scale, grad)
}
