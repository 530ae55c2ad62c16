//! Axis-aligned classification trees ("shrubs") grown on a window of samples.
//!
//! Induction presorts every feature once and keeps, for each feature, the
//! node's samples as a contiguous sorted segment. Splitting a node stably
//! partitions each segment, so a full tree level costs `O(d * n)` after the
//! initial `O(d * n log n)` sort.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitter {
    /// Exhaustive midpoint scan minimizing weighted child Gini impurity.
    BestImpurity,
    /// Uniform random threshold on a random feature with nonzero range.
    RandomThreshold,
}

/// Number of candidate features drawn at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(d))`
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> Result<usize> {
        match self {
            MaxFeatures::All => Ok(n_features),
            MaxFeatures::Sqrt => Ok(ceil_sqrt(n_features).max(1)),
            MaxFeatures::Count(k) if k >= 1 && k <= n_features => Ok(k),
            MaxFeatures::Count(k) => Err(Error::config(format!(
                "max_features {k} outside [1, {n_features}]"
            ))),
        }
    }
}

impl FromStr for Splitter {
    type Err = Error;

    /// `train` (or `best`) and `random`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" | "best" => Ok(Splitter::BestImpurity),
            "random" => Ok(Splitter::RandomThreshold),
            other => Err(Error::config(format!(
                "unknown splitter '{other}', expected train or random"
            ))),
        }
    }
}

impl fmt::Display for Splitter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Splitter::BestImpurity => "train",
            Splitter::RandomThreshold => "random",
        })
    }
}

impl FromStr for MaxFeatures {
    type Err = Error;

    /// `d` (or `all`), `sqrt`, or a positive count.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "d" | "all" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            other => match other.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(MaxFeatures::Count(k)),
                _ => Err(Error::config(format!(
                    "unknown max_features '{other}', expected d, sqrt or a positive integer"
                ))),
            },
        }
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::All => f.write_str("d"),
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::Count(k) => write!(f, "{k}"),
        }
    }
}

fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShrubConfig {
    /// `None` means unbounded.
    pub max_depth: Option<usize>,
    pub splitter: Splitter,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    /// Grow until every leaf is pure (or cannot be split) and emit the one-hot
    /// majority class at each leaf. Overrides `max_depth` and
    /// `min_samples_split`.
    pub fully_grown: bool,
}

impl Default for ShrubConfig {
    fn default() -> Self {
        Self {
            max_depth: Some(8),
            splitter: Splitter::BestImpurity,
            max_features: MaxFeatures::All,
            min_samples_split: 2,
            fully_grown: false,
        }
    }
}

impl ShrubConfig {
    /// Unbounded, pure-leaf trees with one-hot outputs.
    pub fn fully_grown() -> Self {
        Self {
            max_depth: None,
            fully_grown: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::config("max_depth must be at least 1"));
        }
        if self.min_samples_split < 2 {
            return Err(Error::config("min_samples_split must be at least 2"));
        }
        if let MaxFeatures::Count(0) = self.max_features {
            return Err(Error::config("max_features must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        distribution: Box<[f64]>,
        support: usize,
    },
}

/// A fitted tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Shrub {
    nodes: Vec<Node>,
    n_features: usize,
    n_classes: usize,
    depth: usize,
}

impl Shrub {
    /// A single-leaf tree emitting `distribution` everywhere.
    pub fn constant(distribution: Vec<f64>, n_features: usize) -> Result<Self> {
        check_distribution(&distribution)?;
        Ok(Self {
            n_classes: distribution.len(),
            nodes: vec![Node::Leaf {
                distribution: distribution.into_boxed_slice(),
                support: 0,
            }],
            n_features,
            depth: 0,
        })
    }

    /// Builds a tree from raw nodes, checking structure and leaf payloads.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize, n_classes: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::domain("tree needs at least one node"));
        }
        let mut parent_count = vec![0usize; nodes.len()];
        for node in &nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features || !threshold.is_finite() {
                        return Err(Error::domain("invalid split node"));
                    }
                    for &c in [left, right] {
                        if c == 0 || c >= nodes.len() {
                            return Err(Error::domain("child index out of range"));
                        }
                        parent_count[c] += 1;
                    }
                }
                Node::Leaf { distribution, .. } => {
                    if distribution.len() != n_classes {
                        return Err(Error::domain("leaf distribution has wrong length"));
                    }
                    check_distribution(distribution)?;
                }
            }
        }
        if parent_count[1..].iter().any(|&p| p != 1) {
            return Err(Error::domain("nodes do not form a single rooted tree"));
        }
        let mut shrub = Self {
            nodes,
            n_features,
            n_classes,
            depth: 0,
        };
        shrub.depth = shrub.compute_depth();
        Ok(shrub)
    }

    fn compute_depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            best = best.max(depth);
            if let Node::Split { left, right, .. } = self.nodes[id] {
                stack.push((left, depth + 1));
                stack.push((right, depth + 1));
            }
        }
        best
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Index of the leaf that `x` is routed to. No dimension check.
    pub(crate) fn leaf_index(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return id,
            }
        }
    }

    /// Leaf distribution reached by `x`. No dimension check.
    pub(crate) fn distribution(&self, x: &[f64]) -> &[f64] {
        self.leaf_distribution(self.leaf_index(x))
    }

    /// Distribution stored at leaf node `id`.
    pub(crate) fn leaf_distribution(&self, id: usize) -> &[f64] {
        match &self.nodes[id] {
            Node::Leaf { distribution, .. } => distribution,
            Node::Split { .. } => panic!("node {id} is not a leaf"),
        }
    }

    /// Class distribution for `x`.
    pub fn predict(&self, x: &[f64]) -> Result<&[f64]> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.distribution(x))
    }

    /// Indented text dump, one node per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let pad = "  ".repeat(depth);
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let _ = writeln!(out, "{pad}split f{feature} <= {threshold}");
                    stack.push((*right, depth + 1));
                    stack.push((*left, depth + 1));
                }
                Node::Leaf {
                    distribution,
                    support,
                } => {
                    let _ = writeln!(out, "{pad}leaf n={support} {distribution:?}");
                }
            }
        }
        out
    }
}

fn check_distribution(dist: &[f64]) -> Result<()> {
    let sum: f64 = dist.iter().sum();
    if dist.is_empty() || dist.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "leaf distribution {dist:?} is not a probability vector"
        )));
    }
    Ok(())
}

/// Convenience wrapper returning an owned prediction.
pub fn predict_shrub(shrub: &Shrub, x: &[f64]) -> Result<Vec<f64>> {
    shrub.predict(x).map(<[f64]>::to_vec)
}

pub fn node_count(shrub: &Shrub) -> usize {
    shrub.node_count()
}

/// Gini impurity `1 - sum_c p_c^2` of a class-count vector.
pub fn gini_impurity(class_counts: &[usize]) -> Result<f64> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::domain("gini of an empty node"));
    }
    let t = total as f64;
    Ok(1.0 - class_counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

/// Fits a tree on `window`.
pub fn fit_shrub(
    window: &[Sample],
    config: &ShrubConfig,
    n_classes: usize,
    rng: &mut RngHandle,
) -> Result<Shrub> {
    fit_with_assignment(window, config, n_classes, rng).map(|(s, _)| s)
}

/// Fits a tree and also returns, for every training sample, the index of the
/// leaf it ends up in.
pub(crate) fn fit_with_assignment(
    window: &[Sample],
    config: &ShrubConfig,
    n_classes: usize,
    rng: &mut RngHandle,
) -> Result<(Shrub, Vec<usize>)> {
    let k = check_window(window, config, n_classes)?;
    let d = window[0].dim();
    let mut order = Vec::with_capacity(window.len() * d);
    for f in 0..d {
        let start = order.len();
        order.extend(window.iter().enumerate().map(|(i, s)| Entry {
            value: s.features[f],
            idx: i as u32,
            label: s.label as u32,
        }));
        order[start..].sort_unstable_by(|a, b| a.value.total_cmp(&b.value).then(a.idx.cmp(&b.idx)));
    }
    Ok(Builder::new(window.len(), d, config, n_classes, k, order).build(rng))
}

/// Same as [`fit_with_assignment`] but reuses per-feature sort orders kept
/// in `sorted`, whose ids run from `first_id` for `window[0]` upwards.
pub(crate) fn fit_presorted(
    window: &[Sample],
    sorted: &SortedColumns,
    first_id: u64,
    config: &ShrubConfig,
    n_classes: usize,
    rng: &mut RngHandle,
) -> Result<(Shrub, Vec<usize>)> {
    let k = check_window(window, config, n_classes)?;
    let d = window[0].dim();
    if sorted.columns.len() != d || sorted.len() != window.len() {
        return Err(Error::domain("sorted columns out of sync with the window"));
    }
    let order: Vec<Entry> = sorted
        .columns
        .iter()
        .flatten()
        .map(|e| Entry {
            value: e.value,
            idx: (e.id - first_id) as u32,
            label: e.label,
        })
        .collect();
    Ok(Builder::new(window.len(), d, config, n_classes, k, order).build(rng))
}

/// Validates a training window and returns the resolved feature count.
fn check_window(window: &[Sample], config: &ShrubConfig, n_classes: usize) -> Result<usize> {
    config.validate()?;
    if window.is_empty() {
        return Err(Error::domain("cannot fit a shrub on an empty window"));
    }
    if n_classes < 2 {
        return Err(Error::domain("need at least 2 classes"));
    }
    let d = window[0].dim();
    for s in window {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
        if s.label >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: s.label,
                classes: n_classes,
            });
        }
        if s.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite feature value"));
        }
    }
    config.max_features.resolve(d)
}

#[derive(Debug, Clone, Copy)]
struct Keyed {
    value: f64,
    id: u64,
    label: u32,
}

impl Keyed {
    fn cmp_key(&self, value: f64, id: u64) -> std::cmp::Ordering {
        self.value.total_cmp(&value).then(self.id.cmp(&id))
    }
}

/// Every feature column of a sliding window kept sorted by `(value, id)`,
/// updated in `O(d * n)` per insertion or removal instead of re-sorting.
#[derive(Debug, Clone, Default)]
pub(crate) struct SortedColumns {
    columns: Vec<Vec<Keyed>>,
}

impl SortedColumns {
    pub(crate) fn new(d: usize) -> Self {
        Self {
            columns: vec![Vec::new(); d],
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub(crate) fn insert(&mut self, sample: &Sample, id: u64) {
        for (col, &value) in self.columns.iter_mut().zip(&sample.features) {
            let pos = col.partition_point(|e| e.cmp_key(value, id).is_lt());
            col.insert(
                pos,
                Keyed {
                    value,
                    id,
                    label: sample.label as u32,
                },
            );
        }
    }

    pub(crate) fn remove(&mut self, sample: &Sample, id: u64) {
        for (col, &value) in self.columns.iter_mut().zip(&sample.features) {
            if let Ok(pos) = col.binary_search_by(|e| e.cmp_key(value, id)) {
                col.remove(pos);
            }
        }
    }
}

struct Builder<'a> {
    config: &'a ShrubConfig,
    n: usize,
    d: usize,
    n_classes: usize,
    max_features: usize,
    /// `order[f * n .. (f + 1) * n]` holds the samples sorted by feature f,
    /// with each tree node owning one contiguous range in every feature.
    order: Vec<Entry>,
    goes_left: Vec<bool>,
    scratch: Vec<Entry>,
    nodes: Vec<Node>,
    assignment: Vec<usize>,
}

/// One sample's value for a single feature, packed for sequential scans.
#[derive(Clone, Copy)]
struct Entry {
    value: f64,
    idx: u32,
    label: u32,
}

struct Pending {
    id: usize,
    start: usize,
    end: usize,
    depth: usize,
    /// A feature whose segment is known to hold exactly this node's samples.
    /// Nodes that cannot split only get their parent's split feature
    /// partitioned.
    feature: usize,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    n_left: usize,
}

impl<'a> Builder<'a> {
    fn new(
        n: usize,
        d: usize,
        config: &'a ShrubConfig,
        n_classes: usize,
        k: usize,
        order: Vec<Entry>,
    ) -> Self {
        Self {
            config,
            n,
            d,
            n_classes,
            max_features: k,
            order,
            goes_left: vec![false; n],
            scratch: vec![
                Entry {
                    value: 0.0,
                    idx: 0,
                    label: 0,
                };
                n
            ],
            nodes: Vec::new(),
            assignment: vec![0; n],
        }
    }

    fn segment(&self, f: usize, start: usize, end: usize) -> &[Entry] {
        &self.order[f * self.n + start..f * self.n + end]
    }

    fn build(mut self, rng: &mut RngHandle) -> (Shrub, Vec<usize>) {
        self.nodes.push(placeholder());
        let mut stack = vec![Pending {
            id: 0,
            start: 0,
            end: self.n,
            depth: 0,
            feature: 0,
        }];
        let mut max_depth = 0;
        let mut counts = vec![0usize; self.n_classes];
        while let Some(p) = stack.pop() {
            max_depth = max_depth.max(p.depth);
            counts.iter_mut().for_each(|c| *c = 0);
            for e in self.segment(p.feature, p.start, p.end) {
                counts[e.label as usize] += 1;
            }
            let size = p.end - p.start;
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let choice = if !pure && self.may_split(p.depth, size) {
                match self.config.splitter {
                    Splitter::BestImpurity => self.best_split(p.start, p.end, &counts, rng),
                    Splitter::RandomThreshold => self.random_split(p.start, p.end, rng),
                }
            } else {
                None
            };
            match choice {
                Some(split) => {
                    let left = self.nodes.len();
                    let right = left + 1;
                    self.nodes.push(placeholder());
                    self.nodes.push(placeholder());
                    self.nodes[p.id] = Node::Split {
                        feature: split.feature,
                        threshold: split.threshold,
                        left,
                        right,
                    };
                    let n_right = size - split.n_left;
                    if self.may_split(p.depth + 1, split.n_left)
                        || self.may_split(p.depth + 1, n_right)
                    {
                        self.partition(p.start, p.end, split.feature, split.n_left);
                    }
                    // the split feature's segment is already ordered left | right
                    let feature = split.feature;
                    let mid = p.start + split.n_left;
                    stack.push(Pending {
                        id: right,
                        start: mid,
                        end: p.end,
                        depth: p.depth + 1,
                        feature,
                    });
                    stack.push(Pending {
                        id: left,
                        start: p.start,
                        end: mid,
                        depth: p.depth + 1,
                        feature,
                    });
                }
                None => {
                    self.nodes[p.id] = self.make_leaf(&counts, size);
                    let base = p.feature * self.n;
                    for i in base + p.start..base + p.end {
                        let idx = self.order[i].idx as usize;
                        self.assignment[idx] = p.id;
                    }
                }
            }
        }
        let shrub = Shrub {
            nodes: self.nodes,
            n_features: self.d,
            n_classes: self.n_classes,
            depth: max_depth,
        };
        (shrub, self.assignment)
    }

    /// Whether a node at `depth` holding `size` samples passes the depth and
    /// size stopping rules (purity is checked separately).
    fn may_split(&self, depth: usize, size: usize) -> bool {
        if size < 2 {
            return false;
        }
        self.config.fully_grown
            || (self.config.max_depth.map_or(true, |m| depth < m)
                && size >= self.config.min_samples_split)
    }

    fn make_leaf(&self, counts: &[usize], size: usize) -> Node {
        let distribution: Vec<f64> = if self.config.fully_grown {
            // majority, lowest index on ties
            let mut best = 0;
            for (c, &cnt) in counts.iter().enumerate() {
                if cnt > counts[best] {
                    best = c;
                }
            }
            let mut v = vec![0.0; self.n_classes];
            v[best] = 1.0;
            v
        } else {
            counts.iter().map(|&c| c as f64 / size as f64).collect()
        };
        Node::Leaf {
            distribution: distribution.into_boxed_slice(),
            support: size,
        }
    }

    fn candidate_features(&self, rng: &mut RngHandle) -> Vec<usize> {
        if self.max_features >= self.d {
            (0..self.d).collect()
        } else {
            rng.sample_without_replacement(self.d, self.max_features)
        }
    }

    fn best_split(
        &self,
        start: usize,
        end: usize,
        counts: &[usize],
        rng: &mut RngHandle,
    ) -> Option<SplitChoice> {
        let mut features = self.candidate_features(rng);
        features.sort_unstable();
        let size = end - start;
        let total: Vec<u64> = counts.iter().map(|&c| c as u64).collect();
        let total_sq: u64 = total.iter().map(|c| c * c).sum();

        // Best split maximizes sL/nL + sR/nR (sX = sum of squared class counts),
        // which is the same as minimizing weighted child Gini. Compared exactly
        // as fractions (sL*nR + sR*nL) / (nL*nR).
        let mut best: Option<(u128, u128, usize, usize)> = None;
        let mut left = vec![0u64; self.n_classes];
        for &f in &features {
            left.iter_mut().for_each(|c| *c = 0);
            let mut s_left = 0u64;
            let mut s_right = total_sq;
            let seg = self.segment(f, start, end);
            if seg[0].value == seg[size - 1].value {
                continue;
            }
            // no candidate lies inside the last run of equal values
            let last = seg[size - 1].value;
            let stop = seg.partition_point(|e| e.value < last);
            for (pos, pair) in seg[..=stop].windows(2).enumerate() {
                let c = pair[0].label as usize;
                let l = left[c];
                s_left += 2 * l + 1;
                s_right -= 2 * (total[c] - l) - 1;
                left[c] = l + 1;
                if pair[0].value < pair[1].value {
                    let n_left = (pos + 1) as u128;
                    let n_right = (size - pos - 1) as u128;
                    let num = s_left as u128 * n_right + s_right as u128 * n_left;
                    let den = n_left * n_right;
                    let better = match best {
                        None => true,
                        Some((bn, bd, _, _)) => num * bd > bn * den,
                    };
                    if better {
                        best = Some((num, den, f, pos));
                    }
                }
            }
        }
        best.map(|(_, _, f, pos)| {
            let seg = self.segment(f, start, end);
            let a = seg[pos].value;
            let b = seg[pos + 1].value;
            let mut threshold = a / 2.0 + b / 2.0;
            if threshold >= b || threshold < a {
                threshold = a;
            }
            SplitChoice {
                feature: f,
                threshold,
                n_left: pos + 1,
            }
        })
    }

    fn random_split(&self, start: usize, end: usize, rng: &mut RngHandle) -> Option<SplitChoice> {
        let features = if self.max_features >= self.d {
            rng.sample_without_replacement(self.d, self.d)
        } else {
            rng.sample_without_replacement(self.d, self.max_features)
        };
        for f in features {
            let seg = self.segment(f, start, end);
            let lo = seg[0].value;
            let hi = seg[seg.len() - 1].value;
            if hi <= lo {
                continue;
            }
            let u = rng.next_open01();
            let mut threshold = lo + u * (hi - lo);
            if threshold >= hi || threshold < lo {
                threshold = lo;
            }
            let n_left = seg.partition_point(|e| e.value <= threshold);
            return Some(SplitChoice {
                feature: f,
                threshold,
                n_left,
            });
        }
        None
    }

    /// Reorders every feature segment so the first `n_left` entries are the
    /// left child's samples, preserving sorted order within each side.
    /// Segments that are constant here stay constant below and are never
    /// read for their order again, so they are left alone.
    fn partition(&mut self, start: usize, end: usize, feature: usize, n_left: usize) {
        let n = self.n;
        for (k, e) in self.order[feature * n + start..feature * n + end]
            .iter()
            .enumerate()
        {
            self.goes_left[e.idx as usize] = k < n_left;
        }
        for f in 0..self.d {
            if f == feature {
                continue;
            }
            let seg = &mut self.order[f * n + start..f * n + end];
            if seg[0].value == seg[seg.len() - 1].value {
                continue;
            }
            // branch-free: every entry is written to both sides and only the
            // matching cursor advances
            let right = &mut self.scratch[..end - start];
            let (mut w, mut k) = (0, 0);
            for r in 0..seg.len() {
                let e = seg[r];
                let left = usize::from(self.goes_left[e.idx as usize]);
                seg[w] = e;
                right[k] = e;
                w += left;
                k += 1 - left;
            }
            seg[w..].copy_from_slice(&right[..k]);
        }
    }
}

fn placeholder() -> Node {
    Node::Leaf {
        distribution: Box::new([]),
        support: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn samples_1d(xs: &[f64], labels: &[usize]) -> Vec<Sample> {
        xs.iter()
            .zip(labels)
            .map(|(&x, &l)| Sample::new(vec![x], l))
            .collect()
    }

    /// Weighted child Gini of splitting `window` at `x[f] <= t`.
    fn weighted_gini(window: &[Sample], f: usize, t: f64, c: usize) -> Option<f64> {
        let mut l = vec![0usize; c];
        let mut r = vec![0usize; c];
        for s in window {
            if s.features[f] <= t {
                l[s.label] += 1
            } else {
                r[s.label] += 1
            }
        }
        let nl: usize = l.iter().sum();
        let nr: usize = r.iter().sum();
        if nl == 0 || nr == 0 {
            return None;
        }
        let n = (nl + nr) as f64;
        Some(
            nl as f64 / n * gini_impurity(&l).unwrap() + nr as f64 / n * gini_impurity(&r).unwrap(),
        )
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini_impurity(&[10, 0]).unwrap(), 0.0);
        assert_eq!(gini_impurity(&[5, 5]).unwrap(), 0.5);
        assert!((gini_impurity(&[3, 1]).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini_impurity(&[0, 0]).is_err());
    }

    #[test]
    fn single_sample_gives_single_leaf() {
        let w = vec![Sample::new(vec![0.3, 0.7], 2)];
        let mut rng = RngHandle::new(0);
        let s = fit_shrub(&w, &ShrubConfig::default(), 3, &mut rng).unwrap();
        assert_eq!(s.node_count(), 1);
        assert_eq!(s.predict(&[5.0, -1.0]).unwrap(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn threshold_stump_on_feature_zero() {
        // class = 1{x0 <= 0.5}
        let xs: Vec<f64> = (0..10).map(|i| i as f64 / 10.0 + 0.05).collect();
        let w: Vec<Sample> = xs
            .iter()
            .map(|&x| Sample::new(vec![x, 1.0 - x * x], usize::from(x <= 0.5)))
            .collect();
        // brute force: some threshold on feature 0 gives two pure leaves
        let pure = xs
            .iter()
            .any(|&t| weighted_gini(&w, 0, t, 2) == Some(0.0));
        assert!(pure);
        let cfg = ShrubConfig {
            max_depth: None,
            ..ShrubConfig::default()
        };
        let s = fit_shrub(&w, &cfg, 2, &mut RngHandle::new(1)).unwrap();
        assert_eq!(s.depth(), 1);
        assert_eq!(s.node_count(), 3);
        for x in &w {
            assert_eq!(s.predict(&x.features).unwrap()[x.label], 1.0);
        }
    }

    #[test]
    fn boundary_routes_left() {
        let nodes = vec![
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2,
            },
            Node::Leaf {
                distribution: vec![1.0, 0.0].into(),
                support: 1,
            },
            Node::Leaf {
                distribution: vec![0.0, 1.0].into(),
                support: 1,
            },
        ];
        let s = Shrub::from_nodes(nodes, 2, 2).unwrap();
        assert_eq!(s.predict(&[0.5, 9.0]).unwrap(), &[1.0, 0.0]);
        assert_eq!(s.predict(&[0.51, 9.0]).unwrap(), &[0.0, 1.0]);
        assert_eq!(s.node_count(), 3);
        assert_eq!(s.depth(), 1);
        assert!(s.predict(&[0.5]).is_err());
    }

    #[test]
    fn constant_tree() {
        let s = Shrub::constant(vec![0.0, 0.0, 1.0], 4).unwrap();
        assert_eq!(node_count(&s), 1);
        assert_eq!(predict_shrub(&s, &[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.0, 0.0, 1.0]);
        assert!(Shrub::constant(vec![0.5, 0.6], 1).is_err());
    }

    #[test]
    fn from_nodes_rejects_broken_structure() {
        let leaf = || Node::Leaf {
            distribution: vec![1.0, 0.0].into(),
            support: 1,
        };
        let bad = vec![
            Node::Split {
                feature: 0,
                threshold: 0.0,
                left: 1,
                right: 1,
            },
            leaf(),
        ];
        assert!(Shrub::from_nodes(bad, 1, 2).is_err());
        let orphan = vec![leaf(), leaf()];
        assert!(Shrub::from_nodes(orphan, 1, 2).is_err());
    }

    #[test]
    fn empty_window_is_an_error() {
        assert!(fit_shrub(&[], &ShrubConfig::default(), 2, &mut RngHandle::new(0)).is_err());
    }

    #[test]
    fn depth_limit_is_respected() {
        let xs: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let labels: Vec<usize> = (0..64).map(|i| i % 2).collect();
        let w = samples_1d(&xs, &labels);
        for depth in 1..5 {
            let cfg = ShrubConfig {
                max_depth: Some(depth),
                ..ShrubConfig::default()
            };
            let s = fit_shrub(&w, &cfg, 2, &mut RngHandle::new(0)).unwrap();
            assert!(s.depth() <= depth);
        }
    }

    #[test]
    fn min_samples_split_stops_growth() {
        let w = samples_1d(&[0.0, 1.0, 2.0], &[0, 1, 0]);
        let cfg = ShrubConfig {
            min_samples_split: 4,
            ..ShrubConfig::default()
        };
        let s = fit_shrub(&w, &cfg, 2, &mut RngHandle::new(0)).unwrap();
        assert_eq!(s.node_count(), 1);
        let d = s.predict(&[0.0]).unwrap();
        assert!((d[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_points_cannot_split() {
        let w = samples_1d(&[1.0, 1.0, 1.0, 1.0], &[0, 1, 0, 1]);
        for splitter in [Splitter::BestImpurity, Splitter::RandomThreshold] {
            let cfg = ShrubConfig {
                splitter,
                ..ShrubConfig::fully_grown()
            };
            let s = fit_shrub(&w, &cfg, 2, &mut RngHandle::new(0)).unwrap();
            assert_eq!(s.node_count(), 1);
            // one-hot majority, lowest index on ties
            assert_eq!(s.predict(&[1.0]).unwrap(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn fully_grown_fits_training_data() {
        let mut rng = RngHandle::new(11);
        let w: Vec<Sample> = (0..50)
            .map(|_| {
                let x = vec![rng.next_f64(), rng.next_f64(), rng.next_f64()];
                let l = rng.below(4);
                Sample::new(x, l)
            })
            .collect();
        for splitter in [Splitter::BestImpurity, Splitter::RandomThreshold] {
            let cfg = ShrubConfig {
                splitter,
                ..ShrubConfig::fully_grown()
            };
            let s = fit_shrub(&w, &cfg, 4, &mut RngHandle::new(2)).unwrap();
            for x in &w {
                let mut want = vec![0.0; 4];
                want[x.label] = 1.0;
                assert_eq!(s.predict(&x.features).unwrap(), want.as_slice());
            }
            assert!(s.node_count() <= 2 * w.len() - 1);
        }
    }

    #[test]
    fn sqrt_features_rounds_up() {
        assert_eq!(MaxFeatures::Sqrt.resolve(10).unwrap(), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(16).unwrap(), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(17).unwrap(), 5);
        assert_eq!(MaxFeatures::Sqrt.resolve(1).unwrap(), 1);
        assert!(MaxFeatures::Count(3).resolve(2).is_err());
    }

    #[test]
    fn assignment_matches_routing() {
        let mut rng = RngHandle::new(4);
        let w: Vec<Sample> = (0..40)
            .map(|_| Sample::new(vec![rng.next_f64(), rng.next_f64()], rng.below(3)))
            .collect();
        let (s, assign) =
            fit_with_assignment(&w, &ShrubConfig::default(), 3, &mut RngHandle::new(0)).unwrap();
        for (x, &leaf) in w.iter().zip(&assign) {
            assert_eq!(s.leaf_index(&x.features), leaf);
        }
    }

    #[test]
    fn dump_lists_every_node() {
        let w = samples_1d(&[0.0, 1.0, 2.0, 3.0], &[0, 0, 1, 1]);
        let s = fit_shrub(&w, &ShrubConfig::default(), 2, &mut RngHandle::new(0)).unwrap();
        let text = s.dump();
        assert_eq!(text.lines().count(), s.node_count());
        assert!(text.starts_with("split f0 <= 1.5"));
    }

    fn arb_window(max_n: usize) -> impl Strategy<Value = (Vec<Sample>, usize)> {
        (1usize..=max_n, 1usize..5, 2usize..5).prop_flat_map(|(n, d, c)| {
            (
                prop::collection::vec(
                    (prop::collection::vec(0u8..6, d), 0..c)
                        .prop_map(|(f, l)| Sample::new(f.into_iter().map(f64::from).collect(), l)),
                    n,
                ),
                Just(c),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn predictions_are_distributions_and_size_bounded(
            (w, c) in arb_window(40),
            seed in any::<u64>(),
            random in any::<bool>(),
            depth in prop::option::of(1usize..6),
            probe in prop::collection::vec(-1.0f64..7.0, 4),
        ) {
            let cfg = ShrubConfig {
                max_depth: depth,
                splitter: if random { Splitter::RandomThreshold } else { Splitter::BestImpurity },
                max_features: MaxFeatures::Sqrt,
                ..ShrubConfig::default()
            };
            let s = fit_shrub(&w, &cfg, c, &mut RngHandle::new(seed)).unwrap();
            prop_assert!(s.node_count() <= 2 * w.len() - 1);
            let d = w[0].dim();
            let p = s.predict(&probe[..d]).unwrap();
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn best_split_beats_every_midpoint((w, c) in arb_window(64)) {
            let cfg = ShrubConfig { max_depth: Some(1), ..ShrubConfig::default() };
            let s = fit_shrub(&w, &cfg, c, &mut RngHandle::new(0)).unwrap();
            if let Node::Split { feature, threshold, .. } = s.nodes()[0] {
                let chosen = weighted_gini(&w, feature, threshold, c).unwrap();
                for f in 0..w[0].dim() {
                    let mut vals: Vec<f64> = w.iter().map(|x| x.features[f]).collect();
                    vals.sort_by(f64::total_cmp);
                    vals.dedup();
                    for pair in vals.windows(2) {
                        let t = (pair[0] + pair[1]) / 2.0;
                        let g = weighted_gini(&w, f, t, c).unwrap();
                        prop_assert!(chosen <= g + 1e-12);
                        // tie-break: every earlier candidate is strictly worse
                        if (f, t) < (feature, threshold) {
                            prop_assert!(g > chosen + 1e-9);
                        }
                    }
                }
            }
        }

        #[test]
        fn fitting_is_deterministic((w, c) in arb_window(30), seed in any::<u64>()) {
            let cfg = ShrubConfig {
                splitter: Splitter::RandomThreshold,
                max_features: MaxFeatures::Sqrt,
                ..ShrubConfig::default()
            };
            let a = fit_shrub(&w, &cfg, c, &mut RngHandle::new(seed)).unwrap();
            let b = fit_shrub(&w, &cfg, c, &mut RngHandle::new(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
