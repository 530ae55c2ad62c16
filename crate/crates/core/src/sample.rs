//! Labeled samples, one-hot targets and the sliding window.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// One labeled instance: a dense feature vector and a class index.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Encodes `label` as a one-hot vector of length `n_classes`.
pub fn one_hot(label: usize, n_classes: usize) -> Result<Vec<f64>> {
    if n_classes < 2 {
        return Err(Error::domain(format!(
            "one_hot needs at least 2 classes, got {n_classes}"
        )));
    }
    if label >= n_classes {
        return Err(Error::LabelOutOfRange {
            label,
            classes: n_classes,
        });
    }
    let mut v = vec![0.0; n_classes];
    v[label] = 1.0;
    Ok(v)
}

/// FIFO buffer holding at most `capacity` samples of a fixed dimensionality.
#[derive(Debug, Clone)]
pub struct Window {
    capacity: usize,
    dim: Option<usize>,
    items: VecDeque<Sample>,
}

impl Window {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::domain("window capacity must be at least 1"));
        }
        Ok(Self {
            capacity,
            dim: None,
            items: VecDeque::with_capacity(capacity),
        })
    }

    /// Appends `sample`, evicting the oldest item first when full.
    /// Returns the evicted sample, if any.
    pub fn push(&mut self, sample: Sample) -> Result<Option<Sample>> {
        match self.dim {
            Some(d) if d != sample.dim() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: sample.dim(),
                })
            }
            None => self.dim = Some(sample.dim()),
            _ => {}
        }
        let evicted = if self.items.len() == self.capacity {
            self.items.pop_front()
        } else {
            None
        };
        self.items.push_back(sample);
        Ok(evicted)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() == self.capacity
    }

    /// Feature dimensionality fixed by the first pushed sample.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Oldest-first iteration.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Sample> + Clone {
        self.items.iter()
    }

    /// Contiguous oldest-first view of the contents.
    pub fn as_slice(&mut self) -> &[Sample] {
        self.items.make_contiguous()
    }

    pub fn newest(&self) -> Option<&Sample> {
        self.items.back()
    }
}
