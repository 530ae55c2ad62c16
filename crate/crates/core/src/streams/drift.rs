//! Sigmoid mixing of two concepts.

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::sample::Sample;

use super::Concept;

/// Probability of drawing from the second concept at item `t`:
/// `1 / (1 + exp(-4 (t - position) / width))`.
pub fn drift_probability(t: u64, position: u64, width: u64) -> f64 {
    let z = -4.0 * (t as f64 - position as f64) / width as f64;
    1.0 / (1.0 + z.exp())
}

/// Switches from concept `a` to concept `b` around item `position`.
/// `width = 1` is an abrupt change, larger widths a gradual one.
pub struct DriftSpec<A, B> {
    pub a: A,
    pub b: B,
    pub position: u64,
    pub width: u64,
}

impl<A: Concept, B: Concept> DriftSpec<A, B> {
    pub fn new(a: A, b: B, position: u64, width: u64) -> Result<Self> {
        if position < 1 {
            return Err(Error::config("drift position must be at least 1"));
        }
        if width < 1 {
            return Err(Error::config("drift width must be at least 1"));
        }
        if a.n_features() != b.n_features() || a.n_classes() != b.n_classes() {
            return Err(Error::config("drifting concepts must share d and C"));
        }
        Ok(Self {
            a,
            b,
            position,
            width,
        })
    }

    pub fn next(&self, rng: &mut RngHandle, t: u64) -> Sample {
        if rng.next_f64() < drift_probability(t, self.position, self.width) {
            self.b.draw(rng, t)
        } else {
            self.a.draw(rng, t)
        }
    }
}

impl<A: Concept, B: Concept> Concept for DriftSpec<A, B> {
    fn n_features(&self) -> usize {
        self.a.n_features()
    }

    fn n_classes(&self) -> usize {
        self.a.n_classes()
    }

    fn draw(&self, rng: &mut RngHandle, t: u64) -> Sample {
        self.next(rng, t)
    }
}
