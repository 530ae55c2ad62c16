//! Seven-segment LED digits.
//!
//! Features 0..7 are the segments of a digit (top, top-left, top-right,
//! middle, bottom-left, bottom-right, bottom), each flipped independently
//! with probability `noise_fraction`. Features 7..24 are irrelevant uniform
//! bits. The label is the digit.

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::sample::Sample;

use super::Concept;

pub const LED_RELEVANT: usize = 7;
pub const LED_IRRELEVANT: usize = 17;
pub const LED_FEATURES: usize = LED_RELEVANT + LED_IRRELEVANT;

/// Lit segments per digit.
pub const LED_SEGMENTS: [[u8; 7]; 10] = [
    [1, 1, 1, 0, 1, 1, 1],
    [0, 0, 1, 0, 0, 1, 0],
    [1, 0, 1, 1, 1, 0, 1],
    [1, 0, 1, 1, 0, 1, 1],
    [0, 1, 1, 1, 0, 1, 0],
    [1, 1, 0, 1, 0, 1, 1],
    [1, 1, 0, 1, 1, 1, 1],
    [1, 0, 1, 0, 0, 1, 0],
    [1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 0, 1, 1],
];

#[derive(Debug, Clone, PartialEq)]
pub struct LedConfig {
    pub noise_fraction: f64,
    /// The first `relevant_drift_count` segments trade columns with the
    /// irrelevant bits at 7, 8, ... (segment i moves to column 7 + i).
    pub relevant_drift_count: usize,
}

impl Default for LedConfig {
    fn default() -> Self {
        Self {
            noise_fraction: 0.1,
            relevant_drift_count: 0,
        }
    }
}

impl LedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(Error::config(format!(
                "LED noise must lie in [0, 1), got {}",
                self.noise_fraction
            )));
        }
        if self.relevant_drift_count > LED_RELEVANT {
            return Err(Error::config("LED drift count must be at most 7"));
        }
        Ok(())
    }

    /// Column holding logical attribute `i`.
    fn column(&self, i: usize) -> usize {
        if i < self.relevant_drift_count {
            i + LED_RELEVANT
        } else if i >= LED_RELEVANT && i - LED_RELEVANT < self.relevant_drift_count {
            i - LED_RELEVANT
        } else {
            i
        }
    }

    /// Draws one sample. The item index does not affect a stationary LED.
    pub fn next(&self, rng: &mut RngHandle, _t: u64) -> Sample {
        let digit = rng.below(10);
        let mut features = vec![0.0; LED_FEATURES];
        for (i, &lit) in LED_SEGMENTS[digit].iter().enumerate() {
            let flip = rng.chance(self.noise_fraction);
            features[self.column(i)] = f64::from(lit ^ u8::from(flip));
        }
        for i in LED_RELEVANT..LED_FEATURES {
            features[self.column(i)] = rng.below(2) as f64;
        }
        Sample::new(features, digit)
    }
}

impl Concept for LedConfig {
    fn n_features(&self) -> usize {
        LED_FEATURES
    }

    fn n_classes(&self) -> usize {
        10
    }

    fn draw(&self, rng: &mut RngHandle, t: u64) -> Sample {
        self.next(rng, t)
    }
}

/// Nearest-pattern decoding of seven segment bits (lowest digit on ties).
pub fn led_decode(segments: &[f64]) -> usize {
    let mut best = (usize::MAX, 0);
    for (digit, pattern) in LED_SEGMENTS.iter().enumerate() {
        let dist = pattern
            .iter()
            .zip(segments)
            .filter(|(&p, &s)| f64::from(p) != s)
            .count();
        if dist < best.0 {
            best = (dist, digit);
        }
    }
    best.1
}
