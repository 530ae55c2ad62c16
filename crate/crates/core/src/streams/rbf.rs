//! Random radial-basis-function generator with moving centroids.
//!
//! Centroids get uniform random centers in `[0, 1]^d`, classes assigned
//! round-robin, and a per-centroid standard deviation in `[0, max_stddev]`.
//! A sample picks a centroid uniformly and adds an isotropic Gaussian offset.
//! With `drift_speed > 0` each centroid moves along a fixed random unit
//! direction, reflecting off the faces of the unit cube, so its position is
//! a closed-form function of the item index.

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::sample::Sample;

use super::Concept;

#[derive(Debug, Clone, PartialEq)]
pub struct RbfConfig {
    pub centroid_count: usize,
    pub n_features: usize,
    pub n_classes: usize,
    /// Displacement per item per centroid.
    pub drift_speed: f64,
    pub max_stddev: f64,
    /// Minimum pairwise distance between centroid centers (rejection sampled).
    pub min_separation: f64,
}

impl Default for RbfConfig {
    fn default() -> Self {
        Self {
            centroid_count: 50,
            n_features: 10,
            n_classes: 5,
            drift_speed: 0.0,
            max_stddev: 0.1,
            min_separation: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Centroid {
    center: Vec<f64>,
    direction: Vec<f64>,
    class: usize,
    stddev: f64,
}

/// An instantiated RBF concept.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfConcept {
    centroids: Vec<Centroid>,
    drift_speed: f64,
    n_classes: usize,
}

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

impl RbfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 || self.n_classes < 2 {
            return Err(Error::config("RBF needs d >= 1 and C >= 2"));
        }
        if self.centroid_count < self.n_classes {
            return Err(Error::config(format!(
                "RBF needs at least as many centroids ({}) as classes ({})",
                self.centroid_count, self.n_classes
            )));
        }
        if !(self.drift_speed >= 0.0) || !(self.max_stddev >= 0.0) || !(self.min_separation >= 0.0) {
            return Err(Error::config("RBF speed, stddev and separation must be >= 0"));
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<RbfConcept> {
        self.validate()?;
        let mut rng = RngHandle::new(seed);
        let d = self.n_features;
        let mut centroids: Vec<Centroid> = Vec::with_capacity(self.centroid_count);
        let mut attempts = 0;
        while centroids.len() < self.centroid_count {
            attempts += 1;
            if attempts > MAX_PLACEMENT_ATTEMPTS {
                return Err(Error::config(format!(
                    "could not place {} centroids {} apart",
                    self.centroid_count, self.min_separation
                )));
            }
            let center: Vec<f64> = (0..d).map(|_| rng.next_f64()).collect();
            let too_close = centroids
                .iter()
                .any(|c| distance(&c.center, &center) <= self.min_separation);
            if self.min_separation > 0.0 && too_close {
                continue;
            }
            let mut direction: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
            let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            direction.iter_mut().for_each(|v| *v /= norm);
            let class = centroids.len() % self.n_classes;
            let stddev = rng.uniform(0.0, self.max_stddev);
            centroids.push(Centroid {
                center,
                direction,
                class,
                stddev,
            });
        }
        Ok(RbfConcept {
            centroids,
            drift_speed: self.drift_speed,
            n_classes: self.n_classes,
        })
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Folds `x` into `[0, 1]` as a particle bouncing between the walls.
fn reflect(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y > 1.0 {
        2.0 - y
    } else {
        y
    }
}

impl RbfConcept {
    pub fn centroid_count(&self) -> usize {
        self.centroids.len()
    }

    pub fn centroid_class(&self, i: usize) -> usize {
        self.centroids[i].class
    }

    pub fn centroid_stddev(&self, i: usize) -> f64 {
        self.centroids[i].stddev
    }

    /// Center of centroid `i` at item index `t`.
    pub fn centroid_position(&self, i: usize, t: u64) -> Vec<f64> {
        let c = &self.centroids[i];
        if self.drift_speed == 0.0 {
            return c.center.clone();
        }
        let travel = self.drift_speed * t as f64;
        c.center
            .iter()
            .zip(&c.direction)
            .map(|(&p, &dir)| reflect(p + dir * travel))
            .collect()
    }

    pub fn next(&self, rng: &mut RngHandle, t: u64) -> Sample {
        let i = rng.below(self.centroids.len());
        let c = &self.centroids[i];
        let mut x = self.centroid_position(i, t);
        for v in x.iter_mut() {
            *v += rng.gaussian() * c.stddev;
        }
        Sample::new(x, c.class)
    }
}

impl Concept for RbfConcept {
    fn n_features(&self) -> usize {
        self.centroids[0].center.len()
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn draw(&self, rng: &mut RngHandle, t: u64) -> Sample {
        self.next(rng, t)
    }
}
