//! Data sources: synthetic drift generators and CSV ingestion.
//!
//! Generators implement [`Concept`], a pure sampling rule driven by an
//! external [`RngHandle`] and the item index. [`GeneratorStream`] pairs a
//! concept with its own generator state to produce an endless
//! [`DataStream`].

mod agrawal;
mod csv;
mod drift;
mod led;
mod rbf;

pub use self::agrawal::{agrawal_label, AgrawalConfig, AGRAWAL_FEATURES};
pub use self::csv::{write_csv, CsvOptions, CsvStream};
pub use self::drift::{drift_probability, DriftSpec};
pub use self::led::{led_decode, LedConfig, LED_SEGMENTS};
pub use self::rbf::{RbfConcept, RbfConfig};

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::sample::Sample;

/// Feature count, class count and a name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSchema {
    pub name: String,
    pub n_features: usize,
    pub n_classes: usize,
}

impl StreamSchema {
    pub fn new(name: impl Into<String>, n_features: usize, n_classes: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::domain("stream needs at least one feature"));
        }
        if n_classes < 2 {
            return Err(Error::domain("stream needs at least two classes"));
        }
        Ok(Self {
            name: name.into(),
            n_features,
            n_classes,
        })
    }
}

/// A source of labeled samples.
pub trait DataStream: Send {
    fn schema(&self) -> &StreamSchema;

    /// Next sample, or `None` once the source is exhausted.
    fn next_sample(&mut self) -> Result<Option<Sample>>;
}

impl<S: DataStream + ?Sized> DataStream for Box<S> {
    fn schema(&self) -> &StreamSchema {
        (**self).schema()
    }

    fn next_sample(&mut self) -> Result<Option<Sample>> {
        (**self).next_sample()
    }
}

/// A sampling rule for synthetic data.
pub trait Concept: Send + Sync {
    fn n_features(&self) -> usize;
    fn n_classes(&self) -> usize;

    /// Draws the sample for item index `t`.
    fn draw(&self, rng: &mut RngHandle, t: u64) -> Sample;
}

impl<C: Concept + ?Sized> Concept for Box<C> {
    fn n_features(&self) -> usize {
        (**self).n_features()
    }

    fn n_classes(&self) -> usize {
        (**self).n_classes()
    }

    fn draw(&self, rng: &mut RngHandle, t: u64) -> Sample {
        (**self).draw(rng, t)
    }
}

/// Endless stream drawing from a [`Concept`] with item index `t = 0, 1, ...`.
pub struct GeneratorStream<C> {
    concept: C,
    schema: StreamSchema,
    rng: RngHandle,
    t: u64,
}

impl<C: Concept> GeneratorStream<C> {
    pub fn new(name: impl Into<String>, concept: C, seed: u64) -> Result<Self> {
        let schema = StreamSchema::new(name, concept.n_features(), concept.n_classes())?;
        Ok(Self {
            concept,
            schema,
            rng: RngHandle::new(seed),
            t: 0,
        })
    }

    pub fn concept(&self) -> &C {
        &self.concept
    }
}

impl<C: Concept> DataStream for GeneratorStream<C> {
    fn schema(&self) -> &StreamSchema {
        &self.schema
    }

    fn next_sample(&mut self) -> Result<Option<Sample>> {
        let s = self.concept.draw(&mut self.rng, self.t);
        self.t += 1;
        Ok(Some(s))
    }
}

impl<C: Concept> Iterator for GeneratorStream<C> {
    type Item = Sample;

    fn next(&mut self) -> Option<Sample> {
        self.next_sample().ok().flatten()
    }
}

/// Serializable description of a synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorConfig {
    Led(LedConfig),
    Agrawal(AgrawalConfig),
    Rbf(RbfConfig),
    Drift {
        a: Box<GeneratorConfig>,
        b: Box<GeneratorConfig>,
        position: u64,
        width: u64,
    },
}

impl GeneratorConfig {
    /// Instantiates the concept. Randomized structure (RBF centroids) is
    /// drawn from `seed`.
    pub fn build(&self, seed: u64) -> Result<Box<dyn Concept>> {
        Ok(match self {
            GeneratorConfig::Led(c) => {
                c.validate()?;
                Box::new(c.clone())
            }
            GeneratorConfig::Agrawal(c) => {
                c.validate()?;
                Box::new(c.clone())
            }
            GeneratorConfig::Rbf(c) => Box::new(c.build(seed)?),
            GeneratorConfig::Drift {
                a,
                b,
                position,
                width,
            } => Box::new(DriftSpec::new(
                a.build(crate::rng::derive_seed(seed, 0xA))?,
                b.build(crate::rng::derive_seed(seed, 0xB))?,
                *position,
                *width,
            )?),
        })
    }

    /// Opens an endless stream named `name`.
    pub fn open(&self, name: &str, seed: u64) -> Result<GeneratorStream<Box<dyn Concept>>> {
        let concept = self.build(crate::rng::derive_seed(seed, 0xC0))?;
        GeneratorStream::new(name, concept, seed)
    }
}

/// Overrides for the built-in named streams.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamOptions {
    /// Item index of the drift center. Defaults to half the run length.
    pub drift_position: Option<u64>,
    /// Drift width in items. Defaults to 1 for `_a` and 50 000 for `_g`.
    pub drift_width: Option<u64>,
    /// LED bit-flip probability.
    pub noise: Option<f64>,
    /// Agrawal attribute perturbation.
    pub perturbation: Option<f64>,
}

/// Names accepted by [`named_generator`].
pub const STREAM_NAMES: &[&str] = &[
    "led", "led_a", "led_g", "agrawal", "agrawal_a", "agrawal_g", "rbf", "rbf_f", "rbf_m",
];

/// Default drift width of the gradual (`_g`) variants.
pub const GRADUAL_WIDTH: u64 = 50_000;

/// Built-in generator configurations.
///
/// | name        | d  | C  | concept                                               |
/// |-------------|----|----|-------------------------------------------------------|
/// | `led`       | 24 | 10 | stationary LED digits, 10% segment noise              |
/// | `led_a/g`   | 24 | 10 | LED, all 7 segments swapped with irrelevant bits      |
/// | `agrawal`   | 9  | 2  | function 1, 5% perturbation                           |
/// | `agrawal_a/g`| 9 | 2  | function 1 drifting to function 2                     |
/// | `rbf`       | 10 | 5  | 50 static centroids                                   |
/// | `rbf_f`     | 10 | 5  | 50 centroids moving at 1e-3 per item                  |
/// | `rbf_m`     | 10 | 5  | 50 centroids moving at 1e-4 per item                  |
///
/// Drifting variants place the drift at `n_items / 2` unless overridden.
pub fn named_generator(name: &str, n_items: u64, opts: &StreamOptions) -> Result<GeneratorConfig> {
    let position = opts.drift_position.unwrap_or((n_items / 2).max(1));
    let noise = opts.noise.unwrap_or(0.1);
    let perturbation = opts.perturbation.unwrap_or(0.05);
    let led = |swapped| {
        GeneratorConfig::Led(LedConfig {
            noise_fraction: noise,
            relevant_drift_count: swapped,
        })
    };
    let agrawal = |f| {
        GeneratorConfig::Agrawal(AgrawalConfig {
            function_id: f,
            perturbation,
        })
    };
    let rbf = |speed| {
        GeneratorConfig::Rbf(RbfConfig {
            drift_speed: speed,
            ..RbfConfig::default()
        })
    };
    let drift = |a, b, default_width| GeneratorConfig::Drift {
        a: Box::new(a),
        b: Box::new(b),
        position,
        width: opts.drift_width.unwrap_or(default_width),
    };
    Ok(match name {
        "led" => led(0),
        "led_a" => drift(led(0), led(7), 1),
        "led_g" => drift(led(0), led(7), GRADUAL_WIDTH),
        "agrawal" => agrawal(1),
        "agrawal_a" => drift(agrawal(1), agrawal(2), 1),
        "agrawal_g" => drift(agrawal(1), agrawal(2), GRADUAL_WIDTH),
        "rbf" => rbf(0.0),
        "rbf_f" => rbf(1e-3),
        "rbf_m" => rbf(1e-4),
        other => {
            return Err(Error::config(format!(
                "unknown stream '{other}' (expected one of {})",
                STREAM_NAMES.join(", ")
            )))
        }
    })
}
