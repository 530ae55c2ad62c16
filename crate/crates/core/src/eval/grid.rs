//! Random search over a discrete hyperparameter grid.

use std::path::Path;

use crate::ensemble::{EnsembleConfig, Loss};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngHandle};
use crate::shrub::{MaxFeatures, Splitter};

/// Admissible values per hyperparameter. Every list must be nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigGrid {
    pub max_members: Vec<usize>,
    pub window: Vec<usize>,
    pub alpha: Vec<f64>,
    pub max_depth: Vec<usize>,
    pub splitter: Vec<Splitter>,
    pub max_features: Vec<MaxFeatures>,
    pub loss: Vec<Loss>,
}

impl Default for ConfigGrid {
    fn default() -> Self {
        Self {
            max_members: vec![4, 8, 16, 32, 64, 128, 256],
            window: (4..=13).map(|k| 1usize << k).collect(),
            alpha: vec![1e-4, 1e-3, 1e-2, 1e-1, 2e-1, 5e-1],
            max_depth: vec![2, 4, 8, 12, 15],
            splitter: vec![Splitter::BestImpurity, Splitter::RandomThreshold],
            max_features: vec![MaxFeatures::All, MaxFeatures::Sqrt],
            loss: vec![Loss::Mse],
        }
    }
}

/// Keys accepted by [`ConfigGrid::parse`].
pub const GRID_KEYS: &[&str] = &[
    "M",
    "window_size",
    "step_size",
    "max_depth",
    "splitter",
    "max_features",
    "loss",
];

fn parse_list<T>(key: &str, raw: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let values = raw
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse(v).map_err(|e| Error::config(format!("grid key {key}: {e}"))))
        .collect::<Result<Vec<T>>>()?;
    if values.is_empty() {
        return Err(Error::config(format!("grid key {key} has no values")));
    }
    Ok(values)
}

fn number<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(format!("'{v}' is not a valid number")))
}

impl ConfigGrid {
    /// Parses `key = v1, v2, ...` lines. Blank lines and `#` comments are
    /// ignored; keys not mentioned keep their default lists.
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = ConfigGrid::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("grid line {}: expected key = values", i + 1))
            })?;
            let key = key.trim();
            match key {
                "M" => grid.max_members = parse_list(key, raw, number)?,
                "window_size" => grid.window = parse_list(key, raw, number)?,
                "step_size" => grid.alpha = parse_list(key, raw, number)?,
                "max_depth" => grid.max_depth = parse_list(key, raw, number)?,
                "splitter" => grid.splitter = parse_list(key, raw, str::parse)?,
                "max_features" => grid.max_features = parse_list(key, raw, str::parse)?,
                "loss" => grid.loss = parse_list(key, raw, str::parse)?,
                other => {
                    return Err(Error::config(format!(
                        "unknown grid key '{other}' (expected one of {})",
                        GRID_KEYS.join(", ")
                    )))
                }
            }
        }
        grid.validate()?;
        Ok(grid)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let lens = [
            ("M", self.max_members.len()),
            ("window_size", self.window.len()),
            ("step_size", self.alpha.len()),
            ("max_depth", self.max_depth.len()),
            ("splitter", self.splitter.len()),
            ("max_features", self.max_features.len()),
            ("loss", self.loss.len()),
        ];
        if let Some((key, _)) = lens.iter().find(|(_, n)| *n == 0) {
            return Err(Error::domain(format!("grid key {key} has an empty value list")));
        }
        Ok(())
    }
}

fn pick<T: Clone>(rng: &mut RngHandle, values: &[T]) -> T {
    values[rng.below(values.len())].clone()
}

/// Draws `n` configurations, each parameter independently and uniformly from
/// its list. Fields absent from the grid are copied from `base`. Config `i`
/// gets model seed `derive_seed(seed ^ i, 2)`.
pub fn sample_configs(
    grid: &ConfigGrid,
    base: &EnsembleConfig,
    n: usize,
    seed: u64,
) -> Result<Vec<EnsembleConfig>> {
    grid.validate()?;
    if n == 0 {
        return Err(Error::domain("need at least one configuration"));
    }
    let mut rng = RngHandle::new(derive_seed(seed, 3));
    let configs = (0..n)
        .map(|i| {
            let mut cfg = base.clone();
            cfg.max_members = pick(&mut rng, &grid.max_members);
            cfg.window = pick(&mut rng, &grid.window);
            cfg.alpha = pick(&mut rng, &grid.alpha);
            cfg.shrub.max_depth = Some(pick(&mut rng, &grid.max_depth));
            cfg.shrub.splitter = pick(&mut rng, &grid.splitter);
            cfg.shrub.max_features = pick(&mut rng, &grid.max_features);
            cfg.loss = pick(&mut rng, &grid.loss);
            cfg.seed = derive_seed(seed ^ i as u64, 2);
            cfg
        })
        .collect();
    Ok(configs)
}
