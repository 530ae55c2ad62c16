//! Parallel evaluation of many configurations on independent streams.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::pareto::ParetoPoint;
use super::prequential::{test_then_train_with, EvalOptions};
use crate::ensemble::{EnsembleConfig, EnsembleState};
use crate::error::{Error, Result};
use crate::streams::DataStream;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub n_items: u64,
    pub checkpoint_every: u64,
    /// Configurations whose model ever grows past this are dropped.
    pub max_bytes: Option<u64>,
    /// Worker threads; 0 means one per logical core.
    pub jobs: usize,
    pub timing: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_items: 10_000,
            checkpoint_every: 1_000,
            max_bytes: None,
            jobs: 0,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config_id: String,
    pub config: EnsembleConfig,
    pub final_acc: f64,
    /// Mean model size over checkpoints.
    pub avg_bytes: f64,
    pub final_bytes: u64,
    /// Zero unless timing was requested.
    pub runtime_s: f64,
}

impl SweepResult {
    /// Front coordinate: final accuracy against mean model size.
    pub fn pareto_point(&self) -> ParetoPoint {
        ParetoPoint::new(self.final_acc, self.avg_bytes.round() as u64, self.config_id.clone())
    }
}

/// Runs every configuration on its own stream from `open_stream(index)`.
/// Results keep the order of `configs`; over-budget configurations are
/// left out.
pub fn run_sweep<F>(
    configs: &[EnsembleConfig],
    open_stream: F,
    options: &SweepOptions,
) -> Result<Vec<SweepResult>>
where
    F: Fn(usize) -> Result<Box<dyn DataStream>> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let eval = EvalOptions {
        timing: options.timing,
        max_bytes: options.max_bytes,
    };
    let results: Vec<Option<SweepResult>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, config)| {
                let start = Instant::now();
                let mut stream = open_stream(i)?;
                let mut model = EnsembleState::new(config.clone())?;
                let trace = test_then_train_with(
                    &mut model,
                    &mut stream,
                    options.n_items,
                    options.checkpoint_every,
                    eval,
                )?;
                if trace.exceeded_budget {
                    return Ok(None);
                }
                Ok(Some(SweepResult {
                    config_id: format!("c{i:03}"),
                    config: config.clone(),
                    final_acc: trace.final_accuracy(),
                    avg_bytes: trace.avg_bytes(),
                    final_bytes: trace.final_bytes(),
                    runtime_s: if options.timing {
                        start.elapsed().as_secs_f64()
                    } else {
                        0.0
                    },
                }))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(results.into_iter().flatten().collect())
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

/// One row per result with the sampled hyperparameters and the scores.
pub fn write_summary(results: &[SweepResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let header = [
        "config_id",
        "M",
        "window_size",
        "step_size",
        "max_depth",
        "splitter",
        "max_features",
        "loss",
        "final_acc",
        "avg_bytes",
        "final_bytes",
        "runtime_s",
    ];
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in results {
        let c = &r.config;
        let depth = c
            .shrub
            .max_depth
            .map_or_else(|| "none".to_string(), |d| d.to_string());
        w.write_record([
            r.config_id.clone(),
            c.max_members.to_string(),
            c.window.to_string(),
            c.alpha.to_string(),
            depth,
            c.shrub.splitter.to_string(),
            c.shrub.max_features.to_string(),
            c.loss.to_string(),
            r.final_acc.to_string(),
            r.avg_bytes.to_string(),
            r.final_bytes.to_string(),
            r.runtime_s.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Front points as `config_id,accuracy,size_bytes`, smallest first.
pub fn write_front(front: &[ParetoPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(["config_id", "accuracy", "size_bytes"])
        .map_err(|e| csv_err(path, e))?;
    for p in front {
        w.write_record([
            p.config_id.clone(),
            p.accuracy.to_string(),
            p.size_bytes.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    let mut inner = w.into_inner().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    inner.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{sample_configs, ConfigGrid};
    use crate::streams::{named_generator, StreamOptions};

    fn small_grid() -> ConfigGrid {
        ConfigGrid {
            max_members: vec![2, 4],
            window: vec![16, 32],
            max_depth: vec![2, 4],
            ..ConfigGrid::default()
        }
    }

    fn opener(i: usize) -> Result<Box<dyn DataStream>> {
        let _ = i;
        let gen = named_generator("led_a", 600, &StreamOptions::default())?;
        Ok(Box::new(gen.open("led_a", 5)?))
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let configs = sample_configs(&small_grid(), &EnsembleConfig::new(10), 4, 1).unwrap();
        let options = SweepOptions {
            n_items: 600,
            checkpoint_every: 100,
            jobs: 3,
            ..SweepOptions::default()
        };
        let a = run_sweep(&configs, opener, &options).unwrap();
        let b = run_sweep(&configs, opener, &SweepOptions { jobs: 1, ..options }).unwrap();
        assert_eq!(a, b);
        let ids: Vec<&str> = a.iter().map(|r| r.config_id.as_str()).collect();
        assert_eq!(ids, ["c000", "c001", "c002", "c003"]);
        assert!(a.iter().all(|r| (0.0..=1.0).contains(&r.final_acc)));
    }

    #[test]
    fn tiny_budget_drops_everything() {
        let configs = sample_configs(&small_grid(), &EnsembleConfig::new(10), 3, 2).unwrap();
        let options = SweepOptions {
            n_items: 200,
            checkpoint_every: 50,
            max_bytes: Some(100),
            jobs: 1,
            ..SweepOptions::default()
        };
        assert!(run_sweep(&configs, opener, &options).unwrap().is_empty());
    }

    #[test]
    fn summary_and_front_files() {
        let configs = sample_configs(&small_grid(), &EnsembleConfig::new(10), 2, 3).unwrap();
        let options = SweepOptions {
            n_items: 300,
            checkpoint_every: 100,
            jobs: 1,
            ..SweepOptions::default()
        };
        let results = run_sweep(&configs, opener, &options).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = dir.path().join("s.csv");
        write_summary(&results, &summary).unwrap();
        let text = std::fs::read_to_string(&summary).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "config_id,M,window_size,step_size,max_depth,splitter,max_features,loss,final_acc,avg_bytes,final_bytes,runtime_s"
        );
        assert_eq!(lines.count(), 2);

        let points: Vec<ParetoPoint> = results.iter().map(SweepResult::pareto_point).collect();
        let front = crate::eval::pareto_front(&points).unwrap();
        let path = dir.path().join("f.csv");
        write_front(&front, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), front.len() + 1);
    }
}
