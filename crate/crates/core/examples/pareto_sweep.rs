//! Random hyperparameter search on a small grid, then the accuracy/size
//! Pareto front and its normalized area.

use shrubs::eval::{
    normalized_apf, pareto_front, run_sweep, sample_configs, ConfigGrid, SweepOptions,
};
use shrubs::streams::{named_generator, DataStream, StreamOptions};
use shrubs::EnsembleConfig;

fn main() -> shrubs::Result<()> {
    let n_items = 4_000;
    let grid = ConfigGrid::parse("M = 2, 4, 8, 16\nwindow_size = 32, 64, 128\nmax_depth = 2, 4, 8\n")?;
    let configs = sample_configs(&grid, &EnsembleConfig::new(2), 12, 42)?;
    let gen = named_generator("agrawal_a", n_items, &StreamOptions::default())?;
    let open = |_: usize| -> shrubs::Result<Box<dyn DataStream>> {
        Ok(Box::new(gen.open("agrawal_a", 9)?))
    };
    let options = SweepOptions {
        n_items,
        checkpoint_every: 500,
        ..SweepOptions::default()
    };
    let results = run_sweep(&configs, open, &options)?;
    for r in &results {
        println!(
            "{}  M={:<3} B={:<4} depth={:<2} acc={:.4} avg_bytes={:.0}",
            r.config_id,
            r.config.max_members,
            r.config.window,
            r.config.shrub.max_depth.unwrap_or(0),
            r.final_acc,
            r.avg_bytes
        );
    }

    let points: Vec<_> = results.iter().map(|r| r.pareto_point()).collect();
    let front = pareto_front(&points)?;
    println!("\nfront:");
    for p in &front {
        println!("  {} acc={:.4} bytes={}", p.config_id, p.accuracy, p.size_bytes);
    }
    let max = points.iter().map(|p| p.size_bytes).max().unwrap_or(1);
    println!("normalized APF {:.4}", normalized_apf(&points, max)?);
    Ok(())
}
