//! Test-then-train evaluation with model-size accounting, written out as a
//! JSON-lines trace.

use shrubs::eval::{estimate_memory, memory_ceiling, test_then_train, write_trace};
use shrubs::streams::{named_generator, DataStream, StreamOptions};
use shrubs::{EnsembleConfig, EnsembleState};

fn main() -> shrubs::Result<()> {
    let n = 10_000;
    let mut stream = named_generator("rbf_m", n, &StreamOptions::default())?.open("rbf_m", 4)?;
    let d = stream.schema().n_features;
    let config = EnsembleConfig {
        max_members: 8,
        window: 128,
        ..EnsembleConfig::new(stream.schema().n_classes)
    };
    let mut model = EnsembleState::new(config.clone())?;
    let trace = test_then_train(&mut model, &mut stream, n, 1_000)?;

    println!("{:>7} {:>8} {:>9}", "items", "acc", "bytes");
    for r in &trace.records {
        println!("{:>7} {:>8.4} {:>9}", r.items_seen, r.cumulative_accuracy, r.model_bytes);
    }
    println!(
        "estimate {} bytes, worst case for this config {} bytes",
        estimate_memory(&model),
        memory_ceiling(&config, d)
    );

    let path = std::env::temp_dir().join("shrubs_trace.jsonl");
    write_trace(&trace.records, &path)?;
    println!("trace in {}", path.display());
    Ok(())
}
