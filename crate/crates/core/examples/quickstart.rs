//! Train an ensemble online on a drifting LED stream and print the
//! prequential accuracy every few thousand items.
//!
//! cargo run --release --example quickstart

use shrubs::streams::{named_generator, DataStream, StreamOptions};
use shrubs::{EnsembleConfig, EnsembleState, Result};

fn main() -> Result<()> {
    let n = 20_000;
    let mut stream = named_generator("led_a", n, &StreamOptions::default())?.open("led_a", 1)?;
    let schema = stream.schema().clone();

    let config = EnsembleConfig {
        max_members: 16,
        window: 256,
        ..EnsembleConfig::new(schema.n_classes)
    };
    let mut model = EnsembleState::new(config)?;

    let mut correct = 0u64;
    for t in 1..=n {
        let sample = stream.next_sample()?.expect("generators never end");
        if model.predict_class(&sample.features)? == sample.label {
            correct += 1;
        }
        model.step(sample)?;
        if t % 2_000 == 0 {
            let (members, nodes) = model.ensemble_size();
            println!(
                "t={t:>6}  acc={:.4}  members={members:>2}  nodes={nodes}",
                correct as f64 / t as f64
            );
        }
    }
    Ok(())
}
