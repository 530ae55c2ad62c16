//! Look at the built-in generators: schema, class balance and how an abrupt
//! drift changes what a fixed model sees.

use shrubs::streams::{named_generator, write_csv, DataStream, StreamOptions, STREAM_NAMES};
use shrubs::{EnsembleConfig, EnsembleState};

fn main() -> shrubs::Result<()> {
    for name in STREAM_NAMES {
        let mut s = named_generator(name, 10_000, &StreamOptions::default())?.open(name, 0)?;
        let c = s.schema().n_classes;
        let mut hist = vec![0u32; c];
        for _ in 0..5_000 {
            hist[s.next_sample()?.unwrap().label] += 1;
        }
        println!("{name:<10} d={:<3} C={c:<3} labels {hist:?}", s.schema().n_features);
    }

    // Train on the first half of led_a, freeze, then score both halves.
    let opts = StreamOptions {
        drift_position: Some(5_000),
        ..StreamOptions::default()
    };
    let mut s = named_generator("led_a", 10_000, &opts)?.open("led_a", 2)?;
    let mut model = EnsembleState::new(EnsembleConfig::new(10))?;
    let mut before = 0;
    let mut after = 0;
    for t in 0..10_000 {
        let x = s.next_sample()?.unwrap();
        let hit = model.predict_class(&x.features)? == x.label;
        if t < 5_000 {
            before += usize::from(hit && t >= 4_000);
            model.step(x)?;
        } else {
            after += usize::from(hit && t < 6_000);
        }
    }
    println!("\nfrozen model: acc {:.3} just before drift, {:.3} just after", before as f64 / 1e3, after as f64 / 1e3);

    let path = std::env::temp_dir().join("shrubs_rbf.csv");
    let mut rbf = named_generator("rbf", 100, &StreamOptions::default())?.open("rbf", 0)?;
    let rows = write_csv(&mut rbf, 100, &path)?;
    println!("wrote {rows} rbf rows to {}", path.display());
    Ok(())
}
