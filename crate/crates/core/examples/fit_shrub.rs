//! Fit a depth-limited tree on a small window and print its structure.

use shrubs::streams::{named_generator, DataStream, StreamOptions};
use shrubs::{fit_shrub, gini_impurity, RngHandle, Sample, ShrubConfig, Splitter};

fn main() -> shrubs::Result<()> {
    let mut stream = named_generator("agrawal", 1_000, &StreamOptions::default())?.open("agrawal", 7)?;
    let window: Vec<Sample> = (0..512)
        .map(|_| stream.next_sample().map(Option::unwrap))
        .collect::<shrubs::Result<_>>()?;

    let mut counts = [0usize; 2];
    for s in &window {
        counts[s.label] += 1;
    }
    println!("window gini {:.4}", gini_impurity(&counts)?);

    for splitter in [Splitter::BestImpurity, Splitter::RandomThreshold] {
        let config = ShrubConfig {
            max_depth: Some(3),
            splitter,
            ..ShrubConfig::default()
        };
        let tree = fit_shrub(&window, &config, 2, &mut RngHandle::new(3))?;
        let hits = window
            .iter()
            .filter(|s| {
                let p = tree.predict(&s.features).unwrap();
                usize::from(p[1] > p[0]) == s.label
            })
            .count();
        println!(
            "\n{splitter} splitter: {} nodes, depth {}, train acc {:.3}",
            tree.node_count(),
            tree.depth(),
            hits as f64 / window.len() as f64
        );
        print!("{}", tree.dump());
    }
    Ok(())
}
