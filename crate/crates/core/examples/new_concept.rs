//! A point the ensemble has never seen, fully grown trees and a large step:
//! the tree fit on the new window is admitted, and when the ensemble is
//! already full it takes the place of the lightest member.

use shrubs::{
    fit_shrub, EnsembleConfig, EnsembleState, RngHandle, Sample, Shrub, ShrubConfig,
};

/// Window of `b - 1` distinct points labelled round-robin, plus `m`
/// incumbents that all predict the wrong class at `x = b - 1`.
fn setup(b: usize, c: usize, m: usize) -> shrubs::Result<(Vec<Sample>, Vec<Shrub>, Vec<f64>)> {
    let window: Vec<Sample> = (0..b - 1).map(|i| Sample::new(vec![i as f64], i % c)).collect();
    let mut shrubs = Vec::new();
    for j in 0..m {
        // nudged copies of the window give distinct thresholds
        let nudged: Vec<Sample> = window
            .iter()
            .map(|s| Sample::new(vec![s.features[0] + 0.1 * j as f64 / m as f64], s.label))
            .collect();
        shrubs.push(fit_shrub(&nudged, &ShrubConfig::fully_grown(), c, &mut RngHandle::new(0))?);
    }
    let total: f64 = (1..=m).map(|j| j as f64).sum();
    let weights = (1..=m).map(|j| j as f64 / total).collect();
    Ok((window, shrubs, weights))
}

fn main() -> shrubs::Result<()> {
    for (b, c, m) in [(4, 2, 1), (8, 3, 2), (16, 5, 3), (16, 2, 4)] {
        for max_members in [m + 1, m] {
            let (window, shrubs, weights) = setup(b, c, m)?;
            let lightest = shrubs[0].clone();
            let alpha = 1.01 * (b * c) as f64 / (4.0 * m as f64);
            let config = EnsembleConfig {
                max_members,
                window: b,
                alpha,
                shrub: ShrubConfig::fully_grown(),
                ..EnsembleConfig::new(c)
            };
            let mut state = EnsembleState::from_parts(config, window, shrubs, weights)?;
            let out = state.step(Sample::new(vec![(b - 1) as f64], (b - 1) % c))?;
            let lightest_kept = state.shrubs().contains(&lightest);
            println!(
                "B={b:<2} C={c} m={m} M={max_members} alpha={alpha:>6.3}  added={}  lightest kept={lightest_kept}  weights {:.3?}",
                out.added,
                state.weights()
            );
        }
    }
    Ok(())
}
