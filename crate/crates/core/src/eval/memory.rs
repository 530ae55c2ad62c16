//! Analytical model-size accounting.
//!
//! The estimate counts everything the learner stores, including the window:
//!
//! ```text
//! bytes = BASE_OVERHEAD_BYTES
//!       + |window| * (d * FEATURE_BYTES + LABEL_BYTES)
//!       + sum over members of node_count * node_bytes(C)
//!       + members * (WEIGHT_BYTES + MEMBER_OVERHEAD_BYTES)
//! node_bytes(C) = NODE_HEADER_BYTES + C * 8
//! ```
//!
//! The constants are fixed so that numbers are comparable across platforms.

use crate::ensemble::{EnsembleConfig, EnsembleState};

pub const FEATURE_BYTES: u64 = 8;
pub const LABEL_BYTES: u64 = 8;
/// Feature index, threshold and two child links.
pub const NODE_HEADER_BYTES: u64 = 24;
pub const WEIGHT_BYTES: u64 = 8;
pub const MEMBER_OVERHEAD_BYTES: u64 = 32;
/// Configuration, counters and the random generator state.
pub const BASE_OVERHEAD_BYTES: u64 = 64;

/// Bytes charged per tree node for a `n_classes`-class problem.
pub fn node_bytes(n_classes: usize) -> u64 {
    NODE_HEADER_BYTES + 8 * n_classes as u64
}

/// Bytes for `items` stored samples of dimensionality `d`.
pub fn window_bytes(items: usize, d: usize) -> u64 {
    items as u64 * (d as u64 * FEATURE_BYTES + LABEL_BYTES)
}

pub fn estimate_memory(state: &EnsembleState) -> u64 {
    let c = state.config().n_classes;
    let d = state.dim().unwrap_or(0);
    let (members, nodes) = state.ensemble_size();
    BASE_OVERHEAD_BYTES
        + window_bytes(state.window().len(), d)
        + nodes as u64 * node_bytes(c)
        + members as u64 * (WEIGHT_BYTES + MEMBER_OVERHEAD_BYTES)
}

/// Largest value [`estimate_memory`] can take between steps for `config` on
/// `d`-dimensional data: full window, `M` members of `2B - 1` nodes each.
pub fn memory_ceiling(config: &EnsembleConfig, d: usize) -> u64 {
    let b = config.window as u64;
    let m = config.max_members as u64;
    BASE_OVERHEAD_BYTES
        + window_bytes(config.window, d)
        + m * (2 * b - 1) * node_bytes(config.n_classes)
        + m * (WEIGHT_BYTES + MEMBER_OVERHEAD_BYTES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;
    use crate::sample::Sample;

    #[test]
    fn fresh_state_is_base_overhead() {
        let st = EnsembleState::new(EnsembleConfig::new(3)).unwrap();
        assert_eq!(estimate_memory(&st), BASE_OVERHEAD_BYTES);
    }

    #[test]
    fn window_term_arithmetic() {
        assert_eq!(window_bytes(64, 10), 64 * 10 * 8 + 64 * LABEL_BYTES);
        assert_eq!(node_bytes(2), 40);
    }

    #[test]
    fn estimate_tracks_state_and_stays_under_ceiling() {
        let cfg = EnsembleConfig {
            max_members: 4,
            window: 16,
            ..EnsembleConfig::new(2)
        };
        let mut st = EnsembleState::new(cfg.clone()).unwrap();
        let mut rng = RngHandle::new(1);
        let ceiling = memory_ceiling(&cfg, 3);
        let mut prev_window = 0;
        for _ in 0..200 {
            let x = vec![rng.next_f64(), rng.next_f64(), rng.next_f64()];
            let label = usize::from(x[0] + rng.uniform(-0.2, 0.2) > 0.5);
            st.step(Sample::new(x, label)).unwrap();
            let est = estimate_memory(&st);
            let (m, nodes) = st.ensemble_size();
            let expected = BASE_OVERHEAD_BYTES
                + window_bytes(st.window().len(), 3)
                + nodes as u64 * node_bytes(2)
                + m as u64 * 40;
            assert_eq!(est, expected);
            assert!(est >= window_bytes(st.window().len(), 3));
            assert!(est <= ceiling);
            assert!(st.window().len() >= prev_window);
            prev_window = st.window().len();
        }
    }
}
