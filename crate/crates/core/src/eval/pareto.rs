//! Accuracy/size Pareto fronts and the normalized area under them.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoPoint {
    pub accuracy: f64,
    pub size_bytes: u64,
    pub config_id: String,
}

impl ParetoPoint {
    pub fn new(accuracy: f64, size_bytes: u64, config_id: impl Into<String>) -> Self {
        Self {
            accuracy,
            size_bytes,
            config_id: config_id.into(),
        }
    }

    /// At least as accurate and at most as large, strictly better in one.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.accuracy >= other.accuracy
            && self.size_bytes <= other.size_bytes
            && (self.accuracy > other.accuracy || self.size_bytes < other.size_bytes)
    }
}

/// Non-dominated points sorted by size ascending. Points with identical
/// accuracy and size are kept once (first occurrence).
pub fn pareto_front(points: &[ParetoPoint]) -> Result<Vec<ParetoPoint>> {
    if points.is_empty() {
        return Err(Error::domain("Pareto front of an empty set"));
    }
    if let Some(p) = points.iter().find(|p| p.accuracy.is_nan()) {
        return Err(Error::domain(format!("NaN accuracy for {}", p.config_id)));
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .size_bytes
            .cmp(&points[b].size_bytes)
            .then(points[b].accuracy.total_cmp(&points[a].accuracy))
            .then(a.cmp(&b))
    });
    let mut front: Vec<ParetoPoint> = Vec::new();
    for i in idx {
        let p = &points[i];
        if front.last().map_or(true, |best| p.accuracy > best.accuracy) {
            front.push(p.clone());
        }
    }
    Ok(front)
}

/// Area under the best-accuracy-within-budget step function over budgets
/// normalized by `max_size_bytes`, integrated on `[0, 1]`.
///
/// With front sizes `s_1 < ... < s_k` (normalized) and accuracies `a_i`, the
/// value is `sum_i a_i * (s_{i+1} - s_i)` with `s_{k+1} = 1`.
pub fn normalized_apf(points: &[ParetoPoint], max_size_bytes: u64) -> Result<f64> {
    if max_size_bytes == 0 {
        return Err(Error::domain("normalizing size must be positive"));
    }
    if let Some(p) = points.iter().find(|p| p.size_bytes > max_size_bytes) {
        return Err(Error::domain(format!(
            "point {} has size {} above the normalizing size {max_size_bytes}",
            p.config_id, p.size_bytes
        )));
    }
    let front = pareto_front(points)?;
    let mut area = 0.0;
    for (i, p) in front.iter().enumerate() {
        let next = front.get(i + 1).map_or(max_size_bytes, |q| q.size_bytes);
        area += p.accuracy * (next - p.size_bytes) as f64;
    }
    Ok(area / max_size_bytes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;

    fn pt(acc: f64, size: u64) -> ParetoPoint {
        ParetoPoint::new(acc, size, format!("{acc}@{size}"))
    }

    #[test]
    fn dominated_point_is_dropped() {
        let front = pareto_front(&[pt(0.9, 100), pt(0.8, 200)]).unwrap();
        assert_eq!(front, vec![pt(0.9, 100)]);
    }

    #[test]
    fn trade_off_keeps_both() {
        let front = pareto_front(&[pt(0.95, 200), pt(0.9, 100)]).unwrap();
        assert_eq!(front, vec![pt(0.9, 100), pt(0.95, 200)]);
    }

    #[test]
    fn duplicates_collapse() {
        let a = ParetoPoint::new(0.5, 10, "a");
        let b = ParetoPoint::new(0.5, 10, "b");
        assert_eq!(pareto_front(&[a.clone(), b]).unwrap(), vec![a]);
        assert!(pareto_front(&[]).is_err());
    }

    #[test]
    fn matches_pairwise_oracle() {
        let mut rng = RngHandle::new(17);
        for _ in 0..100 {
            let n = 1 + rng.below(40);
            let points: Vec<ParetoPoint> = (0..n)
                .map(|i| {
                    // coarse grid to force ties
                    let acc = rng.below(20) as f64 / 20.0;
                    let size = 1 + rng.below(30) as u64;
                    ParetoPoint::new(acc, size, i.to_string())
                })
                .collect();
            let mut oracle: Vec<(u64, u64)> = points
                .iter()
                .filter(|p| !points.iter().any(|q| q.dominates(p)))
                .map(|p| (p.size_bytes, p.accuracy.to_bits()))
                .collect();
            oracle.sort_unstable();
            oracle.dedup();
            let got: Vec<(u64, u64)> = pareto_front(&points)
                .unwrap()
                .iter()
                .map(|p| (p.size_bytes, p.accuracy.to_bits()))
                .collect();
            assert_eq!(got, oracle);
        }
    }

    #[test]
    fn front_is_a_fixed_point() {
        let mut rng = RngHandle::new(3);
        let points: Vec<ParetoPoint> = (0..50)
            .map(|i| ParetoPoint::new(rng.next_f64(), 1 + rng.below(1000) as u64, i.to_string()))
            .collect();
        let front = pareto_front(&points).unwrap();
        assert_eq!(pareto_front(&front).unwrap(), front);
    }

    #[test]
    fn apf_examples() {
        // one step: a * (1 - sigma)
        assert_eq!(normalized_apf(&[pt(0.8, 250)], 1000).unwrap(), 0.6);
        assert_eq!(normalized_apf(&[pt(1.0, 1000)], 1000).unwrap(), 0.0);
        assert_eq!(
            normalized_apf(&[pt(0.5, 200), pt(0.9, 600)], 1000).unwrap(),
            0.56
        );
    }

    #[test]
    fn apf_rejects_oversized_points() {
        assert!(normalized_apf(&[pt(0.5, 11)], 10).is_err());
        assert!(normalized_apf(&[], 10).is_err());
    }

    #[test]
    fn apf_never_decreases_when_adding_points() {
        let mut rng = RngHandle::new(5);
        for _ in 0..200 {
            let mut points: Vec<ParetoPoint> = (0..5)
                .map(|i| ParetoPoint::new(rng.next_f64(), 1 + rng.below(100) as u64, i.to_string()))
                .collect();
            let before = normalized_apf(&points, 100).unwrap();
            points.push(ParetoPoint::new(rng.next_f64(), 1 + rng.below(100) as u64, "new"));
            let after = normalized_apf(&points, 100).unwrap();
            assert!(after >= before - 1e-15);
        }
    }
}
