//! Project a weight vector onto the simplex with at most M nonzeros and
//! compare against brute force over all supports.

use shrubs::{project_sparse_simplex, simplex_project, SparsityBudget};

fn main() -> shrubs::Result<()> {
    let w = [0.9, -0.3, 0.45, 0.44, 1.2, 0.05];
    println!("input        {w:?}");
    println!("simplex      {:?}", simplex_project(&w)?);
    for m in 1..=4 {
        let p = project_sparse_simplex(&w, SparsityBudget::new(m)?)?;
        let sum: f64 = p.weights.iter().sum();
        println!(
            "M={m}  tau={:+.4}  support={}  sum={sum:.12}  {:?}",
            p.tau, p.support, p.weights
        );
        let brute = brute_force(&w, m);
        let gap: f64 = p
            .weights
            .iter()
            .zip(&brute)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        println!("      distance to brute force {gap:.2e}");
    }
    Ok(())
}

/// Tries every support of size <= m and keeps the closest projection.
fn brute_force(w: &[f64], m: usize) -> Vec<f64> {
    let n = w.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > m {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sub: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
        let proj = simplex_project(&sub).unwrap();
        let mut full = vec![0.0; n];
        for (k, &i) in idx.iter().enumerate() {
            full[i] = proj[k];
        }
        let d: f64 = full.iter().zip(w).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, full));
        }
    }
    best.unwrap().1
}
