//! Acceptance suite, run as a plain binary so its summary is always shown.
//! Every check prints one `criterion N: PASS|FAIL` line; the process exits
//! nonzero if any hard check fails. `cargo test --test acceptance -- 3 5`
//! runs only the listed criteria.
//!
//! The oracles here are written independently of the library code they check.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use shrubs::eval::{
    estimate_memory, memory_ceiling, normalized_apf, pareto_front, run_sweep, sample_configs,
    ConfigGrid, ParetoPoint, SweepOptions,
};
use shrubs::streams::{
    named_generator, CsvOptions, CsvStream, DataStream, GeneratorStream, RbfConfig, StreamOptions,
};
use shrubs::{
    fit_shrub, loss_gradient, project_sparse_simplex, EnsembleConfig, EnsembleState, Loss,
    RngHandle, Sample, Shrub, ShrubConfig, SparsityBudget,
};

fn report(n: u32, pass: bool, detail: impl AsRef<str>, elapsed: Duration) {
    println!(
        "criterion {n}: {} {} ({:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref(),
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------- 1

/// Simplex projection by bisection on the shift, to machine precision.
fn simplex_bisect(v: &[f64]) -> Vec<f64> {
    let excess = |t: f64| v.iter().map(|x| (x - t).max(0.0)).sum::<f64>() - 1.0;
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    v.iter().map(|x| (x - t).max(0.0)).collect()
}

/// Closest point over every support of size at most `m`.
fn sparse_projection_oracle(w: &[f64], m: usize) -> Vec<f64> {
    let n = w.len();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() as usize > m {
            continue;
        }
        let support: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let sub: Vec<f64> = support.iter().map(|&i| w[i]).collect();
        let proj = simplex_bisect(&sub);
        let mut full = vec![0.0; n];
        for (k, &i) in support.iter().enumerate() {
            full[i] = proj[k];
        }
        let dist: f64 = full.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist < best.0 {
            best = (dist, full);
        }
    }
    best.1
}

fn criterion_1_prox_matches_exhaustive_oracle() -> bool {
    let start = Instant::now();
    let mut rng = RngHandle::new(0x5eed_0001);
    let mut worst = 0.0f64;
    let cases = 1000;
    for _ in 0..cases {
        let n = 1 + rng.below(12);
        let m = 1 + rng.below(n);
        let w: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let got = project_sparse_simplex(&w, SparsityBudget::new(m).unwrap()).unwrap();
        let want = sparse_projection_oracle(&w, m);
        let dist = got
            .weights
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dist);
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(10);
    report(1, pass, format!("{cases} vectors, max L2 gap {worst:.2e}"), elapsed);
    pass
}

// ---------------------------------------------------------------- 2

/// Loss computed directly from the definition, without the library's
/// gradient code.
fn reference_loss(loss: Loss, shrubs: &[Shrub], w: &[f64], batch: &[Sample], c: usize) -> f64 {
    let mut total = 0.0;
    for s in batch {
        let mut f = vec![0.0; c];
        for (h, wj) in shrubs.iter().zip(w) {
            for (fk, hk) in f.iter_mut().zip(h.predict(&s.features).unwrap()) {
                *fk += wj * hk;
            }
        }
        total += match loss {
            Loss::Mse => (0..c)
                .map(|k| {
                    let y = if k == s.label { 1.0 } else { 0.0 };
                    (f[k] - y).powi(2)
                })
                .sum::<f64>(),
            Loss::CrossEntropy => {
                let mx = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = mx + f.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
                lse - f[s.label]
            }
        };
    }
    match loss {
        Loss::Mse => total / (batch.len() * c) as f64,
        Loss::CrossEntropy => total / batch.len() as f64,
    }
}

fn criterion_2_gradients_match_finite_differences() -> bool {
    let start = Instant::now();
    let mut rng = RngHandle::new(0x5eed_0002);
    let instances = 100;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..instances {
        let c = 2 + rng.below(4);
        let d = 1 + rng.below(4);
        let n = 5 + rng.below(40);
        let m = 1 + rng.below(6);
        let draw = |rng: &mut RngHandle, k: usize| -> Vec<Sample> {
            (0..k)
                .map(|_| {
                    let x: Vec<f64> = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
                    Sample::new(x, rng.below(c))
                })
                .collect()
        };
        let shrubs: Vec<Shrub> = (0..m)
            .map(|_| {
                let data = draw(&mut rng, 20);
                let cfg = ShrubConfig {
                    max_depth: Some(1 + rng.below(3)),
                    ..ShrubConfig::default()
                };
                fit_shrub(&data, &cfg, c, &mut rng).unwrap()
            })
            .collect();
        let batch = draw(&mut rng, n);
        let w: Vec<f64> = (0..m).map(|_| rng.uniform(-1.0, 2.0)).collect();
        for loss in [Loss::Mse, Loss::CrossEntropy] {
            let (value, grad) = loss_gradient(loss, &shrubs, &w, &batch, c).unwrap();
            let direct = reference_loss(loss, &shrubs, &w, &batch, c);
            assert!((value - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            let h = 1e-5;
            for j in 0..m {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                let fd = (reference_loss(loss, &shrubs, &wp, &batch, c)
                    - reference_loss(loss, &shrubs, &wm, &batch, c))
                    / (2.0 * h);
                let err = (fd - grad[j]).abs();
                // relative error, with an absolute floor for near-zero slopes
                let rel = if grad[j].abs() > 1e-2 { err / grad[j].abs() } else { err / 1e-2 };
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-6 && elapsed < Duration::from_secs(30);
    report(
        2,
        pass,
        format!("{instances} instances x 2 losses, {checked} partials, max rel err {worst:.2e}"),
        elapsed,
    );
    pass
}

// ---------------------------------------------------------------- 3

struct NewConcept {
    window: Vec<Sample>,
    shrubs: Vec<Shrub>,
    weights: Vec<f64>,
    next: Sample,
}

/// `B - 1` distinct points labelled round-robin; `m` fully grown incumbents
/// fit on nudged copies of them, so they are pairwise distinct yet all carry
/// the label of the last point past it. The arriving point `x = B - 1` has
/// the next label in the cycle, which every incumbent gets wrong. Weights
/// are proportional to `1..=m`, so member 0 is the unique lightest.
fn new_concept(b: usize, c: usize, m: usize) -> NewConcept {
    let window: Vec<Sample> = (0..b - 1).map(|i| Sample::new(vec![i as f64], i % c)).collect();
    let shrubs: Vec<Shrub> = (0..m)
        .map(|j| {
            let nudged: Vec<Sample> = window
                .iter()
                .map(|s| Sample::new(vec![s.features[0] + 0.1 * j as f64 / m as f64], s.label))
                .collect();
            fit_shrub(&nudged, &ShrubConfig::fully_grown(), c, &mut RngHandle::new(0)).unwrap()
        })
        .collect();
    let total = (m * (m + 1) / 2) as f64;
    let weights = (1..=m).map(|j| j as f64 / total).collect();
    NewConcept {
        window,
        shrubs,
        weights,
        next: Sample::new(vec![(b - 1) as f64], (b - 1) % c),
    }
}

fn criterion_3_new_concept_is_admitted() -> bool {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cases = 0;
    for b in [4usize, 8, 16] {
        for c in [2usize, 3, 5] {
            for m in 1..=4usize {
                for max_members in [m + 1, m] {
                    cases += 1;
                    let nc = new_concept(b, c, m);
                    // preconditions of the construction
                    for h in &nc.shrubs {
                        let p = h.predict(&nc.next.features).unwrap();
                        assert_eq!(p[nc.next.label], 0.0);
                        assert!(p.iter().all(|&v| v == 0.0 || v == 1.0));
                    }
                    let lightest = nc.shrubs[0].clone();
                    let config = EnsembleConfig {
                        max_members,
                        window: b,
                        alpha: 1.01 * (b * c) as f64 / (4.0 * m as f64),
                        shrub: ShrubConfig::fully_grown(),
                        ..EnsembleConfig::new(c)
                    };
                    let mut state =
                        EnsembleState::from_parts(config, nc.window, nc.shrubs, nc.weights)
                            .unwrap();
                    let out = state.step(nc.next).unwrap();
                    // some member, the new tree, fits the whole window
                    let newest_perfect = state.shrubs().iter().any(|h| {
                        state
                            .window()
                            .iter()
                            .all(|s| h.predict(&s.features).unwrap()[s.label] == 1.0)
                    });
                    let ok = if max_members > m {
                        out.added
                    } else {
                        out.added
                            && !state.shrubs().contains(&lightest)
                            && state.shrubs().len() == m
                    };
                    if !ok || !newest_perfect {
                        failures.push(format!("B={b} C={c} m={m} M={max_members}"));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty();
    report(
        3,
        pass,
        format!("{}/{cases} cases {}", cases - failures.len(), failures.join(" ")),
        elapsed,
    );
    pass
}

// ---------------------------------------------------------------- 4

fn criterion_4_memory_stays_bounded() -> bool {
    let start = Instant::now();
    let n = 100_000u64;
    let mut stream = named_generator("led_a", n, &StreamOptions::default())
        .unwrap()
        .open("led_a", 4)
        .unwrap();
    let d = stream.schema().n_features;
    let config = EnsembleConfig {
        max_members: 8,
        window: 64,
        ..EnsembleConfig::new(10)
    };
    let ceiling = memory_ceiling(&config, d);
    let mut model = EnsembleState::new(config).unwrap();
    let (mut max_members, mut max_nodes, mut max_bytes) = (0, 0, 0);
    let mut violations = 0u64;
    for t in 1..=n {
        model.step(stream.next_sample().unwrap().unwrap()).unwrap();
        if t % 100 == 0 {
            let members = model.shrubs().len();
            let nodes = model.shrubs().iter().map(Shrub::node_count).max().unwrap_or(0);
            let bytes = estimate_memory(&model);
            max_members = max_members.max(members);
            max_nodes = max_nodes.max(nodes);
            max_bytes = max_bytes.max(bytes);
            if members > 8 || nodes > 127 || bytes > ceiling {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && elapsed < Duration::from_secs(120);
    report(
        4,
        pass,
        format!(
            "max members {max_members}, max nodes/shrub {max_nodes}, max bytes {max_bytes} <= ceiling {ceiling}"
        ),
        elapsed,
    );
    pass
}

// ---------------------------------------------------------------- 5

fn criterion_5_led_drift_accuracy_band() -> bool {
    let start = Instant::now();
    let n = 200_000u64;
    let opts = StreamOptions {
        drift_position: Some(100_000),
        noise: Some(0.1),
        ..StreamOptions::default()
    };
    let mut stream = named_generator("led_a", n, &opts).unwrap().open("led_a", 5).unwrap();
    let config = EnsembleConfig {
        max_members: 32,
        window: 1024,
        alpha: 0.1,
        shrub: ShrubConfig {
            max_depth: Some(8),
            ..ShrubConfig::default()
        },
        ..EnsembleConfig::new(10)
    };
    let mut model = EnsembleState::new(config).unwrap();
    let trace = shrubs::eval::test_then_train(&mut model, &mut stream, n, 10_000).unwrap();
    let acc = trace.final_accuracy();
    let elapsed = start.elapsed();
    let pass = (0.66..=0.76).contains(&acc) && elapsed < Duration::from_secs(600);
    report(5, pass, format!("led_a 200k accuracy {acc:.4} (band [0.66, 0.76])"), elapsed);
    pass
}

// ---------------------------------------------------------------- 6

fn criterion_6_separable_rbf() -> bool {
    let start = Instant::now();
    let rbf = RbfConfig {
        centroid_count: 10,
        max_stddev: 0.01,
        drift_speed: 0.0,
        min_separation: 0.3,
        ..RbfConfig::default()
    };
    let concept = rbf.build(6).unwrap();
    let c = rbf.n_classes;
    let mut stream = GeneratorStream::new("rbf_sep", concept, 6).unwrap();
    let mut model = EnsembleState::new(EnsembleConfig::new(c)).unwrap();
    let trace = shrubs::eval::test_then_train(&mut model, &mut stream, 20_000, 1_000).unwrap();
    let acc = trace.final_accuracy();
    let elapsed = start.elapsed();
    let pass = acc >= 0.95 && elapsed < Duration::from_secs(60);
    report(6, pass, format!("rbf 10 centroids, accuracy {acc:.4} (>= 0.95)"), elapsed);
    pass
}

// ---------------------------------------------------------------- 7

/// Soft check on the electricity data. Runs only when `SHRUB_ELEC_CSV`
/// points at a local copy; the label column defaults to `class` and can be
/// changed with `SHRUB_ELEC_LABEL`.
fn criterion_7_elec_sweep_soft() -> bool {
    let Some(path) = std::env::var_os("SHRUB_ELEC_CSV").map(PathBuf::from) else {
        println!("criterion 7: NOT RUN (set SHRUB_ELEC_CSV to a local elec CSV)");
        return true;
    };
    let start = Instant::now();
    let options = CsvOptions {
        label: std::env::var("SHRUB_ELEC_LABEL").unwrap_or_else(|_| "class".into()),
        ..CsvOptions::default()
    };
    let probe = CsvStream::open(&path, &options).unwrap();
    let rows = probe.rows();
    let c = probe.schema().n_classes;
    let configs = sample_configs(&ConfigGrid::default(), &EnsembleConfig::new(c), 10, 7).unwrap();
    let open = |_: usize| -> shrubs::Result<Box<dyn DataStream>> {
        Ok(Box::new(CsvStream::open(&path, &options)?))
    };
    let results = run_sweep(
        &configs,
        open,
        &SweepOptions {
            n_items: rows,
            checkpoint_every: 1_000,
            ..SweepOptions::default()
        },
    )
    .unwrap();
    let best = results.iter().map(|r| r.final_acc).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = best >= 0.82 && elapsed < Duration::from_secs(900);
    // soft: a miss is reported for investigation, not asserted
    report(7, pass, format!("elec best of 10 configs {best:.4} (>= 0.82, soft)"), elapsed);
    true
}

// ---------------------------------------------------------------- 8

fn dominates(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    a.accuracy >= b.accuracy
        && a.size_bytes <= b.size_bytes
        && (a.accuracy > b.accuracy || a.size_bytes < b.size_bytes)
}

fn criterion_8_pareto_and_apf() -> bool {
    let start = Instant::now();
    let mut rng = RngHandle::new(0x5eed_0008);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = 1 + rng.below(60);
        let points: Vec<ParetoPoint> = (0..n)
            .map(|i| {
                ParetoPoint::new(
                    rng.below(25) as f64 / 25.0,
                    1 + rng.below(40) as u64,
                    format!("p{i}"),
                )
            })
            .collect();
        let mut want: Vec<(u64, u64)> = points
            .iter()
            .filter(|p| !points.iter().any(|q| dominates(q, p)))
            .map(|p| (p.size_bytes, p.accuracy.to_bits()))
            .collect();
        want.sort_unstable();
        want.dedup();
        let got: Vec<(u64, u64)> = pareto_front(&points)
            .unwrap()
            .iter()
            .map(|p| (p.size_bytes, p.accuracy.to_bits()))
            .collect();
        if got != want {
            mismatches += 1;
        }
    }
    // rectangle sums worked by hand
    let p = |a: f64, s: u64| ParetoPoint::new(a, s, "x");
    let apf = [
        (normalized_apf(&[p(0.8, 250)], 1000).unwrap(), 0.6),
        (normalized_apf(&[p(1.0, 1000)], 1000).unwrap(), 0.0),
        (normalized_apf(&[p(0.5, 200), p(0.9, 600)], 1000).unwrap(), 0.56),
    ];
    let apf_ok = apf.iter().all(|(got, want)| got == want);
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && apf_ok;
    report(
        8,
        pass,
        format!("front mismatches {mismatches}/100, APF examples {apf:?}"),
        elapsed,
    );
    pass
}

// ---------------------------------------------------------------- 9

fn criterion_9_cli_runs_are_byte_identical() -> bool {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let trace = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_shrubs"))
            .args(["run", "--stream", "agrawal_g", "--items", "3000", "--seed", "9"])
            .args(["--M", "8", "--window", "128", "--checkpoint", "250", "--trace"])
            .arg(&trace)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(trace).unwrap()
    };
    let a = run("a.jsonl");
    let b = run("b.jsonl");
    let elapsed = start.elapsed();
    let pass = !a.is_empty() && a == b;
    report(9, pass, format!("two traces of {} bytes, identical: {}", a.len(), a == b), elapsed);
    pass
}

fn main() {
    let checks: [(u32, fn() -> bool); 9] = [
        (1, criterion_1_prox_matches_exhaustive_oracle),
        (2, criterion_2_gradients_match_finite_differences),
        (3, criterion_3_new_concept_is_admitted),
        (4, criterion_4_memory_stays_bounded),
        (5, criterion_5_led_drift_accuracy_band),
        (6, criterion_6_separable_rbf),
        (7, criterion_7_elec_sweep_soft),
        (8, criterion_8_pareto_and_apf),
        (9, criterion_9_cli_runs_are_byte_identical),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, check) in checks {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        match std::panic::catch_unwind(check) {
            Ok(true) => {}
            Ok(false) => failed.push(n),
            Err(_) => {
                println!("criterion {n}: FAIL (panicked)");
                failed.push(n);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all checks passed");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
