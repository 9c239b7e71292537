//! Pilot run behind `DEFAULT_THRESHOLDS`.
//!
//! `cargo run --release -p walsh-lprf --example calibrate [TRIALS] [SEED]`
//!
//! Prints the per-`m` maximum ratio for each `p` and the padded ceiling.

use std::time::Instant;

use walsh_lprf::harness::{run_experiment, ExperimentConfig};

const PADDING: f64 = 1.25;

fn main() -> walsh_lprf::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args
        .next()
        .map_or(1000, |a| a.parse().expect("TRIALS is an integer"));
    let seed = args
        .next()
        .map_or(0xCA11_B7A7, |a| a.parse().expect("SEED is an integer"));
    let ps = [1.1, 1.25, 1.5];
    let mut overall = [0.0f64; 3];
    for m in [4, 5, 6] {
        let cfg = ExperimentConfig {
            m,
            trials,
            seed: seed ^ u64::from(m),
            p_list: ps.to_vec(),
            thresholds: Vec::new(),
            ..Default::default()
        };
        let t0 = Instant::now();
        let report = run_experiment(&cfg)?;
        let maxes: Vec<String> = report
            .records
            .iter()
            .map(|r| format!("p={}: max {:.4} mean {:.4}", r.p, r.max_ratio, r.mean_ratio))
            .collect();
        println!("m={m} ({:.1?}): {}", t0.elapsed(), maxes.join(", "));
        for (o, r) in overall.iter_mut().zip(&report.records) {
            *o = o.max(r.max_ratio);
        }
    }
    for (p, o) in ps.iter().zip(overall) {
        println!(
            "p={p}: pilot max {o:.4} -> threshold {:.2}",
            (o * PADDING * 100.0).ceil() / 100.0
        );
    }
    Ok(())
}
