//! Regenerates the CUSUMSQ bound table embedded in `diagnostics.rs`:
//! upper quantiles of max_r |S_r − r/m| for m i.i.d. normal recursive
//! residuals.
//!
//!     cargo run --release -p cointegra --example cusumsq_table [reps]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn grid() -> Vec<usize> {
    let mut g: Vec<usize> = (2..=40).collect();
    g.extend((45..=100).step_by(5));
    g.extend([120, 150, 200, 300, 400, 500]);
    g
}

fn main() {
    let reps: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("replications must be an integer"))
        .unwrap_or(200_000);
    println!(
        "pub(crate) const CUSUMSQ_C0: [(usize, [f64; 3]); {}] = [",
        grid().len()
    );
    for m in grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_000 + m as u64);
        let mut w2 = vec![0.0; m];
        let mut stats: Vec<f64> = (0..reps)
            .map(|_| {
                for v in w2.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = z * z;
                }
                let total: f64 = w2.iter().sum();
                let mut acc = 0.0;
                let mut worst = 0.0f64;
                for (r, v) in w2.iter().enumerate() {
                    acc += v;
                    worst = worst.max((acc / total - (r + 1) as f64 / m as f64).abs());
                }
                worst
            })
            .collect();
        stats.sort_by(|a, b| a.total_cmp(b));
        let q = |p: f64| stats[((reps as f64 * p).ceil() as usize) - 1];
        println!(
            "    ({m}, [{:.4}, {:.4}, {:.4}]),",
            q(0.99),
            q(0.95),
            q(0.90)
        );
    }
    println!("];");
}
