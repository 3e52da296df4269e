//! A seeded ensemble on the fig1-like graph: every algorithm on the upper
//! and lower probability of E = e0, compared with exact references.

use credal_polytree::harness::{run_ensemble, Algorithm, EnsembleConfig, GeneratorConfig, QuerySpec, Skeleton};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let size = std::env::args().nth(1).map_or(Ok(30), |s| s.parse())?;
    let generator = GeneratorConfig::with_skeleton(Skeleton::fig1_like(), 3..=3, 2..=2);
    let config = EnsembleConfig::new(generator, size);
    let algorithms = [Algorithm::Ar, Algorithm::ArPlus, Algorithm::LocalSearch, Algorithm::Bnb, Algorithm::BnbAr];
    let report = run_ensemble(&config, &algorithms, &[QuerySpec::named("E", 0)], &mut ChaCha8Rng::seed_from_u64(1))?;

    println!("{:<14}{:>12}{:>12}{:>12}{:>14}{:>12}", "algorithm", "rel.err", "rel.err lo", "length", "median nodes", "ms");
    for s in &report.summary {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<14}{:>12}{:>12}{:>12}{:>14}{:>12.1}",
            s.algorithm.name(),
            show(s.mean_relative_error),
            show(s.mean_lower_relative_error),
            show(s.mean_interval_length),
            show(s.median_nodes_expanded),
            s.mean_wall_time_ms,
        );
    }
    Ok(())
}
