//! The brute-force oracle: enumerates every vertex selection that can
//! matter and reports the optimal selections.

use credal_polytree::exact::{exhaustive, marginal, BayesNetView, DEFAULT_EXHAUSTIVE_CAP};
use credal_polytree::harness::{random_polytree, GeneratorConfig};
use credal_polytree::model::{count_potential_vertices, Evidence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = random_polytree(&GeneratorConfig::new(6, 2..=3, 2..=3), &mut rng)?;
    let q = 0;
    let evidence = Evidence::new();
    println!("strong extension: {} potential vertices", count_potential_vertices(&net));

    let r = exhaustive(&net, q, &evidence, DEFAULT_EXHAUSTIVE_CAP)?;
    println!("enumerated {} selections ({} with zero evidence probability)", r.selections, r.skipped);
    for (x, b) in r.bounds.bounds().iter().enumerate() {
        println!("p({} = {}) in {b}", net.variable(q).name(), net.variable(q).categories()[x]);
        // The upper witness reproduces the upper bound on its own.
        let witness = net.restricted(&r.upper[x].selection);
        let p = marginal(&BayesNetView::new(&witness)?, q, &evidence)?;
        println!("  witness gives {:.12}", p[x]);
    }
    Ok(())
}
