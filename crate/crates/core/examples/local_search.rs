//! Inner bounds by coordinate-wise local search, single start and
//! multistart, with the value after each accepted move.

use credal_polytree::harness::{random_polytree, GeneratorConfig};
use credal_polytree::local_search::{multistart, optimize, NodeOrdering};
use credal_polytree::model::{Direction, Evidence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = random_polytree(&GeneratorConfig::new(15, 2..=3, 2..=4), &mut rng)?;
    let q = net.len() - 1;
    let evidence = Evidence::new().with(0, 0);
    let ordering = NodeOrdering::topological(&net);

    let single = optimize(&net, q, 0, &evidence, Direction::Max, &ordering, None, &mut rng)?;
    println!("single start: {:.6} after {} moves in {} cycles", single.value, single.moves, single.cycles);
    println!("trajectory: {:?}", single.trajectory.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>());

    let best = multistart(&net, q, 0, &evidence, Direction::Max, 16, &mut rng)?;
    let worst = multistart(&net, q, 0, &evidence, Direction::Min, 16, &mut rng)?;
    println!("inner interval for {} = {}: [{:.6}, {:.6}]", net.variable(q).name(), net.variable(q).categories()[0], worst.value, best.value);
    Ok(())
}
