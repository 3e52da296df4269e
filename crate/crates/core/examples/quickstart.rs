//! Builds a three-node credal network by hand and bounds p(Y | X = x1)
//! with every algorithm.

use credal_polytree::ar::propagate;
use credal_polytree::ar_plus::{propagate_plus, VertexBudget};
use credal_polytree::bnb::{solve_interval, SolveConfig};
use credal_polytree::exact::{exhaustive, DEFAULT_EXHAUSTIVE_CAP};
use credal_polytree::local_search::multistart;
use credal_polytree::model::{ConditionalCredalTable, CredalNetwork, Direction, Distribution, Evidence, Variable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn d(p: &[f64]) -> Distribution {
    Distribution::new(p.to_vec()).expect("a distribution")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Z -> Y <- W, then Y -> X.
    let variables = vec![
        Variable::with_cardinality("Z", 2),
        Variable::with_cardinality("W", 2),
        Variable::with_cardinality("Y", 2),
        Variable::with_cardinality("X", 2),
    ];
    let tables = vec![
        ConditionalCredalTable::root(0, vec![d(&[0.3, 0.7]), d(&[0.6, 0.4])]),
        ConditionalCredalTable::root(1, vec![d(&[0.2, 0.8]), d(&[0.5, 0.5])]),
        ConditionalCredalTable::new(
            2,
            vec![0, 1],
            vec![
                vec![d(&[0.9, 0.1]), d(&[0.8, 0.2])],
                vec![d(&[0.4, 0.6])],
                vec![d(&[0.3, 0.7]), d(&[0.1, 0.9])],
                vec![d(&[0.5, 0.5])],
            ],
        ),
        ConditionalCredalTable::new(3, vec![2], vec![vec![d(&[0.7, 0.3]), d(&[0.6, 0.4])], vec![d(&[0.2, 0.8])]]),
    ];
    let net = CredalNetwork::new(variables, tables)?;
    let (y, x) = (net.find("Y").unwrap(), net.find("X").unwrap());
    let evidence = Evidence::new().with(x, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let ar = propagate(&net, y, &evidence)?;
    let plus = propagate_plus(&net, y, &evidence, VertexBudget::default())?;
    let exact = exhaustive(&net, y, &evidence, DEFAULT_EXHAUSTIVE_CAP)?;
    let low = multistart(&net, y, 0, &evidence, Direction::Min, 4, &mut rng)?;
    let high = multistart(&net, y, 0, &evidence, Direction::Max, 4, &mut rng)?;
    let (bnb, _, _) = solve_interval(&net, y, 0, &evidence, &SolveConfig::default(), &mut rng)?;

    println!("p(Y = y0 | X = x1)");
    println!("  A/R           {}", ar[0]);
    println!("  A/R+          {}", plus[0]);
    println!("  local search  [{:.6}, {:.6}]", low.value, high.value);
    println!("  bnb           {bnb}");
    println!("  exhaustive    {}", exact.bounds[0]);
    Ok(())
}
