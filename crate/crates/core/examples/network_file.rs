//! Writes a generated network in the file format, reads it back, and
//! checks the round trip.

use credal_polytree::cli::{network_to_string, parse_network};
use credal_polytree::harness::{random_polytree, GeneratorConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = random_polytree(&GeneratorConfig::new(4, 2..=3, 1..=2), &mut ChaCha8Rng::seed_from_u64(8))?;
    let text = network_to_string(&net);
    let path = std::env::temp_dir().join("credal_network_example.json");
    std::fs::write(&path, &text)?;
    let back = parse_network(&path)?;
    assert_eq!(back, net);
    println!("{text}");
    println!("round trip through {} is exact", path.display());
    Ok(())
}
