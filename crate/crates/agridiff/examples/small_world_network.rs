//! Build the small-world social graph, check its degree structure, and export
//! the edge list.
//!
//! ```bash
//! cargo run --example small_world_network
//! ```

use agridiff::network::SocialNetwork;

fn main() -> agridiff::Result<()> {
    let net = SocialNetwork::watts_strogatz(295, 4, 0.1, 7)?;
    println!(
        "n = {}, k = {}, p = {}, seed = {}",
        net.n(),
        net.ring_degree(),
        net.rewiring_probability(),
        net.seed()
    );
    println!("edges: {} (n*k/2 = {})", net.edge_count(), 295 * 4 / 2);
    println!("rewired edges: {} (expected ~59)", net.rewired_edge_count());

    let degrees: Vec<usize> = (0..net.n()).map(|i| net.degree(i)).collect();
    let min = degrees.iter().min().unwrap();
    let max = degrees.iter().max().unwrap();
    println!("degree range: {min}..={max}");
    println!("connected: {}", net.is_connected());

    let path = std::env::temp_dir().join("agridiff_edges.csv");
    net.write_edge_csv(&path)?;
    println!("edge list -> {}", path.display());
    Ok(())
}
