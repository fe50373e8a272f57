//! Every route a photon from the left source can take, with its phase
//! `i^(reflections)` and magnitude, as JSON.

use photon_interference::path_engine::PathListing;
use photon_interference::{build_double_mzi, HardyParams};

fn main() {
    let circuit = build_double_mzi(&HardyParams::balanced());
    let listing = PathListing::new(&circuit, "L", "H").unwrap();
    for p in &listing.paths {
        let elements: Vec<&str> = p.steps.iter().map(|s| s.element.as_str()).collect();
        eprintln!("{:7} i^{}  via {}", p.terminal, p.reflections, elements.join(" > "));
    }
    println!("{}", listing.to_json());
}
