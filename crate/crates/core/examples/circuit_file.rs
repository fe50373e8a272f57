//! Load a circuit from its JSON description and cross-check the two engines.

use photon_interference::cli::prob_text;
use photon_interference::{fock_distribution, full_distribution, CircuitFile};

const HOM_WITH_PARTIAL_OVERLAP: &str = r#"{
  "format": 1,
  "name": "hom",
  "elements": [{"id": "bs", "kind": "beam_splitter", "reflectivity": "1/2"}],
  "inputs": ["in_L", "in_R"],
  "terminals": [{"name": "L", "kind": "detector"}, {"name": "R", "kind": "detector"}],
  "wires": [
    {"from": "in_L", "to": "bs.in0"}, {"from": "in_R", "to": "bs.in1"},
    {"from": "bs.out0", "to": "R"}, {"from": "bs.out1", "to": "L"}
  ],
  "sources": [
    {"port": "in_L", "kind": "single_photon", "internal": {"H": "1"}},
    {"port": "in_R", "kind": "single_photon", "internal": {"H": "1/sqrt2", "V": [0, "1/sqrt2"]}}
  ]
}"#;

fn main() {
    let file = CircuitFile::from_json(HOM_WITH_PARTIAL_OVERLAP).unwrap();
    let circuit = file.to_circuit().unwrap();
    let inputs = file.input_spec().unwrap();
    let path = full_distribution(&circuit, &inputs).unwrap();
    let fock = fock_distribution(&circuit, &inputs).unwrap();
    for (outcome, p) in path.coarse().unwrap().iter() {
        println!("{:8} {}", outcome.to_string(), prob_text(p));
    }
    println!("max engine difference {:e}", path.max_discrepancy(&fock));
    let broken = HOM_WITH_PARTIAL_OVERLAP.replace("\"bs.out1\"", "\"bs.out7\"");
    match CircuitFile::from_json(&broken).and_then(|f| f.to_circuit()) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
}
