//! Two identical photons through the double interferometer with every beam
//! splitter 50:50. Single-photon interference empties `D2`/`D3` for each
//! photon alone, two-photon interference cancels part of what is left, and
//! yet the `D2 D3` coincidence survives with probability 1/64.

use photon_interference::cli::prob_text;
use photon_interference::path_engine::HardyPathAmps;
use photon_interference::statistics::{bunched, coincidence, loss_probability};
use photon_interference::{build_double_mzi, full_distribution, HardyParams, InputSpec};

fn main() {
    let circuit = build_double_mzi(&HardyParams::balanced());
    let table = full_distribution(&circuit, &InputSpec::identical_pair("L", "R").unwrap()).unwrap();
    for (outcome, p) in table.iter() {
        println!("{:16} {}", outcome.to_string(), prob_text(p));
    }
    let pairs = [["D1", "D2"], ["D1", "D3"], ["D1", "D4"], ["D2", "D3"], ["D2", "D4"], ["D3", "D4"]];
    for pair in pairs {
        println!("P({},{}) = {}", pair[0], pair[1], prob_text(&coincidence(&table, &pair).unwrap()));
    }
    for d in ["D1", "D2", "D3", "D4"] {
        println!("P({d} twice) = {}", prob_text(&bunched(&table, d).unwrap()));
    }
    println!("P(some photon lost) = {}", prob_text(&loss_probability(&table).unwrap()));

    let amps = HardyPathAmps::from_circuit(&circuit).unwrap();
    println!("O = {}  Z = {}  C = {}", amps.o_l, amps.z_l, amps.c_l);
    println!("A23 via O+Z = 0: {}", amps.mzi_reduction().unwrap());
    println!("A23 via Z^2+C^2 = 0: {}", amps.homi_reduction().unwrap());
}
