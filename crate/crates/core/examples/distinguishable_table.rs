//! Fully distinguishable photons (`H` from the left, `V` from the right):
//! every joint probability factorizes, and the right photon never reaches
//! `D3`. Dropping the labels gives the color-blind values.

use photon_interference::cli::prob_text;
use photon_interference::path_engine::outcome_amplitudes;
use photon_interference::statistics::{bunched, coincidence};
use photon_interference::{build_double_mzi, full_distribution, Amp, HardyParams, InputSpec, ModeKey, Outcome};

fn main() {
    let circuit = build_double_mzi(&HardyParams::balanced());
    let inputs = InputSpec::pair_with_overlap("L", "R", Amp::ZERO).unwrap();
    let detectors = ["D1", "D2", "D3", "D4"];
    print!("{:8}", "R \\ L");
    for d in detectors {
        print!("{d:>8}");
    }
    println!();
    for r in detectors {
        print!("{r:8}");
        for l in detectors {
            let mut o = Outcome::empty();
            o.add(ModeKey::labeled(l, "H"), 1);
            o.add(ModeKey::labeled(r, "V"), 1);
            let amps = outcome_amplitudes(&circuit, &inputs, &o).unwrap();
            let p = Amp::sum(&amps.values().map(|a| a.abs_sq().unwrap()).collect::<Vec<_>>()).unwrap();
            print!("{:>8}", prob_text(&p));
        }
        println!();
    }
    let table = full_distribution(&circuit, &inputs).unwrap();
    println!("P(D1 twice) = {}", prob_text(&bunched(&table, "D1").unwrap()));
    println!("P(D1,D4) = {}", prob_text(&coincidence(&table, &["D1", "D4"]).unwrap()));
    println!("P(D2,D3) = {}", prob_text(&coincidence(&table, &["D2", "D3"]).unwrap()));
}
