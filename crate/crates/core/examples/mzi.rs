//! A single photon in a balanced Mach-Zehnder interferometer: the two paths
//! to `D2` cancel, the two paths to `D1` add.

use photon_interference::path_engine::{enumerate_paths, single_photon_amplitude};
use photon_interference::{build_mzi, full_distribution, InputSpec, InternalState, Outcome};

fn main() {
    let mzi = build_mzi();
    for path in enumerate_paths(&mzi, "in").unwrap() {
        let route: Vec<String> = path.steps.iter().map(|s| format!("{}:{:?}", s.element, s.action)).collect();
        println!("{:3} <- {:45} amplitude {}", path.terminal, route.join(" "), path.amp);
    }
    for d in ["D1", "D2"] {
        let a = single_photon_amplitude(&mzi, "in", d).unwrap();
        println!("A({d}) = {a}, |A|^2 = {}", a.abs_sq().unwrap().value());
    }
    let table = full_distribution(&mzi, &InputSpec::photons([("in", InternalState::h())]).unwrap()).unwrap();
    assert_eq!(table.p(&Outcome::of(&["D1"])), 1.0);
    assert_eq!(table.p(&Outcome::of(&["D2"])), 0.0);
    println!("exact: {}", table.is_exact());
}
