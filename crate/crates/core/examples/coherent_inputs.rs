//! Weak coherent states instead of single photons: photon-number
//! statistics at `|alpha| = 0.1`, and the channels that produce a two-photon
//! event when both sources are coherent.

use num_complex::Complex64;
use photon_interference::fock::coherent_number_distribution;
use photon_interference::{build_double_mzi, coherent_pair, HardyParams};

fn main() {
    let alpha = Complex64::new(0.1, 0.0);
    let p = coherent_number_distribution(alpha, 2).unwrap();
    println!("P0 = {:.3}%  P1 = {:.3}%  P2 = {:.3}%", 100.0 * p[0], 100.0 * p[1], 100.0 * p[2]);

    let circuit = build_double_mzi(&HardyParams::balanced());
    let report = coherent_pair(&circuit, "L", alpha, "R", alpha, 2).unwrap();
    let ch = report.channels;
    println!("P11 = {:.6e}  P20 = {:.6e}  P02 = {:.6e}", ch.p11, ch.p20, ch.p02);
    println!("P20 + P02 = {:.6e} against P11 = {:.6e}", ch.p20 + ch.p02, ch.p11);
    println!("probability of a two-photon detection: {:.6e}", report.two_photon_probability);
    for (outcome, q) in report.conditional.coarse().unwrap().iter() {
        if q.value() > 0.0 {
            println!("  {:12} {:.6}", outcome.to_string(), q.value());
        }
    }
}
