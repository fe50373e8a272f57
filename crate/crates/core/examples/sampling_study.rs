//! Simulated experiment: 1000 trials of the 50:50 double interferometer,
//! each frequency with a 95% Clopper-Pearson interval.

use photon_interference::statistics::DEFAULT_SEED;
use photon_interference::{build_double_mzi, full_distribution, HardyParams, InputSpec, StudyReport};

fn main() {
    let circuit = build_double_mzi(&HardyParams::balanced());
    let table = full_distribution(&circuit, &InputSpec::identical_pair("L", "R").unwrap()).unwrap();
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let report = StudyReport::run(&table, 1000, seed, 0.95).unwrap();
    for row in &report.rows {
        println!(
            "{:8} true {:.4}  observed {:4} ({:.3})  [{:.4}, {:.4}]{}",
            row.outcome,
            row.p_true,
            row.count,
            row.p_hat,
            row.cp_lo,
            row.cp_hi,
            if row.contains { "" } else { "  outside" }
        );
    }
    println!("coverage {:.3}", report.coverage());
}
