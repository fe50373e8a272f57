//! Sweep the overlap `C` between the photons' internal states. Only the
//! bunching at the outer detectors and the `D1 D4` coincidence move; the
//! `D2 D3` coincidence is untouched.

use photon_interference::{build_double_mzi, partial_distinguishability_curve, Amp, HardyParams, Outcome};

fn main() {
    let circuit = build_double_mzi(&HardyParams::balanced());
    let grid: Vec<Amp> = (0..=20).map(|k| Amp::real(k as f64 / 20.0)).collect();
    let curve = partial_distinguishability_curve(&circuit, "L", "R", &grid).unwrap();
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "C", "P1(2)", "P1,4", "P2,3", "P1,3");
    for point in curve {
        let t = point.table.coarse().unwrap();
        let c = point.overlap.value();
        let p11 = t.p(&Outcome::of(&["D1", "D1"]));
        let p14 = t.p(&Outcome::of(&["D1", "D4"]));
        println!("{c:>5.2} {p11:>10.7} {p14:>10.7} {:>10.7} {:>10.7}", t.p(&Outcome::of(&["D2", "D3"])), t.p(&Outcome::of(&["D1", "D3"])));
        assert!((p11 - (1.0 + c * c) / 16.0).abs() < 1e-12);
        assert!((p14 - (17.0 - 8.0 * c * c) / 64.0).abs() < 1e-12);
    }
}
