//! Two photons on one 50:50 beam splitter. The coincidence probability
//! follows `(1 - |C|^2) / 2` as the overlap `C` of their internal states
//! goes from 0 to 1.

use photon_interference::{build_hom, full_distribution, Amp, InputSpec, Outcome};

fn main() {
    let hom = build_hom();
    println!("{:>6} {:>12} {:>12} {:>12}", "C", "P(L&R)", "P(L&L)", "P(R&R)");
    for k in 0..=10 {
        let c = k as f64 / 10.0;
        let inputs = InputSpec::pair_with_overlap("in_L", "in_R", Amp::real(c)).unwrap();
        let table = full_distribution(&hom, &inputs).unwrap().coarse().unwrap();
        let lr = table.p(&Outcome::of(&["L", "R"]));
        println!("{c:>6.2} {lr:>12.9} {:>12.9} {:>12.9}", table.p(&Outcome::of(&["L", "L"])), table.p(&Outcome::of(&["R", "R"])));
        assert!((lr - (1.0 - c * c) / 2.0).abs() < 1e-12);
    }
}
