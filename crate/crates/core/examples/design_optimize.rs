//! Reflectivity design: settings where the `D2 D3` coincidence vanishes,
//! Hardy's 1/36 setting, and the largest coincidence compatible with complete
//! single- and two-photon interference.

use photon_interference::design::{constraint_residuals, scan, scan_csv, zero_family_residual, Branch, ScanParam};
use photon_interference::{maximize_p23, p23, p23_exact, HardyParams, Real};

fn params(r0: &str, rc: &str, rm: &str, rf: &str) -> HardyParams {
    let r = |s: &str| Real::parse(s).unwrap();
    HardyParams::new(r(r0), r(rc), r(rm), r(rf)).unwrap()
}

fn main() {
    println!("settings with no D2 D3 coincidence:");
    for p in [params("1/3", "1/2", "1/2", "1/3"), params("sqrt2-1", "1/2", "1", "sqrt2-1"), params("1/2", "1/2", "1", "1/3")] {
        println!(
            "  R0={:.6} Rm={} Rf={:.6}: P23 = {} (exact {}), zero-family residual {:.1e}",
            p.r0.value(),
            p.rm.value(),
            p.rf.value(),
            p23(&p).unwrap().value(),
            p23_exact(&p).unwrap(),
            zero_family_residual(&p, Branch::Plus).unwrap()
        );
    }
    let hardy = params("1/2", "1/2", "1", "2/3");
    println!("Hardy setting: P23 = {}", p23_exact(&hardy).unwrap());

    let best = maximize_p23();
    let [r0, rc, rm, rf] = best.params.values();
    println!("maximum P23 = {:.12} at R0 = {r0:.8}, Rc = {rc}, Rm = {rm}, Rf = {rf:.8}", best.value);
    println!("closed form 17 - 12 sqrt2 = {:.12}", 17.0 - 12.0 * 2f64.sqrt());
    println!("exact at R0 = Rf = 2 - sqrt2: {}", p23_exact(&params("2-sqrt2", "1/2", "1", "2-sqrt2")).unwrap());
    let res = constraint_residuals(&best.params).unwrap();
    println!("constraint residuals at the maximum: {:.1e}, {:.1e}", res.mzi.to_complex().norm(), res.homi);

    let rows = scan(&HardyParams::balanced(), ScanParam::Rf, &[0.25, 0.5, 0.75]).unwrap();
    print!("{}", scan_csv(&rows));
}
