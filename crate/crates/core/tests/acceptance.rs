//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use num_complex::Complex64;
use photon_interference::circuit::{LABEL_H, LABEL_V};
use photon_interference::fock::coherent_number_distribution;
use photon_interference::path_engine::{outcome_amplitudes, single_photon_amplitude, HardyPathAmps};
use photon_interference::statistics::{bunched, coincidence, loss_probability, sample, DEFAULT_SEED};
use photon_interference::{
    build_double_mzi, build_hom, build_mzi, coherent_pair, fock_distribution, full_distribution, maximize_p23, p23,
    p23_exact, partial_distinguishability_curve, Amp, Circuit, ExactAmp, HardyParams, InputSpec, InternalState,
    ModeKey, Outcome, OutcomeTable, QSqrt2, Real, StudyReport,
};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, m: u32) -> Amp {
    Amp::Exact(ExactAmp::dyadic(n, m))
}

fn eq_exact(what: &str, got: Amp, want: Amp) -> Check {
    ensure(got == want, || format!("{what}: got {got}, want {want}"))
}

fn hardy() -> Circuit {
    build_double_mzi(&HardyParams::balanced())
}

fn table(c: &Circuit, inputs: &InputSpec) -> OutcomeTable {
    full_distribution(c, inputs).unwrap()
}

fn criterion_1() -> Check {
    let t = table(&build_mzi(), &InputSpec::photons([("in", InternalState::h())]).unwrap());
    eq_exact("P(D1)", t.prob(&Outcome::of(&["D1"])), Amp::ONE)?;
    eq_exact("P(D2)", t.prob(&Outcome::of(&["D2"])), Amp::ZERO)?;
    ensure(t.is_exact(), || "not exact".into())
}

fn criterion_2() -> Check {
    let hom = build_hom();
    let t = table(&hom, &InputSpec::identical_pair("in_L", "in_R").unwrap());
    eq_exact("P(L&R)", t.prob(&Outcome::of(&["L", "R"])), Amp::ZERO)?;
    eq_exact("P(L&L)", t.prob(&Outcome::of(&["L", "L"])), q(1, 1))?;
    eq_exact("P(R&R)", t.prob(&Outcome::of(&["R", "R"])), q(1, 1))?;
    let grid: Vec<Amp> = (0..=10).map(|k| Amp::real(k as f64 / 10.0)).collect();
    for pt in partial_distinguishability_curve(&hom, "in_L", "in_R", &grid).unwrap() {
        let c = pt.overlap.value();
        let got = pt.table.coarse().unwrap().p(&Outcome::of(&["L", "R"]));
        let oracle = common::two_photon_oracle(&hom, "in_L", "in_R", c * c)[&Outcome::of(&["L", "R"])];
        ensure((got - (1.0 - c * c) / 2.0).abs() < 1e-12 && (got - oracle).abs() < 1e-12, || {
            format!("coincidence at C = {c}: {got}")
        })?;
    }
    Ok(())
}

fn criterion_3() -> Check {
    let c = hardy();
    let t = table(&c, &InputSpec::identical_pair("L", "R").unwrap());
    let pair = |a: &str, b: &str| coincidence(&t, &[a, b]).unwrap();
    for (a, b, want) in [
        ("D2", "D3", q(1, 6)),
        ("D1", "D3", q(1, 6)),
        ("D2", "D4", q(1, 6)),
        ("D1", "D4", q(9, 6)),
        ("D1", "D2", q(1, 4)),
        ("D3", "D4", q(1, 4)),
    ] {
        eq_exact(&format!("P({a},{b})"), pair(a, b), want)?;
    }
    for (d, want) in [("D1", q(1, 3)), ("D4", q(1, 3)), ("D2", Amp::ZERO), ("D3", Amp::ZERO)] {
        eq_exact(&format!("P({d} twice)"), bunched(&t, d).unwrap(), want)?;
    }
    let oracle = common::two_photon_oracle(&c, "L", "R", 1.0);
    for o in [Outcome::of(&["D1", "D2"]), Outcome::of(&["D3", "D4"])] {
        ensure((oracle[&o] - 1.0 / 16.0).abs() < 1e-15, || format!("oracle {o}: {}", oracle[&o]))?;
    }
    for (src, loss) in [("L", "loss_L"), ("R", "loss_R")] {
        eq_exact("per-photon loss", single_photon_amplitude(&c, src, loss).unwrap().abs_sq().unwrap(), q(1, 2))?;
    }
    let survive: Vec<Amp> = t.iter().filter(|(o, _)| t.is_loss_free(o)).map(|(_, p)| *p).collect();
    eq_exact("survival", Amp::sum(&survive).unwrap(), q(36, 6))?;
    eq_exact("loss", loss_probability(&t).unwrap(), q(28, 6))?;
    eq_exact("total", t.total().unwrap(), Amp::ONE)
}

fn criterion_4() -> Check {
    let c = hardy();
    let inputs = InputSpec::pair_with_overlap("L", "R", Amp::ZERO).unwrap();
    let d = ["D1", "D2", "D3", "D4"];
    let want = [
        [q(1, 4), Amp::ZERO, q(1, 6), q(1, 6)],
        [q(1, 4), Amp::ZERO, q(1, 6), q(1, 6)],
        [Amp::ZERO; 4],
        [q(1, 2), Amp::ZERO, q(1, 4), q(1, 4)],
    ];
    for (ri, r) in d.iter().enumerate() {
        for (li, l) in d.iter().enumerate() {
            let mut o = Outcome::empty();
            o.add(ModeKey::labeled(*l, LABEL_H), 1);
            o.add(ModeKey::labeled(*r, LABEL_V), 1);
            let amps = outcome_amplitudes(&c, &inputs, &o).unwrap();
            let p = Amp::sum(&amps.values().map(|a| a.abs_sq().unwrap()).collect::<Vec<_>>()).unwrap();
            eq_exact(&format!("P(L->{l} & R->{r})"), p, want[ri][li])?;
        }
    }
    let t = table(&c, &inputs);
    eq_exact("P1(2)", bunched(&t, "D1").unwrap(), q(1, 4))?;
    eq_exact("P4(2)", bunched(&t, "D4").unwrap(), q(1, 4))?;
    eq_exact("P(D1,D4)", coincidence(&t, &["D1", "D4"]).unwrap(), q(17, 6))
}

fn criterion_5() -> Check {
    let c = hardy();
    let grid: Vec<Amp> = (0..=20).map(|k| Amp::real(k as f64 / 20.0)).collect();
    let reference = table(&c, &InputSpec::identical_pair("L", "R").unwrap()).coarse().unwrap();
    let fixed = [["D1", "D2"], ["D1", "D3"], ["D2", "D3"], ["D2", "D4"], ["D3", "D4"], ["D2", "D2"], ["D3", "D3"]];
    for pt in partial_distinguishability_curve(&c, "L", "R", &grid).unwrap() {
        let x = pt.overlap.value();
        let t = pt.table.coarse().unwrap();
        let p11 = t.p(&Outcome::of(&["D1", "D1"]));
        let p14 = t.p(&Outcome::of(&["D1", "D4"]));
        ensure((p11 - (1.0 + x * x) / 16.0).abs() < 1e-12, || format!("P1(2) at C = {x}: {p11}"))?;
        ensure((p14 - (17.0 - 8.0 * x * x) / 64.0).abs() < 1e-12, || format!("P1,4 at C = {x}: {p14}"))?;
        for o in fixed {
            let o = Outcome::of(&o);
            ensure((t.p(&o) - reference.p(&o)).abs() < 1e-12, || format!("{o} moved at C = {x}"))?;
        }
    }
    Ok(())
}

fn criterion_6() -> Check {
    let r = |s: &str| Real::parse(s).unwrap();
    let p = |a: &str, b: &str, c: &str, d: &str| HardyParams::new(r(a), r(b), r(c), r(d)).unwrap();
    for case in [p("1/3", "1/2", "1/2", "1/3"), p("sqrt2-1", "1/2", "1", "sqrt2-1"), p("1/2", "1/2", "1", "1/3")] {
        let v = p23(&case).unwrap().value();
        ensure(v < 1e-20, || format!("zero case {case:?}: {v}"))?;
    }
    let best = maximize_p23();
    let target = 17.0 - 12.0 * 2f64.sqrt();
    ensure((best.value - target).abs() < 1e-10, || format!("maximum {}", best.value))?;
    let [r0, _, rm, rf] = best.params.values();
    let opt = 2.0 - 2f64.sqrt();
    ensure(rm == 1.0 && (r0 - opt).abs() < 1e-5 && (rf - opt).abs() < 1e-5, || format!("argmax {:?}", best.params.values()))?;
    ensure(p23_exact(&p("1/2", "1/2", "1", "2/3")) == Some(QSqrt2::from_ratio(1, 36)), || "Hardy setting".into())
}

fn criterion_7() -> Check {
    let p = coherent_number_distribution(Complex64::new(0.1, 0.0), 2).unwrap();
    for (got, printed) in p.iter().zip([0.99005, 0.00990, 0.00005]) {
        ensure((got - printed).abs() < 5e-5, || format!("{got} vs {printed}"))?;
    }
    let a = Complex64::new(0.1, 0.0);
    let ch = coherent_pair(&hardy(), "L", a, "R", a, 2).unwrap().channels;
    ensure(ch.p20 == ch.p02 && ch.p20 == ch.p11 / 2.0, || format!("{ch:?}"))
}

fn criterion_8() -> Check {
    for seed in 0..200 {
        let (c, inputs) = common::random_setup(seed);
        let path = full_distribution(&c, &inputs).map_err(|e| format!("seed {seed}: {e}"))?;
        let fock = fock_distribution(&c, &inputs).map_err(|e| format!("seed {seed}: {e}"))?;
        let d = path.max_discrepancy(&fock);
        ensure(d <= 1e-12, || format!("seed {seed}: engines differ by {d}"))?;
        for t in [&path, &fock] {
            let s: f64 = t.iter().map(|(_, p)| p.value()).sum();
            ensure((s - 1.0).abs() <= 1e-12, || format!("seed {seed}: total {s}"))?;
        }
        for label in [LABEL_H, LABEL_V] {
            let defect = c.transfer_matrix_for(label).unwrap().isometry_defect().unwrap();
            ensure(defect <= 1e-12, || format!("seed {seed}: column defect {defect}"))?;
        }
    }
    Ok(())
}

fn criterion_9() -> Check {
    let t = table(&hardy(), &InputSpec::identical_pair("L", "R").unwrap());
    let report = StudyReport::run(&t, 1000, DEFAULT_SEED, 0.95).unwrap();
    ensure(report == StudyReport::run(&t, 1000, DEFAULT_SEED, 0.95).unwrap(), || "report not reproducible".into())?;
    ensure(report.rows.len() == 11 && report.rows.iter().map(|r| r.count).sum::<u64>() == 1000, || "report shape".into())?;
    let mean = (0..100).map(|s| StudyReport::run(&t, 1000, s, 0.95).unwrap().coverage()).sum::<f64>() / 100.0;
    ensure((0.93..=0.99).contains(&mean), || format!("mean coverage {mean}"))?;
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| sample(&t, 1000, DEFAULT_SEED).unwrap())
    };
    let one = run(1);
    ensure(one == run(2) && one == run(8), || "sampling depends on thread count".into())
}

fn criterion_10() -> Check {
    let c = hardy();
    let id = table(&c, &InputSpec::identical_pair("L", "R").unwrap());
    let dist = table(&c, &InputSpec::pair_with_overlap("L", "R", Amp::ZERO).unwrap());
    let names: Vec<&str> = c.terminals.iter().map(|t| t.name.as_str()).collect();
    let a = |s: &str, t: &str| single_photon_amplitude(&c, s, t).unwrap();
    for &i in &names {
        for &j in &names {
            if i == j {
                continue;
            }
            let x = a("L", i).mul(&a("R", j)).unwrap();
            let y = a("L", j).mul(&a("R", i)).unwrap();
            let cross = x.mul(&y.conj()).unwrap();
            let o = Outcome::of(&[i, j]);
            eq_exact(&format!("interference term {i},{j}"), id.prob(&o).sub(&dist.prob(&o)).unwrap(), cross.add(&cross.conj()).unwrap())?;
        }
    }
    let amps = HardyPathAmps::from_circuit(&c).unwrap();
    eq_exact("A23", amps.a23().unwrap(), q(1, 3))?;
    eq_exact("single-photon reduction", amps.mzi_reduction().unwrap(), q(1, 3))?;
    eq_exact("two-photon reduction", amps.homi_reduction().unwrap(), q(1, 3))
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [fn() -> Check; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut failed = 0;
    for (n, check) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(()) => println!("criterion {}: PASS", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL ({why})", n + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
