mod common;

use photon_interference::path_engine::{outcome_amplitudes, seminaive_distribution, single_photon_amplitude, HardyPathAmps};
use photon_interference::statistics::{bunched, coincidence, loss_probability};
use photon_interference::{
    build_double_mzi, build_hom, build_mzi, full_distribution, partial_distinguishability_curve, Amp, ExactAmp,
    HardyParams, InputSpec, InternalState, ModeKey, Outcome, OutcomeTable,
};

fn q(n: i64, m: u32) -> Amp {
    Amp::Exact(ExactAmp::dyadic(n, m))
}

fn hardy() -> photon_interference::Circuit {
    build_double_mzi(&HardyParams::balanced())
}

fn identical() -> OutcomeTable {
    full_distribution(&hardy(), &InputSpec::identical_pair("L", "R").unwrap()).unwrap()
}

fn distinguishable() -> OutcomeTable {
    full_distribution(&hardy(), &InputSpec::pair_with_overlap("L", "R", Amp::ZERO).unwrap()).unwrap()
}

#[test]
fn mzi_single_photon_is_fully_constructive() {
    let t = full_distribution(&build_mzi(), &InputSpec::photons([("in", InternalState::h())]).unwrap()).unwrap();
    assert_eq!(t.prob(&Outcome::of(&["D1"])), Amp::ONE);
    assert_eq!(t.prob(&Outcome::of(&["D2"])), Amp::ZERO);
    assert!(t.is_exact());
}

#[test]
fn hom_identical_photons_bunch() {
    let t = full_distribution(&build_hom(), &InputSpec::identical_pair("in_L", "in_R").unwrap()).unwrap();
    assert_eq!(t.prob(&Outcome::of(&["L", "R"])), Amp::ZERO);
    assert_eq!(t.prob(&Outcome::of(&["L", "L"])), q(1, 1));
    assert_eq!(t.prob(&Outcome::of(&["R", "R"])), q(1, 1));
}

#[test]
fn hom_dip_matches_oracle() {
    let hom = build_hom();
    let grid: Vec<Amp> = (0..=10).map(|k| Amp::real(k as f64 / 10.0)).collect();
    for pt in partial_distinguishability_curve(&hom, "in_L", "in_R", &grid).unwrap() {
        let c = pt.overlap.value();
        let t = pt.table.coarse().unwrap();
        let oracle = common::two_photon_oracle(&hom, "in_L", "in_R", c * c);
        assert!((t.p(&Outcome::of(&["L", "R"])) - (1.0 - c * c) / 2.0).abs() < 1e-12);
        for (o, p) in &oracle {
            assert!((t.p(o) - p).abs() < 1e-12, "{o} at C = {c}");
        }
    }
}

#[test]
fn balanced_double_interferometer() {
    let t = identical();
    let pair = |a, b| coincidence(&t, &[a, b]).unwrap();
    assert_eq!(pair("D2", "D3"), q(1, 6));
    assert_eq!(pair("D1", "D3"), q(1, 6));
    assert_eq!(pair("D2", "D4"), q(1, 6));
    assert_eq!(pair("D1", "D4"), q(9, 6));
    assert_eq!(pair("D1", "D2"), q(1, 4));
    assert_eq!(pair("D3", "D4"), q(1, 4));
    for (d, p) in [("D1", q(1, 3)), ("D2", Amp::ZERO), ("D3", Amp::ZERO), ("D4", q(1, 3))] {
        assert_eq!(bunched(&t, d).unwrap(), p);
    }
    assert_eq!(loss_probability(&t).unwrap(), q(28, 6));
    let survive: Vec<Amp> = t.iter().filter(|(o, _)| t.is_loss_free(o)).map(|(_, p)| *p).collect();
    assert_eq!(Amp::sum(&survive).unwrap(), q(36, 6));
    assert_eq!(t.total().unwrap(), Amp::ONE);
}

#[test]
fn balanced_values_match_oracle() {
    let t = identical();
    for (o, p) in common::two_photon_oracle(&hardy(), "L", "R", 1.0) {
        assert!((t.p(&o) - p).abs() < 1e-15, "{o}");
    }
}

#[test]
fn per_photon_loss_is_a_quarter() {
    let c = hardy();
    for (src, side) in [("L", "loss_L"), ("R", "loss_R")] {
        assert_eq!(single_photon_amplitude(&c, src, side).unwrap().abs_sq().unwrap(), q(1, 2));
    }
}

#[test]
fn single_photon_amplitudes() {
    let c = hardy();
    let s2 = |a: i64, b: i64, cc: i64, d: i64, m: u32| Amp::Exact(ExactAmp::new(a, b, cc, d, m));
    let a = |src: &str, det: &str| single_photon_amplitude(&c, src, det).unwrap();
    assert_eq!(a("L", "D1"), s2(0, -1, 0, 0, 1));
    assert_eq!(a("R", "D4"), a("L", "D1"));
    assert_eq!(a("L", "D2"), Amp::ZERO);
    assert_eq!(a("R", "D3"), Amp::ZERO);
    assert_eq!(a("L", "D3"), s2(0, -1, 0, 0, 2));
    assert_eq!(a("R", "D2"), a("L", "D3"));
    assert_eq!(a("L", "D4"), s2(0, 0, 0, 1, 2));
    assert_eq!(a("R", "D1"), a("L", "D4"));
}

fn joint(table_inputs: &InputSpec, l: &str, r: &str) -> Amp {
    let mut o = Outcome::empty();
    o.add(ModeKey::labeled(l, "H"), 1);
    o.add(ModeKey::labeled(r, "V"), 1);
    let amps = outcome_amplitudes(&hardy(), table_inputs, &o).unwrap();
    Amp::sum(&amps.values().map(|a| a.abs_sq().unwrap()).collect::<Vec<_>>()).unwrap()
}

#[test]
fn distinguishable_joint_table() {
    let inputs = InputSpec::pair_with_overlap("L", "R", Amp::ZERO).unwrap();
    let d = ["D1", "D2", "D3", "D4"];
    let expected = [
        [q(1, 4), Amp::ZERO, q(1, 6), q(1, 6)],
        [q(1, 4), Amp::ZERO, q(1, 6), q(1, 6)],
        [Amp::ZERO; 4],
        [q(1, 2), Amp::ZERO, q(1, 4), q(1, 4)],
    ];
    for (ri, r) in d.iter().enumerate() {
        for (li, l) in d.iter().enumerate() {
            assert_eq!(joint(&inputs, l, r), expected[ri][li], "L->{l} & R->{r}");
        }
    }
    let t = distinguishable();
    assert_eq!(bunched(&t, "D1").unwrap(), q(1, 4));
    assert_eq!(bunched(&t, "D4").unwrap(), q(1, 4));
    assert_eq!(coincidence(&t, &["D1", "D4"]).unwrap(), q(17, 6));
}

#[test]
fn seminaive_model_equals_distinguishable() {
    let inputs = InputSpec::identical_pair("L", "R").unwrap();
    let naive = seminaive_distribution(&hardy(), &inputs).unwrap().coarse().unwrap();
    let dist = distinguishable().coarse().unwrap();
    assert_eq!(naive.entries, dist.entries);
    assert_eq!(coincidence(&naive, &["D1", "D4"]).unwrap(), q(17, 6));
}

#[test]
fn interference_term_identity() {
    let c = hardy();
    let id = identical();
    let dist = distinguishable();
    let names: Vec<String> = c.terminals.iter().map(|t| t.name.clone()).collect();
    let a = |src: &str, t: &str| single_photon_amplitude(&c, src, t).unwrap();
    for i in 0..names.len() {
        for j in 0..names.len() {
            if i == j {
                continue;
            }
            let (ti, tj) = (names[i].as_str(), names[j].as_str());
            let x = a("L", ti).mul(&a("R", tj)).unwrap();
            let y = a("L", tj).mul(&a("R", ti)).unwrap();
            let cross = x.mul(&y.conj()).unwrap();
            let two_re = cross.add(&cross.conj()).unwrap();
            let o = Outcome::of(&[ti, tj]);
            assert_eq!(id.prob(&o).sub(&dist.prob(&o)).unwrap(), two_re, "{ti},{tj}");
        }
    }
}

#[test]
fn overlap_curve() {
    let grid: Vec<Amp> = (0..=20).map(|k| Amp::real(k as f64 / 20.0)).collect();
    let points = partial_distinguishability_curve(&hardy(), "L", "R", &grid).unwrap();
    let fixed = identical().coarse().unwrap();
    for pt in points {
        let c = pt.overlap.value();
        let t = pt.table.coarse().unwrap();
        assert!((t.p(&Outcome::of(&["D1", "D1"])) - (1.0 + c * c) / 16.0).abs() < 1e-12);
        assert!((t.p(&Outcome::of(&["D4", "D4"])) - (1.0 + c * c) / 16.0).abs() < 1e-12);
        assert!((t.p(&Outcome::of(&["D1", "D4"])) - (17.0 - 8.0 * c * c) / 64.0).abs() < 1e-12);
        for o in [["D1", "D2"], ["D1", "D3"], ["D2", "D3"], ["D2", "D4"], ["D3", "D4"], ["D2", "D2"], ["D3", "D3"]] {
            let o = Outcome::of(&o);
            assert!((t.p(&o) - fixed.p(&o)).abs() < 1e-12, "{o} at C = {c}");
        }
        for (o, p) in common::two_photon_oracle(&hardy(), "L", "R", c * c) {
            assert!((t.p(&o) - p).abs() < 1e-12);
        }
    }
}

#[test]
fn complex_overlap_depends_on_modulus_only() {
    let c = hardy();
    let phase = Amp::float(0.3, 0.4);
    let real = Amp::real(0.5);
    let a = full_distribution(&c, &InputSpec::pair_with_overlap("L", "R", phase).unwrap()).unwrap().coarse().unwrap();
    let b = full_distribution(&c, &InputSpec::pair_with_overlap("L", "R", real).unwrap()).unwrap().coarse().unwrap();
    assert!(a.max_discrepancy(&b) < 1e-12);
}

#[test]
fn coincidence_protected_by_single_photon_interference() {
    let c = hardy();
    assert!(single_photon_amplitude(&c, "L", "D2").unwrap().is_zero());
    assert!(single_photon_amplitude(&c, "R", "D3").unwrap().is_zero());
    for k in 0..=8 {
        let inputs = InputSpec::pair_with_overlap("L", "R", Amp::Exact(ExactAmp::dyadic(k, 3))).unwrap();
        let t = full_distribution(&c, &inputs).unwrap();
        assert!((coincidence(&t, &["D2", "D3"]).unwrap().value() - 1.0 / 64.0).abs() < 1e-15);
    }
}

#[test]
fn both_reductions_give_one_eighth() {
    let amps = HardyPathAmps::from_circuit(&hardy()).unwrap();
    assert!(amps.mzi_holds().unwrap());
    assert!(amps.homi_holds().unwrap());
    let full = amps.a23().unwrap();
    assert_eq!(full, q(1, 3));
    assert_eq!(amps.mzi_reduction().unwrap(), full);
    assert_eq!(amps.homi_reduction().unwrap(), full);
    let c_sq = amps.c_l.mul(&amps.c_r).unwrap();
    assert_eq!(amps.mzi_reduction().unwrap(), c_sq);
    let outer = amps
        .o_l
        .mul(&amps.o_r)
        .unwrap()
        .add(&amps.o_l.mul(&amps.z_r).unwrap())
        .unwrap()
        .add(&amps.z_l.mul(&amps.o_r).unwrap())
        .unwrap();
    assert_eq!(outer, full);
}

#[test]
fn d2_d3_amplitude_against_outcome_amplitudes() {
    let amps = outcome_amplitudes(&hardy(), &InputSpec::identical_pair("L", "R").unwrap(), &Outcome::of(&["D2", "D3"])).unwrap();
    let total: Vec<Amp> = amps.values().copied().collect();
    assert_eq!(Amp::sum(&total).unwrap().abs_sq().unwrap(), q(1, 6));
}
