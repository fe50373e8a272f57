mod common;

use photon_interference::design::{
    branch_implies_zero, constrained_a23, constrained_rf, constraint_residuals, path_amps, r_star, zero_family_residual,
    Branch,
};
use photon_interference::statistics::coincidence;
use photon_interference::{build_double_mzi, full_distribution, maximize_p23, p23, p23_exact, HardyParams, InputSpec, QSqrt2, Real};
use proptest::prelude::*;

fn random_params(rng: &mut common::Rng) -> HardyParams {
    HardyParams::from_f64(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()).unwrap()
}

#[test]
fn closed_form_matches_full_simulation() {
    let mut rng = common::Rng::new(7);
    let inputs = InputSpec::identical_pair("L", "R").unwrap();
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let sim = full_distribution(&build_double_mzi(&p), &inputs).unwrap();
        let d23 = coincidence(&sim, &["D2", "D3"]).unwrap().value();
        assert!((p23(&p).unwrap().value() - d23).abs() < 1e-12, "{p:?}");
    }
}

/// `Rf` on the zero family through `(R0, Rc, Rm)`.
fn rf_on_branch(r0: f64, rc: f64, rm: f64, branch: Branch) -> f64 {
    let s = 2.0 * (rc * (1.0 - rc)).sqrt();
    let k = match branch {
        Branch::Plus => 1.0 + s,
        Branch::Minus => 1.0 - s,
    };
    rm * (1.0 - r0) / (k * r0 + rm * (1.0 - r0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn zero_family_is_sound(r0 in 0.01f64..0.99, rc in 0.0f64..=1.0, rm in 0.01f64..=1.0, plus in any::<bool>()) {
        let branch = if plus { Branch::Plus } else { Branch::Minus };
        let rf = rf_on_branch(r0, rc, rm, branch);
        let p = HardyParams::from_f64(r0, rc, rm, rf).unwrap();
        prop_assert!(zero_family_residual(&p, branch).unwrap().abs() < 1e-9);
        if branch_implies_zero(&p, branch) {
            prop_assert!(p23(&p).unwrap().value() < 1e-20);
        }
        let rs = r_star(&p).unwrap();
        prop_assert!(((rs - 0.5).powi(2) + (rc - 0.5).powi(2) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn constrained_manifold_keeps_both_effects(r0 in 0.01f64..0.99, rm in 0.01f64..=1.0) {
        let p = HardyParams::from_f64(r0, 0.5, rm, constrained_rf(r0, rm)).unwrap();
        let res = constraint_residuals(&p).unwrap();
        prop_assert!(res.mzi.to_complex().norm() < 1e-12);
        prop_assert!(res.homi.abs() < 1e-15);
        prop_assert!((p23(&p).unwrap().value() - constrained_a23(r0, rm).powi(2)).abs() < 1e-12);
    }
}

#[test]
fn minus_branch_below_half_is_not_a_zero() {
    let (r0, rc, rm) = (0.4, 0.2, 0.8);
    let p = HardyParams::from_f64(r0, rc, rm, rf_on_branch(r0, rc, rm, Branch::Minus)).unwrap();
    assert!(zero_family_residual(&p, Branch::Minus).unwrap().abs() < 1e-12);
    assert!(!branch_implies_zero(&p, Branch::Minus));
    assert!(p23(&p).unwrap().value() > 1e-3);
}

#[test]
fn two_photon_constraint_forces_balanced_center() {
    for rc in [0.1, 0.3, 0.7, 0.9] {
        let p = HardyParams::from_f64(0.4, rc, 0.6, 0.5).unwrap();
        assert!(constraint_residuals(&p).unwrap().homi.abs() > 1e-3);
    }
    let p = HardyParams::from_f64(0.4, 0.5, 0.6, 0.5).unwrap();
    assert_eq!(constraint_residuals(&p).unwrap().homi, 0.0);
}

#[test]
fn amplitude_chain_at_optimum() {
    let best = maximize_p23();
    let a = path_amps(&best.params).unwrap();
    let [r0, _, rm, rf] = best.params.values();
    let c2 = a.c.mul(&a.c).unwrap().value();
    let z2 = a.z.mul(&a.z).unwrap().value();
    let o2 = a.o.mul(&a.o).unwrap().value();
    let chain = [c2, -z2, r0 * rf / 2.0, -o2, rm * (1.0 - r0) * (1.0 - rf)];
    for x in chain {
        for y in chain {
            assert!((x - y).abs() < 1e-12, "{chain:?}");
        }
    }
}

#[test]
fn objective_is_unimodal_at_full_outer_reflection() {
    let f: Vec<f64> = (1..100_000).map(|k| constrained_a23(k as f64 / 100_000.0, 1.0)).collect();
    let peak = f.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(f[..=peak].windows(2).all(|w| w[1] >= w[0]));
    assert!(f[peak..].windows(2).all(|w| w[1] <= w[0]));
    assert!(((peak + 1) as f64 / 100_000.0 - (2.0 - 2f64.sqrt())).abs() < 2e-5);
}

#[test]
fn known_settings() {
    let r = |s: &str| Real::parse(s).unwrap();
    let hardy = HardyParams::new(r("1/2"), r("1/2"), r("1"), r("2/3")).unwrap();
    assert_eq!(p23_exact(&hardy), Some(QSqrt2::from_ratio(1, 36)));
    assert!(p23(&hardy).unwrap().value() < maximize_p23().value);
    let balanced = HardyParams::balanced();
    assert_eq!(p23_exact(&balanced), Some(QSqrt2::from_ratio(1, 64)));
    assert!(zero_family_residual(&balanced, Branch::Plus).unwrap().abs() > 0.1);
    assert!(zero_family_residual(&balanced, Branch::Minus).unwrap().abs() > 0.1);
}
