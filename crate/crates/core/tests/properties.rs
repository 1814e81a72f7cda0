//! Invariants over randomly drawn systems, strengths and points.

use std::f64::consts::LN_2;

use corrinfo::densities::{one_body, pair_density};
use corrinfo::infotheory::{analyze, eur_bound, WoottersComponent};
use corrinfo::{CorrelationParam, Nucleus, QuadratureSpec, Space, SystemKind, SystemSpec};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = SystemKind> {
    prop::sample::select(SystemKind::ALL.to_vec())
}

fn space() -> impl Strategy<Value = Space> {
    prop::sample::select(Space::BOTH.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_density_symmetric_under_exchange(
        kind in kind(),
        space in space(),
        l in -5.0f64..1.0,
        r1 in 0.0f64..4.0,
        r2 in 0.0f64..4.0,
        c in -1.0f64..=1.0,
    ) {
        let sys = SystemSpec::uncorrelated(kind).with_corr(CorrelationParam::from_ln_inv_y(l).unwrap());
        let p = pair_density(&sys, space).unwrap();
        let (a, b) = (p.eval(r1, r2, c), p.eval(r2, r1, c));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn gaussian_ground_states_stay_nonnegative(
        bose in any::<bool>(),
        space in space(),
        l in -5.0f64..1.0,
        r1 in 0.0f64..5.0,
        r2 in 0.0f64..5.0,
        c in -1.0f64..=1.0,
    ) {
        // only the hybrid construction for heavier nuclei may dip below zero
        let kind = if bose { SystemKind::BoseGas } else { SystemKind::Nucleus(Nucleus::He4) };
        let sys = SystemSpec::uncorrelated(kind).with_corr(CorrelationParam::from_ln_inv_y(l).unwrap());
        let p = pair_density(&sys, space).unwrap();
        prop_assert!(!p.may_be_negative());
        prop_assert!(p.eval(r1, r2, c) >= 0.0);
        prop_assert!(one_body(&sys, space).eval(r1) > 0.0);
    }

    #[test]
    fn weak_correlation_recovers_uncorrelated_densities(
        kind in kind(),
        space in space(),
        r1 in 0.0f64..4.0,
        r2 in 0.0f64..4.0,
        c in -1.0f64..=1.0,
    ) {
        let base = SystemSpec::uncorrelated(kind);
        let weak = base.with_corr(CorrelationParam::Finite(1e6));
        let (p0, p) = (one_body(&base, space), one_body(&weak, space));
        let scale = p0.eval(0.0);
        prop_assert!((p.eval(r1) - p0.eval(r1)).abs() <= 1e-6 * scale);
        let (q0, q) = (pair_density(&base, space).unwrap(), pair_density(&weak, space).unwrap());
        let scale = q0.eval(0.0, 0.0, 1.0);
        prop_assert!((q.eval(r1, r2, c) - q0.eval(r1, r2, c)).abs() <= 1e-6 * scale);
    }

    #[test]
    fn one_body_density_scales_with_b(
        kind in kind(),
        l in -4.0f64..0.0,
        b in 0.5f64..3.0,
        r in 0.0f64..4.0,
    ) {
        let corr = CorrelationParam::from_ln_inv_y(l).unwrap();
        let unit = SystemSpec::new(kind, 1.0, corr).unwrap();
        let scaled = SystemSpec::new(kind, b, corr).unwrap();
        let want = one_body(&unit, Space::Position).eval(r) / b.powi(3);
        let got = one_body(&scaled, Space::Position).eval(r * b);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300));
        // momentum scales inversely
        let want = one_body(&unit, Space::Momentum).eval(r) * b.powi(3);
        let got = one_body(&scaled, Space::Momentum).eval(r / b);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn divergences_bounded_and_uncertainty_relation_holds(
        kind in kind(),
        l in -6.0f64..1.0,
        b in 0.5f64..2.0,
    ) {
        let sys = SystemSpec::new(kind, b, CorrelationParam::from_ln_inv_y(l).unwrap()).unwrap();
        let a = analyze(&sys, &QuadratureSpec::with_orders(32, 16), WoottersComponent::J1r).unwrap();
        let d = &a.divergence;
        for k in [d.k1r, d.k1k, d.k2r, d.k2k] {
            prop_assert!(k >= 0.0, "K = {k}");
        }
        for j in [d.j1r, d.j1k, d.j2r, d.j2k] {
            prop_assert!((0.0..=LN_2).contains(&j), "J = {j}");
        }
        prop_assert!(a.entropy.s1 >= eur_bound() - 1e-6, "S1 = {}", a.entropy.s1);
    }
}
