//! Library results checked against brute-force evaluations that share none of
//! its quadrature code, plus cross-checks between independent routes to the
//! same quantity.

mod common;

use std::f64::consts::PI;

use corrinfo::densities::{one_body, pair_density};
use corrinfo::infotheory::{analyze, kl_divergence_2, js_divergence_1, kl_divergence_1, WoottersComponent};
use corrinfo::observables::kinetic_energy;
use corrinfo::quadrature::integrate_pair_on;
use corrinfo::{CorrelationParam, Nucleus, QuadratureSpec, Space, SystemKind, SystemSpec};

use common::{brute_marginal, brute_marginal_with_hole, histogram, richardson};

fn radii() -> impl Iterator<Item = f64> {
    (0..20).map(|i| 0.15 * i as f64)
}

#[test]
fn marginal_of_pair_density_matches_one_body_profile() {
    for kind in SystemKind::ALL {
        for corr in [CorrelationParam::Uncorrelated, CorrelationParam::Finite(1.0), CorrelationParam::Finite(20.0)] {
            let sys = SystemSpec::uncorrelated(kind).with_corr(corr);
            for space in Space::BOTH {
                let rho = one_body(&sys, space);
                let pair = pair_density(&sys, space).unwrap();
                // the position-space hole has width b/√y
                let hole = match (space, corr) {
                    (Space::Position, CorrelationParam::Finite(y)) => Some(y.sqrt().recip()),
                    _ => None,
                };
                for r in radii() {
                    let num = brute_marginal_with_hole(&pair, r, 14.0, hole);
                    let want = rho.eval(r);
                    assert!(
                        (num - want).abs() <= 1e-6 * want.abs(),
                        "{kind} {corr} {space} r={r}: marginal {num} vs profile {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn he4_closed_form_marginal_at_anchor_radii() {
    let sys = SystemSpec::uncorrelated(SystemKind::Nucleus(Nucleus::He4)).with_corr(CorrelationParam::Finite(1.0));
    for space in Space::BOTH {
        let rho = one_body(&sys, space);
        let pair = pair_density(&sys, space).unwrap();
        for r in [0.0, 1.0, 2.0] {
            let num = brute_marginal(&pair, r, 14.0);
            assert!((num - rho.eval(r)).abs() <= 1e-8 * rho.eval(r), "{space} r={r}");
        }
    }
}

#[test]
fn one_body_profiles_normalized_by_simpson() {
    for kind in SystemKind::ALL {
        for corr in [CorrelationParam::Uncorrelated, CorrelationParam::Finite(0.3), CorrelationParam::Finite(50.0)] {
            let sys = SystemSpec::uncorrelated(kind).with_corr(corr);
            for space in Space::BOTH {
                let rho = one_body(&sys, space);
                let r_max = rho.r_max();
                let n = richardson(|r| 4.0 * PI * r * r * rho.eval(r), 0.0, r_max, 4000);
                assert!((n - 1.0).abs() < 1e-9, "{kind} {corr} {space}: {n}");
            }
        }
    }
}

#[test]
fn kinetic_energy_from_pair_momentum_density() {
    let spec = QuadratureSpec::with_orders(64, 32);
    for kind in SystemKind::ALL {
        for corr in [CorrelationParam::Uncorrelated, CorrelationParam::Finite(1.0)] {
            let sys = SystemSpec::uncorrelated(kind).with_corr(corr);
            let n2 = pair_density(&sys, Space::Momentum).unwrap();
            let t2 = integrate_pair_on(|p| 0.25 * (p.r1 * p.r1 + p.r2 * p.r2) * n2.eval_point(p), &n2.support(), &spec, true)
                .unwrap();
            let t1 = kinetic_energy(&one_body(&sys, Space::Momentum), &spec).unwrap();
            assert!(
                (t1.value - t2.value).abs() <= 1e-8 * t1.value,
                "{kind} {corr}: one-body {} pair {}",
                t1.value,
                t2.value
            );
        }
    }
}

#[test]
fn histogram_kl_tracks_continuous_kl() {
    let spec = QuadratureSpec::default();
    for kind in [SystemKind::BoseGas, SystemKind::Nucleus(Nucleus::O16)] {
        let sys = SystemSpec::uncorrelated(kind).with_corr(CorrelationParam::Finite(0.5));
        let p = one_body(&sys, Space::Position);
        let q = one_body(&sys.reference(), Space::Position);
        let k = kl_divergence_1(&p, &q, &spec).unwrap().value;
        let (hp, hq) = (histogram(&p, 10.0, 400), histogram(&q, 10.0, 400));
        let discrete: f64 = hp
            .iter()
            .zip(&hq)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| a * (a / b).ln())
            .sum();
        assert!((discrete - k).abs() <= 1e-2 * k, "{kind}: {discrete} vs {k}");
        // coarse-graining can only lose information
        assert!(discrete <= k * (1.0 + 1e-9));
        let j = js_divergence_1(&p, &q, &spec).unwrap().value;
        assert!(j > 0.0 && j < k);
    }
}

#[test]
fn two_body_kl_is_twice_one_body_for_product_states() {
    // the Bose gas is a product state, but the Jastrow factor couples the
    // pair; only the uncorrelated-vs-uncorrelated case factorizes exactly
    let spec = QuadratureSpec::with_orders(48, 24);
    let bose = SystemSpec::uncorrelated(SystemKind::BoseGas);
    let wide = SystemSpec::new(SystemKind::BoseGas, 1.2, CorrelationParam::Uncorrelated).unwrap();
    for space in Space::BOTH {
        let (p1, q1) = (one_body(&wide, space), one_body(&bose, space));
        let (p2, q2) = (pair_density(&wide, space).unwrap(), pair_density(&bose, space).unwrap());
        let k1 = kl_divergence_1(&p1, &q1, &spec).unwrap().value;
        let k2 = kl_divergence_2(&p2, &q2, &spec).unwrap().value;
        assert!((k2 - 2.0 * k1).abs() <= 1e-10 * k2, "{space}: {k2} vs 2×{k1}");
    }
}

#[test]
fn functionals_converge_between_64_and_128_points() {
    let spec = QuadratureSpec::with_orders(64, 32);
    for kind in [SystemKind::Nucleus(Nucleus::He4), SystemKind::Nucleus(Nucleus::Ca40)] {
        for l in [-4.0, 0.0] {
            let sys = SystemSpec::uncorrelated(kind).with_corr(CorrelationParam::from_ln_inv_y(l).unwrap());
            let a = analyze(&sys, &spec, WoottersComponent::J1r).unwrap();
            for (name, e) in a.estimates() {
                assert!(e.within(1e-8), "{kind} ln(1/y)={l} {name}: {e:?}");
            }
        }
    }
}

#[test]
fn entropy_sum_and_onicescu_independent_of_b() {
    let spec = QuadratureSpec::with_orders(64, 32);
    for kind in [SystemKind::Nucleus(Nucleus::He4), SystemKind::Nucleus(Nucleus::O16)] {
        for corr in [CorrelationParam::Uncorrelated, CorrelationParam::Finite(2.0)] {
            let base = analyze(&SystemSpec::new(kind, 1.0, corr).unwrap(), &spec, WoottersComponent::J1r).unwrap();
            for b in [0.5, 2.0] {
                let a = analyze(&SystemSpec::new(kind, b, corr).unwrap(), &spec, WoottersComponent::J1r).unwrap();
                assert!((a.entropy.s1 - base.entropy.s1).abs() < 1e-6, "{kind} {corr} b={b}");
                assert!((a.entropy.o1 - base.entropy.o1).abs() < 1e-6 * base.entropy.o1);
                assert!((a.entropy.s1r - base.entropy.s1r - 3.0 * f64::ln(b)).abs() < 1e-6);
                assert!((a.divergence.k1r - base.divergence.k1r).abs() < 1e-9);
            }
        }
    }
}
