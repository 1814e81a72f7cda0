//! Helpers shared by the integration tests: an independent Simpson/Richardson
//! integrator and the PASS/FAIL reporter.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use corrinfo::{DensityProfile, PairDensity};

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Simpson at `n` and `2n` intervals combined to cancel the `h⁴` term.
pub fn richardson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let coarse = simpson(&f, a, b, n);
    let fine = simpson(&f, a, b, 2 * n);
    (16.0 * fine - coarse) / 15.0
}

/// `∫ ρ₂(r₁, r₂) d³r₂ = 2π ∫ r₂² dr₂ ∫ dc ρ₂(r₁, r₂, c)`, in the
/// `(r₁, r₂, cos θ₁₂)` coordinates rather than the library's
/// centre-of-mass grid.
pub fn brute_marginal(pair: &PairDensity, r1: f64, r_max: f64) -> f64 {
    brute_marginal_with_hole(pair, r1, r_max, None)
}

/// As [`brute_marginal`], but with both integrals split where a narrow
/// feature of width `hole` around `s = 0` starts, so Simpson does not have
/// to resolve it with uniform panels.
pub fn brute_marginal_with_hole(pair: &PairDensity, r1: f64, r_max: f64, hole: Option<f64>) -> f64 {
    let (r_cuts, reach) = match hole {
        Some(l) => {
            let reach = 3.0 * l;
            let cuts = [r1 - reach, r1 + reach].into_iter().filter(|&x| x > 0.0 && x < r_max).collect();
            (cuts, Some(reach))
        }
        None => (Vec::new(), None),
    };
    let inner = |r2: f64| {
        let mut cs = vec![-1.0];
        if let Some(reach) = reach {
            if r1 > 0.0 && r2 > 0.0 {
                let c0 = (r1 * r1 + r2 * r2 - reach * reach) / (2.0 * r1 * r2);
                if c0 > -1.0 && c0 < 1.0 {
                    cs.push(c0);
                }
            }
        }
        cs.push(1.0);
        cs.windows(2).map(|w| richardson(|c| pair.eval(r1, r2, c), w[0], w[1], 96)).sum::<f64>()
    };
    let mut rs = vec![0.0];
    rs.extend(r_cuts);
    rs.push(r_max);
    2.0 * PI * rs.windows(2).map(|w| richardson(|r2| r2 * r2 * inner(r2), w[0], w[1], 480)).sum::<f64>()
}

/// Probability of each of `bins` equal radial bins of `[0, r_max]`.
pub fn histogram(p: &DensityProfile, r_max: f64, bins: usize) -> Vec<f64> {
    let h = r_max / bins as f64;
    (0..bins)
        .map(|i| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            simpson(|r| 4.0 * PI * r * r * p.eval(r), a, b, 16)
        })
        .collect()
}

/// Print one verdict line on the real stdout, bypassing libtest's capture so
/// passing criteria are visible too.
pub fn verdict(id: &str, ok: bool, detail: &str) {
    let line = format!("{} criterion {id}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}
