//! Fixed tensor-product Gauss-Legendre rules for radial and two-body integrals.
//!
//! Two-body integrands depend only on `|r₁|`, `|r₂|` and the included angle,
//! so the six-dimensional integral collapses to three dimensions. The grid
//! lives in centre-of-mass/relative coordinates `R = |r₁+r₂|/2`,
//! `s = |r₁-r₂|` and `u = cos∠(R, s)`, where `d³r₁d³r₂ = 8π² R² s² dR ds du`.
//! A Jastrow hole depends on `s` alone, so breakpoints on the `s` axis
//! resolve it no matter how narrow it gets.
//!
//! The rule is exact in the limit for integrands that are smooth functions
//! of the vectors `r₁`, `r₂` — shell-model densities depend on the angle
//! only through `r₁·r₂` and `|r₁×r₂|²`. A bare `cos θ₁₂` factor is not smooth
//! where either radius vanishes and converges slowly.
//!
//! Every integral is computed at the requested orders and again at doubled
//! orders; the difference is returned as the error estimate.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are treated as zero inside `x ln x`.
pub const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points per radial segment.
    pub radial_order: usize,
    /// Gauss-Legendre points on `[-1, 1]` for the angular variable.
    pub angular_order: usize,
    /// Default radial cutoff for integrands without their own support.
    pub r_max: f64,
    /// Relative change under order doubling above which a warning is logged.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_order: 96,
            angular_order: 48,
            r_max: 10.0,
            tolerance: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn with_orders(radial_order: usize, angular_order: usize) -> Self {
        QuadratureSpec {
            radial_order,
            angular_order,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial_order < 8 || self.angular_order < 8 {
            return Err(Error::InvalidQuadrature(format!(
                "orders must be at least 8, got radial {} angular {}",
                self.radial_order, self.angular_order
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidQuadrature(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidQuadrature(format!("bad cutoff {}", self.r_max)));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            radial_order: 2 * self.radial_order,
            angular_order: 2 * self.angular_order,
            ..*self
        }
    }
}

/// An integral at the base orders together with `|I(2n) - I(n)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn from_pair(base: f64, doubled: f64) -> Self {
        Estimate {
            value: base,
            error: (doubled - base).abs(),
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error / self.value.abs()
        }
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.error <= tolerance * self.value.abs()
    }
}

/// Log a warning when an estimate misses its tolerance; returns whether it passed.
pub fn check_accuracy(what: &str, est: &Estimate, tolerance: f64) -> bool {
    let ok = est.within(tolerance);
    if !ok {
        log::warn!(
            "{what}: order doubling changed the result by {:.3e} (relative {:.3e}, tolerance {:.1e})",
            est.error,
            est.relative_error(),
            tolerance
        );
    }
    ok
}

/// Compensated running sum with a fixed evaluation order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[0, 1]`.
fn unit_rule(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = NonZeroUsize::new(order).ok_or_else(|| Error::InvalidQuadrature("zero quadrature order".into()))?;
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs.into_iter().map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).unzip())
}

#[allow(clippy::too_many_arguments)]
fn push_piece(a: f64, b: f64, grade_a: bool, grade_b: bool, t: &[f64], w: &[f64], nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let h = b - a;
    match (grade_a, grade_b) {
        (false, false) => {
            for (&ti, &wi) in t.iter().zip(w) {
                nodes.push(a + h * ti);
                weights.push(h * wi);
            }
        }
        (true, false) => {
            for (&ti, &wi) in t.iter().zip(w) {
                nodes.push(a + h * ti * ti * ti);
                weights.push(3.0 * h * ti * ti * wi);
            }
        }
        (false, true) => {
            for (&ti, &wi) in t.iter().zip(w).rev() {
                nodes.push(b - h * ti * ti * ti);
                weights.push(3.0 * h * ti * ti * wi);
            }
        }
        (true, true) => {
            let m = a + 0.5 * h;
            push_piece(a, m, true, false, t, w, nodes, weights);
            push_piece(m, b, false, true, t, w, nodes, weights);
        }
    }
}

/// Root of `g` in `[lo, hi]` given values of opposite sign at the ends
/// (Illinois false position).
pub fn bracket_root(mut g: impl FnMut(f64) -> f64, lo: f64, hi: f64, g_lo: f64, g_hi: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, g_lo, g_hi);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = g(c);
        if fc == 0.0 || !fc.is_finite() {
            return c;
        }
        if (fc < 0.0) == (fb < 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Zeros of `g` bracketed by consecutive samples `(xs[i], vals[i])` of opposite sign.
pub fn sign_change_roots(xs: &[f64], vals: &[f64], mut g: impl FnMut(f64) -> f64) -> Vec<f64> {
    let mut roots = Vec::new();
    for i in 1..xs.len() {
        let (v0, v1) = (vals[i - 1], vals[i]);
        if (v0 < 0.0) != (v1 < 0.0) {
            roots.push(bracket_root(&mut g, xs[i - 1], xs[i], v0, v1));
        }
    }
    roots
}

/// Composite Gauss-Legendre rule over consecutive segments.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn composite(breaks: &[f64], order: usize) -> Result<Self> {
        Rule::with_roots(breaks, &[], order)
    }

    /// Composite rule split additionally at `roots`, with nodes graded
    /// cubically toward each root.
    ///
    /// A clamped integrand such as `p⁺ ln p⁺` has a kink at a simple zero of
    /// `p`; on a piece ending there the substitution `x = x₀ + h t³` turns
    /// `x ln x` into `t⁵ ln t`, which Gauss-Legendre resolves quickly.
    pub fn with_roots(breaks: &[f64], roots: &[f64], order: usize) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidQuadrature("need at least one segment".into()));
        }
        let (t, w) = unit_rule(order)?;
        let mut nodes = Vec::with_capacity(order * (breaks.len() + roots.len()));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut pts = Vec::new();
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if !(b > a) {
                return Err(Error::InvalidQuadrature(format!(
                    "segment breakpoints must increase: {a} .. {b}"
                )));
            }
            let min_gap = 1e-12 * (b - a);
            pts.clear();
            pts.push(a);
            let mut inner: Vec<f64> = roots.iter().copied().filter(|&r| r > a && r < b).collect();
            inner.sort_by(f64::total_cmp);
            for r in inner {
                if r - pts[pts.len() - 1] > min_gap && b - r > min_gap {
                    pts.push(r);
                }
            }
            pts.push(b);
            let last = pts.len() - 2;
            if last == 0 {
                push_piece(a, b, false, false, &t, &w, &mut nodes, &mut weights);
                continue;
            }
            // split pieces share the segment's nodes in proportion to length,
            // but never drop below half the order
            for (i, piece) in pts.windows(2).enumerate() {
                let share = (order as f64 * (piece[1] - piece[0]) / (b - a)).ceil() as usize;
                let (tp, wp) = unit_rule(share.max(order.div_ceil(2)))?;
                push_piece(piece[0], piece[1], i > 0, i < last, &tp, &wp, &mut nodes, &mut weights);
            }
        }
        Ok(Rule { nodes, weights })
    }

    /// Gauss-Legendre on `[-1, 1]` folded onto `[0, 1]` for even integrands.
    fn folded_cosine(order: usize) -> Result<Self> {
        let full = Rule::composite(&[-1.0, 1.0], order)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (&x, &w) in full.nodes.iter().zip(&full.weights) {
            if x > 0.0 {
                nodes.push(x);
                weights.push(2.0 * w);
            } else if x == 0.0 {
                nodes.push(x);
                weights.push(w);
            }
        }
        Ok(Rule { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Radial rule whose weights include the `4πr²` volume element.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    rule: Rule,
}

impl RadialGrid {
    pub fn new(breaks: &[f64], order: usize) -> Result<Self> {
        RadialGrid::with_roots(breaks, &[], order)
    }

    /// See [`Rule::with_roots`].
    pub fn with_roots(breaks: &[f64], roots: &[f64], order: usize) -> Result<Self> {
        let mut rule = Rule::with_roots(breaks, roots, order)?;
        for (w, &r) in rule.weights.iter_mut().zip(&rule.nodes) {
            *w *= 4.0 * PI * r * r;
        }
        Ok(RadialGrid { rule })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rule.nodes.iter().copied().zip(self.rule.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn try_sum(&self, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut acc = Accumulator::default();
        for (r, w) in self.points() {
            let v = f(r);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    location: format!("r={r}"),
                });
            }
            acc.add(w * v);
        }
        Ok(acc.total())
    }
}

/// A two-body configuration: radii, cosine of the included angle and the
/// squared separation `|r₁-r₂|²` (kept exactly rather than re-derived).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPoint {
    pub r1: f64,
    pub r2: f64,
    pub c: f64,
    pub sep2: f64,
}

impl PairPoint {
    pub fn new(r1: f64, r2: f64, c: f64) -> Self {
        PairPoint {
            r1,
            r2,
            c,
            sep2: (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * c).max(0.0),
        }
    }

    pub fn swapped(&self) -> Self {
        PairPoint {
            r1: self.r2,
            r2: self.r1,
            ..*self
        }
    }

    pub fn from_relative(big_r: f64, s: f64, u: f64) -> Self {
        let base = big_r * big_r + 0.25 * s * s;
        let cross = big_r * s * u;
        let r1 = (base + cross).max(0.0).sqrt();
        let r2 = (base - cross).max(0.0).sqrt();
        let prod = r1 * r2;
        let c = if prod > 0.0 {
            ((big_r * big_r - 0.25 * s * s) / prod).clamp(-1.0, 1.0)
        } else {
            1.0
        };
        PairPoint {
            r1,
            r2,
            c,
            sep2: s * s,
        }
    }
}

/// Integration domain of a two-body integrand in relative coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSupport {
    /// Upper limit of the centre-of-mass radius `R`.
    pub cm_max: f64,
    /// Breakpoints of the separation axis, starting at 0.
    pub sep_breaks: Vec<f64>,
}

impl PairSupport {
    /// Covers every configuration with `r₁, r₂ ≤ r_max`.
    pub fn ball(r_max: f64) -> Self {
        PairSupport {
            cm_max: r_max,
            sep_breaks: vec![0.0, 2.0 * r_max],
        }
    }

    pub fn scaled(&self, unit: f64) -> Self {
        PairSupport {
            cm_max: self.cm_max * unit,
            sep_breaks: self.sep_breaks.iter().map(|x| x * unit).collect(),
        }
    }

    /// Merge the separation breakpoints of two supports.
    pub fn union(&self, other: &PairSupport) -> Self {
        let mut breaks: Vec<f64> = self
            .sep_breaks
            .iter()
            .chain(&other.sep_breaks)
            .copied()
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        PairSupport {
            cm_max: self.cm_max.max(other.cm_max),
            sep_breaks: breaks,
        }
    }
}

/// Tensor grid in `(R, s, u)`.
#[derive(Debug, Clone)]
pub struct PairGrid {
    cm: Rule,
    sep: Rule,
    sep_breaks: Vec<f64>,
    order: usize,
    cos: Rule,
}

impl PairGrid {
    /// `symmetric` folds `u → -u` (i.e. `r₁ ↔ r₂`); only valid for
    /// integrands invariant under particle exchange.
    pub fn new(support: &PairSupport, radial_order: usize, angular_order: usize, symmetric: bool) -> Result<Self> {
        PairGrid::with_cm_roots(support, radial_order, angular_order, symmetric, &[])
    }

    /// As [`PairGrid::new`], grading the centre-of-mass axis toward `cm_roots`.
    ///
    /// A clamped region around `s = 0` closes where the density at
    /// coincident points `r₁ = r₂ = R` changes sign; those `R` are the kinks
    /// of the inner integrals.
    pub fn with_cm_roots(
        support: &PairSupport,
        radial_order: usize,
        angular_order: usize,
        symmetric: bool,
        cm_roots: &[f64],
    ) -> Result<Self> {
        let cm = Rule::with_roots(&[0.0, support.cm_max], cm_roots, radial_order)?;
        let sep = Rule::composite(&support.sep_breaks, radial_order)?;
        let cos = if symmetric {
            Rule::folded_cosine(angular_order)?
        } else {
            Rule::composite(&[-1.0, 1.0], angular_order)?
        };
        Ok(PairGrid {
            cm,
            sep,
            sep_breaks: support.sep_breaks.clone(),
            order: radial_order,
            cos,
        })
    }

    pub fn len(&self) -> usize {
        self.cm.len() * self.sep.len() * self.cos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Visit every node with its full weight (volume element included), in a
    /// fixed order.
    pub fn for_each(&self, mut f: impl FnMut(&PairPoint, f64)) {
        let jac = 8.0 * PI * PI;
        for (&big_r, &wr) in self.cm.nodes.iter().zip(&self.cm.weights) {
            let wr = wr * jac * big_r * big_r;
            for (&s, &ws) in self.sep.nodes.iter().zip(&self.sep.weights) {
                let wrs = wr * ws * s * s;
                for (&u, &wu) in self.cos.nodes.iter().zip(&self.cos.weights) {
                    let p = PairPoint::from_relative(big_r, s, u);
                    f(&p, wrs * wu);
                }
            }
        }
    }

    /// Like [`PairGrid::for_each`] for integrands that are clamped at zeros
    /// of a signed density. Along every `(R, u)` line each separation
    /// segment is scanned for sign changes of `value(eval(·))`; where one
    /// is found the segment is re-integrated with [`Rule::with_roots`].
    /// Lines without a sign change reuse the scanned evaluations.
    pub fn for_each_split<T>(
        &self,
        mut eval: impl FnMut(&PairPoint) -> T,
        value: impl Fn(&T) -> f64,
        mut emit: impl FnMut(&PairPoint, &T, f64),
    ) -> Result<()> {
        let jac = 8.0 * PI * PI;
        let n = self.order;
        let mut line: Vec<(PairPoint, T)> = Vec::with_capacity(n);
        let mut vals: Vec<f64> = Vec::with_capacity(n);
        for (&big_r, &wr) in self.cm.nodes.iter().zip(&self.cm.weights) {
            for (&u, &wu) in self.cos.nodes.iter().zip(&self.cos.weights) {
                let w_line = wr * jac * big_r * big_r * wu;
                for (k, seg) in self.sep_breaks.windows(2).enumerate() {
                    let idx = k * n..(k + 1) * n;
                    let s_nodes = &self.sep.nodes[idx.clone()];
                    line.clear();
                    vals.clear();
                    for &s in s_nodes {
                        let p = PairPoint::from_relative(big_r, s, u);
                        let t = eval(&p);
                        vals.push(value(&t));
                        line.push((p, t));
                    }
                    let roots = sign_change_roots(s_nodes, &vals, |s| {
                        value(&eval(&PairPoint::from_relative(big_r, s, u)))
                    });
                    if roots.is_empty() {
                        for ((p, t), &ws) in line.iter().zip(&self.sep.weights[idx]) {
                            emit(p, t, w_line * ws * p.sep2);
                        }
                    } else {
                        let rule = Rule::with_roots(seg, &roots, n)?;
                        for (&s, &ws) in rule.nodes.iter().zip(&rule.weights) {
                            let p = PairPoint::from_relative(big_r, s, u);
                            let t = eval(&p);
                            emit(&p, &t, w_line * ws * s * s);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn try_sum(&self, mut f: impl FnMut(&PairPoint) -> f64) -> Result<f64> {
        let mut acc = Accumulator::default();
        let mut bad: Option<(f64, PairPoint)> = None;
        self.for_each(|p, w| {
            if bad.is_some() {
                return;
            }
            let v = f(p);
            if !v.is_finite() {
                bad = Some((v, *p));
            } else {
                acc.add(w * v);
            }
        });
        if let Some((value, p)) = bad {
            return Err(Error::NonFinite {
                value,
                location: format!("r1={} r2={} c={}", p.r1, p.r2, p.c),
            });
        }
        Ok(acc.total())
    }
}

/// `∫₀^{R_max} f(r) 4πr² dr` with an order-doubling error estimate.
pub fn integrate_radial(f: impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_radial_on(f, &[0.0, spec.r_max], spec)
}

/// As [`integrate_radial`] over explicit segment breakpoints.
pub fn integrate_radial_on(f: impl Fn(f64) -> f64, breaks: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    let base = RadialGrid::new(breaks, spec.radial_order)?.try_sum(&f)?;
    let fine = RadialGrid::new(breaks, 2 * spec.radial_order)?.try_sum(&f)?;
    let est = Estimate::from_pair(base, fine);
    check_accuracy("radial integral", &est, spec.tolerance);
    Ok(est)
}

/// `∫∫∫ f(r₁, r₂, c) 8π² r₁² r₂² dr₁ dr₂ dc` over `r₁, r₂ ≤ R_max`.
pub fn integrate_pair(f: impl Fn(f64, f64, f64) -> f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_pair_on(|p| f(p.r1, p.r2, p.c), &PairSupport::ball(spec.r_max), spec, false)
}

/// As [`integrate_pair`] with an explicit support; see [`PairGrid::new`] for `symmetric`.
pub fn integrate_pair_on(
    f: impl Fn(&PairPoint) -> f64,
    support: &PairSupport,
    spec: &QuadratureSpec,
    symmetric: bool,
) -> Result<Estimate> {
    spec.validate()?;
    let base = PairGrid::new(support, spec.radial_order, spec.angular_order, symmetric)?.try_sum(&f)?;
    let d = spec.doubled();
    let fine = PairGrid::new(support, d.radial_order, d.angular_order, symmetric)?.try_sum(&f)?;
    let est = Estimate::from_pair(base, fine);
    check_accuracy("pair integral", &est, spec.tolerance);
    Ok(est)
}

/// `x ln x`, with the `x → 0⁺` limit for `x ≤` [`DENSITY_FLOOR`].
///
/// Negative inputs (clamped regions of a hybrid density) also give 0; use
/// [`ClampTally`] to account for them.
#[inline]
pub fn entropy_integrand_guard(x: f64) -> f64 {
    if x > DENSITY_FLOOR {
        x * x.ln()
    } else {
        0.0
    }
}

/// Probability mass removed by clamping negative density values to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClampTally {
    /// `∫ max(-p, 0)`.
    pub mass: f64,
    /// Number of quadrature nodes where the density was negative.
    pub nodes: usize,
}

impl ClampTally {
    #[inline]
    pub fn record(&mut self, x: f64, weight: f64) {
        if x < 0.0 {
            self.mass += -x * weight;
            self.nodes += 1;
        }
    }

    /// [`entropy_integrand_guard`] that also records clamped values.
    #[inline]
    pub fn guard(&mut self, x: f64, weight: f64) -> f64 {
        self.record(x, weight);
        entropy_integrand_guard(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss3(r: f64) -> f64 {
        PI.powf(-1.5) * (-r * r).exp()
    }

    #[test]
    fn radial_gaussian_moments() {
        let spec = QuadratureSpec::default();
        let e = integrate_radial(gauss3, &spec).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-14);
        assert!(e.error < 1e-14);
        let e = integrate_radial(|r| r * r * gauss3(r), &spec).unwrap();
        assert_relative_eq!(e.value, 1.5, epsilon = 1e-13);
        let e = integrate_radial(|r| (-2.0 * r * r).exp() / PI.powi(3), &spec).unwrap();
        assert_relative_eq!(e.value, (2.0 * PI).powf(-1.5), max_relative = 1e-13);
        assert_relative_eq!(e.value, 0.0634936, epsilon = 1e-7);
    }

    #[test]
    fn pair_gaussian_integrals() {
        let spec = QuadratureSpec::with_orders(48, 16);
        let prod = |r1: f64, r2: f64, _c: f64| gauss3(r1) * gauss3(r2);
        let e = integrate_pair(prod, &spec).unwrap();
        assert_relative_eq!(e.value, 1.0, epsilon = 1e-12);
        let e = integrate_pair(|a, b, c| prod(a, b, c).powi(2), &spec).unwrap();
        assert_relative_eq!(e.value, (2.0 * PI).powi(-3), max_relative = 1e-12);
        assert_relative_eq!(e.value, 4.031e-3, epsilon = 1e-6);
    }

    #[test]
    fn pair_angular_dependence() {
        // ⟨(r₁·r₂)²⟩ = ⟨r₁²⟩⟨r₂²⟩/3 and ⟨|r₁×r₂|²⟩ = 2⟨r₁²⟩⟨r₂²⟩/3 for independent Gaussians
        let spec = QuadratureSpec::with_orders(48, 16);
        let g = |r1: f64, r2: f64| gauss3(r1) * gauss3(r2);
        let e = integrate_pair(|r1, r2, c| g(r1, r2) * (r1 * r2 * c).powi(2), &spec).unwrap();
        assert_relative_eq!(e.value, 0.75, epsilon = 1e-12);
        let e = integrate_pair(|r1, r2, c| g(r1, r2) * (r1 * r2).powi(2) * (1.0 - c * c), &spec).unwrap();
        assert_relative_eq!(e.value, 1.5, epsilon = 1e-12);
        // odd in r₂ → −r₂
        let e = integrate_pair(|r1, r2, c| g(r1, r2) * r1 * r2 * c, &spec).unwrap();
        assert!(e.value.abs() < 1e-13);
    }

    #[test]
    fn narrow_hole_resolved_by_breakpoints() {
        // ∫∫ G(r1)G(r2) e^{-y s²} = (1+2y)^{-3/2}
        let y = 1e4;
        let spec = QuadratureSpec::with_orders(32, 16);
        let ell = 1.0 / f64::sqrt(y);
        let support = PairSupport {
            cm_max: 10.0,
            sep_breaks: vec![0.0, 3.0 * ell, 8.0 * ell, 20.0],
        };
        let e = integrate_pair_on(
            |p| gauss3(p.r1) * gauss3(p.r2) * (-y * p.sep2).exp(),
            &support,
            &spec,
            true,
        )
        .unwrap();
        assert_relative_eq!(e.value, (1.0 + 2.0 * y).powf(-1.5), max_relative = 1e-10);
    }

    #[test]
    fn folded_rule_matches_full_for_even_integrands() {
        let spec = QuadratureSpec::with_orders(48, 12);
        let f = |p: &PairPoint| gauss3(p.r1) * gauss3(p.r2) * (1.0 + p.r1 * p.r1);
        let sup = PairSupport::ball(10.0);
        // not exchange-symmetric: folding must differ from the full rule
        let full = integrate_pair_on(f, &sup, &spec, false).unwrap().value;
        let sym = |p: &PairPoint| 0.5 * (f(p) + f(&p.swapped()));
        let folded = integrate_pair_on(sym, &sup, &spec, true).unwrap().value;
        assert_relative_eq!(full, folded, max_relative = 1e-12);
        assert_relative_eq!(full, 2.5, max_relative = 1e-12);
    }

    #[test]
    fn kink_at_root_resolved_by_grading() {
        // ∫₀² x⁺ ln x⁺ with x = t - 0.7: exact value is h²/2 (ln h - 1/2), h = 1.3
        let f = |t: f64| {
            let x = t - 0.7;
            if x > 0.0 {
                x * x.ln()
            } else {
                0.0
            }
        };
        let h: f64 = 1.3;
        let exact = 0.5 * h * h * (h.ln() - 0.5);
        let sum = |rule: &Rule| -> f64 { rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * f(x)).sum() };
        let plain = sum(&Rule::composite(&[0.0, 2.0], 32).unwrap());
        let root = bracket_root(|t| t - 0.7, 0.0, 2.0, -0.7, 1.3);
        assert_relative_eq!(root, 0.7, max_relative = 1e-15);
        let graded = sum(&Rule::with_roots(&[0.0, 2.0], &[root], 32).unwrap());
        assert!((plain - exact).abs() > 1e-7);
        assert_relative_eq!(graded, exact, max_relative = 1e-12);
    }

    #[test]
    fn roots_from_sign_changes() {
        let g = |x: f64| (x - 1.0) * (x - 2.5) * (x + 3.0);
        let xs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        let roots = sign_change_roots(&xs, &vals, g);
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(roots[1], 2.5, max_relative = 1e-14);
        // split rule still integrates polynomials on the whole segment
        let rule = Rule::with_roots(&[0.0, 4.0], &roots, 12).unwrap();
        let total: f64 = rule.weights.iter().sum();
        assert_relative_eq!(total, 4.0, max_relative = 1e-14);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn non_finite_reported_with_location() {
        let spec = QuadratureSpec::with_orders(8, 8);
        let err = integrate_radial(|r| if r > 5.0 { f64::NAN } else { 1.0 }, &spec).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        assert!(err.to_string().contains("r="));
        let err = integrate_pair(|_, _, _| f64::INFINITY, &spec).unwrap_err();
        assert!(err.to_string().contains("r1="));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::with_orders(4, 16).validate().is_err());
        let s = QuadratureSpec {
            tolerance: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(s.validate().is_err());
        assert_eq!(QuadratureSpec::default().doubled().radial_order, 192);
    }

    #[test]
    fn guard_values() {
        assert_eq!(entropy_integrand_guard(0.0), 0.0);
        assert_eq!(entropy_integrand_guard(1.0), 0.0);
        assert_relative_eq!(entropy_integrand_guard(std::f64::consts::E), std::f64::consts::E);
        assert_eq!(entropy_integrand_guard(-0.3), 0.0);
        let mut t = ClampTally::default();
        assert_eq!(t.guard(-0.5, 2.0), 0.0);
        assert_eq!(t.guard(0.5, 2.0), 0.5 * 0.5f64.ln());
        assert_eq!(t.mass, 1.0);
        assert_eq!(t.nodes, 1);
    }

    #[test]
    fn positivity_of_nonnegative_integrands() {
        let spec = QuadratureSpec::with_orders(16, 8);
        let e = integrate_pair(|r1, r2, c| (r1 - r2 * c).powi(2) * gauss3(r1) * gauss3(r2), &spec).unwrap();
        assert!(e.value >= 0.0);
    }
}
