//! Shannon, Onicescu, Kullback-Leibler and Jensen-Shannon functionals.
//!
//! Each grid is sampled once and every functional is accumulated in the
//! same pass; the pass is repeated at doubled orders for the error
//! estimate. Densities arrive in log form, so `p ln p` and `ln(p/q)` stay
//! finite where the densities themselves underflow.
//!
//! Negative density values (possible for the hybrid correlated densities of
//! heavier nuclei) are clamped to zero in every functional and the removed
//! mass is reported.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::densities::{one_body, pair_density, DensityProfile, PairDensity, Space, SystemSpec};
use crate::error::{Error, Result};
use crate::logval::LogValue;
use crate::quadrature::{
    check_accuracy, Accumulator, ClampTally, Estimate, PairGrid, PairPoint, PairSupport, QuadratureSpec, RadialGrid,
    Rule, sign_change_roots,
    DENSITY_FLOOR,
};

/// Lower bound of `S_r + S_k` in three dimensions, `3(1 + ln π)`.
pub fn eur_bound() -> f64 {
    3.0 * (1.0 + PI.ln())
}

/// A spherically symmetric distribution that can be integrated radially.
pub trait RadialDistribution {
    fn ln_eval(&self, r: f64) -> LogValue;
    /// Radial segment breakpoints, starting at 0.
    fn breaks(&self) -> Vec<f64>;
}

/// A two-body distribution depending on `(r₁, r₂, cos θ₁₂)`.
pub trait PairDistribution {
    fn ln_eval_point(&self, p: &PairPoint) -> LogValue;
    fn support(&self) -> PairSupport;
    /// Invariance under `r₁ ↔ r₂`, which halves the angular grid.
    fn exchange_symmetric(&self) -> bool {
        true
    }
}

impl RadialDistribution for DensityProfile {
    fn ln_eval(&self, r: f64) -> LogValue {
        DensityProfile::ln_eval(self, r)
    }

    fn breaks(&self) -> Vec<f64> {
        DensityProfile::breaks(self)
    }
}

impl PairDistribution for PairDensity {
    fn ln_eval_point(&self, p: &PairPoint) -> LogValue {
        PairDensity::ln_eval_point(self, p)
    }

    fn support(&self) -> PairSupport {
        PairDensity::support(self)
    }
}

/// `[(1+d)ln(1+d) + (1-d)ln(1-d)] / 2`, the Jensen-Shannon integrand per
/// unit of the mixture density, with `d = (p-q)/(p+q)`.
fn js_kernel(d: f64) -> f64 {
    if d.abs() < 1e-3 {
        let d2 = d * d;
        return d2 * (0.5 + d2 * (1.0 / 12.0 + d2 * (1.0 / 30.0 + d2 / 56.0)));
    }
    let side = |t: f64| if t <= -1.0 { 0.0 } else { (1.0 + t) * t.ln_1p() };
    0.5 * (side(d) + side(-d))
}

/// `p ln(p/q) − p + q ≥ 0`, written so neither branch cancels or overflows.
fn kl_kernel(p: f64, q: LogValue, delta: f64) -> f64 {
    if delta >= 0.0 {
        p * (delta + (-delta).exp_m1())
    } else {
        q.value() * (delta * delta.exp() - delta.exp_m1())
    }
}

/// Running sums of one pass over a grid.
#[derive(Debug, Default)]
struct Sums {
    norm: Accumulator,
    p_ln_p: Accumulator,
    p_sq: Accumulator,
    kl: Accumulator,
    /// `∫ (q − p)` where `p ≤` floor; see [`Sums::finish`].
    kl_outside: Accumulator,
    js: Accumulator,
    clamp: ClampTally,
    failure: Option<Error>,
    /// First node where `p > 0` but `q = 0`, making `K` infinite.
    kl_undefined: Option<(f64, String)>,
}

impl Sums {
    #[inline]
    fn add(&mut self, p: LogValue, q: Option<LogValue>, w: f64, at: impl FnOnce() -> String) {
        let pv = p.value();
        if !pv.is_finite() {
            self.fail(|| Error::NonFinite {
                value: pv,
                location: at(),
            });
            return;
        }
        self.norm.add(w * pv);
        self.clamp.record(pv, w);
        let pp = pv.max(0.0);
        if pp > DENSITY_FLOOR {
            self.p_ln_p.add(w * pp * p.ln_abs);
        }
        self.p_sq.add(w * pp * pp);
        let Some(q) = q else { return };
        if q.is_negative() || !q.ln_abs.is_finite() && !q.is_zero() {
            self.fail(|| Error::NonFinite {
                value: q.value(),
                location: format!("reference density at {}", at()),
            });
            return;
        }
        let qv = q.value();
        if pp > DENSITY_FLOOR {
            if q.is_zero() {
                if self.kl_undefined.is_none() {
                    self.kl_undefined = Some((pp, at()));
                }
            } else {
                let delta = p.ln_abs - q.ln_abs;
                self.kl.add(w * kl_kernel(pp, q, delta));
            }
        } else {
            self.kl_outside.add(w * (qv - pv));
        }
        let m = 0.5 * (pp + qv);
        if m > 0.0 {
            let d = ((pp - qv) / (pp + qv)).clamp(-1.0, 1.0);
            self.js.add(w * m * js_kernel(d));
        }
    }

    fn fail(&mut self, err: impl FnOnce() -> Error) {
        if self.failure.is_none() {
            self.failure = Some(err());
        }
    }

    fn finish(self) -> Result<PassValues> {
        if let Some(err) = self.failure {
            return Err(err);
        }
        Ok(PassValues {
            norm: self.norm.total(),
            shannon: -self.p_ln_p.total(),
            energy: self.p_sq.total(),
            // On A = {p > floor}, ∫_A p ln(p/q) = ∫_A kernel + ∫_A (p − q), and
            // for unit-normalized p, q the last term equals ∫_{not A} (q − p):
            // the clamped mass plus the reference mass outside A. Summing it
            // directly avoids cancelling two near-unit masses.
            kl: if self.kl_undefined.is_some() {
                f64::INFINITY
            } else {
                self.kl.total() + self.kl_outside.total()
            },
            js: self.js.total(),
            clamp: self.clamp,
            kl_undefined: self.kl_undefined,
        })
    }
}

#[derive(Debug, Clone)]
struct PassValues {
    norm: f64,
    shannon: f64,
    energy: f64,
    kl: f64,
    js: f64,
    clamp: ClampTally,
    kl_undefined: Option<(f64, String)>,
}

/// Every functional of one distribution (and optionally its divergence from
/// a reference) with order-doubling error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub norm: Estimate,
    /// `−∫ p ln p`.
    pub shannon: Estimate,
    /// Onicescu information energy `∫ p²`.
    pub energy: Estimate,
    /// `∫ p ln(p/q)`; zero without a reference.
    pub kl: Estimate,
    pub js: Estimate,
    pub clamp: ClampTally,
    /// Density value and location where the reference vanishes under `p`;
    /// `kl` is then infinite.
    #[serde(skip)]
    pub kl_undefined_at: Option<(f64, String)>,
}

impl Functionals {
    /// `K`, or a domain error when the reference vanishes where `p > 0`.
    pub fn kl_checked(&self) -> Result<Estimate> {
        match &self.kl_undefined_at {
            Some((p, loc)) => Err(Error::Domain {
                p: *p,
                location: loc.clone(),
            }),
            None => Ok(self.kl),
        }
    }

    fn combine(base: PassValues, fine: PassValues) -> Self {
        Functionals {
            norm: Estimate::from_pair(base.norm, fine.norm),
            shannon: Estimate::from_pair(base.shannon, fine.shannon),
            energy: Estimate::from_pair(base.energy, fine.energy),
            kl: Estimate::from_pair(base.kl, fine.kl),
            js: Estimate::from_pair(base.js, fine.js),
            clamp: base.clamp,
            kl_undefined_at: base.kl_undefined.or(fine.kl_undefined),
        }
    }

    fn warn_if_unconverged(&self, what: &str, tolerance: f64) {
        for (name, est) in [
            ("norm", &self.norm),
            ("Shannon", &self.shannon),
            ("Onicescu energy", &self.energy),
        ] {
            check_accuracy(&format!("{what} {name}"), est, tolerance);
        }
    }
}

fn radial_pass<P, Q>(p: &P, q: Option<&Q>, breaks: &[f64], roots: &[f64], order: usize) -> Result<PassValues>
where
    P: RadialDistribution + ?Sized,
    Q: RadialDistribution + ?Sized,
{
    let grid = RadialGrid::with_roots(breaks, roots, order)?;
    let mut sums = Sums::default();
    for (r, w) in grid.points() {
        sums.add(p.ln_eval(r), q.map(|q| q.ln_eval(r)), w, || format!("r={r}"));
    }
    sums.finish()
}

fn merged_breaks(a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    let mut all: Vec<f64> = a.into_iter().chain(b).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1.0));
    all
}

/// One-body functionals of `p`, and its divergences from `q` if given.
pub fn radial_functionals<P, Q>(p: &P, q: Option<&Q>, spec: &QuadratureSpec) -> Result<Functionals>
where
    P: RadialDistribution + ?Sized,
    Q: RadialDistribution + ?Sized,
{
    spec.validate()?;
    let breaks = match q {
        Some(q) => merged_breaks(p.breaks(), q.breaks()),
        None => p.breaks(),
    };
    // zeros of a signed density, located once on the finer rule
    let scan = Rule::composite(&breaks, 2 * spec.radial_order)?;
    let vals: Vec<f64> = scan.nodes.iter().map(|&r| p.ln_eval(r).value()).collect();
    let roots = sign_change_roots(&scan.nodes, &vals, |r| p.ln_eval(r).value());
    let base = radial_pass(p, q, &breaks, &roots, spec.radial_order)?;
    let fine = radial_pass(p, q, &breaks, &roots, 2 * spec.radial_order)?;
    let f = Functionals::combine(base, fine);
    f.warn_if_unconverged("one-body", spec.tolerance);
    Ok(f)
}

fn pair_pass<P, Q>(p: &P, q: Option<&Q>, grid: &PairGrid) -> Result<PassValues>
where
    P: PairDistribution + ?Sized,
    Q: PairDistribution + ?Sized,
{
    let mut sums = Sums::default();
    grid.for_each_split(
        |pt| (p.ln_eval_point(pt), q.map(|q| q.ln_eval_point(pt))),
        |t| t.0.value(),
        |pt, t, w| {
            sums.add(t.0, t.1, w, || format!("r1={} r2={} c={}", pt.r1, pt.r2, pt.c));
        },
    )?;
    sums.finish()
}

/// Two-body functionals of `p`, and its divergences from `q` if given.
pub fn pair_functionals<P, Q>(p: &P, q: Option<&Q>, spec: &QuadratureSpec) -> Result<Functionals>
where
    P: PairDistribution + ?Sized,
    Q: PairDistribution + ?Sized,
{
    spec.validate()?;
    let (support, symmetric) = match q {
        Some(q) => (
            p.support().union(&q.support()),
            p.exchange_symmetric() && q.exchange_symmetric(),
        ),
        None => (p.support(), p.exchange_symmetric()),
    };
    let coincident = |r: f64| p.ln_eval_point(&PairPoint::from_relative(r, 0.0, 0.0)).value();
    let scan = Rule::composite(&[0.0, support.cm_max], 2 * spec.radial_order)?;
    let vals: Vec<f64> = scan.nodes.iter().map(|&r| coincident(r)).collect();
    let cm_roots = sign_change_roots(&scan.nodes, &vals, coincident);
    let d = spec.doubled();
    let grid = |ro, ao| PairGrid::with_cm_roots(&support, ro, ao, symmetric, &cm_roots);
    let base = pair_pass(p, q, &grid(spec.radial_order, spec.angular_order)?)?;
    let fine = pair_pass(p, q, &grid(d.radial_order, d.angular_order)?)?;
    let f = Functionals::combine(base, fine);
    f.warn_if_unconverged("two-body", spec.tolerance);
    Ok(f)
}

type NoRadial = DensityProfile;
type NoPair = PairDensity;

/// `−∫ ρ ln ρ d³r`.
pub fn shannon_1(p: &(impl RadialDistribution + ?Sized), spec: &QuadratureSpec) -> Result<Estimate> {
    Ok(radial_functionals(p, None::<&NoRadial>, spec)?.shannon)
}

/// `−∫∫ ρ ln ρ d³r₁d³r₂`.
pub fn shannon_2(p: &(impl PairDistribution + ?Sized), spec: &QuadratureSpec) -> Result<Estimate> {
    Ok(pair_functionals(p, None::<&NoPair>, spec)?.shannon)
}

/// Onicescu information energy `∫ ρ²`.
pub fn onicescu_1(p: &(impl RadialDistribution + ?Sized), spec: &QuadratureSpec) -> Result<Estimate> {
    Ok(radial_functionals(p, None::<&NoRadial>, spec)?.energy)
}

/// Two-body information energy `∫∫ ρ²`.
pub fn onicescu_2(p: &(impl PairDistribution + ?Sized), spec: &QuadratureSpec) -> Result<Estimate> {
    Ok(pair_functionals(p, None::<&NoPair>, spec)?.energy)
}

/// `K = ∫ p ln(p/q)` between one-body distributions.
pub fn kl_divergence_1(
    p: &(impl RadialDistribution + ?Sized),
    q: &(impl RadialDistribution + ?Sized),
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    radial_functionals(p, Some(q), spec)?.kl_checked()
}

/// `K = ∫∫ p ln(p/q)` between pair distributions.
pub fn kl_divergence_2(
    p: &(impl PairDistribution + ?Sized),
    q: &(impl PairDistribution + ?Sized),
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    pair_functionals(p, Some(q), spec)?.kl_checked()
}

/// `J = S((p+q)/2) − S(p)/2 − S(q)/2` between one-body distributions.
pub fn js_divergence_1(
    p: &(impl RadialDistribution + ?Sized),
    q: &(impl RadialDistribution + ?Sized),
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    Ok(radial_functionals(p, Some(q), spec)?.js)
}

/// Jensen-Shannon divergence between pair distributions.
pub fn js_divergence_2(
    p: &(impl PairDistribution + ?Sized),
    q: &(impl PairDistribution + ?Sized),
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    Ok(pair_functionals(p, Some(q), spec)?.js)
}

/// Smallest number of trials `L` with `√J > 1/√(2L)`, i.e. `⌊1/(2J)⌋ + 1`.
pub fn wootters_trials(j: f64) -> Result<u64> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::Indistinguishable(j));
    }
    let bound = (0.5 / j).floor();
    if bound >= u64::MAX as f64 {
        return Err(Error::Indistinguishable(j));
    }
    Ok(bound as u64 + 1)
}

/// Least-squares fit of `S = a + b ln N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    /// `S_i − (a + b ln N_i)` in input order.
    pub residuals: Vec<f64>,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.a + self.b * n.ln()
    }

    pub fn rms_residual(&self) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64).sqrt()
    }
}

/// Fit `S = a + b ln N` to `(N, S)` points with equal weights; a repeated
/// point therefore counts twice.
pub fn fit_scaling_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some(&(n, _)) = points.iter().find(|(n, s)| !(*n > 0.0) || !s.is_finite()) {
        return Err(Error::DegenerateFit(format!("particle counts must be positive, got {n}")));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let m = points.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = points.iter().map(|(_, s)| s).sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let distinct = xs.iter().any(|x| (x - xs[0]).abs() > 1e-12);
    if points.len() < 2 || !distinct || sxx == 0.0 {
        return Err(Error::DegenerateFit("need at least two distinct particle numbers".into()));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, (_, s))| (x - xbar) * (s - ybar)).sum();
    let b = sxy / sxx;
    let a = ybar - b * xbar;
    let residuals = xs.iter().zip(points).map(|(x, (_, s))| s - (a + b * x)).collect();
    Ok(ScalingFit { a, b, residuals })
}

/// Shannon and Onicescu values of one system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub s1r: f64,
    pub s1k: f64,
    pub s1: f64,
    pub s2r: f64,
    pub s2k: f64,
    pub s2: f64,
    pub e_r: f64,
    pub e_k: f64,
    pub e2r: f64,
    pub e2k: f64,
    pub o1: f64,
    pub o2: f64,
}

impl EntropyReport {
    /// Entropic uncertainty relation `S₁ ≥ 3(1 + ln π)` within `tol`.
    pub fn satisfies_eur(&self, tol: f64) -> bool {
        self.s1 >= eur_bound() - tol
    }
}

/// Which Jensen-Shannon component feeds the Wootters trial count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WoottersComponent {
    #[default]
    J1r,
    J1k,
    J2r,
    J2k,
}

impl std::str::FromStr for WoottersComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "j1r" => Ok(WoottersComponent::J1r),
            "j1k" => Ok(WoottersComponent::J1k),
            "j2r" => Ok(WoottersComponent::J2r),
            "j2k" => Ok(WoottersComponent::J2k),
            _ => Err(Error::Config(format!("unknown Jensen-Shannon component {s:?}"))),
        }
    }
}

/// Divergences of a correlated system from its uncorrelated reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub k1r: f64,
    pub k1k: f64,
    pub k2r: f64,
    pub k2k: f64,
    pub j1r: f64,
    pub j1k: f64,
    pub j2r: f64,
    pub j2k: f64,
    /// `None` when the selected `J` is zero (indistinguishable).
    pub l_min: Option<u64>,
    pub wootters_component: WoottersComponent,
}

impl DivergenceReport {
    pub fn j(&self, which: WoottersComponent) -> f64 {
        match which {
            WoottersComponent::J1r => self.j1r,
            WoottersComponent::J1k => self.j1k,
            WoottersComponent::J2r => self.j2r,
            WoottersComponent::J2k => self.j2k,
        }
    }
}

/// Probability mass removed by clamping, per distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClampReport {
    pub one_body_r: f64,
    pub one_body_k: f64,
    pub pair_r: f64,
    pub pair_k: f64,
}

impl ClampReport {
    pub fn max(&self) -> f64 {
        self.one_body_r.max(self.one_body_k).max(self.pair_r).max(self.pair_k)
    }
}

/// Functionals of one system in one space at both levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFunctionals {
    pub space: Space,
    pub one_body: Functionals,
    pub pair: Functionals,
}

/// Evaluate all one- and two-body functionals of `sys` in `space`,
/// including divergences from the uncorrelated reference when `sys` is
/// correlated.
pub fn space_functionals(sys: &SystemSpec, space: Space, spec: &QuadratureSpec) -> Result<SpaceFunctionals> {
    let p1 = one_body(sys, space);
    let p2 = pair_density(sys, space)?;
    let (one, two) = if sys.corr.is_correlated() {
        let reference = sys.reference();
        let q1 = one_body(&reference, space);
        let q2 = pair_density(&reference, space)?;
        (
            radial_functionals(&p1, Some(&q1), spec)?,
            pair_functionals(&p2, Some(&q2), spec)?,
        )
    } else {
        (
            radial_functionals(&p1, None::<&NoRadial>, spec)?,
            pair_functionals(&p2, None::<&NoPair>, spec)?,
        )
    };
    Ok(SpaceFunctionals {
        space,
        one_body: one,
        pair: two,
    })
}

/// All information measures of one system at one correlation strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub system: SystemSpec,
    pub entropy: EntropyReport,
    pub divergence: DivergenceReport,
    pub clamp: ClampReport,
    pub position: SpaceFunctionals,
    pub momentum: SpaceFunctionals,
}

impl Analysis {
    /// Every reported scalar with its order-doubling error estimate.
    pub fn estimates(&self) -> Vec<(String, Estimate)> {
        let mut out = Vec::new();
        for sf in [&self.position, &self.momentum] {
            let sfx = sf.space.suffix();
            for (lvl, f) in [(1, &sf.one_body), (2, &sf.pair)] {
                out.push((format!("norm{lvl}{sfx}"), f.norm));
                out.push((format!("S{lvl}{sfx}"), f.shannon));
                out.push((format!("E{lvl}{sfx}"), f.energy));
                if self.system.corr.is_correlated() {
                    out.push((format!("K{lvl}{sfx}"), f.kl));
                    out.push((format!("J{lvl}{sfx}"), f.js));
                }
            }
        }
        out
    }
}

pub fn analyze(sys: &SystemSpec, spec: &QuadratureSpec, wootters: WoottersComponent) -> Result<Analysis> {
    let pos = space_functionals(sys, Space::Position, spec)?;
    let mom = space_functionals(sys, Space::Momentum, spec)?;
    let (s1r, s1k) = (pos.one_body.shannon.value, mom.one_body.shannon.value);
    let (s2r, s2k) = (pos.pair.shannon.value, mom.pair.shannon.value);
    let (e_r, e_k) = (pos.one_body.energy.value, mom.one_body.energy.value);
    let (e2r, e2k) = (pos.pair.energy.value, mom.pair.energy.value);
    let entropy = EntropyReport {
        s1r,
        s1k,
        s1: s1r + s1k,
        s2r,
        s2k,
        s2: s2r + s2k,
        e_r,
        e_k,
        e2r,
        e2k,
        o1: 1.0 / (e_r * e_k),
        o2: 1.0 / (e2r * e2k),
    };
    let mut divergence = DivergenceReport {
        k1r: pos.one_body.kl_checked()?.value,
        k1k: mom.one_body.kl_checked()?.value,
        k2r: pos.pair.kl_checked()?.value,
        k2k: mom.pair.kl_checked()?.value,
        j1r: pos.one_body.js.value,
        j1k: mom.one_body.js.value,
        j2r: pos.pair.js.value,
        j2k: mom.pair.js.value,
        l_min: None,
        wootters_component: wootters,
    };
    divergence.l_min = wootters_trials(divergence.j(wootters)).ok();
    let clamp = ClampReport {
        one_body_r: pos.one_body.clamp.mass,
        one_body_k: mom.one_body.clamp.mass,
        pair_r: pos.pair.clamp.mass,
        pair_k: mom.pair.clamp.mass,
    };
    if clamp.max() > 0.0 {
        log::info!("{}: clamped negative density mass {:.3e}", sys.kind, clamp.max());
    }
    Ok(Analysis {
        system: *sys,
        entropy,
        divergence,
        clamp,
        position: pos,
        momentum: mom,
    })
}
