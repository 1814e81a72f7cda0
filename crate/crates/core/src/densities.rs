//! Normalized one- and two-body distributions in position and momentum space.
//!
//! Everything is built in oscillator units `x = r/b` (position) or `x = k·b`
//! (momentum) and rescaled on evaluation, so a profile for width `b` is
//! `b^{∓3} ρ̂(x)` and a pair density `b^{∓6} ρ̂(x₁, x₂)`. Oscillator orbitals
//! are Fourier self-similar, so the momentum-space Slater determinant uses
//! the same shell kernel as position space.
//!
//! Correlated distributions carry the lowest-order Jastrow factor of ⁴He.
//! Heavier nuclei get the ⁴He correlation correction added to their own
//! uncorrelated density, `ρ_SD^A + (ρ^{He} − ρ_SD^{He})`, which integrates to
//! the same norm but can dip below zero at strong correlation.
//!
//! Densities are evaluated as [`LogValue`]s: the correlated momentum
//! distributions combine factors like `e^{-k²}` and `e^{+γq²}` that overflow
//! separately, and divergences need `ln q` where `q` itself underflows.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ho_basis::{shell_config, Nucleus, ShellKernel};
use crate::jastrow::{norm_constant, CorrelationParam};
use crate::logval::{signed_sum, LogValue};
use crate::quadrature::{PairPoint, PairSupport};

/// Support cutoff in oscillator units.
pub const R_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    Position,
    Momentum,
}

impl Space {
    pub const BOTH: [Space; 2] = [Space::Position, Space::Momentum];

    pub fn suffix(self) -> &'static str {
        match self {
            Space::Position => "r",
            Space::Momentum => "k",
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Position => "position",
            Space::Momentum => "momentum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemKind {
    Nucleus(Nucleus),
    /// Bosons condensed in the oscillator ground state.
    BoseGas,
}

impl SystemKind {
    pub const ALL: [SystemKind; 5] = [
        SystemKind::Nucleus(Nucleus::He4),
        SystemKind::Nucleus(Nucleus::C12),
        SystemKind::Nucleus(Nucleus::O16),
        SystemKind::Nucleus(Nucleus::Ca40),
        SystemKind::BoseGas,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SystemKind::Nucleus(n) => n.label(),
            SystemKind::BoseGas => "Bose",
        }
    }

    /// True when the correlated two-body density is the ⁴He closed form.
    fn is_gaussian_ground_state(self) -> bool {
        matches!(self, SystemKind::Nucleus(Nucleus::He4) | SystemKind::BoseGas)
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bose" | "bosegas" | "bose-gas" | "tbg" => Ok(SystemKind::BoseGas),
            _ => s.parse().map(SystemKind::Nucleus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    /// Oscillator length.
    pub b: f64,
    pub corr: CorrelationParam,
}

impl SystemSpec {
    pub fn new(kind: SystemKind, b: f64, corr: CorrelationParam) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Config(format!("oscillator length must be positive, got {b}")));
        }
        if let CorrelationParam::Finite(y) = corr {
            CorrelationParam::finite(y)?;
        }
        Ok(SystemSpec { kind, b, corr })
    }

    pub fn uncorrelated(kind: SystemKind) -> Self {
        SystemSpec {
            kind,
            b: 1.0,
            corr: CorrelationParam::Uncorrelated,
        }
    }

    pub fn with_corr(&self, corr: CorrelationParam) -> Self {
        SystemSpec { corr, ..*self }
    }

    /// The same system with correlations switched off.
    pub fn reference(&self) -> Self {
        self.with_corr(CorrelationParam::Uncorrelated)
    }

    /// Length (position) or inverse length (momentum) of one oscillator unit.
    pub fn unit(&self, space: Space) -> f64 {
        match space {
            Space::Position => self.b,
            Space::Momentum => 1.0 / self.b,
        }
    }
}

/// Shell kernel of a nucleus, or `None` for the Bose gas.
fn kernel_for(kind: SystemKind) -> Option<ShellKernel> {
    match kind {
        SystemKind::Nucleus(n) => Some(shell_config(n).kernel()),
        SystemKind::BoseGas => None,
    }
}

/// `C - 1` without cancellation at large `y`.
fn norm_constant_minus_one(y: f64) -> f64 {
    let a = (1.0 + 2.0 * y).powf(-1.5);
    let b = (1.0 + 4.0 * y).powf(-1.5);
    (2.0 * a - b) / (1.0 - 2.0 * a + b)
}

fn ln_pi_32() -> f64 {
    1.5 * PI.ln()
}

#[derive(Debug, Clone)]
enum ProfileTerm {
    /// `diag(x)/A · e^{-x²}` from a closed-shell determinant.
    Shell(ShellKernel),
    /// `coef · e^{-a x²}`.
    Gauss { coef: LogValue, a: f64 },
}

impl ProfileTerm {
    fn ln_eval(&self, x: f64) -> LogValue {
        match self {
            ProfileTerm::Shell(k) => {
                let d = k.diagonal(x) / k.mass;
                if d > 0.0 {
                    LogValue::positive(d.ln() - x * x)
                } else {
                    LogValue::ZERO
                }
            }
            ProfileTerm::Gauss { coef, a } => coef.shifted(-a * x * x),
        }
    }
}

/// A normalized spherically symmetric one-body distribution.
#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub space: Space,
    unit: f64,
    terms: Vec<ProfileTerm>,
    /// Radial segment breakpoints in oscillator units.
    breaks: Vec<f64>,
}

impl DensityProfile {
    pub fn ln_eval(&self, r: f64) -> LogValue {
        let x = r / self.unit;
        let parts: Vec<LogValue> = self.terms.iter().map(|t| t.ln_eval(x)).collect();
        signed_sum(&parts).shifted(-3.0 * self.unit.ln())
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.ln_eval(r).value()
    }

    /// Segment breakpoints of the radial integration domain.
    pub fn breaks(&self) -> Vec<f64> {
        self.breaks.iter().map(|x| x * self.unit).collect()
    }

    /// Physical size of one oscillator unit in this space.
    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn r_max(&self) -> f64 {
        self.breaks.last().copied().unwrap_or(R_MAX) * self.unit
    }
}

/// Closed-form correlated ⁴He one-body density in oscillator units:
/// `C π^{-3/2} [e^{-x²} − 2A₁e^{-a₁x²} + A₂e^{-a₂x²}]`.
///
/// With `lead_minus_one` the leading coefficient is `C − 1`, i.e. the
/// uncorrelated Gaussian is already subtracted.
fn helium_terms(space: Space, y: f64, lead_minus_one: bool) -> Vec<ProfileTerm> {
    let c = 1.0 / (1.0 - 2.0 * (1.0 + 2.0 * y).powf(-1.5) + (1.0 + 4.0 * y).powf(-1.5));
    let (ln_a1, a1, ln_a2, a2) = match space {
        Space::Position => (
            -1.5 * (1.0 + y).ln(),
            (1.0 + 2.0 * y) / (1.0 + y),
            -1.5 * (1.0 + 2.0 * y).ln(),
            (1.0 + 4.0 * y) / (1.0 + 2.0 * y),
        ),
        Space::Momentum => (
            -1.5 * (1.0 + 3.0 * y).ln(),
            (1.0 + 2.0 * y) / (1.0 + 3.0 * y),
            -1.5 * ((1.0 + 4.0 * y).ln() + (1.0 + 2.0 * y).ln()),
            1.0 / (1.0 + 2.0 * y),
        ),
    };
    let base = c.ln() - ln_pi_32();
    let lead = if lead_minus_one {
        LogValue::from_value(norm_constant_minus_one(y)).shifted(-ln_pi_32())
    } else {
        LogValue::positive(base)
    };
    vec![
        ProfileTerm::Gauss { coef: lead, a: 1.0 },
        ProfileTerm::Gauss {
            coef: LogValue::negative(base + 2f64.ln() + ln_a1),
            a: a1,
        },
        ProfileTerm::Gauss {
            coef: LogValue::positive(base + ln_a2),
            a: a2,
        },
    ]
}

/// One-body segments: the `e^{-x²}` core is split where divergence
/// integrands turn over from the core to a correlated tail.
const CORE_BREAKS: [f64; 4] = [0.0, 3.0, 6.0, R_MAX];

fn gaussian_term() -> ProfileTerm {
    ProfileTerm::Gauss {
        coef: LogValue::positive(-ln_pi_32()),
        a: 1.0,
    }
}

/// One-body distribution of `sys` in `space`: the marginal of the matching
/// pair density, normalized to one.
pub fn one_body(sys: &SystemSpec, space: Space) -> DensityProfile {
    let sd = match kernel_for(sys.kind) {
        Some(k) => ProfileTerm::Shell(k),
        None => gaussian_term(),
    };
    let (terms, breaks) = match sys.corr {
        CorrelationParam::Uncorrelated => (vec![sd], CORE_BREAKS.to_vec()),
        CorrelationParam::Finite(y) => {
            let terms = if sys.kind.is_gaussian_ground_state() {
                helium_terms(space, y, false)
            } else {
                let mut t = vec![sd];
                t.extend(helium_terms(space, y, true));
                t
            };
            let breaks = match space {
                Space::Position => CORE_BREAKS.to_vec(),
                Space::Momentum => {
                    // the correlated tail has width √(1+2y)
                    let tail = R_MAX * (1.0 + 2.0 * y).sqrt();
                    let mut b = CORE_BREAKS.to_vec();
                    b.push(tail);
                    b
                }
            };
            (terms, breaks)
        }
    };
    DensityProfile {
        space,
        unit: sys.unit(space),
        terms,
        breaks,
    }
}

/// `C·F(s²)` with `F = (1 − D₁e^{g₁s²})²`, the lowest-order correlated
/// factor of the ⁴He pair density.
///
/// Expanding the square, `C·F − 1 = (C−1) − 2C·D₁e^{g₁s²} + C·D₂e^{g₂s²}`.
/// Position space has `D₁ = D₂ = 1`, `g₁ = −y`, `g₂ = −2y`; momentum space
/// has `D₁ = (1+4y)^{-3/2}`, `g₁ = y/(1+4y)` and `D₂ = D₁²`, `g₂ = 2g₁`.
#[derive(Debug, Clone, Copy)]
struct JastrowFactor {
    ln_c: f64,
    c_minus_one: f64,
    ln_d1: f64,
    g1: f64,
}

impl JastrowFactor {
    fn new(space: Space, y: f64) -> Result<Self> {
        let c = norm_constant(CorrelationParam::finite(y)?)?;
        let (ln_d1, g1) = match space {
            Space::Position => (0.0, -y),
            Space::Momentum => (-1.5 * (1.0 + 4.0 * y).ln(), y / (1.0 + 4.0 * y)),
        };
        Ok(JastrowFactor {
            ln_c: c.ln(),
            c_minus_one: norm_constant_minus_one(y),
            ln_d1,
            g1,
        })
    }

    /// `ln(C·F)`; `−∞` on the node `D₁e^{g₁s²} = 1`.
    #[inline]
    fn ln_factor(&self, s2: f64) -> f64 {
        let t = self.ln_d1 + self.g1 * s2;
        let ln_abs = if t < 0.0 {
            (-t.exp_m1()).ln()
        } else if t > 0.0 {
            t + (-(-t).exp_m1()).ln()
        } else {
            f64::NEG_INFINITY
        };
        self.ln_c + 2.0 * ln_abs
    }

    /// `C·F − 1`.
    #[inline]
    fn factor_minus_one(&self, s2: f64) -> LogValue {
        let t = self.ln_d1 + self.g1 * s2;
        signed_sum(&[
            LogValue::from_value(self.c_minus_one),
            LogValue::negative(self.ln_c + 2f64.ln() + t),
            LogValue::positive(self.ln_c + 2.0 * t),
        ])
    }

    /// Separation-axis breakpoints (oscillator units) resolving the hole or
    /// node, the `e^{-s²/2}` core and the correlated tail.
    fn sep_breaks(&self, space: Space, y: f64) -> Vec<f64> {
        let mut b = vec![0.0];
        match space {
            Space::Position => {
                let ell = 1.0 / y.sqrt();
                b.extend([3.0 * ell, 8.0 * ell].into_iter().filter(|&s| s < 2.0 * R_MAX));
                b.push(2.0 * R_MAX);
            }
            Space::Momentum => {
                let node = (-self.ln_d1 / self.g1).sqrt();
                let tail = R_MAX * (2.0 * (1.0 + 4.0 * y)).sqrt();
                b.extend([node, 4.0, 8.0, 2.0 * R_MAX, tail]);
                b.sort_by(f64::total_cmp);
                b.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            }
        }
        b
    }
}

#[derive(Debug, Clone)]
enum PairModel {
    /// Closed-shell Slater determinant.
    Shell(ShellKernel),
    /// `π^{-3} e^{-(x₁²+x₂²)}`.
    Gaussian,
    /// Correlated ⁴He (or Bose gas) pair density.
    Jastrow(JastrowFactor),
    /// Determinant of a heavier nucleus plus the ⁴He correlation correction.
    Hybrid(ShellKernel, JastrowFactor),
}

/// A normalized two-body distribution over `(r₁, r₂, cos θ₁₂)`.
#[derive(Debug, Clone)]
pub struct PairDensity {
    pub space: Space,
    unit: f64,
    model: PairModel,
    support: PairSupport,
}

impl PairDensity {
    pub fn ln_eval(&self, r1: f64, r2: f64, c: f64) -> LogValue {
        self.ln_eval_point(&PairPoint::new(r1, r2, c))
    }

    pub fn eval(&self, r1: f64, r2: f64, c: f64) -> f64 {
        self.ln_eval(r1, r2, c).value()
    }

    pub fn ln_eval_point(&self, p: &PairPoint) -> LogValue {
        let inv = 1.0 / self.unit;
        let (x1, x2) = (p.r1 * inv, p.r2 * inv);
        let s2 = p.sep2 * inv * inv;
        let env = -(x1 * x1 + x2 * x2);
        let ln_pi3 = 3.0 * PI.ln();
        let v = match &self.model {
            PairModel::Shell(k) => {
                LogValue::from_value(k.pair(x1, x2, p.c) / k.pair_norm()).shifted(env)
            }
            PairModel::Gaussian => LogValue::positive(env - ln_pi3),
            PairModel::Jastrow(j) => LogValue::positive(env - ln_pi3 + j.ln_factor(s2)),
            PairModel::Hybrid(k, j) => {
                let sd = LogValue::from_value(k.pair(x1, x2, p.c) / k.pair_norm());
                signed_sum(&[sd, j.factor_minus_one(s2).shifted(-ln_pi3)]).shifted(env)
            }
        };
        v.shifted(-6.0 * self.unit.ln())
    }

    pub fn eval_point(&self, p: &PairPoint) -> f64 {
        self.ln_eval_point(p).value()
    }

    /// Integration domain in physical units.
    pub fn support(&self) -> PairSupport {
        self.support.scaled(self.unit)
    }

    /// True when the density can be negative (hybrid construction).
    pub fn may_be_negative(&self) -> bool {
        matches!(self.model, PairModel::Hybrid(..))
    }
}

fn uncorrelated_pair(sys: &SystemSpec, space: Space) -> PairDensity {
    let model = match kernel_for(sys.kind) {
        Some(k) => PairModel::Shell(k),
        None => PairModel::Gaussian,
    };
    PairDensity {
        space,
        unit: sys.unit(space),
        model,
        support: PairSupport::ball(R_MAX),
    }
}

fn correlated_pair(sys: &SystemSpec, space: Space) -> Result<PairDensity> {
    let y = match sys.corr {
        CorrelationParam::Uncorrelated => return Ok(uncorrelated_pair(sys, space)),
        CorrelationParam::Finite(y) => y,
    };
    let j = JastrowFactor::new(space, y)?;
    let support = PairSupport::ball(R_MAX).union(&PairSupport {
        cm_max: R_MAX,
        sep_breaks: j.sep_breaks(space, y),
    });
    let model = match kernel_for(sys.kind) {
        Some(k) if !sys.kind.is_gaussian_ground_state() => PairModel::Hybrid(k, j),
        _ => PairModel::Jastrow(j),
    };
    Ok(PairDensity {
        space,
        unit: sys.unit(space),
        model,
        support,
    })
}

/// Uncorrelated position-space pair density; `sys.corr` is ignored.
pub fn pair_density_uncorr(sys: &SystemSpec) -> PairDensity {
    uncorrelated_pair(sys, Space::Position)
}

/// Correlated position-space pair density; the uncorrelated limit is
/// returned for [`CorrelationParam::Uncorrelated`].
pub fn pair_density_corr(sys: &SystemSpec) -> Result<PairDensity> {
    correlated_pair(sys, Space::Position)
}

/// Uncorrelated momentum-space pair density; `sys.corr` is ignored.
pub fn pair_momentum_uncorr(sys: &SystemSpec) -> PairDensity {
    uncorrelated_pair(sys, Space::Momentum)
}

/// Correlated momentum-space pair density.
///
/// The correlated bracket is `C(1 − D e^{+γq²})²` with `q = |k₁−k₂|`; the
/// growing exponential produces the high-momentum tail and, combined with
/// the Gaussian envelope, keeps the distribution normalized.
pub fn pair_momentum_corr(sys: &SystemSpec) -> Result<PairDensity> {
    correlated_pair(sys, Space::Momentum)
}

/// Pair density of `sys` (correlated or not, per `sys.corr`) in `space`.
pub fn pair_density(sys: &SystemSpec, space: Space) -> Result<PairDensity> {
    correlated_pair(sys, space)
}
