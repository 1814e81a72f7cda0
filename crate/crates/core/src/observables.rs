//! Radii, kinetic energies and momentum-distribution samples.

use serde::{Deserialize, Serialize};

use crate::densities::{one_body, DensityProfile, Space, SystemSpec};
use crate::error::{Error, Result};
use crate::jastrow::CorrelationParam;
use crate::quadrature::{integrate_radial_on, Estimate, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    /// `√⟨r²⟩` in the same length unit as `b`.
    pub rms_radius: f64,
    /// Kinetic energy per particle in units of `ħω`.
    pub kinetic_energy: f64,
}

fn second_moment(p: &DensityProfile, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_radial_on(|r| r * r * p.eval(r), &p.breaks(), spec)
}

fn require(p: &DensityProfile, space: Space) -> Result<()> {
    if p.space == space {
        Ok(())
    } else {
        Err(Error::Config(format!("expected a {space} distribution, got {}", p.space)))
    }
}

/// `√⟨r²⟩` of a position-space profile.
pub fn rms_radius(p: &DensityProfile, spec: &QuadratureSpec) -> Result<Estimate> {
    require(p, Space::Position)?;
    let m = second_moment(p, spec)?;
    let value = m.value.sqrt();
    Ok(Estimate {
        value,
        error: m.error / (2.0 * value),
    })
}

/// `⟨T⟩ = b²⟨k²⟩/2` in `ħω`, per particle.
pub fn kinetic_energy(n: &DensityProfile, spec: &QuadratureSpec) -> Result<Estimate> {
    require(n, Space::Momentum)?;
    let m = second_moment(n, spec)?;
    // the momentum unit is 1/b
    let scale = 0.5 / (n.unit() * n.unit());
    Ok(Estimate {
        value: scale * m.value,
        error: scale * m.error,
    })
}

pub fn observables(sys: &SystemSpec, spec: &QuadratureSpec) -> Result<ObservableSet> {
    Ok(ObservableSet {
        rms_radius: rms_radius(&one_body(sys, Space::Position), spec)?.value,
        kinetic_energy: kinetic_energy(&one_body(sys, Space::Momentum), spec)?.value,
    })
}

/// `k ∈ [0, 5]` in steps of 0.05 (units of `1/b`).
pub fn default_k_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 0.05).collect()
}

/// One-body momentum distribution samples with the uncorrelated reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumProfile {
    pub correlation: CorrelationParam,
    pub k: Vec<f64>,
    pub n: Vec<f64>,
    /// Uncorrelated (mean-field) distribution on the same grid.
    pub mf: Vec<f64>,
}

pub fn momentum_profile(sys: &SystemSpec, ks: &[f64]) -> Result<MomentumProfile> {
    if let Some(&k) = ks.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
        return Err(Error::Config(format!("momentum grid values must be finite and nonnegative, got {k}")));
    }
    let n = one_body(sys, Space::Momentum);
    let mf = one_body(&sys.reference(), Space::Momentum);
    Ok(MomentumProfile {
        correlation: sys.corr,
        k: ks.to_vec(),
        n: ks.iter().map(|&k| n.eval(k)).collect(),
        mf: ks.iter().map(|&k| mf.eval(k)).collect(),
    })
}
