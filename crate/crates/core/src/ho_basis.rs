//! Harmonic-oscillator orbitals and closed-shell occupation tables.
//!
//! Orbitals are spatial; spin and isospin enter only through occupation
//! counts. Every radial function has the form `N_nl · p_nl(x) · e^{-x²/2}`
//! with `x = r/b`, so shell sums reduce to small polynomials times a common
//! Gaussian envelope.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single-particle oscillator orbital `R_nl(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orbital {
    /// Principal index, starting at 1.
    pub n: u32,
    pub l: u32,
    /// Oscillator length.
    pub b: f64,
}

impl Orbital {
    pub fn new(n: u32, l: u32, b: f64) -> Result<Self> {
        radial_norm(n, l)?;
        Ok(Orbital { n, l, b })
    }

    /// Mean square radius `(2(n-1) + l + 3/2) b²`.
    pub fn mean_square_radius(&self) -> f64 {
        (2.0 * (self.n - 1) as f64 + self.l as f64 + 1.5) * self.b * self.b
    }
}

fn radial_norm(n: u32, l: u32) -> Result<f64> {
    let quarter = PI.powf(-0.25);
    match (n, l) {
        (1, 0) => Ok(2.0 * quarter),
        (1, 1) => Ok((8.0f64 / 3.0).sqrt() * quarter),
        (1, 2) => Ok((16.0f64 / 15.0).sqrt() * quarter),
        (2, 0) => Ok((8.0f64 / 3.0).sqrt() * quarter),
        _ => Err(Error::UnsupportedOrbital { n, l }),
    }
}

#[inline]
fn radial_poly(n: u32, l: u32, x: f64) -> f64 {
    match (n, l) {
        (1, 0) => 1.0,
        (1, 1) => x,
        (1, 2) => x * x,
        (2, 0) => 1.5 - x * x,
        _ => unreachable!("orbital validated at construction"),
    }
}

/// `R_nl(r)` normalized so that `∫ R² r² dr = 1`.
pub fn orbital_radial(orb: &Orbital, r: f64) -> Result<f64> {
    let norm = radial_norm(orb.n, orb.l)?;
    let x = r / orb.b;
    Ok(norm * radial_poly(orb.n, orb.l, x) * (-0.5 * x * x).exp() * orb.b.powf(-1.5))
}

/// Legendre polynomial `P_l(c)` for `l ≤ 2`.
#[inline]
pub fn legendre(l: u32, c: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => c,
        2 => 1.5 * c * c - 0.5,
        _ => unreachable!("l > 2 is not supported"),
    }
}

#[inline]
fn legendre_deriv(l: u32, c: f64) -> f64 {
    match l {
        0 => 0.0,
        1 => 1.0,
        2 => 3.0 * c,
        _ => unreachable!("l > 2 is not supported"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Nucleus {
    He4,
    C12,
    O16,
    Ca40,
}

impl Nucleus {
    pub const ALL: [Nucleus; 4] = [Nucleus::He4, Nucleus::C12, Nucleus::O16, Nucleus::Ca40];

    pub fn mass_number(self) -> u32 {
        match self {
            Nucleus::He4 => 4,
            Nucleus::C12 => 12,
            Nucleus::O16 => 16,
            Nucleus::Ca40 => 40,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Nucleus::He4 => "He4",
            Nucleus::C12 => "C12",
            Nucleus::O16 => "O16",
            Nucleus::Ca40 => "Ca40",
        }
    }
}

impl fmt::Display for Nucleus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Nucleus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "he4" | "4he" => Ok(Nucleus::He4),
            "c12" | "12c" => Ok(Nucleus::C12),
            "o16" | "16o" => Ok(Nucleus::O16),
            "ca40" | "40ca" => Ok(Nucleus::Ca40),
            _ => Err(Error::UnknownNucleus(s.to_string())),
        }
    }
}

/// How the spin states of an `(n, l)` level are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// Both `j = l ± 1/2` partners occupied: `4(2l+1)` nucleons.
    Complete,
    /// Only the `j = l + 1/2` partner occupied: `4(l+1)` nucleons.
    UpperSpinOrbit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub n: u32,
    pub l: u32,
    /// Nucleon count including the spin-isospin degeneracy.
    pub occupation: u32,
    pub coupling: Coupling,
}

impl Shell {
    pub fn orbital(&self, b: f64) -> Orbital {
        Orbital {
            n: self.n,
            l: self.l,
            b,
        }
    }
}

/// Occupied oscillator levels of a nucleus with `N = Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellConfig {
    pub nucleus: Nucleus,
    pub shells: Vec<Shell>,
}

/// Occupation table for one of the supported nuclei.
///
/// ¹²C fills the `1p_{3/2}` subshell only, which keeps its Slater determinant
/// closed; the radial functions are the unsplit oscillator ones.
pub fn shell_config(nucleus: Nucleus) -> ShellConfig {
    use Coupling::*;
    let s = |n, l, occupation, coupling| Shell {
        n,
        l,
        occupation,
        coupling,
    };
    let shells = match nucleus {
        Nucleus::He4 => vec![s(1, 0, 4, Complete)],
        Nucleus::C12 => vec![s(1, 0, 4, Complete), s(1, 1, 8, UpperSpinOrbit)],
        Nucleus::O16 => vec![s(1, 0, 4, Complete), s(1, 1, 12, Complete)],
        Nucleus::Ca40 => vec![
            s(1, 0, 4, Complete),
            s(1, 1, 12, Complete),
            s(1, 2, 20, Complete),
            s(2, 0, 4, Complete),
        ],
    };
    ShellConfig { nucleus, shells }
}

/// Parse a label and return its occupation table.
pub fn shell_config_for(label: &str) -> Result<ShellConfig> {
    Ok(shell_config(label.parse()?))
}

impl ShellConfig {
    pub fn mass_number(&self) -> u32 {
        self.shells.iter().map(|s| s.occupation).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.shells {
            radial_norm(s.n, s.l)?;
            let full = 4 * (2 * s.l + 1);
            let expected = match s.coupling {
                Coupling::Complete => full,
                Coupling::UpperSpinOrbit => 4 * (s.l + 1),
            };
            if s.occupation != expected {
                return Err(Error::InvalidShell(format!(
                    "shell n={} l={} holds {} nucleons, closed filling needs {expected}",
                    s.n, s.l, s.occupation
                )));
            }
            if s.coupling == Coupling::UpperSpinOrbit && s.l == 0 {
                return Err(Error::InvalidShell("s shells have no spin-orbit partner".into()));
            }
        }
        let a = self.mass_number();
        if a != self.nucleus.mass_number() {
            return Err(Error::InvalidShell(format!(
                "occupations sum to {a}, {} has A={}",
                self.nucleus,
                self.nucleus.mass_number()
            )));
        }
        Ok(())
    }

    /// Precomputed per-shell coefficients for fast evaluation.
    pub(crate) fn kernel(&self) -> ShellKernel {
        let inv4pi = 1.0 / (4.0 * PI);
        let terms = self
            .shells
            .iter()
            .map(|s| {
                let norm = radial_norm(s.n, s.l).expect("validated shell");
                let occ = s.occupation as f64;
                ShellTerm {
                    n: s.n,
                    l: s.l,
                    scalar: occ * norm * norm * inv4pi,
                    vector: match s.coupling {
                        Coupling::Complete => 0.0,
                        Coupling::UpperSpinOrbit => occ / (s.l as f64 + 1.0) * norm * norm * inv4pi,
                    },
                }
            })
            .collect();
        ShellKernel {
            terms,
            mass: self.mass_number() as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ShellTerm {
    n: u32,
    l: u32,
    scalar: f64,
    vector: f64,
}

/// Shell sums with the Gaussian envelope stripped off, in units of `b`.
#[derive(Debug, Clone)]
pub(crate) struct ShellKernel {
    terms: Vec<ShellTerm>,
    pub(crate) mass: f64,
}

impl ShellKernel {
    /// `Σ occ R̂²(x) / 4π` without `e^{-x²}`: the full density (sums to A).
    pub(crate) fn diagonal(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let p = radial_poly(t.n, t.l, x);
                t.scalar * p * p
            })
            .sum()
    }

    /// Scalar and spin-vector parts of the spin-isospin traced density
    /// matrix between `x1` and `x2`, without `e^{-(x1²+x2²)/2}`.
    ///
    /// The vector part is nonzero only for spin-orbit subshells and carries
    /// the `sin θ₁₂` factor.
    pub(crate) fn off_diagonal(&self, x1: f64, x2: f64, c: f64) -> (f64, f64) {
        let mut scalar = 0.0;
        let mut vector = 0.0;
        for t in &self.terms {
            let pp = radial_poly(t.n, t.l, x1) * radial_poly(t.n, t.l, x2);
            scalar += t.scalar * pp * legendre(t.l, c);
            if t.vector != 0.0 {
                vector += t.vector * pp * legendre_deriv(t.l, c);
            }
        }
        if vector != 0.0 {
            vector *= (1.0 - c * c).max(0.0).sqrt();
        }
        (scalar, vector)
    }

    /// Direct minus exchange, unnormalized, without `e^{-(x1²+x2²)}`.
    ///
    /// The spin-isospin trace gives the exchange term a weight of 1/4
    /// relative to the direct term for `N = Z` nuclei.
    pub(crate) fn pair(&self, x1: f64, x2: f64, c: f64) -> f64 {
        let direct = self.diagonal(x1) * self.diagonal(x2);
        let (s, v) = self.off_diagonal(x1, x2, c);
        direct - 0.25 * (s * s + v * v)
    }

    /// Normalization of [`pair`](Self::pair) for closed (sub)shells: `A(A-1)`.
    pub(crate) fn pair_norm(&self) -> f64 {
        self.mass * (self.mass - 1.0)
    }
}

/// Per-particle one-body density matrix `Σ_i φ_i(r₁)φ_i(r₂) / A` between two
/// points at radii `r1`, `r2` (units of `b`) separated by angle `acos(c)`.
///
/// The m-sum is collapsed with the addition theorem, leaving Legendre
/// polynomials in `c`.
pub fn obdm_offdiag(cfg: &ShellConfig, r1: f64, r2: f64, c: f64) -> f64 {
    let kernel = cfg.kernel();
    let (s, _) = kernel.off_diagonal(r1, r2, c);
    s * (-0.5 * (r1 * r1 + r2 * r2)).exp() / kernel.mass
}
