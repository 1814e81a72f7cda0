//! Information-theoretic measures for correlated nuclei and trapped Bose gases.
//!
//! The crate builds one- and two-body density and momentum distributions for
//! closed-shell nuclei (⁴He, ¹²C, ¹⁶O, ⁴⁰Ca) in a harmonic-oscillator basis and
//! for a harmonically trapped Bose gas, optionally dressed with a Gaussian
//! Jastrow factor at lowest order, and evaluates Shannon, Onicescu,
//! Kullback-Leibler and Jensen-Shannon functionals over them.
//!
//! Lengths are measured in units of the oscillator width `b` unless a
//! [`SystemSpec`](densities::SystemSpec) says otherwise; entropies are in nats.

pub mod cli;
pub mod densities;
pub mod error;
pub mod ho_basis;
pub mod infotheory;
pub mod jastrow;
pub mod logval;
pub mod observables;
pub mod quadrature;

pub use densities::{DensityProfile, PairDensity, Space, SystemKind, SystemSpec};
pub use error::{Error, Result};
pub use ho_basis::Nucleus;
pub use jastrow::CorrelationParam;
pub use quadrature::QuadratureSpec;
