//! Information rates of backscatter load modulation.
//!
//! A passive tag communicates by switching its termination load; the channel
//! input is the load reflection coefficient Γ confined to the closed complex
//! unit disk, observed in circularly-symmetric Gaussian noise:
//!
//! ```text
//!     y = Γ + w,    |Γ| ≤ 1,    w ~ CN(0, 1/ρ)
//! ```
//!
//! This crate solves the capacity problem of that channel for the four load
//! classes (general passive, purely reactive, purely resistive, uniform-disk
//! signaling), evaluates mutual information for arbitrary finite
//! constellations, designs near-capacity APSK alphabets, synthesizes switched
//! lumped-element load circuits, quantifies the rate loss of value-range
//! constrained loads, and computes ergodic/outage capacity for modulated
//! ambient sources.
//!
//! Modules:
//! * [`model`] — impedance ↔ reflection-coefficient maps and link SNR.
//! * [`special`] — scaled Bessel functions and the Marcum Q-function.
//! * [`quad`] — adaptive Gauss–Kronrod and Gauss–Hermite quadrature.
//! * [`mi`] — mutual-information engine for all input families.
//! * [`capacity`] — capacity solvers, bounds, sweeps, interpolation tables.
//! * [`constellation`] — APSK / PSK / QAM constellation design.
//! * [`circuit`] — switched-load enumeration and joint circuit optimization.
//! * [`region`] — rate loss for Γ restricted to a subset of the disk.
//! * [`ambient`] — Monte Carlo ergodic and outage capacity under fading.
//! * [`zstats`] — impedance-domain distribution transforms and samplers.
//!
//! With the default `parallel` feature the coarse-grained inner loops
//! (multi-start circuit optimization, region grids, Monte Carlo batches,
//! per-symbol cubature) run on rayon. All parallel reductions collect in
//! deterministic order, so results are bit-identical with the feature
//! disabled.

pub mod ambient;
pub mod capacity;
pub mod circuit;
pub mod constellation;
mod error;
mod exec;
pub mod mi;
pub mod model;
mod opt;
pub mod quad;
pub mod region;
pub mod special;
pub mod zstats;

pub use error::Error;
pub use model::Snr;

/// Numerical slack for passivity and unit-disk boundary checks.
///
/// Double-precision Möbius arithmetic leaves residues of this order, so the
/// domain validations accept `|Γ| ≤ 1 + EPS_TOL` and `Re(z) ≥ -EPS_TOL`.
pub const EPS_TOL: f64 = 1e-12;

/// log2(e), the nat→bit conversion factor.
pub(crate) const LOG2_E: f64 = std::f64::consts::LOG2_E;
