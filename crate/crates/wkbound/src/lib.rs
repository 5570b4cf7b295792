//! Semiclassical uncertainty analysis for bound states of 1D potentials.
//!
//! The library is organized around the accessible-length profile ℓ(V) of an
//! even, single-well potential Φ(x): the length of the classically allowed
//! region at potential-energy level V. From ℓ(V) three kernel integrals
//! I, J, K with an inverse-square-root weight determine the semiclassical
//! state count N(E) and the dimensionless uncertainty ratio
//! U = Δx·Δp/(ħN), which for connected even potentials is pinned between
//! π/(2√3) ≈ 0.9069 (square well) and 1 (harmonic oscillator).
//!
//! Modules:
//! - [`profiles`] — potential families, their ℓ(V) profiles, assumption checks
//! - [`quadrature`] — adaptive quadrature for 1/√(E−V) endpoint kernels
//! - [`semiclassical`] — I/J/K integrals, N(E), U, moments, WKB wavefunction
//! - [`abel`] — the transform pair between ℓ(V) and I(E), with inversion
//! - [`families`] — Beta-function closed forms for every parametric family
//! - [`oracle`] — finite-difference Schrödinger eigensolver ground truth
//! - [`variational`] — extremality diagnostics and randomized bound scans
//!
//! The `parallel` feature (on by default) runs energy sweeps and scan trials
//! on a rayon pool; without it the same entry points run sequentially.

// Validation guards use `!(x > 0.0)` so that NaN parameters fail closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abel;
pub mod exec;
pub mod families;
pub mod oracle;
pub mod profiles;
pub mod quadrature;
pub mod semiclassical;
pub mod units;
pub mod variational;

pub use profiles::{Bound, Length, LengthProfile, PotentialSpec};
pub use semiclassical::{IntegralTriple, Method, UncertaintyReport};
pub use units::Units;
