//! Invariant-form calculus, Laplacian coflow and soliton analysis for
//! coclosed G2-structures on `N⁶ × L¹` with `N` Calabi–Yau or nearly Kähler.
//!
//! The crate is `no_std` (with `alloc`). Radial functions are [`profiles`];
//! SU(3)-invariant forms and their calculus live in [`forms`]; torsion,
//! the flow integrator and solitons build on those.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod jet;
pub mod math;
pub mod coflow;
pub mod forms;
pub mod profiles;
pub mod soliton;
pub mod torsion;
pub mod verify;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
