//! Linear thermopiezoelectricity of nonsimple (second-gradient) solids with
//! rate-type heat conduction.
//!
//! The crate provides three layers:
//!
//! * [`tensor`], [`material`], [`constitutive`] — value types, coefficient
//!   containers with symmetry validation and isotropic expansion, and the
//!   reduced linear constitutive map with its quadratic forms.
//! * [`admissibility`] — certification of the definiteness hypotheses behind
//!   the uniqueness theorems: closed-form inequality lists for isotropic
//!   materials, generic eigenvalue checks for any material, and a
//!   cross-validation oracle between the two.
//! * [`sim1d`] — a one-dimensional finite-difference simulator for the
//!   coupled displacement / temperature / potential system, instrumented to
//!   verify the discrete energy-decay identity that drives the uniqueness
//!   argument.

pub mod admissibility;
pub mod constitutive;
pub mod error;
pub mod material;
pub mod sim1d;
pub mod tensor;

pub use error::{Error, Result};
