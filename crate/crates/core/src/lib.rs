//! Stability theory for real reductive group actions on catalog models.
//!
//! Gradient maps, maximal weights, Kempf-Ness functions and a
//! Hilbert-Mumford style classifier with checkable certificates, for
//! compatible matrix groups acting on linear, projective and configuration
//! models.

pub mod error;
pub mod extended;
pub mod flows;
pub mod kempfness;
pub mod linalg;
pub mod liealg;
pub mod sampling;
pub mod spaces;
pub mod stability;
pub mod weights;

pub use error::{Error, Result};
pub use extended::ExtReal;
pub use liealg::{bform, Direction, GroupElement, GroupKind, ParabolicData, ReductiveSetup, Sign};
pub use spaces::{Field, GradientValue, ModelKind, ModelPoint, ModelSpace, Tangent};
