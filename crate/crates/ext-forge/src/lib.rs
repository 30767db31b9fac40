//! Ext charts over the finite subalgebras A(0), A(1), A(2) of the mod 2
//! Steenrod algebra, 2-adic arithmetic for axial classes, and nonimmersion
//! certificates for real projective spaces.

pub mod arith2;
pub mod axial;
pub mod certify;
pub mod charts;
pub mod error;
pub mod expr;
pub mod f2linalg;
pub mod fdmodule;
pub mod par;
pub mod resolution;
pub mod steenrod;

pub use error::{Error, Result};
