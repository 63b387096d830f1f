//! A laboratory for stabilizer decompositions of quantum states.
//!
//! The crate represents stabilizer states symbolically as phase polynomials
//! over affine subspaces of F2^n ([`stab`]), enumerates complete dictionaries
//! of them, and searches those dictionaries for exact and approximate
//! low-rank decompositions of arbitrary states ([`rank`]). Around that core
//! sit dense reference simulation and Haar sampling ([`dense`]), the
//! measurement-based T gadget ([`gadget`]), T-count accounting for
//! SELECT-SWAP table lookups ([`lookup`]), and closed-form tail bounds with
//! their Monte Carlo cross-checks ([`bounds`]).
//!
//! Every quantitative claim the library makes is checked somewhere at desk
//! scale: symbolic states against dense simulation, searches against
//! independently solvable instances, and bound formulas against sampling.

pub mod bounds;
pub mod cli;
pub mod dense;
pub mod error;
pub mod f2;
pub mod gadget;
mod linalg;
pub mod lookup;
pub mod rank;
pub mod stab;

pub use error::{Error, Result};
