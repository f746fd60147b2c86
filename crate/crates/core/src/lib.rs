//! Spectral energy, spectral sparsification and Cheeger analysis for
//! field-affine constraint satisfaction problems.
//!
//! A field-affine constraint is `1[Σ a_i x_i ≠ b (mod p)]`. Its energy at a
//! fractional assignment `x ∈ [0,1]^n` is the squared probability that
//! threshold rounding of `x` satisfies it. The crate evaluates energies
//! exactly, builds the per-permutation matrices that turn energy into a
//! quadratic form, reduces spectral sparsification to preserving codeword
//! weights of a lifted generating matrix, and checks the generalized
//! Cheeger inequality for even-arity XOR instances by enumeration.

pub mod cheeger;
pub mod codes;
pub mod commands;
pub mod csp;
pub mod error;
pub mod field;
pub mod format;
pub mod generate;
pub mod matrix;
pub mod ordering;
pub mod report;
pub mod sparsifier;

pub use csp::{Augmentation, BooleanAssignment, Constraint, CspInstance, FractionalAssignment, TOL};
pub use error::{CspError, Result};
pub use field::FieldPrime;
pub use ordering::Permutation;
