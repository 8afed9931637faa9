//! Symbolic engine for perturbative algebraic quantum field theory of a
//! self-interacting real scalar field.

pub mod coeff;
pub mod error;
pub mod expr;

pub use coeff::CoeffElem;
pub use error::{EngineError, Result};
pub use expr::{Binding, DOp, Factor, FieldOp, Index, KernelKind, Monomial, Ops, Point, SymExpr, Symmetry, Tensor};
pub mod calculus;
pub mod deformation;
pub mod functional;
pub mod microlocal;
pub mod perturbation;
pub mod rewrite;
pub mod stress_energy;
