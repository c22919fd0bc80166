//! Pointwise tensor algebra for almost Hermitian and special almost
//! Hermitian structures on R^{2n}.
//!
//! The crate builds the adapted U(n)/SU(n) model, the intrinsic torsion
//! classes, the irreducible curvature modules and the curvature formulas in
//! terms of a first-order torsion jet, and audits which torsion monomials
//! feed which curvature components. Every vanishing decision is made in
//! exact arithmetic.

pub mod audit;
pub mod curvature;
pub mod error;
pub mod formulas;
pub mod linalg;
pub mod par;
pub mod scalar;
pub mod structure;
pub mod tensor;
pub mod torsion;

pub use error::{Error, Result};
pub use scalar::{Int, Rational, Ring};
pub use structure::UnStructure;
pub use tensor::Tensor;

/// Convention string recorded in fixtures, jets and reports.
pub const CONVENTION: &str = "basis e1..e2n with I e(2k-1)=e(2k); omega(X,Y)=<X,IY>; Psi=(e1+ie2)^...^(e(2n-1)+ie(2n)); R(X,Y,Z,W)=<R_{X,Y}Z,W>; Ric(X,Y)=sum R(X,e_i,Y,e_i)";
