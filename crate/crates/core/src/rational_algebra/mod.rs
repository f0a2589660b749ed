//! Complex polynomials, rational functions, residues and divisors on the
//! Riemann sphere.

mod divisor;
mod point;
mod polynomial;
mod rational;
pub mod roots;
mod scalar;

pub use divisor::{divisor_of_form, Divisor, DivisorEntry};
pub use point::SpherePoint;
pub use polynomial::{poly_arith, ComplexPolynomial, ExactPolynomial, PolyOp, Polynomial};
pub use rational::{
    residue_at_infinity, residue_at_simple_pole, FractionField, InfinityResidue, RationalFunction,
};
pub use scalar::{exact_from_complex64, exact_gaussian, exact_ratio, ExactComplex, Scalar};
