//! Coefficient fields for polynomials: double-precision complex numbers for
//! field evaluation and exact complex rationals `Q(i)` for identity work.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact Gaussian-rational number `p + q i` with `p, q ∈ Q`.
pub type ExactComplex = Complex<BigRational>;

/// A field of complex coefficients.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn to_complex64(&self) -> Complex64;
    /// Whether arithmetic in this field is exact.
    const EXACT: bool;
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / *self)
        }
    }

    fn to_complex64(&self) -> Complex64 {
        *self
    }
}

impl Scalar for ExactComplex {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(Complex::new(&self.re / &norm, -(&self.im / &norm)))
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Exact rational `num/den` as a real Gaussian rational.
pub fn exact_ratio(num: i64, den: i64) -> ExactComplex {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

/// Exact `(re_num + im_num i) / den`.
pub fn exact_gaussian(re_num: i64, im_num: i64, den: i64) -> ExactComplex {
    Complex::new(
        BigRational::new(BigInt::from(re_num), BigInt::from(den)),
        BigRational::new(BigInt::from(im_num), BigInt::from(den)),
    )
}

/// Converts a double to the exact binary rational it represents.
/// Returns `None` for non-finite input.
pub fn exact_from_complex64(z: Complex64) -> Option<ExactComplex> {
    Some(Complex::new(
        BigRational::from_float(z.re)?,
        BigRational::from_float(z.im)?,
    ))
}
