use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::scalar::{ExactComplex, Scalar};

/// Dense univariate polynomial with coefficients in ascending degree.
///
/// Trailing zero coefficients are always trimmed, so the last stored
/// coefficient is the leading one and the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<C: Scalar> {
    coeffs: Vec<C>,
}

/// Double-precision complex polynomial.
pub type ComplexPolynomial = Polynomial<Complex64>;
/// Polynomial over the Gaussian rationals.
pub type ExactPolynomial = Polynomial<ExactComplex>;

/// Binary ring operations exposed as a single entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    /// Derivative of the first operand; the second is ignored.
    DerivativeOfA,
}

pub fn poly_arith<C: Scalar>(a: &Polynomial<C>, b: &Polynomial<C>, op: PolyOp) -> Polynomial<C> {
    match op {
        PolyOp::Add => a + b,
        PolyOp::Sub => a - b,
        PolyOp::Mul => a * b,
        PolyOp::DerivativeOfA => a.derivative(),
    }
}

impl<C: Scalar> Polynomial<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// `c · z^k`
    pub fn monomial(c: C, k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// The linear factor `z - root`.
    pub fn linear(root: C) -> Self {
        Self::new(vec![-root, C::one()])
    }

    /// Monic polynomial `∏(z - rᵢ)`.
    pub fn from_roots<'a, I>(roots: I) -> Self
    where
        I: IntoIterator<Item = &'a C>,
        C: 'a,
    {
        roots
            .into_iter()
            .fold(Self::one(), |acc, r| &acc * &Self::linear(r.clone()))
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `z^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| *c == C::one())
    }

    pub fn eval(&self, z: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// Derivative; lowers the degree of a nonconstant polynomial by exactly one.
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| C::from_i64(k as i64) * c.clone())
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    /// `P(p·w)` as a polynomial in `w`.
    pub fn substitute_scaled(&self, p: &C) -> Self {
        let mut power = C::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.clone() * power.clone());
            power = power * p.clone();
        }
        Self::new(out)
    }

    /// Euclidean division. Returns `None` when `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> Option<(Self, Self)> {
        let lead_inv = divisor.leading()?.inv()?;
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Some((Self::zero(), self.clone()));
        }
        let mut quot = vec![C::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd].clone() * lead_inv.clone();
            if !q.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = rem[k + j].clone() - q.clone() * d.clone();
                }
            }
            rem[k + dd] = C::zero();
            quot[k] = q;
        }
        rem.truncate(dd);
        Some((Self::new(quot), Self::new(rem)))
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading().and_then(|c| c.inv()) {
            Some(inv) => self.scale(&inv),
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    ///
    /// Meaningful for exact coefficients; with floating coefficients the
    /// remainder sequence is numerically unstable and callers should use
    /// root clustering instead.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("divisor is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn to_complex64(&self) -> ComplexPolynomial {
        Polynomial::new(self.coeffs.iter().map(Scalar::to_complex64).collect())
    }
}

impl ComplexPolynomial {
    pub fn from_slice(coeffs: &[Complex64]) -> Self {
        Self::new(coeffs.to_vec())
    }

    /// Zeroes coefficients whose modulus is below `tol` times the largest
    /// coefficient modulus, then trims.
    pub fn cleaned(&self, tol: f64) -> Self {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = tol * scale.max(1.0);
        Self::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let re = if c.re.abs() < cut { 0.0 } else { c.re };
                    let im = if c.im.abs() < cut { 0.0 } else { c.im };
                    Complex64::new(re, im)
                })
                .collect(),
        )
    }

    /// Largest coefficient modulus, used as a scale for relative tests.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation returning `(P(z), P'(z))`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }
}

impl<C: Scalar> Add for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn add(self, rhs: Self) -> Polynomial<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<C: Scalar> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn sub(self, rhs: Self) -> Polynomial<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<C: Scalar> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn mul(self, rhs: Self) -> Polynomial<C> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<C: Scalar> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn neg(self) -> Polynomial<C> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl<C: Scalar> $tr for Polynomial<C> {
            type Output = Polynomial<C>;

            fn $method(self, rhs: Self) -> Polynomial<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl fmt::Display for ComplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !Scalar::is_zero(*c))
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
