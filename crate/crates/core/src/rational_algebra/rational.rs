use num_complex::Complex64;

use super::polynomial::{ComplexPolynomial, Polynomial};
use super::roots::{cluster, roots, ROOT_DISTINCTNESS_TOL};
use super::scalar::{ExactComplex, Scalar};
use crate::error::{Error, Result};

/// Coefficient fields whose fractions can be brought to lowest terms.
pub trait FractionField: Scalar {
    /// Cancels common factors and makes the denominator monic.
    fn reduce(num: &Polynomial<Self>, den: &Polynomial<Self>) -> (Polynomial<Self>, Polynomial<Self>);
}

impl FractionField for ExactComplex {
    fn reduce(num: &Polynomial<Self>, den: &Polynomial<Self>) -> (Polynomial<Self>, Polynomial<Self>) {
        if num.is_zero() {
            return (Polynomial::zero(), Polynomial::one());
        }
        let g = num.gcd(den);
        let (n, _) = num.div_rem(&g).expect("gcd is nonzero");
        let (d, _) = den.div_rem(&g).expect("gcd is nonzero");
        let lead = d.leading().and_then(Scalar::inv).expect("denominator is nonzero");
        (n.scale(&lead), d.scale(&lead))
    }
}

impl FractionField for Complex64 {
    fn reduce(num: &Polynomial<Self>, den: &Polynomial<Self>) -> (Polynomial<Self>, Polynomial<Self>) {
        if num.is_zero() {
            return (Polynomial::zero(), Polynomial::one());
        }
        let mut n = num.clone();
        let mut d = den.clone();
        for (root, mult) in cluster(&roots(den), ROOT_DISTINCTNESS_TOL) {
            for _ in 0..mult {
                if !nearly_vanishes(&n, root) {
                    break;
                }
                let lin = Polynomial::linear(root);
                n = n.div_rem(&lin).expect("linear factor").0;
                d = d.div_rem(&lin).expect("linear factor").0;
            }
        }
        let lead = d.leading().copied().expect("denominator is nonzero");
        (n.scale(&lead.inv()), d.scale(&lead.inv()))
    }
}

/// `|P(z)|` is negligible relative to `Σ|cₖ||z|ᵏ`.
pub(crate) fn nearly_vanishes(p: &ComplexPolynomial, z: Complex64) -> bool {
    let scale: f64 = p
        .coeffs()
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * z.norm() + c.norm());
    p.eval(&z).norm() <= ROOT_DISTINCTNESS_TOL * scale.max(f64::MIN_POSITIVE)
}

/// Quotient of polynomials in lowest terms with a monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<C: FractionField> {
    numerator: Polynomial<C>,
    denominator: Polynomial<C>,
}

/// Residue of `r dz` at infinity together with the order of the form there.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinityResidue<C> {
    pub residue: C,
    /// `ord_∞(r dz)`; negative values are pole orders. `None` for `r = 0`.
    pub order: Option<i64>,
}

impl<C> InfinityResidue<C> {
    /// True when `r dz` has at worst a simple pole at infinity.
    pub fn is_at_most_simple(&self) -> bool {
        self.order.is_none_or(|o| o >= -1)
    }
}

impl<C: FractionField> RationalFunction<C> {
    pub fn new(numerator: Polynomial<C>, denominator: Polynomial<C>) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let (numerator, denominator) = C::reduce(&numerator, &denominator);
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn from_polynomial(p: Polynomial<C>) -> Self {
        Self {
            numerator: p,
            denominator: Polynomial::one(),
        }
    }

    pub fn numerator(&self) -> &Polynomial<C> {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial<C> {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// `None` at a root of the denominator.
    pub fn eval(&self, z: &C) -> Option<C> {
        let d = self.denominator.eval(z);
        d.inv().map(|inv| self.numerator.eval(z) * inv)
    }

    /// Residue of `r(z) dz` at infinity: the residue of `r(1/w)(-1/w²) dw` at `w = 0`.
    pub fn residue_at_infinity(&self) -> InfinityResidue<C> {
        let Some(num_deg) = self.numerator.degree() else {
            return InfinityResidue {
                residue: C::zero(),
                order: None,
            };
        };
        let den_deg = self.denominator.degree().expect("denominator is nonzero");
        let order = den_deg as i64 - num_deg as i64 - 2;
        let residue = if den_deg == 0 {
            C::zero()
        } else {
            let (_, rem) = self
                .numerator
                .div_rem(&self.denominator)
                .expect("denominator is nonzero");
            let lead_inv = self.denominator.leading().and_then(Scalar::inv).expect("nonzero");
            -(rem.coeff(den_deg - 1) * lead_inv)
        };
        InfinityResidue {
            residue,
            order: Some(order),
        }
    }
}

impl<C: FractionField> std::ops::Neg for &RationalFunction<C> {
    type Output = RationalFunction<C>;

    fn neg(self) -> RationalFunction<C> {
        RationalFunction {
            numerator: -&self.numerator,
            denominator: self.denominator.clone(),
        }
    }
}

impl RationalFunction<Complex64> {
    pub fn eval_c(&self, z: Complex64) -> Option<Complex64> {
        let d = self.denominator.eval(&z);
        if d.norm() == 0.0 {
            None
        } else {
            Some(self.numerator.eval(&z) / d)
        }
    }

    /// `lim_{z→a} (z-a) r(z)`, computed as `num(a) / den'(a)`.
    pub fn residue_at_simple_pole(&self, a: Complex64) -> Result<Complex64> {
        let den = &self.denominator;
        let dprime = den.derivative();
        if !nearly_vanishes(den, a) || nearly_vanishes(&dprime, a) || nearly_vanishes(&self.numerator, a) {
            return Err(Error::NotASimplePole(a));
        }
        Ok(self.numerator.eval(&a) / dprime.eval(&a))
    }
}

pub fn residue_at_simple_pole(r: &RationalFunction<Complex64>, a: Complex64) -> Result<Complex64> {
    r.residue_at_simple_pole(a)
}

pub fn residue_at_infinity<C: FractionField>(r: &RationalFunction<C>) -> InfinityResidue<C> {
    r.residue_at_infinity()
}
