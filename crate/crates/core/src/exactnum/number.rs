use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{rat, Poly};
use super::{ExactError, ModulusField};

/// An element of `Q(lambda)`, stored as a polynomial in `lambda` of degree
/// below the modulus degree.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    field: Arc<ModulusField>,
    poly: Poly,
}

impl AlgebraicNumber {
    pub(crate) fn from_poly(field: &Arc<ModulusField>, poly: Poly) -> Self {
        let poly = if poly.degree().unwrap_or(0) >= field.degree() {
            poly.rem(field.modulus())
        } else {
            poly
        };
        AlgebraicNumber {
            field: Arc::clone(field),
            poly,
        }
    }

    /// Element with the given coefficients, lowest degree first; reduced
    /// modulo the modulus.
    pub fn from_coeffs(field: &Arc<ModulusField>, coeffs: Vec<BigRational>) -> Self {
        AlgebraicNumber::from_poly(field, Poly::new(coeffs))
    }

    pub fn field(&self) -> &Arc<ModulusField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        self.poly.coeffs()
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    fn check(&self, other: &Self) -> Result<(), ExactError> {
        if Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field {
            Ok(())
        } else {
            Err(ExactError::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ExactError> {
        self.check(other)?;
        Ok(AlgebraicNumber::from_poly(&self.field, &self.poly + &other.poly))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ExactError> {
        self.check(other)?;
        Ok(AlgebraicNumber::from_poly(&self.field, &self.poly - &other.poly))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ExactError> {
        self.check(other)?;
        Ok(AlgebraicNumber::from_poly(&self.field, (&self.poly * &other.poly).rem(self.field.modulus())))
    }

    /// `self / other`; fails when `other` vanishes at `lambda`.
    ///
    /// The inverse is taken modulo `modulus / gcd(other, modulus)`, the
    /// cofactor that still has `lambda` as a root.
    pub fn try_div(&self, other: &Self) -> Result<Self, ExactError> {
        self.check(other)?;
        if other.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let m = self.field.modulus();
        let g = Poly::gcd(&other.poly, m);
        let cofactor = if g.degree().unwrap_or(0) == 0 { m.clone() } else { m.div_rem(&g).0 };
        let inv = other.poly.inverse_mod(&cofactor).ok_or(ExactError::DivisionByZero)?;
        Ok(AlgebraicNumber::from_poly(&self.field, (&self.poly * &inv).rem(m)))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        AlgebraicNumber::from_poly(&self.field, self.poly.scale(q))
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&rat(n))
    }

    pub fn half(&self) -> Self {
        self.scale(&BigRational::new(BigInt::one(), BigInt::from(2)))
    }

    pub fn is_zero(&self) -> bool {
        self.field.vanishes(&self.poly)
    }

    /// `-1`, `0` or `+1` according to the sign of the value at `lambda`.
    pub fn sign(&self) -> i8 {
        self.field.sign_of_poly(&self.poly)
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, ExactError> {
        Ok(self.try_sub(other)?.sign().cmp(&0))
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Rational enclosure of the value of width at most `width`.
    pub fn enclosure(&self, width: &BigRational) -> (BigRational, BigRational) {
        self.field.enclose(&self.poly, |a, b| &(b - a) <= width)
    }

    /// Decimal text with `digits` places after the point. The result is
    /// the truncation of the exact value, or within one unit of the last
    /// place when the value sits on a decimal boundary it cannot certify.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigRational::from_integer(BigInt::from(10).pow(digits as u32));
        let slack = BigRational::new(BigInt::one(), BigInt::from(100)) / &scale;
        let (a, b) = self.field.enclose(&self.poly, |a, b| {
            (a * &scale).trunc() == (b * &scale).trunc() && a.signum() == b.signum()
                || b - a <= slack
        });
        let value = if (&a * &scale).trunc() == (&b * &scale).trunc() {
            a.clone()
        } else {
            (&a + &b) / rat(2)
        };
        format_decimal(&value, digits)
    }

    /// Nearest `f64`, for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        let (a, b) = self.enclosure(&BigRational::new(BigInt::one(), BigInt::from(1u64 << 60)));
        ((a + b) / rat(2)).to_f64().unwrap_or(f64::NAN)
    }

    /// Parses the `L`-polynomial text form, e.g. `1/2 + 1/2*L - L^2`.
    pub fn parse(field: &Arc<ModulusField>, text: &str) -> Result<Self, ExactError> {
        let poly = parse_l_poly(text).ok_or_else(|| ExactError::Parse(text.to_string()))?;
        Ok(AlgebraicNumber::from_poly(field, poly))
    }
}

fn format_decimal(value: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let scaled = (value * BigRational::from_integer(scale.clone())).trunc().to_integer();
    let neg = value.is_negative() && !scaled.is_zero();
    let mag = scaled.abs();
    let (int_part, frac_part) = mag.div_rem(&scale);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        out.push('.');
        out.push_str(&format!("{:0>width$}", frac_part.to_string(), width = digits));
    }
    out
}

impl PartialEq for AlgebraicNumber {
    /// Value equality at `lambda`. Numbers from different fields are unequal.
    fn eq(&self, other: &Self) -> bool {
        self.try_sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl PartialOrd for AlgebraicNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr for &AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $method(self, rhs: &AlgebraicNumber) -> AlgebraicNumber {
                self.$try(rhs).expect("operands from different fields")
            }
        }
        impl $tr for AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $method(self, rhs: AlgebraicNumber) -> AlgebraicNumber {
                (&self).$try(&rhs).expect("operands from different fields")
            }
        }
        impl $tr<&AlgebraicNumber> for AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $method(self, rhs: &AlgebraicNumber) -> AlgebraicNumber {
                (&self).$try(rhs).expect("operands from different fields")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        AlgebraicNumber::from_poly(&self.field, -&self.poly)
    }
}

impl Neg for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        -&self
    }
}

impl fmt::Display for AlgebraicNumber {
    /// `L`-polynomial, lowest degree first: `1/2 + 1/2*L`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_l_poly(&self.poly))
    }
}

pub(crate) fn render_l_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let bare = k > 0 && a.is_one();
        if !bare {
            out.push_str(&a.to_string());
        }
        if k > 0 {
            if !bare {
                out.push('*');
            }
            out.push('L');
            if k > 1 {
                out.push_str(&format!("^{k}"));
            }
        }
    }
    out
}

fn parse_l_poly(text: &str) -> Option<Poly> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let bytes = s.as_bytes();
    let mut coeffs: Vec<BigRational> = Vec::new();
    let mut i = 0;
    let mut first = true;
    while i < bytes.len() {
        let mut neg = false;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            neg = bytes[i] == b'-';
            i += 1;
        } else if !first {
            return None;
        }
        first = false;
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            i += 1;
        }
        let (c, k) = parse_term(&s[start..i])?;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, BigRational::zero());
        }
        coeffs[k] += if neg { -c } else { c };
    }
    Some(Poly::new(coeffs))
}

fn parse_term(term: &str) -> Option<(BigRational, usize)> {
    if term.is_empty() {
        return None;
    }
    let (coef_text, power_text) = match term.find('L') {
        None => (term, None),
        Some(pos) => {
            let coef = term[..pos].strip_suffix('*').unwrap_or(&term[..pos]);
            (coef, Some(&term[pos + 1..]))
        }
    };
    let coef = if coef_text.is_empty() {
        if power_text.is_none() {
            return None;
        }
        BigRational::one()
    } else {
        parse_rational(coef_text)?
    };
    let k = match power_text {
        None => 0,
        Some("") => 1,
        Some(p) => p.strip_prefix('^')?.parse::<usize>().ok()?,
    };
    Some((coef, k))
}

pub(crate) fn parse_rational(text: &str) -> Option<BigRational> {
    match text.split_once('/') {
        None => text.parse::<BigInt>().ok().map(BigRational::from_integer),
        Some((n, d)) => {
            let n = n.parse::<BigInt>().ok()?;
            let d = d.parse::<BigInt>().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
    }
}
