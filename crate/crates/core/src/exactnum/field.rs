use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{rat, sign_of, Poly};
use super::{AlgebraicNumber, ExactError};

/// The quotient ring `Q[x]/(modulus)` read through evaluation at one
/// distinguished real root of the modulus: the Perron root `lambda`.
///
/// The modulus is the square-free part of a characteristic polynomial and
/// need not be irreducible. Two coefficient vectors name the same number
/// whenever their difference vanishes at `lambda`, which is decided with a
/// gcd and a Sturm count rather than by factoring.
#[derive(Clone, Debug)]
pub struct ModulusField {
    modulus: Poly,
    lo: BigRational,
    hi: BigRational,
    /// Set when the Perron root is a rational (hence integer) root.
    exact_root: Option<BigRational>,
    sign_lo: i8,
}

impl PartialEq for ModulusField {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.lo == other.lo && self.hi == other.hi
    }
}

impl Eq for ModulusField {}

impl ModulusField {
    /// Builds the field for the largest real root of `charpoly`, which must
    /// exceed one.
    ///
    /// The starting bracket is `(1, B)` with `B = 1 + max |a_i|` the Cauchy
    /// bound of the monic square-free part; it is narrowed by bisection
    /// until it holds exactly one root and its endpoints are not roots.
    pub fn from_charpoly(charpoly: &Poly) -> Result<Arc<Self>, ExactError> {
        if charpoly.degree().unwrap_or(0) == 0 {
            return Err(ExactError::NoRootAboveOne);
        }
        let modulus = charpoly.square_free_part();
        let chain = modulus.sturm_chain();
        let one = BigRational::one();
        let bound = one.clone()
            + modulus
                .coeffs()
                .iter()
                .map(|c| c.abs())
                .max()
                .unwrap_or_else(BigRational::zero);
        let count_open = |a: &BigRational, b: &BigRational| {
            let c = Poly::count_roots(&chain, a, b);
            if modulus.sign_at(b) == 0 {
                c - 1
            } else {
                c
            }
        };

        let mut lo = one.clone();
        let mut hi = bound;
        if count_open(&lo, &hi) == 0 {
            return Err(ExactError::NoRootAboveOne);
        }
        let two = rat(2);
        // Narrow onto the largest root.
        while count_open(&lo, &hi) > 1 {
            let mid = (&lo + &hi) / &two;
            if count_open(&mid, &hi) >= 1 {
                lo = mid;
            } else if modulus.sign_at(&mid) == 0 {
                // The largest root is `mid` itself; pull `lo` up towards it.
                let mut step = (&mid - &lo) / &two;
                let mut cand = &mid - &step;
                while count_open(&cand, &hi) != 1 || modulus.sign_at(&cand) == 0 {
                    step /= &two;
                    cand = &mid - &step;
                }
                lo = cand;
            } else {
                hi = mid;
            }
        }
        // Move a root endpoint inwards.
        if modulus.sign_at(&lo) == 0 {
            let mut k = 1u32;
            loop {
                let cand = &lo + (&hi - &lo) / BigRational::from_integer(BigInt::from(2u32).pow(k));
                if count_open(&cand, &hi) == 1 && modulus.sign_at(&cand) != 0 {
                    lo = cand;
                    break;
                }
                k += 1;
            }
        }
        debug_assert_eq!(count_open(&lo, &hi), 1);

        // A rational root of a monic integer polynomial is an integer.
        let mut exact_root = None;
        if modulus.is_integral() {
            let mut k = lo.floor() + &one;
            while k < hi {
                if modulus.sign_at(&k) == 0 {
                    exact_root = Some(k.clone());
                    break;
                }
                k += &one;
            }
        }
        let sign_lo = modulus.sign_at(&lo);
        Ok(Arc::new(ModulusField {
            modulus,
            lo,
            hi,
            exact_root,
            sign_lo,
        }))
    }

    /// Rebuilds a field from a stored modulus and isolating interval,
    /// checking that the interval isolates a single root above one.
    pub fn from_parts(modulus: Poly, lo: BigRational, hi: BigRational) -> Result<Arc<Self>, ExactError> {
        if modulus.degree().unwrap_or(0) == 0 || lo >= hi || lo < BigRational::one() {
            return Err(ExactError::BadInterval);
        }
        let modulus = modulus.monic();
        if Poly::gcd(&modulus, &modulus.derivative()).degree() != Some(0) {
            return Err(ExactError::BadInterval);
        }
        let chain = modulus.sturm_chain();
        if modulus.sign_at(&lo) == 0
            || modulus.sign_at(&hi) == 0
            || Poly::count_roots(&chain, &lo, &hi) != 1
        {
            return Err(ExactError::BadInterval);
        }
        let mut exact_root = None;
        if modulus.is_integral() {
            let one = BigRational::one();
            let mut k = lo.floor() + &one;
            while k < hi {
                if modulus.sign_at(&k) == 0 {
                    exact_root = Some(k.clone());
                    break;
                }
                k += &one;
            }
        }
        let sign_lo = modulus.sign_at(&lo);
        Ok(Arc::new(ModulusField {
            modulus,
            lo,
            hi,
            exact_root,
            sign_lo,
        }))
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap_or(0)
    }

    /// The isolating interval `(lo, hi)` of the Perron root.
    pub fn perron_interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn exact_root(&self) -> Option<&BigRational> {
        self.exact_root.as_ref()
    }

    pub fn zero(self: &Arc<Self>) -> AlgebraicNumber {
        AlgebraicNumber::from_poly(self, Poly::zero())
    }

    pub fn one(self: &Arc<Self>) -> AlgebraicNumber {
        AlgebraicNumber::from_poly(self, Poly::one())
    }

    pub fn rational(self: &Arc<Self>, q: BigRational) -> AlgebraicNumber {
        AlgebraicNumber::from_poly(self, Poly::constant(q))
    }

    pub fn integer(self: &Arc<Self>, n: i64) -> AlgebraicNumber {
        self.rational(rat(n))
    }

    /// `lambda`.
    pub fn lambda(self: &Arc<Self>) -> AlgebraicNumber {
        AlgebraicNumber::from_poly(self, Poly::monomial(BigRational::one(), 1))
    }

    /// `lambda^k`.
    pub fn lambda_pow(self: &Arc<Self>, k: u32) -> AlgebraicNumber {
        let mut result = Poly::one();
        let mut base = Poly::monomial(BigRational::one(), 1).rem(&self.modulus);
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = (&result * &base).rem(&self.modulus);
            }
            base = (&base * &base).rem(&self.modulus);
            e >>= 1;
        }
        AlgebraicNumber::from_poly(self, result.rem(&self.modulus))
    }

    /// Whether `p(lambda) = 0`, decided exactly.
    pub(crate) fn vanishes(&self, p: &Poly) -> bool {
        if p.is_zero() {
            return true;
        }
        if p.is_constant() {
            return false;
        }
        if let Some(r) = &self.exact_root {
            return p.sign_at(r) == 0;
        }
        let g = Poly::gcd(p, &self.modulus);
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        // g divides the square-free modulus and does not vanish at `hi`.
        Poly::count_roots(&g.sturm_chain(), &self.lo, &self.hi) >= 1
    }

    /// Encloses `p(lambda)` in successively narrower rational intervals
    /// until `done` accepts the enclosure, and returns it.
    pub(crate) fn enclose<F>(&self, p: &Poly, mut done: F) -> (BigRational, BigRational)
    where
        F: FnMut(&BigRational, &BigRational) -> bool,
    {
        if let Some(r) = &self.exact_root {
            let v = p.eval(r);
            return (v.clone(), v);
        }
        let two = rat(2);
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        loop {
            let (a, b) = p.eval_interval(&lo, &hi);
            if done(&a, &b) {
                return (a, b);
            }
            let mid = (&lo + &hi) / &two;
            let s = self.modulus.sign_at(&mid);
            if s == 0 {
                let v = p.eval(&mid);
                return (v.clone(), v);
            }
            if s == self.sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// Sign of `p(lambda)`; terminates because the zero test runs first.
    pub(crate) fn sign_of_poly(&self, p: &Poly) -> i8 {
        if p.is_constant() {
            return sign_of(&p.coeff(0));
        }
        if self.vanishes(p) {
            return 0;
        }
        let (a, b) = self.enclose(p, |a, b| a.is_positive() || b.is_negative() || a == b);
        if a.is_positive() {
            1
        } else if b.is_negative() {
            -1
        } else {
            sign_of(&a)
        }
    }
}

impl fmt::Display for ModulusField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[L]/({}) with L in ({}, {})", self.modulus.to_string().replace('x', "L"), self.lo, self.hi)
    }
}
