use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};

/// Exact Gaussian-rational scalar: `re + i*im` with arbitrary-precision
/// rational parts.  All kernel arithmetic is exact; floats appear only at
/// evaluation time.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coeff {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Coeff { re: BigRational::one(), im: BigRational::zero() }
    }

    pub fn i() -> Self {
        Coeff { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Coeff { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    /// `num/den`, exact.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Coeff {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    /// `(re_n/re_d) + i (im_n/im_d)`.
    pub fn complex_ratio(re_n: i64, re_d: i64, im_n: i64, im_d: i64) -> Self {
        assert!(re_d != 0 && im_d != 0, "zero denominator");
        Coeff {
            re: BigRational::new(BigInt::from(re_n), BigInt::from(re_d)),
            im: BigRational::new(BigInt::from(im_n), BigInt::from(im_d)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Coeff { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Multiplicative inverse.  Panics on zero; callers gate on `is_zero`.
    pub fn inverse(&self) -> Self {
        let norm = &self.re * &self.re + &self.im * &self.im;
        assert!(!norm.is_zero(), "inverse of zero coefficient");
        Coeff { re: &self.re / &norm, im: -&self.im / &norm }
    }

    pub fn pow(&self, k: i32) -> Self {
        if k == 0 {
            return Coeff::one();
        }
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Coeff::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// True when the leading nonzero part (re, then im) is negative.  Used to
    /// pick a canonical sign when factoring a coefficient out of a sine
    /// argument.
    pub fn leading_negative(&self) -> bool {
        if !self.re.is_zero() {
            self.re.is_negative()
        } else {
            self.im.is_negative()
        }
    }

    pub fn to_c64(&self) -> num::complex::Complex64 {
        num::complex::Complex64::new(
            self.re.to_f64().expect("rational out of f64 range"),
            self.im.to_f64().expect("rational out of f64 range"),
        )
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        Coeff { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        Coeff { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        Coeff {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl MulAssign<&Coeff> for Coeff {
    fn mul_assign(&mut self, rhs: &Coeff) {
        *self = &*self * rhs;
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { re: -self.re.clone(), im: -self.im.clone() }
    }
}

fn fmt_rational(q: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            fmt_rational(&self.re, f)
        } else if self.re.is_zero() {
            if self.im.is_one() {
                write!(f, "I")
            } else if (-&self.im).is_one() {
                write!(f, "-I")
            } else {
                fmt_rational(&self.im, f)?;
                write!(f, "*I")
            }
        } else {
            write!(f, "(")?;
            fmt_rational(&self.re, f)?;
            if self.im.is_negative() {
                write!(f, "-")?;
                fmt_rational(&(-&self.im), f)?;
            } else {
                write!(f, "+")?;
                fmt_rational(&self.im, f)?;
            }
            write!(f, "*I)")
        }
    }
}

// Forward Debug to Display; the exact rational internals are noise in test
// failure output.
impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
