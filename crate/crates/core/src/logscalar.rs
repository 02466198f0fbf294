//! Sign + log-magnitude representation of reals.
//!
//! Quantities like e^k for k in the thousands appear throughout the
//! oscillator analysis; this type keeps them exact to f64 precision in the
//! log of the magnitude. Multiplication and division are exact (lnmag adds);
//! addition and subtraction go through log-sum-exp.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// ln(1 - e^x) for x < 0, accurate over the whole range.
pub fn ln1mexp(x: f64) -> f64 {
    debug_assert!(x < 0.0);
    if x < -std::f64::consts::LN_2 {
        (-x.exp()).ln_1p()
    } else {
        (-x.exp_m1()).ln()
    }
}

/// ln(1 + e^x), overflow-safe.
pub fn ln1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LogScalar {
    sign: i8,
    lnmag: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar {
        sign: 0,
        lnmag: f64::NEG_INFINITY,
    };
    pub const ONE: LogScalar = LogScalar { sign: 1, lnmag: 0.0 };

    /// Value sign * e^lnmag.
    pub fn new(sign: i8, lnmag: f64) -> Self {
        assert!(sign == -1 || sign == 0 || sign == 1);
        if sign == 0 {
            Self::ZERO
        } else {
            LogScalar { sign, lnmag }
        }
    }

    /// Positive value e^lnmag.
    pub fn from_ln(lnmag: f64) -> Self {
        LogScalar { sign: 1, lnmag }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogScalar {
                sign: if v > 0.0 { 1 } else { -1 },
                lnmag: v.abs().ln(),
            }
        }
    }

    /// Round trip to f64; overflows to +-inf, underflows to 0.
    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.lnmag.exp()
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// ln|x|; NEG_INFINITY for zero.
    pub fn ln_abs(self) -> f64 {
        self.lnmag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        LogScalar {
            sign: self.sign.abs(),
            lnmag: self.lnmag,
        }
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(self) -> Self {
        assert!(self.sign >= 0, "sqrt of a negative LogScalar");
        LogScalar {
            sign: self.sign,
            lnmag: self.lnmag / 2.0,
        }
    }

    pub fn powi(self, e: i32) -> Self {
        if self.sign == 0 {
            return if e == 0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if e % 2 == 0 { 1 } else { self.sign };
        LogScalar {
            sign,
            lnmag: self.lnmag * e as f64,
        }
    }

    fn add_magnitudes(a: f64, b: f64) -> f64 {
        // ln(e^a + e^b)
        if a == f64::NEG_INFINITY {
            return b;
        }
        if b == f64::NEG_INFINITY {
            return a;
        }
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    }

    fn compare(self, other: Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match self.sign {
            0 => Ordering::Equal,
            1 => self.lnmag.partial_cmp(&other.lnmag).unwrap_or(Ordering::Equal),
            _ => other.lnmag.partial_cmp(&self.lnmag).unwrap_or(Ordering::Equal),
        }
    }
}

impl Neg for LogScalar {
    type Output = Self;
    fn neg(self) -> Self {
        LogScalar {
            sign: -self.sign,
            lnmag: self.lnmag,
        }
    }
}

impl Mul for LogScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        LogScalar {
            sign: self.sign * rhs.sign,
            lnmag: self.lnmag + rhs.lnmag,
        }
    }
}

impl Div for LogScalar {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.sign != 0, "division by LogScalar zero");
        if self.sign == 0 {
            return Self::ZERO;
        }
        LogScalar {
            sign: self.sign * rhs.sign,
            lnmag: self.lnmag - rhs.lnmag,
        }
    }
}

impl Add for LogScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        if self.sign == rhs.sign {
            return LogScalar {
                sign: self.sign,
                lnmag: Self::add_magnitudes(self.lnmag, rhs.lnmag),
            };
        }
        // Opposite signs: subtract the smaller magnitude from the larger.
        let (big, small) = if self.lnmag >= rhs.lnmag {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if big.lnmag == small.lnmag {
            return Self::ZERO;
        }
        LogScalar {
            sign: big.sign,
            lnmag: big.lnmag + ln1mexp(small.lnmag - big.lnmag),
        }
    }
}

impl Sub for LogScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl PartialEq for LogScalar {
    fn eq(&self, other: &Self) -> bool {
        self.compare(*other) == Ordering::Equal
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(*other))
    }
}
