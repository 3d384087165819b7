use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

/// A double with a 64-bit binary exponent: `mantissa · 2^exponent` with
/// `0.5 ≤ |mantissa| < 1`, or exactly zero.
///
/// Raw moments in the divergent regime grow like `b^{nq(1/2-H)}` and leave
/// the `f64` range long before the recursion loses precision.
#[derive(Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtFloat {
    mantissa: f64,
    exponent: i64,
}

impl ExtFloat {
    pub const ZERO: Self = Self {
        mantissa: 0.0,
        exponent: 0,
    };
    pub const ONE: Self = Self {
        mantissa: 0.5,
        exponent: 1,
    };

    fn normalized(mantissa: f64, exponent: i64) -> Self {
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        assert!(mantissa.is_finite(), "non-finite mantissa");
        let (m, e) = libm::frexp(mantissa);
        Self {
            mantissa: m,
            exponent: exponent + i64::from(e),
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::normalized(x, 0)
    }

    /// `2^e`.
    pub fn exp2(e: i64) -> Self {
        Self {
            mantissa: 0.5,
            exponent: e + 1,
        }
    }

    /// Nearest `f64`; infinite (with the right sign) past the range.
    pub fn to_f64(self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        if self.exponent > 1100 {
            return self.mantissa.signum() * f64::INFINITY;
        }
        if self.exponent < -1200 {
            return 0.0 * self.mantissa.signum();
        }
        libm::ldexp(self.mantissa, self.exponent as i32)
    }

    /// `true` when [`Self::to_f64`] is finite.
    pub fn fits_f64(self) -> bool {
        self.to_f64().is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    pub fn signum(self) -> i8 {
        match self.mantissa.partial_cmp(&0.0) {
            Some(Ordering::Greater) => 1,
            Some(Ordering::Less) => -1,
            _ => 0,
        }
    }

    /// `log2 |x|`; `-∞` for zero.
    pub fn log2_abs(self) -> f64 {
        if self.mantissa == 0.0 {
            return f64::NEG_INFINITY;
        }
        libm::log2(self.mantissa.abs()) + self.exponent as f64
    }

    pub fn abs(self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            ..self
        }
    }

    pub fn powi(self, k: u32) -> Self {
        let mut acc = Self::ONE;
        let mut base = self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn scale(self, x: f64) -> Self {
        self * Self::from_f64(x)
    }

    /// `self / other`.
    pub fn div(self, other: Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        Self::normalized(self.mantissa / other.mantissa, self.exponent - other.exponent)
    }
}

impl Mul for ExtFloat {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::normalized(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Add for ExtFloat {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = big.exponent - small.exponent;
        if shift > 60 {
            return big;
        }
        Self::normalized(
            big.mantissa + libm::ldexp(small.mantissa, -(shift as i32)),
            big.exponent,
        )
    }
}

impl Neg for ExtFloat {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            ..self
        }
    }
}

impl Sub for ExtFloat {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl From<f64> for ExtFloat {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Debug for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.to_f64();
        if x.is_finite() && (x == 0.0 || x.abs() > 1e-300) {
            return write!(f, "{x:e}");
        }
        // Decimal scientific form from log10.
        let l10 = self.log2_abs() * core::f64::consts::LOG10_2;
        let e = libm::floor(l10);
        let m = libm::pow(10.0, l10 - e) * f64::from(self.signum());
        write!(f, "{m}e{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_f64() {
        let xs = [3.5, -0.125, 1e10, -7.25e-8, 1.0];
        for &a in &xs {
            for &b in &xs {
                let (ea, eb) = (ExtFloat::from(a), ExtFloat::from(b));
                assert_eq!((ea * eb).to_f64(), a * b);
                assert!(((ea + eb).to_f64() - (a + b)).abs() <= 1e-15 * (a.abs() + b.abs()));
                assert!(((ea - eb).to_f64() - (a - b)).abs() <= 1e-15 * (a.abs() + b.abs()));
                assert_eq!(ea.div(eb).to_f64(), a / b);
            }
        }
        assert_eq!(ExtFloat::ONE.to_f64(), 1.0);
        assert_eq!(ExtFloat::exp2(-3).to_f64(), 0.125);
    }

    #[test]
    fn beyond_f64_range() {
        let big = ExtFloat::exp2(2000);
        assert!(!big.fits_f64());
        assert_eq!(big.log2_abs(), 2000.0);
        let back = (big * ExtFloat::exp2(-1990)).to_f64();
        assert_eq!(back, 1024.0);
        assert!((ExtFloat::from(3.0).powi(1000).log2_abs() - 1000.0 * 3f64.log2()).abs() < 1e-9);
        assert_eq!((-big).to_f64(), f64::NEG_INFINITY);
        assert_eq!(alloc::format!("{}", ExtFloat::exp2(2000)).split('e').nth(1), Some("602"));
    }
}
