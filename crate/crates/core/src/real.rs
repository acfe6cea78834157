//! Scalar abstraction for the contangle pipeline.
//!
//! The strong-monogamy recursion subtracts combinatorially many terms of
//! similar magnitude, so the same formulas are evaluated either in `f64` or in
//! MPFR floats ([`Wide`]) whose mantissa width is chosen per evaluation.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::Float;
use serde::{Deserialize, Serialize};

/// Working precision of an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// IEEE double throughout.
    Double,
    /// Multi-precision binary floats, rounded to `f64` only on output.
    #[default]
    Extended,
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!(
                "unknown precision '{other}' (expected double|extended)"
            )),
        }
    }
}

pub trait Real:
    Clone
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn exp(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn asinh(&self) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_f64(n as f64)
    }

    fn from_u128(n: u128) -> Self {
        Self::from_f64(n as f64)
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `self -= m * x`.
    fn sub_mul_assign(&mut self, m: u128, x: &Self) {
        *self = self.clone() - Self::from_u128(m) * x.clone();
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn asinh(&self) -> Self {
        f64::asinh(*self)
    }
    fn sub_mul_assign(&mut self, m: u128, x: &Self) {
        *self -= m as f64 * x;
    }
}

/// Default mantissa width of [`Wide`] values.
pub const DEFAULT_WIDE_BITS: u32 = 256;

thread_local! {
    static WIDE_BITS: Cell<u32> = const { Cell::new(DEFAULT_WIDE_BITS) };
}

/// Runs `f` with newly created [`Wide`] values carrying `bits` of mantissa on
/// this thread. The previous width is restored afterwards.
pub fn with_wide_bits<T>(bits: u32, f: impl FnOnce() -> T) -> T {
    struct Restore(u32);
    impl Drop for Restore {
        fn drop(&mut self) {
            WIDE_BITS.with(|b| b.set(self.0));
        }
    }
    let _restore = Restore(WIDE_BITS.with(|b| b.replace(bits)));
    f()
}

pub fn wide_bits() -> u32 {
    WIDE_BITS.with(Cell::get)
}

/// MPFR float. Values are created at the current thread's width (see
/// [`with_wide_bits`]); arithmetic keeps the width of the left operand.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Wide(Float);

impl Wide {
    pub fn inner(&self) -> &Float {
        &self.0
    }
}

impl fmt::Debug for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.40e}", self.0)
    }
}

macro_rules! wide_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Wide {
            type Output = Wide;
            fn $method(self, rhs: Wide) -> Wide {
                Wide($tr::$method(self.0, &rhs.0))
            }
        }
    };
}

wide_binop!(Add, add);
wide_binop!(Sub, sub);
wide_binop!(Mul, mul);
wide_binop!(Div, div);

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide(-self.0)
    }
}

impl Real for Wide {
    fn from_f64(x: f64) -> Self {
        Wide(Float::with_val(wide_bits(), x))
    }
    fn from_int(n: i64) -> Self {
        Wide(Float::with_val(wide_bits(), n))
    }
    fn from_u128(n: u128) -> Self {
        Wide(Float::with_val(wide_bits(), n))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn sqrt(&self) -> Self {
        Wide(self.0.clone().sqrt())
    }
    fn abs(&self) -> Self {
        Wide(self.0.clone().abs())
    }
    fn exp(&self) -> Self {
        Wide(self.0.clone().exp())
    }
    fn sinh(&self) -> Self {
        Wide(self.0.clone().sinh())
    }
    fn cosh(&self) -> Self {
        Wide(self.0.clone().cosh())
    }
    fn asinh(&self) -> Self {
        Wide(self.0.clone().asinh())
    }
    fn sub_mul_assign(&mut self, m: u128, x: &Self) {
        if m == 1 {
            self.0 -= &x.0;
        } else {
            self.0 -= Float::with_val(self.0.prec(), &x.0 * m);
        }
    }
}
