use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Signed, ToPrimitive, Zero};

/// Literal constant. Rationals stay exact until an operation overflows `i64`,
/// at which point the result degrades to a binary double.
#[derive(Debug, Clone, Copy)]
pub enum Number {
    Rational(Ratio<i64>),
    Float(f64),
}

impl Number {
    pub fn int(v: i64) -> Self {
        Number::Rational(Ratio::from_integer(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Number::Rational(Ratio::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(v) => v,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(v) => v == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rational(r) => r == Ratio::from_integer(1),
            Number::Float(v) => v == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(v) => v < 0.0,
        }
    }

    pub fn add(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_add(&b) {
                Some(r) => Number::Rational(r),
                None => Number::Float(self.to_f64() + other.to_f64()),
            },
            _ => Number::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_mul(&b) {
                Some(r) => Number::Rational(r),
                None => Number::Float(self.to_f64() * other.to_f64()),
            },
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(self) -> Number {
        match self {
            Number::Rational(r) => match r.numer().checked_neg() {
                Some(n) => Number::Rational(Ratio::new_raw(n, *r.denom())),
                None => Number::Float(-self.to_f64()),
            },
            Number::Float(v) => Number::Float(-v),
        }
    }

    /// `None` for zero.
    pub fn recip(self) -> Option<Number> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Number::Rational(r) => {
                let (n, d) = (*r.numer(), *r.denom());
                match (n.checked_abs(), d.checked_mul(n.signum())) {
                    (Some(an), Some(sd)) => Number::Rational(Ratio::new(sd, an)),
                    _ => Number::Float(1.0 / self.to_f64()),
                }
            }
            Number::Float(v) => Number::Float(1.0 / v),
        })
    }

    pub fn powi(self, k: i32) -> Option<Number> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut acc = Number::int(1);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        Some(acc)
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a == b,
            (Number::Float(a), Number::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Number {}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Rational(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            Number::Float(v) => {
                1u8.hash(state);
                v.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            // Debug keeps a decimal point so the literal parses back as a float.
            Number::Float(v) => write!(f, "{v:?}"),
        }
    }
}
