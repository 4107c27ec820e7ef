//! The exponent `p` of an l^p combination, with `p = inf` as a first-class
//! value.
//!
//! Every l^p norm in the crate is computed through [`Exponent::accumulate`]
//! and [`Exponent::finish`]. Several tests assert bit-exact agreement between
//! values computed along different routes (product distances, subset sums,
//! diameter formulas); funnelling all of them through one arithmetic path is
//! what makes those assertions hold.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::GhError;
use crate::scalar::Scalar;
use crate::Result;

/// `p` in `[1, inf]`. In files and flags the infinite exponent is spelled
/// with the literal token `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> Exponent<T> {
    /// Validates `p >= 1`. Infinite input maps to `Infinity`.
    pub fn new(p: T) -> Result<Self> {
        if p.is_nan() || p < T::one() {
            return Err(GhError::InvalidExponent {
                value: p.to_f64_lossy(),
            });
        }
        if p.is_infinite() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Exponent::Finite(_))
    }

    /// The neutral accumulator value (0 for both sum and max: all inputs are
    /// nonnegative).
    pub fn zero_acc(&self) -> T {
        T::zero()
    }

    /// Folds one nonnegative part into the accumulator: `acc + d^p` for
    /// finite `p`, `max(acc, d)` for `p = inf`.
    ///
    /// `p = 1` and `p = 2` avoid `powf` so that sums and squares stay on the
    /// cheapest correctly-rounded path.
    #[inline]
    pub fn accumulate(&self, acc: T, d: T) -> T {
        match *self {
            Exponent::Infinity => acc.max(d),
            Exponent::Finite(p) => {
                let term = if p == T::one() {
                    d
                } else if p == T::from_f64_lossy(2.0) {
                    d * d
                } else {
                    d.powf(p)
                };
                acc + term
            }
        }
    }

    /// Applies the outer `1/p` root to a finished accumulator.
    #[inline]
    pub fn finish(&self, acc: T) -> T {
        match *self {
            Exponent::Infinity => acc,
            Exponent::Finite(p) => {
                if p == T::one() {
                    acc
                } else if p == T::from_f64_lossy(2.0) {
                    acc.sqrt()
                } else {
                    acc.powf(p.recip())
                }
            }
        }
    }

    /// l^p norm of a slice of nonnegative parts, folded in index order.
    pub fn norm(&self, parts: &[T]) -> T {
        let mut acc = self.zero_acc();
        for &d in parts {
            acc = self.accumulate(acc, d);
        }
        self.finish(acc)
    }

    /// Same as [`norm`](Self::norm) but skipping one index.
    pub fn norm_excluding(&self, parts: &[T], skip: usize) -> T {
        let mut acc = self.zero_acc();
        for (k, &d) in parts.iter().enumerate() {
            if k != skip {
                acc = self.accumulate(acc, d);
            }
        }
        self.finish(acc)
    }

    /// Operator norm of the diagonal map from a space to its l^p square,
    /// `2^{1/p}` (1 for `p = inf`). Computed as `|| (1, 1) ||_p` so it shares
    /// the norm arithmetic.
    pub fn dilation_factor(&self) -> T {
        self.norm(&[T::one(), T::one()])
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Exponent::Infinity => f64::INFINITY,
            Exponent::Finite(p) => p.to_f64_lossy(),
        }
    }
}

impl<T: Scalar> fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl<T: Scalar> FromStr for Exponent<T> {
    type Err = GhError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Exponent::Infinity);
        }
        let p: f64 = t.parse().map_err(|_| GhError::InvalidExponent {
            value: f64::NAN,
        })?;
        Exponent::new(T::from_f64_lossy(p))
    }
}

impl<T: Scalar> Serialize for Exponent<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Infinity => serializer.serialize_str("inf"),
            Exponent::Finite(p) => serializer.serialize_f64(p.to_f64_lossy()),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Exponent<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Scalar> Visitor<'de> for ExpVisitor<T> {
            type Value = Exponent<T>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Exponent::new(T::from_f64_lossy(v)).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExpVisitor(std::marker::PhantomData))
    }
}
