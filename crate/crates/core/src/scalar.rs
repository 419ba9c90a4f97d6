//! Scalar fields supported by the dense matrices: `f64` and `Complex64`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tag for the scalar field of a matrix or model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::param(
                "field",
                format!("expected `real` or `complex`, got `{other}`"),
            )),
        }
    }
}

/// Element type of a [`DenseMatrix`](crate::matrix::DenseMatrix).
///
/// The field is part of the type, so real and complex matrices cannot be
/// mixed in one operation.
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const FIELD: Field;

    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    /// Modulus `|x|`.
    fn modulus(self) -> f64;
    /// Squared modulus `|x|^2`.
    fn norm_sqr(self) -> f64;
    fn conj(self) -> Self;
    fn scale(self, s: f64) -> Self;
    /// Standard Gaussian with `E|x|^2 = 1` (circular in the complex case).
    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Text token for the matrix file format.
    fn format_token(self) -> String;
    fn parse_token(token: &str) -> std::result::Result<Self, String>;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn format_token(self) -> String {
        format_f64(self)
    }

    fn parse_token(token: &str) -> std::result::Result<Self, String> {
        token
            .parse::<f64>()
            .map_err(|e| format!("invalid real `{token}`: {e}"))
            .and_then(|x| {
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(format!("non-finite value `{token}`"))
                }
            })
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn format_token(self) -> String {
        let im = format_f64(self.im.abs());
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        format!("{}{}{}i", format_f64(self.re), sign, im)
    }

    /// Accepts `re+imi`, `re-imi`, a bare real `re`, or a bare imaginary `imi`.
    fn parse_token(token: &str) -> std::result::Result<Self, String> {
        let Some(body) = token.strip_suffix('i') else {
            return f64::parse_token(token)
                .map(Complex64::from_real)
                .map_err(|e| format!("complex token `{token}`: {e}"));
        };
        // The imaginary sign is the last '+'/'-' that is neither leading nor
        // part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&p| {
            (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E')
        });
        match split {
            Some(p) => Ok(Complex64::new(f64::parse_token(&body[..p])?, f64::parse_token(&body[p..])?)),
            None => Ok(Complex64::new(0.0, f64::parse_token(body)?)),
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}
