//! Pel's single number type. Integers stay exact as long as they fit in an
//! i64; anything fractional (and the results of `pow`/`sqrt`) is an f64.

use std::fmt;

use crate::error::{ErrorKind, PelError, Result};

#[derive(Debug, Clone, Copy)]
pub enum PelNum {
    Int(i64),
    Float(f64),
}

impl PelNum {
    /// Parse a NUMBER token (`-?digits(.digits)?`). Integers too large for
    /// i64 fall back to f64.
    pub fn parse(text: &str) -> PelNum {
        if !text.contains('.') {
            if let Ok(i) = text.parse::<i64>() {
                return PelNum::Int(i);
            }
        }
        PelNum::Float(text.parse::<f64>().unwrap_or(0.0))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            PelNum::Int(i) => i as f64,
            PelNum::Float(f) => f,
        }
    }

    pub fn as_index(&self) -> Option<i64> {
        match *self {
            PelNum::Int(i) => Some(i),
            PelNum::Float(f) if f.fract() == 0.0 && f.abs() < i64::MAX as f64 => Some(f as i64),
            _ => None,
        }
    }

    pub fn add(self, other: PelNum) -> PelNum {
        match (self, other) {
            (PelNum::Int(a), PelNum::Int(b)) => {
                a.checked_add(b).map(PelNum::Int).unwrap_or(PelNum::Float(a as f64 + b as f64))
            }
            _ => PelNum::Float(self.as_f64() + other.as_f64()),
        }
    }

    pub fn sub(self, other: PelNum) -> PelNum {
        match (self, other) {
            (PelNum::Int(a), PelNum::Int(b)) => {
                a.checked_sub(b).map(PelNum::Int).unwrap_or(PelNum::Float(a as f64 - b as f64))
            }
            _ => PelNum::Float(self.as_f64() - other.as_f64()),
        }
    }

    pub fn mul(self, other: PelNum) -> PelNum {
        match (self, other) {
            (PelNum::Int(a), PelNum::Int(b)) => {
                a.checked_mul(b).map(PelNum::Int).unwrap_or(PelNum::Float(a as f64 * b as f64))
            }
            _ => PelNum::Float(self.as_f64() * other.as_f64()),
        }
    }

    /// Integer division stays integral only when it is exact.
    pub fn div(self, other: PelNum) -> Result<PelNum> {
        if other.as_f64() == 0.0 {
            return Err(PelError::new(ErrorKind::DivisionByZero, "division by zero"));
        }
        Ok(match (self, other) {
            (PelNum::Int(a), PelNum::Int(b)) if a % b == 0 => PelNum::Int(a / b),
            _ => PelNum::Float(self.as_f64() / other.as_f64()),
        })
    }

    pub fn pow(self, other: PelNum) -> PelNum {
        PelNum::Float(self.as_f64().powf(other.as_f64()))
    }

    pub fn sqrt(self) -> Result<PelNum> {
        if self.as_f64() < 0.0 {
            return Err(PelError::new(ErrorKind::TypeMismatch, "sqrt of a negative number"));
        }
        Ok(PelNum::Float(self.as_f64().sqrt()))
    }

    pub fn compare(self, other: PelNum) -> Result<std::cmp::Ordering> {
        match (self, other) {
            (PelNum::Int(a), PelNum::Int(b)) => Ok(a.cmp(&b)),
            _ => self
                .as_f64()
                .partial_cmp(&other.as_f64())
                .ok_or_else(|| PelError::new(ErrorKind::TypeMismatch, "numbers are not comparable")),
        }
    }
}

impl PartialEq for PelNum {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PelNum::Int(a), PelNum::Int(b)) => a == b,
            _ => self.as_f64() == other.as_f64(),
        }
    }
}

impl fmt::Display for PelNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PelNum::Int(i) => write!(f, "{i}"),
            PelNum::Float(x) => {
                // integral floats print without a trailing .0, so (sqrt 25) shows as 5
                if x.fract() == 0.0 && x.is_finite() && x.abs() < 1e15 {
                    write!(f, "{}", x as i64)
                } else {
                    write!(f, "{x}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_int_and_float() {
        assert_eq!(PelNum::parse("42"), PelNum::Int(42));
        assert_eq!(PelNum::parse("-5"), PelNum::Int(-5));
        assert_eq!(PelNum::parse("3.14"), PelNum::Float(3.14));
    }

    #[test]
    fn display_hides_integral_fraction() {
        assert_eq!(PelNum::Float(5.0).to_string(), "5");
        assert_eq!(PelNum::Float(2.5).to_string(), "2.5");
        assert_eq!(PelNum::Int(9).to_string(), "9");
        assert_eq!(PelNum::Float(-0.0).to_string(), "0");
    }

    #[test]
    fn int_float_compare_equal_numerically() {
        assert_eq!(PelNum::Int(9), PelNum::Float(9.0));
        assert_ne!(PelNum::Int(9), PelNum::Float(9.5));
    }

    #[test]
    fn overflow_promotes_to_float() {
        let big = PelNum::Int(i64::MAX);
        assert!(matches!(big.add(PelNum::Int(1)), PelNum::Float(_)));
    }

    #[test]
    fn division_rules() {
        assert_eq!(PelNum::Int(6).div(PelNum::Int(3)).unwrap(), PelNum::Int(2));
        assert_eq!(PelNum::Int(7).div(PelNum::Int(2)).unwrap(), PelNum::Float(3.5));
        assert_eq!(PelNum::Int(1).div(PelNum::Int(0)).unwrap_err().kind, ErrorKind::DivisionByZero);
    }

    #[test]
    fn pow_and_sqrt_return_decimals() {
        assert_eq!(PelNum::Int(3).pow(PelNum::Int(2)), PelNum::Float(9.0));
        assert_eq!(PelNum::Float(25.0).sqrt().unwrap(), PelNum::Float(5.0));
        assert_eq!(PelNum::Int(-1).sqrt().unwrap_err().kind, ErrorKind::TypeMismatch);
    }
}
