use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::om::OmObject;

/// Exponents beyond this are refused instead of building enormous rationals.
const MAX_EXPONENT: i64 = 400;

/// Exact decimal number read from an RDF literal. Keeps the lexical form so
/// that conversion to `f64` is the correctly rounded parse of what was written.
/// Equality is numeric: `5`, `5.0` and `0.5e1` are the same decimal.
#[derive(Debug, Clone)]
pub struct Decimal {
    value: BigRational,
    lexical: String,
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for Decimal {}

impl Decimal {
    /// Accepts `[+-]digits[.digits][e[+-]digits]` with at least one digit.
    pub fn parse(text: &str) -> Option<Decimal> {
        let s = text.trim();
        let (negative, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(i) => {
                let exp_text = &body[i + 1..];
                let digits = exp_text.strip_prefix(['+', '-']).unwrap_or(exp_text);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 6 {
                    return None;
                }
                let exp: i64 = exp_text.parse().ok()?;
                (&body[..i], exp)
            }
            None => (body, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = exponent - frac_part.len() as i64;
        if scale.abs() > MAX_EXPONENT + mantissa.len() as i64 || exponent.abs() > MAX_EXPONENT {
            return None;
        }
        let digits: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
        let ten = BigInt::from(10);
        let mut value = if scale >= 0 {
            BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
        };
        if negative {
            value = -value;
        }
        Some(Decimal {
            value,
            lexical: s.to_string(),
        })
    }

    /// Canonical decimal text for a computed value; `None` for NaN or infinities.
    pub fn from_f64(x: f64) -> Option<Decimal> {
        if !x.is_finite() {
            return None;
        }
        Decimal::parse(&canonical_decimal(x))
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn is_integer(&self) -> bool {
        self.value.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        let normalized = self.lexical.strip_prefix('+').unwrap_or(&self.lexical);
        normalized.parse().unwrap_or(f64::NAN)
    }

    /// Integer-valued decimals become `OMI`, everything else `OMF`.
    pub fn to_om(&self) -> OmObject {
        if self.is_integer() {
            OmObject::Integer(self.value.to_integer())
        } else {
            OmObject::Float(self.to_f64())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexical)
    }
}

/// Shortest round-tripping decimal text for a finite float, always with a
/// fractional part (`2.0`, `1.8236842105263158`), never in exponent form.
pub fn canonical_decimal(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}
