//! Exact scalar support: the [`Coeff`] abstraction over exact ordered rings,
//! unreduced fractions used as λ positions, and decimal rendering.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact arbitrary-precision rational. Always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Exact, totally ordered coefficient ring used for line slopes and
/// intercepts.
///
/// Implemented for `i128` (fast path, callers must bound magnitudes),
/// `BigInt` and `Rational`.
pub trait Coeff: Signed + Ord + Clone + fmt::Debug + Send + Sync + 'static {
    fn to_rational(&self) -> Rational;

    /// `None` when `r` has no exact representation in `Self`.
    fn from_rational(r: &Rational) -> Option<Self>;

    /// Number of significant bits of `|self|` (denominators included for
    /// rationals). Used to size fast-path arithmetic.
    fn magnitude_bits(&self) -> u64;
}

impl Coeff for i128 {
    fn to_rational(&self) -> Rational {
        Rational::from_integer(BigInt::from(*self))
    }

    fn from_rational(r: &Rational) -> Option<Self> {
        if r.is_integer() {
            r.numer().to_i128()
        } else {
            None
        }
    }

    fn magnitude_bits(&self) -> u64 {
        128 - u64::from(self.unsigned_abs().leading_zeros())
    }
}

impl Coeff for BigInt {
    fn to_rational(&self) -> Rational {
        Rational::from_integer(self.clone())
    }

    fn from_rational(r: &Rational) -> Option<Self> {
        r.is_integer().then(|| r.numer().clone())
    }

    fn magnitude_bits(&self) -> u64 {
        self.bits()
    }
}

impl Coeff for Rational {
    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }

    fn magnitude_bits(&self) -> u64 {
        self.numer().bits().max(self.denom().bits())
    }
}

/// Convert between coefficient rings, failing if the value does not fit.
pub fn convert<A: Coeff, B: Coeff>(x: &A) -> Option<B> {
    B::from_rational(&x.to_rational())
}

/// A fraction `num / den` with `den > 0`, not reduced.
///
/// Breakpoints and probe values are kept in this form so the fast
/// integer path never needs a gcd. Equality and ordering are by value.
#[derive(Clone, Debug)]
pub struct Frac<C> {
    num: C,
    den: C,
}

impl<C: Coeff> Frac<C> {
    /// Panics if `den` is zero.
    pub fn new(num: C, den: C) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if den.is_negative() {
            Frac {
                num: -num,
                den: -den,
            }
        } else {
            Frac { num, den }
        }
    }

    pub fn from_coeff(value: C) -> Self {
        Frac {
            num: value,
            den: C::one(),
        }
    }

    /// Exact conversion; tries a whole-value coefficient first, then
    /// numerator and denominator separately.
    pub fn from_rational(r: &Rational) -> Option<Self> {
        if let Some(c) = C::from_rational(r) {
            return Some(Self::from_coeff(c));
        }
        let num = C::from_rational(&Rational::from_integer(r.numer().clone()))?;
        let den = C::from_rational(&Rational::from_integer(r.denom().clone()))?;
        Some(Frac { num, den })
    }

    pub fn num(&self) -> &C {
        &self.num
    }

    pub fn den(&self) -> &C {
        &self.den
    }

    pub fn to_rational(&self) -> Rational {
        self.num.to_rational() / self.den.to_rational()
    }

    pub fn magnitude_bits(&self) -> u64 {
        self.num.magnitude_bits().max(self.den.magnitude_bits())
    }
}

impl<C: Coeff> PartialEq for Frac<C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<C: Coeff> Eq for Frac<C> {}

impl<C: Coeff> PartialOrd for Frac<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: Coeff> Ord for Frac<C> {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        (self.num.clone() * other.den.clone()).cmp(&(other.num.clone() * self.den.clone()))
    }
}

impl<C: Coeff> fmt::Display for Frac<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

/// Parse an exact rational from `"p/q"`, an integer, or a decimal literal
/// with optional exponent (`"1.5"`, `"-2.25e-3"`). Decimals convert exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_integer(p.trim())?;
        let q: BigInt = parse_integer(q.trim())?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let shift = i64::from(exponent) - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let pow = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= Rational::from_integer(pow);
    } else {
        value /= Rational::from_integer(pow);
    }
    Some(if negative { -value } else { value })
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Render `r` as a decimal string rounded (half away from zero) to `sig`
/// significant digits, trailing zeros trimmed. Display only.
pub fn to_decimal(r: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let a = r.abs();
    let ten = BigInt::from(10u32);
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> Rational {
        let p = Rational::from_integer(num_traits::pow(ten.clone(), k.unsigned_abs() as usize));
        if k >= 0 {
            p
        } else {
            p.recip()
        }
    };
    while a < pow10(e) {
        e -= 1;
    }
    while a >= pow10(e + 1) {
        e += 1;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &a * pow10(shift);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if rem * BigInt::from(2u32) >= *scaled.denom() {
        q + 1u32
    } else {
        q
    };
    let mut shift = shift;
    if digits.to_string().len() > sig {
        digits /= 10u32;
        shift -= 1;
    }
    let text = digits.to_string();
    let body = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{text}{zeros}")
    } else {
        let shift = shift as usize;
        let padded = if text.len() <= shift {
            format!("{}{}", "0".repeat(shift - text.len() + 1), text)
        } else {
            text
        };
        let (i, f) = padded.split_at(padded.len() - shift);
        let f = f.trim_end_matches('0');
        if f.is_empty() {
            i.to_string()
        } else {
            format!("{i}.{f}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Canonical exact text form: `"p/q"`, or `"p"` for integers.
pub fn to_exact(r: &Rational) -> String {
    r.to_string()
}

/// `n/d` as a [`Rational`].
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Greatest common divisor of a set of positive rationals: the largest
/// rational `g` such that every input is an integer multiple of `g`.
pub fn rational_gcd<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    let mut any = false;
    for v in values {
        if v.is_zero() {
            continue;
        }
        any = true;
        num_gcd = num_gcd.gcd(v.numer());
        den_lcm = den_lcm.lcm(v.denom());
    }
    any.then(|| Rational::new(num_gcd, den_lcm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1.5"), Some(rat(3, 2)));
        assert_eq!(parse_rational("0.1"), Some(rat(1, 10)));
        assert_eq!(parse_rational("-7/14"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("12"), Some(int(12)));
        assert_eq!(parse_rational("2.5e2"), Some(int(250)));
        assert_eq!(parse_rational("25e-3"), Some(rat(1, 40)));
        assert_eq!(parse_rational(".5"), Some(rat(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1..2"), None);
        assert_eq!(parse_rational("-"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&int(1), 20), "1");
        assert_eq!(to_decimal(&rat(1, 2), 20), "0.5");
        assert_eq!(to_decimal(&rat(1, 3), 20), "0.33333333333333333333");
        assert_eq!(to_decimal(&rat(2, 3), 5), "0.66667");
        assert_eq!(to_decimal(&rat(-8, 5), 20), "-1.6");
        assert_eq!(to_decimal(&int(123456), 3), "123000");
        assert_eq!(to_decimal(&rat(1, 1000), 4), "0.001");
        assert_eq!(to_decimal(&rat(9999, 1000), 3), "10");
    }

    #[test]
    fn frac_ordering_ignores_representation() {
        let a = Frac::new(2i128, 4);
        let b = Frac::new(-1i128, -2);
        assert_eq!(a, b);
        assert!(Frac::new(1i128, 3) < a);
        assert_eq!(a.to_rational(), rat(1, 2));
        let big: Frac<BigInt> = Frac::from_rational(&rat(5, 7)).unwrap();
        assert_eq!(big.to_rational(), rat(5, 7));
    }

    #[test]
    fn gcd_of_rationals() {
        let vals = [rat(1, 2), rat(3, 4), int(2)];
        assert_eq!(rational_gcd(vals.iter()), Some(rat(1, 4)));
        assert_eq!(rational_gcd(std::iter::empty()), None);
    }

    #[test]
    fn i128_conversion_limits() {
        assert_eq!(i128::from_rational(&rat(3, 2)), None);
        assert_eq!(i128::from_rational(&int(-4)), Some(-4));
        assert_eq!(7i128.magnitude_bits(), 3);
        assert_eq!((-8i128).magnitude_bits(), 4);
    }
}
