//! Arbitrary precision base-10 floating point used both as the working
//! engine for fixed-length significands and as the shadow reference.
//!
//! A [`Decimal`] is `mantissa * 10^exponent` with an exact integer mantissa.
//! Every rounding operation rounds to nearest with ties to even.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Digits of pi beyond anything a supported precision asks for.
const PI_DIGITS: &str = "3.\
14159265358979323846264338327950288419716939937510\
58209749445923078164062862089986280348253421170679\
82148086513282306647093844609550582231725359408128\
48111745028410270193852110555964462294895493038196";

/// Largest precision (in significant digits) the engine serves.
pub const MAX_PRECISION: u32 = 180;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    mantissa: BigInt,
    exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseDecimalError(pub String);

pub(crate) fn pow10(n: u32) -> BigUint {
    BigUint::from(10u32).pow(n)
}

/// Number of decimal digits of `m` (0 has zero digits).
pub(crate) fn digit_count(m: &BigUint) -> u32 {
    if m.is_zero() {
        0
    } else {
        m.to_str_radix(10).len() as u32
    }
}

/// Divides `m` by `10^k` rounding half to even.
pub(crate) fn shift_round(m: &BigUint, k: u32) -> BigUint {
    if k == 0 {
        return m.clone();
    }
    let d = pow10(k);
    let (q, r) = m.div_rem(&d);
    let twice = r << 1usize;
    match twice.cmp(&d) {
        Ordering::Less => q,
        Ordering::Greater => q + 1u32,
        Ordering::Equal => {
            if q.is_odd() {
                q + 1u32
            } else {
                q
            }
        }
    }
}

impl Decimal {
    pub fn zero() -> Self {
        Decimal {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        Decimal { mantissa, exponent }.trimmed()
    }

    pub fn from_int(v: i64) -> Self {
        Decimal::new(BigInt::from(v), 0)
    }

    /// Exact decimal expansion of a binary double.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Decimal::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e2) = if biased == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut mant = BigUint::from(m);
        let exponent = if e2 >= 0 {
            mant <<= e2 as usize;
            0
        } else {
            // m / 2^k = m * 5^k / 10^k
            let k = (-e2) as u32;
            mant *= BigUint::from(5u32).pow(k);
            -(k as i64)
        };
        let sign = if negative {
            BigSign::Minus
        } else {
            BigSign::Plus
        };
        Some(Decimal::new(BigInt::from_biguint(sign, mant), exponent))
    }

    /// The shortest decimal that reads back as `x`, i.e. the literal a
    /// user would have typed.
    pub fn from_f64_shortest(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        format!("{:e}", x).parse().ok()
    }

    pub fn pi(precision: u32) -> Self {
        let exact: Decimal = PI_DIGITS.parse().expect("pi literal");
        exact.round_to(precision)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn neg(&self) -> Self {
        Decimal {
            mantissa: -self.mantissa.clone(),
            exponent: self.exponent,
        }
    }

    pub fn abs(&self) -> Self {
        Decimal {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Significant digits in the mantissa.
    pub fn precision(&self) -> u32 {
        digit_count(self.mantissa.magnitude())
    }

    /// Decimal exponent `e` with `10^(e-1) <= |x| < 10^e`; `None` for zero.
    pub fn magnitude_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exponent + self.precision() as i64)
        }
    }

    fn trimmed(mut self) -> Self {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return self;
        }
        let ten = BigInt::from(10);
        loop {
            let (q, r) = self.mantissa.div_rem(&ten);
            if !r.is_zero() {
                break;
            }
            self.mantissa = q;
            self.exponent += 1;
        }
        self
    }

    pub fn round_to(&self, precision: u32) -> Self {
        assert!(precision >= 1);
        let digits = self.precision();
        if digits <= precision {
            return self.clone();
        }
        let drop = digits - precision;
        let mag = shift_round(self.mantissa.magnitude(), drop);
        Decimal::new(
            BigInt::from_biguint(self.mantissa.sign(), mag),
            self.exponent + drop as i64,
        )
    }

    /// Truncates (towards zero) to `precision` significant digits.
    pub fn truncate_to(&self, precision: u32) -> Self {
        let digits = self.precision();
        if digits <= precision {
            return self.clone();
        }
        let drop = digits - precision;
        let mag = self.mantissa.magnitude() / pow10(drop);
        Decimal::new(
            BigInt::from_biguint(self.mantissa.sign(), mag),
            self.exponent + drop as i64,
        )
    }

    pub fn add_exact(&self, other: &Decimal) -> Decimal {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa * BigInt::from(pow10((self.exponent - e) as u32));
        let b = &other.mantissa * BigInt::from(pow10((other.exponent - e) as u32));
        Decimal::new(a + b, e)
    }

    pub fn sub_exact(&self, other: &Decimal) -> Decimal {
        self.add_exact(&other.neg())
    }

    pub fn mul_exact(&self, other: &Decimal) -> Decimal {
        Decimal::new(
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
        )
    }

    pub fn add(&self, other: &Decimal, precision: u32) -> Decimal {
        self.add_exact(other).round_to(precision)
    }

    pub fn mul(&self, other: &Decimal, precision: u32) -> Decimal {
        self.mul_exact(other).round_to(precision)
    }

    /// `self / other` correctly rounded to `precision` digits.
    pub fn div(&self, other: &Decimal, precision: u32) -> Decimal {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Decimal::zero();
        }
        // scale the numerator so the integer quotient carries precision + 2 digits
        let shift =
            (precision as i64 + 2 + other.precision() as i64 - self.precision() as i64).max(0);
        let num = self.mantissa.magnitude() * pow10(shift as u32);
        let den = other.mantissa.magnitude();
        let (q, r) = num.div_rem(den);
        // sticky digit keeps ties honest
        let q = q * 10u32 + if r.is_zero() { 0u32 } else { 1u32 };
        let sign = if self.is_negative() != other.is_negative() {
            BigSign::Minus
        } else {
            BigSign::Plus
        };
        Decimal::new(
            BigInt::from_biguint(sign, q),
            self.exponent - other.exponent - shift - 1,
        )
        .round_to(precision)
    }

    /// `exp(self)` correctly rounded to `precision` significant digits.
    pub fn exp(&self, precision: u32) -> Decimal {
        if self.is_zero() {
            return Decimal::from_int(1);
        }
        let mut guard = 12u32;
        loop {
            let (approx, err_digits) = exp_approx(self, precision + guard);
            // relative error below 10^-(precision + guard - err_digits)
            let slack = precision + guard - err_digits;
            let eps = Decimal::new(
                BigInt::from(1),
                approx.magnitude_exponent().unwrap_or(0) - slack as i64,
            );
            let lo = approx.sub_exact(&eps).round_to(precision);
            let hi = approx.add_exact(&eps).round_to(precision);
            if lo == hi {
                return lo;
            }
            guard += 16;
            assert!(guard < 400, "exp rounding did not settle");
        }
    }

    pub fn to_f64(&self) -> f64 {
        // the standard parser rounds correctly
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    pub fn cmp_abs(&self, other: &Decimal) -> Ordering {
        self.abs()
            .sub_exact(&other.abs())
            .mantissa
            .sign()
            .cmp_zero()
    }
}

trait SignOrd {
    fn cmp_zero(self) -> Ordering;
}

impl SignOrd for BigSign {
    fn cmp_zero(self) -> Ordering {
        match self {
            BigSign::Minus => Ordering::Less,
            BigSign::NoSign => Ordering::Equal,
            BigSign::Plus => Ordering::Greater,
        }
    }
}

/// Truncating working-precision float used inside `exp`.
#[derive(Clone)]
struct Work {
    m: BigUint,
    e: i64,
}

impl Work {
    fn normalize(mut self, digits: u32) -> Self {
        let d = digit_count(&self.m);
        if d > digits {
            let drop = d - digits;
            self.m /= pow10(drop);
            self.e += drop as i64;
        }
        self
    }

    fn mul(&self, o: &Work, digits: u32) -> Work {
        Work {
            m: &self.m * &o.m,
            e: self.e + o.e,
        }
        .normalize(digits)
    }

    fn add(&self, o: &Work, digits: u32) -> Work {
        let e = self.e.min(o.e);
        let a = &self.m * pow10((self.e - e) as u32);
        let b = &o.m * pow10((o.e - e) as u32);
        Work { m: a + b, e }.normalize(digits)
    }

    fn div_small(&self, k: u64, digits: u32) -> Work {
        let m = &self.m * pow10(digits.saturating_sub(digit_count(&self.m)) + 2) / BigUint::from(k);
        let e = self.e - (digits.saturating_sub(digit_count(&self.m)) + 2) as i64;
        Work { m, e }.normalize(digits)
    }

    fn to_decimal(&self) -> Decimal {
        Decimal::new(BigInt::from(self.m.clone()), self.e)
    }
}

/// Approximates `exp(x)` carrying `digits` working digits. Returns the
/// approximation and the number of leading-digit losses it may have suffered.
fn exp_approx(x: &Decimal, digits: u32) -> (Decimal, u32) {
    let negative = x.is_negative();
    let ax = x.abs();
    // halve until |r| < 1e-3
    let mag = ax.magnitude_exponent().unwrap_or(0);
    let mut halvings = 0u32;
    let mut scale = (mag + 3).max(0) as f64 * std::f64::consts::LOG2_10;
    while scale > 0.0 {
        halvings += 1;
        scale -= 1.0;
    }
    let wd = digits + 4;
    let mut r = Work {
        m: ax.mantissa.magnitude().clone(),
        e: ax.exponent,
    }
    .normalize(wd);
    for _ in 0..halvings {
        r = r.div_small(2, wd);
    }
    // Taylor series of exp(r) with truncating arithmetic
    let one = Work {
        m: BigUint::one(),
        e: 0,
    };
    let mut sum = one.clone();
    let mut term = one;
    let threshold = -(wd as i64) - 2;
    for k in 1u64.. {
        term = term.mul(&r, wd).div_small(k, wd);
        if term.m.is_zero() || term.e + digit_count(&term.m) as i64 <= threshold {
            break;
        }
        sum = sum.add(&term, wd);
    }
    for _ in 0..halvings {
        sum = sum.mul(&sum, wd);
    }
    // every truncating op costs at most one unit in the last working digit;
    // squaring doubles the accumulated relative error
    let lost = ((halvings as f64 + 8.0) * std::f64::consts::LOG10_2 * 1.0).ceil() as u32 + 4;
    let approx = sum.to_decimal();
    if negative {
        let inv = Decimal::from_int(1).div(&approx, digits + 2);
        (inv, lost + 1)
    } else {
        (approx, lost)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_negative() { "-" } else { "" };
        let digits = self.mantissa.magnitude().to_str_radix(10);
        write!(f, "{sign}{digits}e{}", self.exponent)
    }
}

impl FromStr for Decimal {
    type Err = ParseDecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDecimalError(s.to_string());
        let t = s.trim();
        let (body, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| err())?),
            None => (t, 0),
        };
        let (negative, body) = match body.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, body.strip_prefix('+').unwrap_or(body)),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{int}{frac}");
        let mag = BigUint::parse_bytes(digits.as_bytes(), 10).unwrap_or_default();
        let sign = if negative {
            BigSign::Minus
        } else {
            BigSign::Plus
        };
        Ok(Decimal::new(
            BigInt::from_biguint(sign, mag),
            exp - frac.len() as i64,
        ))
    }
}

impl ToPrimitive for Decimal {
    fn to_i64(&self) -> Option<i64> {
        if self.exponent < 0 {
            None
        } else {
            (&self.mantissa * BigInt::from(pow10(self.exponent as u32))).to_i64()
        }
    }

    fn to_u64(&self) -> Option<u64> {
        self.to_i64().and_then(|v| u64::try_from(v).ok())
    }

    fn to_f64(&self) -> Option<f64> {
        Some(Decimal::to_f64(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(d("18.652244592468").to_string(), "18652244592468e-12");
        assert_eq!(d("-0.0010").to_string(), "-1e-3");
        assert_eq!(d("1e-3"), d("0.001"));
        assert!("1.2.3".parse::<Decimal>().is_err());
        assert!("".parse::<Decimal>().is_err());
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(d("2.5").round_to(1), d("2"));
        assert_eq!(d("3.5").round_to(1), d("4"));
        assert_eq!(d("-2.51").round_to(1), d("-3"));
        assert_eq!(d("9.96").round_to(2), d("10"));
        assert_eq!(d("18.652244592468").round_to(8), d("18.652245"));
    }

    #[test]
    fn exact_double_expansion() {
        let x = Decimal::from_f64_exact(0.1).unwrap();
        assert_eq!(
            x.to_string(),
            "1000000000000000055511151231257827021181583404541015625e-55"
        );
        assert_eq!(Decimal::from_f64_shortest(0.001).unwrap(), d("0.001"));
        assert_eq!(
            Decimal::from_f64_exact(-3.0).unwrap(),
            Decimal::from_int(-3)
        );
    }

    #[test]
    fn pi_rounds() {
        assert_eq!(Decimal::pi(8), d("3.1415927"));
        assert_eq!(Decimal::pi(8).mul(&Decimal::pi(8), 8), d("9.8696047"));
    }

    #[test]
    fn exp_matches_reference_digits() {
        // 40-digit references from an independent multiprecision library
        assert_eq!(d("-12.090266").exp(14), d("5.6138937842628e-6"));
        assert_eq!(d("1").exp(30), d("2.71828182845904523536028747135"));
        assert_eq!(d("-1").exp(20), d("0.36787944117144232160"));
        assert_eq!(d("-24.674012").exp(8), d("1.9240340e-11"));
        assert_eq!(d("0.5").exp(25), d("1.648721270700128146848651"));
    }

    #[test]
    fn division_rounds_correctly() {
        assert_eq!(d("1").div(&d("3"), 5), d("0.33333"));
        assert_eq!(d("2").div(&d("3"), 5), d("0.66667"));
        assert_eq!(d("-1").div(&d("8"), 2), d("-0.12"));
    }
}
