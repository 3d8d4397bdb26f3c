//! Exact rational intervals with outward rounding, and a natural-log
//! enclosure that never touches floating point.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Bits of precision used by log enclosures unless a caller asks for more.
pub const DEFAULT_LOG_BITS: u32 = 128;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << (e as usize))
    } else {
        Rational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// Largest multiple of `2^-bits` not above `x`.
pub fn round_down(x: &Rational, bits: u32) -> Rational {
    let scaled = x * pow2(bits as i64);
    Rational::new(scaled.floor().to_integer(), BigInt::one() << bits as usize)
}

/// Smallest multiple of `2^-bits` not below `x`.
pub fn round_up(x: &Rational, bits: u32) -> Rational {
    let scaled = x * pow2(bits as i64);
    Rational::new(scaled.ceil().to_integer(), BigInt::one() << bits as usize)
}

/// Parses `p/r`, a decimal such as `1.785` or `1e-5`, or an integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Input(format!("not a rational number: {text:?}"));
    if let Some((p, r)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let r: BigInt = r.trim().parse().map_err(|_| bad())?;
        if r.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, r));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let digits = digits / BigInt::from(10);
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

pub fn rational_string(x: &Rational) -> String {
    if x.is_integer() {
        format!("{}/1", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal string with `digits` fractional digits, rounded towards −∞
/// (`up = false`) or +∞ (`up = true`); the string is an exact rational.
pub fn decimal_string(x: &Rational, digits: u32, up: bool) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x * Rational::from_integer(scale.clone());
    let n = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let neg = n.is_negative();
    let (int, frac) = n.abs().div_rem(&scale);
    let frac = frac.to_string();
    let pad = "0".repeat(digits as usize - frac.len());
    format!("{}{int}.{pad}{frac}", if neg { "-" } else { "" })
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A closed interval `[lo, hi]` of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        RatInterval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersects(&self, other: &RatInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Distance between the two intervals (zero when they overlap).
    pub fn gap(&self, other: &RatInterval) -> Rational {
        if self.intersects(other) {
            Rational::zero()
        } else if self.hi < other.lo {
            &other.lo - &self.hi
        } else {
            &self.lo - &other.hi
        }
    }

    /// Quotient of two nonnegative intervals; the divisor must be positive.
    pub fn div_nonneg(&self, divisor: &RatInterval) -> RatInterval {
        debug_assert!(!self.lo.is_negative() && divisor.lo.is_positive());
        RatInterval {
            lo: &self.lo / &divisor.hi,
            hi: &self.hi / &divisor.lo,
        }
    }

    /// Outward rounding onto the dyadic grid `2^-bits`.
    pub fn rounded(&self, bits: u32) -> RatInterval {
        RatInterval {
            lo: round_down(&self.lo, bits),
            hi: round_up(&self.hi, bits),
        }
    }

    pub fn mid_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "lo": rational_string(&self.lo), "hi": rational_string(&self.hi) })
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", to_f64(&self.lo), to_f64(&self.hi))
    }
}

/// Enclosure of `atanh(t) = Σ t^{2j+1}/(2j+1)` for rational `0 ≤ t ≤ 1/3`.
fn atanh_enclosure(t: &Rational, bits: u32) -> (Rational, Rational) {
    let guard = bits + 8;
    let t2 = t * t;
    let mut sum_lo = Rational::zero();
    let mut sum_hi = Rational::zero();
    let mut pow_lo = t.clone();
    let mut pow_hi = t.clone();
    let eps = pow2(-(guard as i64));
    let mut j: u64 = 0;
    loop {
        let denom = Rational::from_integer(BigInt::from(2 * j + 1));
        sum_lo += round_down(&(&pow_lo / &denom), guard);
        sum_hi += round_up(&(&pow_hi / &denom), guard);
        pow_lo = round_down(&(&pow_lo * &t2), guard);
        pow_hi = round_up(&(&pow_hi * &t2), guard);
        j += 1;
        if pow_hi <= eps {
            break;
        }
    }
    // Tail Σ_{i≥j} t^{2i+1}/(2i+1) ≤ t^{2j+1} / ((2j+1)(1 − t²)).
    let tail = &pow_hi / (Rational::from_integer(BigInt::from(2 * j + 1)) * (Rational::one() - &t2));
    sum_hi += round_up(&tail, guard);
    (sum_lo, sum_hi)
}

/// `ln m` for `1 ≤ m ≤ 2`.
fn ln_mantissa(m: &Rational, bits: u32) -> (Rational, Rational) {
    let t = (m - Rational::one()) / (m + Rational::one());
    let (lo, hi) = atanh_enclosure(&t, bits);
    (lo * rat_int(2), hi * rat_int(2))
}

fn ln2_enclosure(bits: u32) -> (Rational, Rational) {
    static DEFAULT: OnceLock<(Rational, Rational)> = OnceLock::new();
    let compute = || {
        let (lo, hi) = atanh_enclosure(&rat(1, 3), bits);
        (lo * rat_int(2), hi * rat_int(2))
    };
    if bits == DEFAULT_LOG_BITS {
        DEFAULT.get_or_init(compute).clone()
    } else {
        compute()
    }
}

fn bit_len(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// Rigorous enclosure of `ln x` for rational `x > 0`, accurate to about
/// `2^-bits` (times the binary exponent of `x`).
pub fn ln_enclosure(x: &Rational, bits: u32) -> Result<RatInterval> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("ln of nonpositive {x}")));
    }
    if x.is_one() {
        return Ok(RatInterval::point(Rational::zero()));
    }
    // x = m · 2^e with 1 ≤ m < 2
    let mut e = bit_len(x.numer()) - bit_len(x.denom());
    let mut m = x / pow2(e);
    if m < Rational::one() {
        e -= 1;
        m *= rat_int(2);
    }
    let m_lo = round_down(&m, bits + 8);
    let m_hi = round_up(&m, bits + 8);
    let (l_lo, _) = ln_mantissa(&m_lo, bits);
    let (_, l_hi) = ln_mantissa(&m_hi, bits);
    let (ln2_lo, ln2_hi) = ln2_enclosure(bits);
    let e_rat = rat_int(e);
    let (lo, hi) = if e >= 0 {
        (&e_rat * &ln2_lo + l_lo, &e_rat * &ln2_hi + l_hi)
    } else {
        (&e_rat * &ln2_hi + l_lo, &e_rat * &ln2_lo + l_hi)
    };
    Ok(RatInterval::new(lo, hi).rounded(bits + 4))
}

pub fn ln_biguint(n: &BigUint, bits: u32) -> Result<RatInterval> {
    ln_enclosure(
        &Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone())),
        bits,
    )
}

/// Enclosure of `ln q` over a whole bracket `q ∈ [lo, hi]`.
pub fn ln_bracket(lo: &Rational, hi: &Rational, bits: u32) -> Result<RatInterval> {
    let a = ln_enclosure(lo, bits)?;
    let b = ln_enclosure(hi, bits)?;
    Ok(RatInterval::new(a.lo, b.hi))
}

/// Integer `⌊x^{1/k}⌋` for `k ≥ 1`, by bisection.
pub fn integer_root_floor(x: &BigUint, k: u32) -> BigUint {
    if k == 1 || x.is_zero() {
        return x.clone();
    }
    let mut lo = BigUint::zero();
    let mut hi = BigUint::one() << ((x.bits() as usize / k as usize) + 1);
    while &lo + 1u32 < hi {
        let mid: BigUint = (&lo + &hi) >> 1;
        if mid.pow(k) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
