//! Quasi-greedy and greedy expansions of 1, the projection `π_q`, the
//! inverse map from admissible sequences to bases, and membership in the
//! set of univoque bases and its closure.
//!
//! Bases are rational brackets. Digits of `α(q)` are certified through the
//! monotonicity of `q ↦ α(q)`: whatever `α(lo)` and `α(hi)` share is shared
//! by every base in between. A base that was obtained from a target
//! sequence also carries that sequence, which pins down `α(q)` at bases
//! where `α` jumps (periodic targets are only reached from the left).

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::{pow2, rat_int, rational_string, RatInterval, Rational};
use crate::words::{Alphabet, EventuallyPeriodicSeq, Word};

/// `τ_i`: parity of the number of ones in the binary expansion of `i`.
pub fn thue_morse_bit(i: u64) -> u8 {
    (i.count_ones() & 1) as u8
}

/// `λ_i(M)` for `i ≥ 1`.
pub fn kl_digit(alphabet: Alphabet, i: u64) -> u8 {
    debug_assert!(i >= 1);
    let m = alphabet.max_digit();
    let k = m / 2;
    if m.is_multiple_of(2) {
        k + thue_morse_bit(i) - thue_morse_bit(i - 1)
    } else {
        k + thue_morse_bit(i)
    }
}

/// `λ_1 … λ_L`, the quasi-greedy expansion of 1 in the Komornik–Loreti base.
pub fn kl_alpha_digits(alphabet: Alphabet, len: usize) -> Word {
    let digits = (1..=len as u64).map(|i| kl_digit(alphabet, i)).collect();
    Word::new(digits, alphabet).expect("λ digits lie in the alphabet")
}

/// A sequence that defines a base through `α(q) = target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaTarget {
    Periodic(EventuallyPeriodicSeq),
    /// The Thue–Morse type sequence `λ(M)`.
    KomornikLoreti(Alphabet),
    /// Only the first digits are prescribed.
    Prefix(Word),
}

impl AlphaTarget {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            AlphaTarget::Periodic(s) => s.alphabet(),
            AlphaTarget::KomornikLoreti(a) => *a,
            AlphaTarget::Prefix(w) => w.alphabet(),
        }
    }

    /// 0-based digit, `None` past the end of a prefix target.
    pub fn digit(&self, i: usize) -> Option<u8> {
        match self {
            AlphaTarget::Periodic(s) => Some(s.digit(i)),
            AlphaTarget::KomornikLoreti(a) => Some(kl_digit(*a, i as u64 + 1)),
            AlphaTarget::Prefix(w) => w.digits().get(i).copied(),
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<u8> {
        (0..len).map_while(|i| self.digit(i)).collect()
    }

    /// Checks `σ^n(a) ≼ a` for all `n` and that `a` does not end in `0^∞`,
    /// exactly for periodic targets and on the available digits otherwise.
    pub fn check_admissible(&self) -> Result<()> {
        match self {
            AlphaTarget::Periodic(s) => {
                if s.ends_in_zeros() {
                    return Err(Error::NotAdmissible(format!("{s} ends in 0^∞")));
                }
                for n in 1..=s.shift_orbit_len() {
                    if s.shift(n).lex_cmp(s)? == Ordering::Greater {
                        return Err(Error::NotAdmissible(format!("σ^{n}({s}) ≻ {s}")));
                    }
                }
                Ok(())
            }
            AlphaTarget::KomornikLoreti(_) => check_parry_prefix(&self.prefix(256)),
            AlphaTarget::Prefix(w) => {
                if w.is_empty() || w.digits().iter().all(|&d| d == 0) {
                    return Err(Error::NotAdmissible(format!("prefix {w:?} has no nonzero digit")));
                }
                check_parry_prefix(w.digits())
            }
        }
    }
}

impl std::fmt::Display for AlphaTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaTarget::Periodic(s) => write!(f, "{s}"),
            AlphaTarget::KomornikLoreti(a) => write!(f, "λ(M={})", a.max_digit()),
            AlphaTarget::Prefix(w) => write!(f, "{w}…"),
        }
    }
}

/// The Parry condition on a finite prefix: `a_{n+1}…a_L ≼ a_1…a_{L−n}`.
pub fn check_parry_prefix(a: &[u8]) -> Result<()> {
    for n in 1..a.len() {
        if a[n..] > a[..a.len() - n] {
            return Err(Error::NotAdmissible(format!(
                "shift by {n} of prefix {} exceeds the prefix",
                a.iter().map(|d| d.to_string()).collect::<String>()
            )));
        }
    }
    Ok(())
}

/// How a [`Base`] was specified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseDefinition {
    /// `lo = hi` is the base itself.
    Exact,
    /// The unique base with `α(q)` equal to the target; the bracket can be
    /// refined on demand.
    Alpha(AlphaTarget),
    /// All bases whose `α` starts with the word; not refinable.
    Cylinder(Word),
}

/// A base `q ∈ (1, M+1]` as a rational bracket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Base {
    lo: Rational,
    hi: Rational,
    alphabet: Alphabet,
    definition: BaseDefinition,
    min_width: Rational,
}

/// Brackets are never refined below this width.
pub const DEFAULT_MIN_WIDTH_BITS: i64 = 320;

impl Base {
    pub fn exact(q: Rational, alphabet: Alphabet) -> Result<Self> {
        let top = rat_int(alphabet.size() as i64);
        if q <= Rational::one() || q > top {
            return Err(Error::Input(format!(
                "base {} outside (1, {}]",
                crate::interval::to_f64(&q),
                alphabet.size()
            )));
        }
        Ok(Base {
            lo: q.clone(),
            hi: q,
            alphabet,
            definition: BaseDefinition::Exact,
            min_width: pow2(-DEFAULT_MIN_WIDTH_BITS),
        })
    }

    /// Parses a decimal, `p/r`, `kl`, or `alpha:<periodic literal>`.
    pub fn parse(text: &str, alphabet: Alphabet, width: &Rational) -> Result<Self> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("kl") {
            return base_from_alpha(&AlphaTarget::KomornikLoreti(alphabet), width);
        }
        if let Some(lit) = text.strip_prefix("alpha:") {
            let seq = EventuallyPeriodicSeq::parse(lit, alphabet)?;
            return base_from_alpha(&AlphaTarget::Periodic(seq), width);
        }
        Base::exact(crate::interval::parse_rational(text)?, alphabet)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn definition(&self) -> &BaseDefinition {
        &self.definition
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn bracket(&self) -> RatInterval {
        RatInterval::new(self.lo.clone(), self.hi.clone())
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid_f64(&self) -> f64 {
        self.bracket().mid_f64()
    }

    /// Digits of `α(q)` that a bracket can certify, when bounded.
    pub fn available_len(&self) -> Option<usize> {
        match &self.definition {
            BaseDefinition::Cylinder(w) => Some(w.len()),
            _ => None,
        }
    }

    pub fn with_min_width(mut self, min_width: Rational) -> Self {
        self.min_width = min_width;
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "lo": rational_string(&self.lo), "hi": rational_string(&self.hi) })
    }

    /// Whether the bracket can still be tightened.
    pub fn refinable(&self) -> bool {
        matches!(self.definition, BaseDefinition::Alpha(_)) && !self.is_exact() && self.width() > self.min_width
    }

    /// One bisection step; returns false when no refinement is possible.
    pub fn refine_once(&mut self) -> Result<bool> {
        if !self.refinable() {
            return Ok(false);
        }
        let BaseDefinition::Alpha(target) = &self.definition else {
            unreachable!()
        };
        let mid = (&self.lo + &self.hi) / rat_int(2);
        let depth = compare_depth(&self.width());
        match compare_alpha_with_target(&mid, self.alphabet, target, depth)? {
            Ordering::Less => self.lo = mid,
            Ordering::Greater => self.hi = mid,
            Ordering::Equal => {
                self.lo = mid.clone();
                self.hi = mid;
            }
        }
        Ok(true)
    }

    /// Bisects until `hi − lo ≤ width`.
    pub fn refine_to(&mut self, width: &Rational) -> Result<()> {
        while &self.width() > width {
            if !self.refine_once()? {
                return Err(Error::PrecisionExhausted(format!(
                    "bracket cannot be refined below width {}",
                    crate::interval::to_f64(&self.width())
                )));
            }
        }
        Ok(())
    }
}

/// Digits sufficient to separate `α` at two bases a bracket-width apart.
fn compare_depth(width: &Rational) -> usize {
    let bits = (width.denom().bits() as i64 - width.numer().bits() as i64).max(1) as usize;
    96 + 4 * bits
}

/// Exact remainder recursion for a rational base `q = p/d`; the remainder
/// `r = num/den` is kept unreduced with `den = d^n`.
struct RemainderWalk {
    p: BigInt,
    d: BigInt,
    num: BigInt,
    den: BigInt,
    max: u8,
}

impl RemainderWalk {
    fn new(q: &Rational, alphabet: Alphabet) -> Result<Self> {
        if !q.is_positive() || q <= &Rational::one() {
            return Err(Error::Input(format!("base must exceed 1, got {q}")));
        }
        Ok(RemainderWalk {
            p: q.numer().clone(),
            d: q.denom().clone(),
            num: BigInt::one(),
            den: BigInt::one(),
            max: alphabet.max_digit(),
        })
    }

    /// Quasi-greedy step `a = min(M, ⌈q r⌉ − 1)`.
    fn next_quasi_greedy(&mut self) -> Result<u8> {
        let a = &self.p * &self.num;
        let b = &self.d * &self.den;
        // ⌈a/b⌉ − 1 = ⌊(a − 1)/b⌋ for positive integers
        let c = (&a - BigInt::one()).div_floor(&b);
        let digit = c.to_u64().map_or(self.max, |c| c.min(self.max as u64) as u8);
        self.num = a - BigInt::from(digit) * &b;
        self.den = b;
        if !self.num.is_positive() || self.num > self.den {
            return Err(Error::Internal(format!(
                "quasi-greedy remainder left (0, 1]: {}/{}",
                self.num, self.den
            )));
        }
        Ok(digit)
    }

    /// Greedy step `b = min(M, ⌊q r⌋)`.
    fn next_greedy(&mut self) -> Result<u8> {
        let a = &self.p * &self.num;
        let b = &self.d * &self.den;
        let c = a.div_floor(&b);
        let digit = c.to_u64().map_or(self.max, |c| c.min(self.max as u64) as u8);
        self.num = a - BigInt::from(digit) * &b;
        self.den = b;
        if self.num.is_negative() || self.num >= self.den && !self.num.is_zero() && digit < self.max {
            return Err(Error::Internal(format!(
                "greedy remainder out of range: {}/{}",
                self.num, self.den
            )));
        }
        Ok(digit)
    }

    fn remainder(&self) -> Rational {
        Rational::new(self.num.clone(), self.den.clone())
    }

    fn remainder_is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// `α(q)` for a rational `q`, exactly. When the remainders cycle within
/// the computed digits, the full eventually periodic `α(q)` is returned.
pub fn quasi_greedy_exact(
    q: &Rational,
    alphabet: Alphabet,
    len: usize,
) -> Result<(Vec<u8>, Option<EventuallyPeriodicSeq>)> {
    quasi_greedy_walk(q, alphabet, len, true)
}

fn quasi_greedy_walk(
    q: &Rational,
    alphabet: Alphabet,
    len: usize,
    detect_period: bool,
) -> Result<(Vec<u8>, Option<EventuallyPeriodicSeq>)> {
    let mut walk = RemainderWalk::new(q, alphabet)?;
    let mut digits = Vec::with_capacity(len);
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    seen.insert(Rational::one(), 0);
    let mut periodic = None;
    for i in 0..len {
        digits.push(walk.next_quasi_greedy()?);
        if detect_period && periodic.is_none() {
            let r = walk.remainder();
            if let Some(&j) = seen.get(&r) {
                let seq = EventuallyPeriodicSeq::from_digits(digits[..j].to_vec(), digits[j..].to_vec(), alphabet)?;
                periodic = Some(seq);
            } else {
                seen.insert(r, i + 1);
            }
        }
    }
    Ok((digits, periodic))
}

/// `β(q)` for a rational q, exactly; the second component is the
/// terminating block when the expansion is finite.
fn greedy_exact(q: &Rational, alphabet: Alphabet, len: usize) -> Result<(Vec<u8>, Option<Vec<u8>>)> {
    let mut walk = RemainderWalk::new(q, alphabet)?;
    let mut digits = Vec::with_capacity(len);
    for _ in 0..len {
        if walk.remainder_is_zero() {
            let block = digits.clone();
            digits.resize(len, 0);
            return Ok((digits, Some(block)));
        }
        digits.push(walk.next_greedy()?);
    }
    let finite = walk.remainder_is_zero().then(|| digits.clone());
    Ok((digits, finite))
}

/// Lexicographic comparison of `α(x)` with a target, deciding equality
/// exactly for eventually periodic targets.
pub fn compare_alpha_with_target(
    x: &Rational,
    alphabet: Alphabet,
    target: &AlphaTarget,
    max_depth: usize,
) -> Result<Ordering> {
    let mut walk = RemainderWalk::new(x, alphabet)?;
    let (pre, per) = match target {
        AlphaTarget::Periodic(s) => (s.preperiod().len(), s.period().len()),
        _ => (usize::MAX, 0),
    };
    let mut saved: Option<Rational> = if pre == 0 { Some(Rational::one()) } else { None };
    for i in 0..max_depth {
        let d = walk.next_quasi_greedy()?;
        let Some(t) = target.digit(i) else {
            return Ok(Ordering::Equal);
        };
        match d.cmp(&t) {
            Ordering::Equal => {}
            o => return Ok(o),
        }
        if pre != usize::MAX {
            if i + 1 == pre {
                saved = Some(walk.remainder());
            } else if i + 1 == pre + per && saved.as_ref() == Some(&walk.remainder()) {
                return Ok(Ordering::Equal);
            }
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "α agrees with {target} for {max_depth} digits without deciding the comparison"
    )))
}

/// A certified initial segment of `α(q)`.
#[derive(Debug, Clone)]
pub struct AlphaPrefix {
    digits: Word,
    base: Base,
    exact: Option<EventuallyPeriodicSeq>,
}

impl AlphaPrefix {
    /// Assembles a prefix from digits known to be correct, after checking
    /// the Parry condition.
    pub fn from_parts(digits: Word, base: Base, exact: Option<EventuallyPeriodicSeq>) -> Result<Self> {
        check_parry_prefix(digits.digits()).map_err(|e| Error::Internal(format!("certified α prefix: {e}")))?;
        Ok(AlphaPrefix { digits, base, exact })
    }

    pub fn word(&self) -> &Word {
        &self.digits
    }

    pub fn digits(&self) -> &[u8] {
        self.digits.digits()
    }

    pub fn certified_len(&self) -> usize {
        self.digits.len()
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    pub fn alphabet(&self) -> Alphabet {
        self.digits.alphabet()
    }

    /// The whole of `α(q)`, when it is known to be eventually periodic.
    pub fn exact_sequence(&self) -> Option<&EventuallyPeriodicSeq> {
        self.exact.as_ref()
    }

    /// The first `len` digits, from the exact sequence when the certified
    /// prefix is shorter.
    pub fn digits_to(&self, len: usize) -> Result<Vec<u8>> {
        if len <= self.certified_len() {
            return Ok(self.digits()[..len].to_vec());
        }
        match &self.exact {
            Some(s) => Ok(s.prefix(len)),
            None => Err(Error::PrefixTooShort {
                needed: len,
                available: self.certified_len(),
            }),
        }
    }

    /// Digits available for scanning: all certified ones, or `cap` when the
    /// whole sequence is known.
    pub fn scan_digits(&self, cap: usize) -> Vec<u8> {
        match &self.exact {
            Some(s) => s.prefix(cap.max(self.certified_len())),
            None => self.digits().to_vec(),
        }
    }
}

/// Whether `(w^-)^∞ ≻ λ(M)`, the side condition tying a generator to the
/// region above the Komornik–Loreti base.
pub fn minus_periodic_exceeds_kl(w: &Word) -> Result<bool> {
    let block = w.minus_last()?;
    let alphabet = w.alphabet();
    let cap = 16 * w.len() + 256;
    for i in 0..cap {
        let a = block.digits()[i % block.len()];
        let b = kl_digit(alphabet, i as u64 + 1);
        if a != b {
            return Ok(a > b);
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "({block})^∞ agrees with λ for {cap} digits"
    )))
}

/// `α(q)` to `len` certified digits, refining the bracket when needed.
pub fn quasi_greedy_alpha(q: &Base, len: usize) -> Result<AlphaPrefix> {
    if let BaseDefinition::Cylinder(word) = &q.definition {
        // the digits shared by every base of the cylinder
        if len > word.len() {
            return Err(Error::PrefixTooShort {
                needed: len,
                available: word.len(),
            });
        }
        return AlphaPrefix::from_parts(word.prefix(len), q.clone(), None);
    }
    let mut base = q.clone();
    loop {
        if base.lo > Rational::one() {
            let (lo_digits, lo_exact) = quasi_greedy_walk(&base.lo, base.alphabet, len, base.is_exact())?;
            if base.is_exact() {
                let word = Word::new(lo_digits, base.alphabet)?;
                return AlphaPrefix::from_parts(word, base, lo_exact);
            }
            let (hi_digits, _) = quasi_greedy_walk(&base.hi, base.alphabet, len, false)?;
            if lo_digits == hi_digits {
                let exact = match &base.definition {
                    BaseDefinition::Alpha(AlphaTarget::Periodic(s)) => Some(s.clone()),
                    _ => None,
                };
                if let Some(s) = &exact {
                    if s.prefix(len) != lo_digits {
                        return Err(Error::Internal(format!("bracket for {s} excludes its base")));
                    }
                }
                let word = Word::new(lo_digits, base.alphabet)?;
                return AlphaPrefix::from_parts(word, base, exact);
            }
            // α(lo) ≺ target ≼ α(hi): at a base where α jumps only the
            // left end converges, and the target itself supplies the digits.
            if let BaseDefinition::Alpha(target) = &base.definition {
                let t = target.prefix(len);
                if t.len() == len && lo_digits == t && t <= hi_digits {
                    let exact = match target {
                        AlphaTarget::Periodic(s) => Some(s.clone()),
                        _ => None,
                    };
                    let word = Word::new(t, base.alphabet)?;
                    return AlphaPrefix::from_parts(word, base, exact);
                }
            }
        }
        if !refine_steps(&mut base, 8)? {
            return Err(Error::PrecisionExhausted(format!(
                "α digits at depth {len} undecided on a bracket of width {:.3e}",
                crate::interval::to_f64(&base.width())
            )));
        }
    }
}

/// Up to `steps` bisections; false when none was possible.
fn refine_steps(base: &mut Base, steps: usize) -> Result<bool> {
    let mut any = false;
    for _ in 0..steps {
        if !base.refine_once()? {
            break;
        }
        any = true;
    }
    Ok(any)
}

/// `β(q)` to `len` digits, with the terminating block when it is finite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyExpansion {
    pub digits: Word,
    pub terminating: Option<Word>,
}

pub fn greedy_beta(q: &Base, len: usize) -> Result<GreedyExpansion> {
    let mut base = q.clone();
    let alphabet = base.alphabet;
    let wrap = |digits: Vec<u8>, block: Option<Vec<u8>>| -> Result<GreedyExpansion> {
        Ok(GreedyExpansion {
            digits: Word::new(digits, alphabet)?,
            terminating: block.map(|b| Word::new(b, alphabet)).transpose()?,
        })
    };
    loop {
        if base.lo > Rational::one() {
            let (hi_digits, hi_block) = greedy_exact(&base.hi, alphabet, len)?;
            if base.is_exact() {
                return wrap(hi_digits, hi_block);
            }
            // α(q) = b^∞ with b minimal forces β(q) = b^+ 0^∞; β is
            // right-continuous, so β(hi) must agree.
            if let BaseDefinition::Alpha(AlphaTarget::Periodic(s)) = &base.definition {
                if s.is_purely_periodic() && *s.period().last().unwrap() < alphabet.max_digit() {
                    let mut block = s.period().to_vec();
                    *block.last_mut().unwrap() += 1;
                    let mut expected = block.clone();
                    expected.resize(len.max(block.len()), 0);
                    expected.truncate(len);
                    if hi_digits == expected {
                        return wrap(expected, Some(block));
                    }
                    if !refine_steps(&mut base, 8)? {
                        break;
                    }
                    continue;
                }
            }
            let (lo_digits, _) = greedy_exact(&base.lo, alphabet, len)?;
            if lo_digits == hi_digits {
                return wrap(hi_digits, None);
            }
        }
        if !refine_steps(&mut base, 8)? {
            break;
        }
    }
    Err(Error::PrecisionExhausted(format!("β digits at depth {len} undecided")))
}

/// `Σ x_j q^{-j}` for a finite digit string, exactly.
fn pi_finite(digits: &[u8], q: &Rational) -> Rational {
    let mut s = Rational::zero();
    for &d in digits.iter().rev() {
        s = (s + rat_int(d as i64)) / q;
    }
    s
}

fn pi_periodic(seq: &EventuallyPeriodicSeq, q: &Rational) -> Rational {
    let pre = pi_finite(seq.preperiod(), q);
    let per = pi_finite(seq.period(), q);
    let qk = num_traits::pow(q.clone(), seq.period().len());
    let scale = Rational::one() / num_traits::pow(q.clone(), seq.preperiod().len());
    pre + scale * per * &qk / (qk - Rational::one())
}

/// Rigorous enclosure of `π_q(x)` over the whole bracket. A finite word is
/// treated as a prefix of an unknown sequence.
pub fn eval_pi_q(x: &crate::words::Sequence, q: &Base) -> RatInterval {
    use crate::words::Sequence;
    match x {
        Sequence::Periodic(s) => RatInterval::new(pi_periodic(s, &q.hi), pi_periodic(s, &q.lo)),
        Sequence::Finite(w) => {
            let m = rat_int(q.alphabet.max_digit() as i64);
            let lo_q = &q.lo;
            let tail = m / (lo_q - Rational::one()) / num_traits::pow(lo_q.clone(), w.len());
            RatInterval::new(pi_finite(w.digits(), &q.hi), pi_finite(w.digits(), lo_q) + tail)
        }
    }
}

/// The unique base with `α(q) = target`, bracketed to `width`. A prefix
/// target yields the bracket of every base whose `α` starts with it.
pub fn base_from_alpha(target: &AlphaTarget, width: &Rational) -> Result<Base> {
    target.check_admissible()?;
    let alphabet = target.alphabet();
    if let AlphaTarget::Prefix(word) = target {
        return cylinder_bracket(word, width);
    }
    let mut base = Base {
        lo: Rational::one(),
        hi: rat_int(alphabet.size() as i64),
        alphabet,
        definition: BaseDefinition::Alpha(target.clone()),
        min_width: pow2(-DEFAULT_MIN_WIDTH_BITS),
    };
    if let AlphaTarget::Periodic(s) = target {
        if s.period().iter().all(|&d| d == alphabet.max_digit()) && s.preperiod().is_empty() {
            return Base::exact(base.hi.clone(), alphabet).map(|mut b| {
                b.definition = BaseDefinition::Alpha(target.clone());
                b
            });
        }
    }
    base.refine_to(width)?;
    Ok(base)
}

fn cylinder_bracket(word: &Word, width: &Rational) -> Result<Base> {
    let alphabet = word.alphabet();
    let len = word.len();
    let prefix_cmp = |x: &Rational| -> Result<Ordering> {
        let (digits, _) = quasi_greedy_exact(x, alphabet, len)?;
        Ok(digits.as_slice().cmp(word.digits()))
    };
    // Boundary between {α ≺ w} and {α ≽ w}, then between {α ≼ w} and {α ≻ w}.
    let bisect = |strict: bool| -> Result<(Rational, Rational)> {
        let mut lo = Rational::one();
        let mut hi = rat_int(alphabet.size() as i64);
        while &hi - &lo > *width {
            let mid = (&lo + &hi) / rat_int(2);
            let below = match prefix_cmp(&mid)? {
                Ordering::Less => true,
                Ordering::Equal => !strict,
                Ordering::Greater => false,
            };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, hi))
    };
    let (left_lo, left_hi) = bisect(true)?;
    let (right_lo, right_hi) = bisect(false)?;
    let probe = if left_hi <= right_lo {
        Some((&left_hi + &right_lo) / rat_int(2))
    } else {
        None
    };
    match probe {
        Some(x) if prefix_cmp(&x)? == Ordering::Equal || left_hi == right_lo => {}
        _ => {
            return Err(Error::NotAdmissible(format!("no base has α starting with {word}")));
        }
    }
    Ok(Base {
        lo: left_lo.max(Rational::one() + pow2(-DEFAULT_MIN_WIDTH_BITS)),
        hi: right_hi,
        alphabet,
        definition: BaseDefinition::Cylinder(word.clone()),
        min_width: pow2(-DEFAULT_MIN_WIDTH_BITS),
    })
}

/// Membership of a base in the set `𝒰` of univoque bases and its closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnivoqueStatus {
    InU,
    InClosureOnly,
    Outside,
    UnknownAtDepth(usize),
}

/// Decides membership exactly when `α(q)` is known to be eventually
/// periodic; otherwise checks shifts `1 ≤ n ≤ depth` on a certified prefix
/// of length `2·depth`, reporting `InU` when every inequality is strictly
/// witnessed within the prefix.
pub fn classify_univoque(q: &Base, depth: usize) -> Result<UnivoqueStatus> {
    if depth == 0 {
        return Err(Error::Input("classification depth must be positive".into()));
    }
    let alpha = quasi_greedy_alpha(q, 2 * depth)?;
    if let Some(seq) = alpha.exact_sequence() {
        return classify_periodic(seq);
    }
    let a = alpha.digits();
    let max = alpha.alphabet().max_digit();
    let refl: Vec<u8> = a.iter().map(|d| max - d).collect();
    let mut undecided = false;
    for n in 1..=depth {
        let window = &a[n..n + depth];
        match window.cmp(&a[..depth]) {
            Ordering::Greater => {
                return Err(Error::Internal(
                    "certified α prefix violates the Parry condition".into(),
                ))
            }
            Ordering::Equal => undecided = true,
            Ordering::Less => {}
        }
        match window.cmp(&refl[..depth]) {
            Ordering::Less => return Ok(UnivoqueStatus::Outside),
            Ordering::Equal => undecided = true,
            Ordering::Greater => {}
        }
    }
    Ok(if undecided {
        UnivoqueStatus::UnknownAtDepth(depth)
    } else {
        UnivoqueStatus::InU
    })
}

fn classify_periodic(seq: &EventuallyPeriodicSeq) -> Result<UnivoqueStatus> {
    let refl = seq.reflect();
    let mut touches_alpha = false;
    for n in 1..=seq.shift_orbit_len() {
        let s = seq.shift(n);
        if s.lex_cmp(&refl)? != Ordering::Greater {
            return Ok(UnivoqueStatus::Outside);
        }
        match s.lex_cmp(seq)? {
            Ordering::Greater => return Err(Error::NotAdmissible(format!("σ^{n}({seq}) ≻ {seq}"))),
            Ordering::Equal => touches_alpha = true,
            Ordering::Less => {}
        }
    }
    Ok(if touches_alpha {
        UnivoqueStatus::InClosureOnly
    } else {
        UnivoqueStatus::InU
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{parse_rational, rat, to_f64};
    use crate::words::Sequence;

    fn bin() -> Alphabet {
        Alphabet::binary()
    }

    fn exact(s: &str) -> Base {
        Base::exact(parse_rational(s).unwrap(), bin()).unwrap()
    }

    fn periodic(s: &str) -> AlphaTarget {
        AlphaTarget::Periodic(EventuallyPeriodicSeq::parse(s, bin()).unwrap())
    }

    #[test]
    fn thue_morse_prefix() {
        let bits: String = (0..16).map(|i| char::from(b'0' + thue_morse_bit(i))).collect();
        assert_eq!(bits, "0110100110010110");
        for i in 0..=1000u64 {
            assert_eq!(thue_morse_bit(2 * i), thue_morse_bit(i));
            assert_eq!(thue_morse_bit(2 * i + 1), 1 - thue_morse_bit(i));
        }
    }

    #[test]
    fn kl_digits() {
        assert_eq!(kl_alpha_digits(bin(), 12).to_string(), "110100110010");
        assert_eq!(kl_alpha_digits(Alphabet::new(2).unwrap(), 8).to_string(), "21020121");
        let m1 = kl_alpha_digits(bin(), 16);
        for j in 1..=4 {
            assert!(m1.prefix(1 << j).is_primitive().unwrap(), "length {}", 1 << j);
        }
    }

    #[test]
    fn alpha_at_two_is_all_ones() {
        let a = quasi_greedy_alpha(&exact("2"), 5).unwrap();
        assert_eq!(a.word().to_string(), "11111");
        assert_eq!(a.exact_sequence().unwrap().to_string(), "(1)");
    }

    #[test]
    fn alpha_of_golden_ratio_through_its_target() {
        let base = base_from_alpha(&periodic("(10)"), &rat(1, 1 << 20)).unwrap();
        assert!((base.mid_f64() - 1.618_033_988_75).abs() < 1e-6);
        let a = quasi_greedy_alpha(&base, 6).unwrap();
        assert_eq!(a.word().to_string(), "101010");
    }

    #[test]
    fn beta_of_golden_ratio_is_finite() {
        let base = base_from_alpha(&periodic("(10)"), &rat(1, 1 << 20)).unwrap();
        let b = greedy_beta(&base, 6).unwrap();
        assert_eq!(b.terminating.unwrap().to_string(), "11");
        assert_eq!(b.digits.to_string(), "110000");
        let at_two = greedy_beta(&exact("2"), 5).unwrap();
        assert_eq!(at_two.digits.to_string(), "11111");
        assert!(at_two.terminating.is_none());
        // q = 3/2: remainders 1/2, 3/4, 1/8, 3/16
        let b = greedy_beta(&exact("3/2"), 4).unwrap();
        assert_eq!(b.digits.to_string(), "1010");
    }

    #[test]
    fn pi_enclosures() {
        let two = exact("2");
        let ones = Sequence::Periodic(EventuallyPeriodicSeq::parse("(1)", bin()).unwrap());
        assert!(eval_pi_q(&ones, &two).contains(&rat(1, 1)));
        let zeros = Sequence::Periodic(EventuallyPeriodicSeq::parse("(0)", bin()).unwrap());
        assert!(eval_pi_q(&zeros, &exact("1.3")).contains(&rat(0, 1)));
        let golden = base_from_alpha(&periodic("(10)"), &rat(1, 1 << 30)).unwrap();
        let alt = Sequence::Periodic(EventuallyPeriodicSeq::parse("(10)", bin()).unwrap());
        let iv = eval_pi_q(&alt, &golden);
        assert!(iv.contains(&rat(1, 1)));
        assert!(to_f64(&iv.width()) < 1e-7);
        let prefix = Sequence::Finite(Word::parse("1111", bin()).unwrap());
        assert!(eval_pi_q(&prefix, &two).contains(&rat(1, 1)));
    }

    #[test]
    fn inverse_map_examples() {
        let g = base_from_alpha(&periodic("(10)"), &rat(1, 1_000_000)).unwrap();
        assert!(g.bracket().contains(&parse_rational("1.6180339887").unwrap()));
        let two = base_from_alpha(&periodic("(1)"), &rat(1, 1_000_000)).unwrap();
        assert!(two.is_exact() && two.lo() == &rat(2, 1));
        let kl = base_from_alpha(&AlphaTarget::KomornikLoreti(bin()), &rat(1, 1_000_000)).unwrap();
        assert!((kl.mid_f64() - 1.787_231_650).abs() < 1e-5);
        assert!(matches!(
            base_from_alpha(&periodic("(0)"), &rat(1, 100)),
            Err(Error::NotAdmissible(_))
        ));
        assert!(matches!(
            base_from_alpha(&periodic("0(1)"), &rat(1, 100)),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn prefix_target_gives_cylinder() {
        let w = Word::parse("1101", bin()).unwrap();
        let base = base_from_alpha(&AlphaTarget::Prefix(w.clone()), &rat(1, 1 << 24)).unwrap();
        for x in [base.lo().clone() + rat(1, 1 << 20), base.hi().clone() - rat(1, 1 << 20)] {
            let (d, _) = quasi_greedy_exact(&x, bin(), 4).unwrap();
            assert_eq!(d, w.digits());
        }
        // α(1.8) = 1101…, α(1.7) = 1100…
        assert!(base.bracket().contains(&rat(18, 10)));
        assert!(!base.bracket().contains(&rat(17, 10)));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_univoque(&exact("2"), 8).unwrap(),
            UnivoqueStatus::InClosureOnly
        );
        let g = base_from_alpha(&periodic("(10)"), &rat(1, 1 << 20)).unwrap();
        assert_eq!(classify_univoque(&g, 8).unwrap(), UnivoqueStatus::Outside);
        let kl = base_from_alpha(&AlphaTarget::KomornikLoreti(bin()), &rat(1, 1 << 20)).unwrap();
        assert_eq!(classify_univoque(&kl, 64).unwrap(), UnivoqueStatus::InU);
        let r = base_from_alpha(&periodic("111(001)"), &rat(1, 1 << 20)).unwrap();
        assert_eq!(classify_univoque(&r, 8).unwrap(), UnivoqueStatus::InU);
        assert!(classify_univoque(&exact("2"), 0).is_err());
    }

    #[test]
    fn remainder_stays_in_unit_interval() {
        for q in ["1.05", "1.5", "1.9", "2"] {
            let (digits, _) = quasi_greedy_exact(&parse_rational(q).unwrap(), bin(), 200).unwrap();
            assert!(digits.iter().rev().take(50).any(|&d| d != 0));
        }
    }

    #[test]
    fn exact_rejects_out_of_range() {
        let g = base_from_alpha(&periodic("(10)"), &rat(1, 1 << 10)).unwrap();
        assert!(!g.is_exact());
        assert!(Base::exact(rat(5, 2), bin()).is_err());
        assert!(Base::exact(rat(1, 1), bin()).is_err());
    }
}
