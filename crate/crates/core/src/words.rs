//! Digit words over `{0, …, M}`, eventually periodic sequences and the
//! lexicographic machinery built on them.
//!
//! Finite words are compared by padding with zeros, i.e. `c ≺ d` means
//! `c0^∞ ≺ d0^∞`, so `10` and `100` compare equal. Eventually periodic
//! sequences are kept in a canonical form (minimal period, then minimal
//! preperiod) so that structural equality is sequence equality.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// The digit alphabet `{0, 1, …, M}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    max: u8,
}

impl Alphabet {
    pub fn new(max: u8) -> Result<Self> {
        if max == 0 || max == u8::MAX {
            return Err(Error::Input(format!("alphabet size M must lie in 1..=254, got {max}")));
        }
        Ok(Alphabet { max })
    }

    pub const fn binary() -> Self {
        Alphabet { max: 1 }
    }

    /// The largest digit `M`.
    pub fn max_digit(self) -> u8 {
        self.max
    }

    /// Number of symbols, `M + 1`.
    pub fn size(self) -> usize {
        self.max as usize + 1
    }

    pub fn contains(self, d: u8) -> bool {
        d <= self.max
    }

    fn check(self, other: Alphabet) -> Result<()> {
        if self != other {
            return Err(Error::Input(format!(
                "alphabet mismatch: M={} vs M={}",
                self.max, other.max
            )));
        }
        Ok(())
    }
}

/// Compare two digit strings with the zero-padding rule.
pub fn cmp_padded(a: &[u8], b: &[u8]) -> Ordering {
    let n = a.len().max(b.len());
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

pub fn reflect_digits(digits: &[u8], max: u8) -> Vec<u8> {
    digits.iter().map(|&d| max - d).collect()
}

/// Primitivity test on raw digits: for every `0 ≤ i < m`,
/// `refl(a_1…a_{m−i}) ≺ a_{i+1}…a_m ≼ a_1…a_{m−i}`.
pub fn is_primitive_digits(a: &[u8], max: u8) -> bool {
    let m = a.len();
    if m == 0 {
        return false;
    }
    for i in 0..m {
        let tail = &a[i..];
        let head = &a[..m - i];
        // upper: tail ≼ head
        if tail > head {
            return false;
        }
        // lower, strict: refl(head) ≺ tail
        let mut strict = false;
        for (h, t) in head.iter().zip(tail) {
            let r = max - h;
            if r < *t {
                strict = true;
                break;
            }
            if r > *t {
                return false;
            }
        }
        if !strict {
            return false;
        }
    }
    true
}

/// A finite word over an [`Alphabet`]. The empty word is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    digits: Vec<u8>,
    alphabet: Alphabet,
}

impl Word {
    pub fn new(digits: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| !alphabet.contains(d)) {
            return Err(Error::Input(format!(
                "digit {d} outside alphabet {{0..{}}}",
                alphabet.max_digit()
            )));
        }
        Ok(Word { digits, alphabet })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Word {
            digits: Vec::new(),
            alphabet,
        }
    }

    /// Parses the digit-string text format: one character per digit when
    /// `M ≤ 9`, otherwise comma separated integers.
    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self> {
        Word::new(parse_digit_list(text.trim(), alphabet)?, alphabet)
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.digits
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        self.alphabet.check(other.alphabet)?;
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        Ok(Word {
            digits,
            alphabet: self.alphabet,
        })
    }

    pub fn pow(&self, n: usize) -> Word {
        Word {
            digits: self.digits.repeat(n),
            alphabet: self.alphabet,
        }
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word {
            digits: self.digits[..len.min(self.len())].to_vec(),
            alphabet: self.alphabet,
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Word {
        Word {
            digits: self.digits[range].to_vec(),
            alphabet: self.alphabet,
        }
    }

    pub fn reflect(&self) -> Word {
        Word {
            digits: reflect_digits(&self.digits, self.alphabet.max_digit()),
            alphabet: self.alphabet,
        }
    }

    /// `c^+`: last digit incremented. Undefined when the last digit is `M`.
    pub fn plus_last(&self) -> Result<Word> {
        match self.digits.last() {
            None => Err(Error::Domain("c^+ of the empty word".into())),
            Some(&d) if d == self.alphabet.max_digit() => {
                Err(Error::Domain(format!("{self}^+: last digit is already M")))
            }
            Some(_) => {
                let mut digits = self.digits.clone();
                *digits.last_mut().unwrap() += 1;
                Ok(Word {
                    digits,
                    alphabet: self.alphabet,
                })
            }
        }
    }

    /// `c^-`: last digit decremented. Undefined when the last digit is `0`.
    pub fn minus_last(&self) -> Result<Word> {
        match self.digits.last() {
            None => Err(Error::Domain("c^- of the empty word".into())),
            Some(0) => Err(Error::Domain(format!("{self}^-: last digit is already 0"))),
            Some(_) => {
                let mut digits = self.digits.clone();
                *digits.last_mut().unwrap() -= 1;
                Ok(Word {
                    digits,
                    alphabet: self.alphabet,
                })
            }
        }
    }

    /// Lexicographic comparison with the zero-padding rule.
    pub fn lex_cmp(&self, other: &Word) -> Result<Ordering> {
        self.alphabet.check(other.alphabet)?;
        Ok(cmp_padded(&self.digits, &other.digits))
    }

    pub fn is_primitive(&self) -> Result<bool> {
        if self.is_empty() {
            return Err(Error::Input("primitivity of the empty word".into()));
        }
        Ok(is_primitive_digits(&self.digits, self.alphabet.max_digit()))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_digit_list(&self.digits, self.alphabet))
    }
}

/// The three partial operations of the word algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordOp {
    Reflect,
    PlusLast,
    MinusLast,
}

pub fn word_algebra(w: &Word, op: WordOp) -> Result<Word> {
    match op {
        WordOp::Reflect => Ok(w.reflect()),
        WordOp::PlusLast => w.plus_last(),
        WordOp::MinusLast => w.minus_last(),
    }
}

/// `pre · period^∞` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicSeq {
    pre: Vec<u8>,
    period: Vec<u8>,
    alphabet: Alphabet,
}

impl EventuallyPeriodicSeq {
    pub fn new(pre: &Word, period: &Word) -> Result<Self> {
        pre.alphabet.check(period.alphabet)?;
        Self::from_digits(pre.digits.clone(), period.digits.clone(), pre.alphabet)
    }

    pub fn from_digits(pre: Vec<u8>, period: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Input("periodic block must be nonempty".into()));
        }
        Word::new(pre.clone(), alphabet)?;
        Word::new(period.clone(), alphabet)?;
        Ok(Self::canonical(pre, period, alphabet))
    }

    /// `w^∞`.
    pub fn periodic(block: &Word) -> Result<Self> {
        Self::new(&Word::empty(block.alphabet), block)
    }

    /// `w 0^∞`.
    pub fn from_word(w: &Word) -> Self {
        Self::canonical(w.digits.clone(), vec![0], w.alphabet)
    }

    fn canonical(mut pre: Vec<u8>, mut period: Vec<u8>, alphabet: Alphabet) -> Self {
        let p = period.len();
        let min_p = (1..=p)
            .find(|&d| p.is_multiple_of(d) && (0..p).all(|i| period[i] == period[i % d]))
            .unwrap_or(p);
        period.truncate(min_p);
        while let Some(&last) = pre.last() {
            if last != *period.last().unwrap() {
                break;
            }
            pre.pop();
            period.rotate_right(1);
        }
        EventuallyPeriodicSeq { pre, period, alphabet }
    }

    /// Parses `pre(period)`, e.g. `11(01)`; a literal without parentheses
    /// is read as a purely periodic block.
    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self> {
        let text = text.trim();
        match (text.find('('), text.rfind(')')) {
            (Some(open), Some(close)) if close == text.len() - 1 && open < close => {
                let pre = parse_digit_list(text[..open].trim_end_matches(','), alphabet)?;
                let period = parse_digit_list(&text[open + 1..close], alphabet)?;
                Self::from_digits(pre, period, alphabet)
            }
            (None, None) => Self::from_digits(Vec::new(), parse_digit_list(text, alphabet)?, alphabet),
            _ => Err(Error::Input(format!("malformed periodic literal {text:?}"))),
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.pre.is_empty()
    }

    /// True when the sequence ends in `0^∞`.
    pub fn ends_in_zeros(&self) -> bool {
        self.period == [0]
    }

    /// Digit at 0-based position `i`.
    pub fn digit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<u8> {
        (0..len).map(|i| self.digit(i)).collect()
    }

    pub fn prefix_word(&self, len: usize) -> Word {
        Word {
            digits: self.prefix(len),
            alphabet: self.alphabet,
        }
    }

    pub fn reflect(&self) -> Self {
        let m = self.alphabet.max_digit();
        Self::canonical(
            reflect_digits(&self.pre, m),
            reflect_digits(&self.period, m),
            self.alphabet,
        )
    }

    /// `σ^n`.
    pub fn shift(&self, n: usize) -> Self {
        if n <= self.pre.len() {
            return Self::canonical(self.pre[n..].to_vec(), self.period.clone(), self.alphabet);
        }
        let k = (n - self.pre.len()) % self.period.len();
        let mut period = self.period.clone();
        period.rotate_left(k);
        Self::canonical(Vec::new(), period, self.alphabet)
    }

    /// Number of distinct shifts; `σ^n` for `n ≥` this value repeats.
    pub fn shift_orbit_len(&self) -> usize {
        self.pre.len() + self.period.len()
    }

    /// Digits that suffice to decide a comparison with `other`.
    fn decision_len(&self, other: &Self) -> usize {
        let (p, q) = (self.period.len(), other.period.len());
        self.pre.len().max(other.pre.len()) + num_integer::lcm(p, q) + p.max(q)
    }

    pub fn lex_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(match self.first_difference(other)? {
            Some(i) => self.digit(i).cmp(&other.digit(i)),
            None => Ordering::Equal,
        })
    }

    /// Index of the first digit where the sequences differ, if any.
    pub fn first_difference(&self, other: &Self) -> Result<Option<usize>> {
        self.alphabet.check(other.alphabet)?;
        Ok((0..self.decision_len(other)).find(|&i| self.digit(i) != other.digit(i)))
    }
}

impl fmt::Display for EventuallyPeriodicSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pre = format_digit_list(&self.pre, self.alphabet);
        let per = format_digit_list(&self.period, self.alphabet);
        write!(f, "{pre}({per})")
    }
}

/// Either operand kind accepted by [`lex_compare`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sequence {
    Finite(Word),
    Periodic(EventuallyPeriodicSeq),
}

impl Sequence {
    fn as_periodic(&self) -> EventuallyPeriodicSeq {
        match self {
            Sequence::Finite(w) => EventuallyPeriodicSeq::from_word(w),
            Sequence::Periodic(s) => s.clone(),
        }
    }
}

impl From<Word> for Sequence {
    fn from(w: Word) -> Self {
        Sequence::Finite(w)
    }
}

impl From<EventuallyPeriodicSeq> for Sequence {
    fn from(s: EventuallyPeriodicSeq) -> Self {
        Sequence::Periodic(s)
    }
}

/// Lexicographic order on words (zero padded) and eventually periodic
/// sequences; always terminates.
pub fn lex_compare(a: &Sequence, b: &Sequence) -> Result<Ordering> {
    a.as_periodic().lex_cmp(&b.as_periodic())
}

fn parse_digit_list(text: &str, alphabet: Alphabet) -> Result<Vec<u8>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parse_one = |s: &str| -> Result<u8> {
        let d: u32 = s.trim().parse().map_err(|_| Error::Input(format!("bad digit {s:?}")))?;
        if d > alphabet.max_digit() as u32 {
            return Err(Error::Input(format!(
                "digit {d} outside alphabet {{0..{}}}",
                alphabet.max_digit()
            )));
        }
        Ok(d as u8)
    };
    if alphabet.max_digit() <= 9 && !text.contains(',') {
        text.chars().map(|c| parse_one(&c.to_string())).collect()
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse_one)
            .collect()
    }
}

fn format_digit_list(digits: &[u8], alphabet: Alphabet) -> String {
    if alphabet.max_digit() <= 9 {
        digits.iter().map(|d| char::from(b'0' + d)).collect()
    } else {
        digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, Alphabet::binary()).unwrap()
    }

    fn eps(s: &str) -> EventuallyPeriodicSeq {
        EventuallyPeriodicSeq::parse(s, Alphabet::binary()).unwrap()
    }

    #[test]
    fn word_comparisons() {
        assert_eq!(w("10").lex_cmp(&w("01")).unwrap(), Ordering::Greater);
        assert_eq!(w("110").lex_cmp(&w("110")).unwrap(), Ordering::Equal);
        assert_eq!(w("10").lex_cmp(&w("100")).unwrap(), Ordering::Equal);
        assert_eq!(w("1").lex_cmp(&w("101")).unwrap(), Ordering::Less);
    }

    #[test]
    fn periodic_against_thue_morse_tail() {
        // (10)^∞ vs 1101001…: first difference at digit 2.
        let tm = Sequence::Finite(w("1101001"));
        let per = Sequence::Periodic(eps("(10)"));
        assert_eq!(lex_compare(&per, &tm).unwrap(), Ordering::Less);
    }

    #[test]
    fn alphabet_mismatch_is_an_input_error() {
        let a = w("10");
        let b = Word::parse("10", Alphabet::new(2).unwrap()).unwrap();
        assert!(matches!(a.lex_cmp(&b), Err(Error::Input(_))));
    }

    #[test]
    fn algebra() {
        assert_eq!(w("110").reflect(), w("001"));
        assert_eq!(w("111").minus_last().unwrap(), w("110"));
        assert_eq!(w("000").plus_last().unwrap(), w("001"));
        assert!(matches!(w("110").minus_last(), Err(Error::Domain(_))));
        assert!(matches!(w("1").plus_last(), Err(Error::Domain(_))));
        assert!(matches!(
            word_algebra(&Word::empty(Alphabet::binary()), WordOp::MinusLast),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn primitivity_examples() {
        assert!(w("1").is_primitive().unwrap());
        assert!(!w("10").is_primitive().unwrap());
        assert!(w("111").is_primitive().unwrap());
        assert!(w("11").is_primitive().unwrap());
        assert!(w("1110011").is_primitive().unwrap());
        assert!(w("11101").is_primitive().unwrap());
        assert!(matches!(
            Word::empty(Alphabet::binary()).is_primitive(),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(eps("11(01)"), eps("1(10)"));
        assert_eq!(eps("(1010)"), eps("(10)"));
        assert_eq!(eps("1(0)").to_string(), "1(0)");
        assert!(eps("10(0)").ends_in_zeros());
        assert_eq!(eps("(10)").shift(1), eps("(01)"));
        assert_eq!(eps("(10)").reflect(), eps("(01)"));
    }

    #[test]
    fn text_formats() {
        let m12 = Alphabet::new(12).unwrap();
        let word = Word::parse("10,3,0", m12).unwrap();
        assert_eq!(word.digits(), &[10, 3, 0]);
        assert_eq!(word.to_string(), "10,3,0");
        let s = EventuallyPeriodicSeq::parse("11,2(0,12)", m12).unwrap();
        assert_eq!(s.prefix(5), vec![11, 2, 0, 12, 0]);
        assert!(Word::parse("12", Alphabet::binary()).is_err());
        assert!(EventuallyPeriodicSeq::parse("1(", Alphabet::binary()).is_err());
        assert!(EventuallyPeriodicSeq::parse("1()", Alphabet::binary()).is_err());
    }
}
