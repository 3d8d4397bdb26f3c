//! Maps that collapse `B_k(V_{q,n})` onto `B_k(U_{q,n})`: the `(l, r, n)`
//! decomposition of `α(q)` at a primitive length, the `v_i w_i`
//! factorization, the substitution `F_{u,v}` and its iterate, and fiber
//! censuses with a verification report.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansions::{minus_periodic_exceeds_kl, AlphaPrefix};
use crate::subshifts::{Sft, SftKind};
use crate::words::{is_primitive_digits, reflect_digits, Alphabet, EventuallyPeriodicSeq, Word};

/// `n = m(l+1) + r` with `a_1…a_{n−1} = v (refl(v)^+)^l refl(a_1…a_{r−1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LrDecomposition {
    pub m: usize,
    pub l: usize,
    pub r: usize,
    pub n: usize,
}

/// Digits scanned when `α(q)` is known exactly.
const EXACT_SCAN: usize = 4096;

fn plus_last(d: &mut [u8]) {
    *d.last_mut().unwrap() += 1;
}

/// `v (refl(v)^+)^∞` as digits.
fn plus_pattern(v: &[u8], max: u8, len: usize) -> Vec<u8> {
    let mut block = reflect_digits(v, max);
    plus_last(&mut block);
    (0..len)
        .map(|i| {
            if i < v.len() {
                v[i]
            } else {
                block[(i - v.len()) % block.len()]
            }
        })
        .collect()
}

/// Decomposes `α(q)` against `v(refl(v)^+)^∞` for `v = a_1…a_m`.
pub fn decompose_lr(alpha: &AlphaPrefix, m: usize) -> Result<LrDecomposition> {
    let max = alpha.alphabet().max_digit();
    if m == 0 {
        return Err(Error::Input("m must be positive".into()));
    }
    let v = Word::new(alpha.digits_to(m)?, alpha.alphabet())?;
    if !v.is_primitive()? {
        return Err(Error::NotPrimitive(v.to_string()));
    }
    if !minus_periodic_exceeds_kl(&v)? {
        return Err(Error::NotApplicable(format!(
            "({})^∞ does not exceed α(q_KL)",
            v.minus_last()?
        )));
    }
    let a = alpha.scan_digits(EXACT_SCAN);
    let pattern = plus_pattern(v.digits(), max, a.len());
    let Some(t) = (m..a.len()).find(|&i| a[i] != pattern[i]) else {
        let block = pattern[m..m + m]
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        if alpha.exact_sequence().is_some() {
            return Err(Error::NotApplicable(format!(
                "α(q) = {v}({block})^∞, not strictly above the pattern"
            )));
        }
        return Err(Error::NoDeviationWithinPrefix {
            pattern: format!("{v}({block})"),
            depth: a.len(),
        });
    };
    if a[t] < pattern[t] {
        return Err(Error::NotApplicable(format!(
            "α(q) ≺ {v}(refl({v})^+)^∞ at digit {}",
            t + 1
        )));
    }
    let n = t + 1;
    let l = (n - 1 - m) / m;
    let r = (n - 1 - m) % m + 1;
    let dec = LrDecomposition { m, l, r, n };
    check_decomposition(&a, max, &dec)?;
    Ok(dec)
}

/// `a_1…a_n` is primitive and `a_{n−m+1}…a_n^- ≻ refl(a_1…a_m)`.
fn check_decomposition(a: &[u8], max: u8, d: &LrDecomposition) -> Result<()> {
    let u = &a[..d.n];
    if !is_primitive_digits(u, max) {
        return Err(Error::Internal(format!(
            "a_1…a_{} is not primitive after decomposition",
            d.n
        )));
    }
    let mut tail = a[d.n - d.m..d.n].to_vec();
    *tail.last_mut().unwrap() -= 1;
    if tail <= reflect_digits(&a[..d.m], max) {
        return Err(Error::Internal(format!(
            "tail inequality fails for m = {}, n = {}",
            d.m, d.n
        )));
    }
    Ok(())
}

/// `u = v z` with `u` and its prefix `v` primitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseContext {
    u: Word,
    v: Word,
    z: Word,
    v_minus: Vec<u8>,
    refl_v_plus: Vec<u8>,
}

impl CollapseContext {
    pub fn new(u: Word, v: Word) -> Result<Self> {
        if v.is_empty() || v.len() > u.len() || u.digits()[..v.len()] != *v.digits() {
            return Err(Error::Input(format!("{v} is not a nonempty prefix of {u}")));
        }
        for w in [&u, &v] {
            if !w.is_primitive()? {
                return Err(Error::NotPrimitive(w.to_string()));
            }
        }
        let z = u.slice(v.len()..u.len());
        let v_minus = v.minus_last()?.into_digits();
        let refl_v_plus = v.reflect().plus_last()?.into_digits();
        Ok(CollapseContext {
            u,
            v,
            z,
            v_minus,
            refl_v_plus,
        })
    }

    /// `u = a_1…a_n`, `v = a_1…a_m` from a decomposition.
    pub fn from_decomposition(alpha: &AlphaPrefix, d: &LrDecomposition) -> Result<Self> {
        let a = alpha.digits_to(d.n)?;
        let alphabet = alpha.alphabet();
        Self::new(Word::new(a.clone(), alphabet)?, Word::new(a[..d.m].to_vec(), alphabet)?)
    }

    /// `u = v_{s+1} w_{s+1}`, `v = v_{s+1}` for an index `s` (1-based) with
    /// `|w_s| < |w_{s+1}|` or `w_s ≻ refl(a_1…a_{r_s})^+`.
    pub fn case_a(f: &WFactorization, s: usize) -> Result<Self> {
        if s == 0 || s + 1 > f.ws.len() {
            return Err(Error::PrefixTooShort {
                needed: s + 1,
                available: f.ws.len(),
            });
        }
        let (ws, wn) = (&f.ws[s - 1], &f.ws[s]);
        let v_s = f.v(s);
        let mut refl_plus = reflect_digits(&v_s.digits()[..ws.len()], v_s.alphabet().max_digit());
        plus_last(&mut refl_plus);
        if !(ws.len() < wn.len() || ws.digits() > refl_plus.as_slice()) {
            return Err(Error::NotApplicable(format!(
                "index {s} does not witness the first case"
            )));
        }
        let v = f.v(s + 1);
        Self::new(v.concat(wn)?, v)
    }

    pub fn u(&self) -> &Word {
        &self.u
    }

    pub fn v(&self) -> &Word {
        &self.v
    }

    pub fn z(&self) -> &Word {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.u.alphabet()
    }

    fn max(&self) -> u8 {
        self.alphabet().max_digit()
    }
}

/// Every length-`n` window of `x` lies between `refl(u)` and `u` (strictly
/// or weakly), and shorter trailing segments lie weakly between the
/// corresponding prefixes.
pub fn in_window_language(x: &[u8], u: &[u8], max: u8, kind: SftKind) -> bool {
    let n = u.len();
    let lo = reflect_digits(u, max);
    (0..x.len()).all(|j| {
        let s = &x[j..(j + n).min(x.len())];
        let l = s.len();
        if l == n && kind == SftKind::UStrict {
            s > &lo[..] && s < u
        } else {
            s >= &lo[..l] && s <= &u[..l]
        }
    })
}

/// Least `i` with `x_{i+1}…x_{i+n} ∈ {u, refl(u)}`.
pub fn first_occurrence(x: &Word, ctx: &CollapseContext) -> Option<usize> {
    first_occurrence_digits(x.digits(), ctx)
}

fn first_occurrence_digits(x: &[u8], ctx: &CollapseContext) -> Option<usize> {
    let u = ctx.u.digits();
    let n = u.len();
    let max = ctx.max();
    if x.len() < n {
        return None;
    }
    (0..=x.len() - n).find(|&i| {
        let w = &x[i..i + n];
        w == u || w.iter().zip(u).all(|(&a, &b)| a == max - b)
    })
}

/// `F_{u,v}(x)`; the input must lie in `B_k(V_{q,n})` with `a_1…a_n = u`.
pub fn apply_f(ctx: &CollapseContext, x: &Word) -> Result<Word> {
    if x.alphabet() != ctx.alphabet() {
        return Err(Error::Input("word and context use different alphabets".into()));
    }
    if !in_window_language(x.digits(), ctx.u.digits(), ctx.max(), SftKind::VWeak) {
        return Err(Error::Input(format!("{x} is not in B_{}(V_q,{})", x.len(), ctx.n())));
    }
    Word::new(apply_f_digits(ctx, x.digits()), ctx.alphabet())
}

fn apply_f_digits(ctx: &CollapseContext, x: &[u8]) -> Vec<u8> {
    let Some(i) = first_occurrence_digits(x, ctx) else {
        return x.to_vec();
    };
    let n = ctx.n();
    let max = ctx.max();
    let mut out = Vec::with_capacity(x.len());
    out.extend_from_slice(&x[..i]);
    if x[i..i + n] == *ctx.u.digits() {
        out.extend_from_slice(&ctx.v_minus);
        out.extend(ctx.z.digits().iter().chain(&x[i + n..]).map(|d| max - d));
    } else {
        out.extend_from_slice(&ctx.refl_v_plus);
        out.extend_from_slice(ctx.z.digits());
        out.extend(x[i + n..].iter().map(|d| max - d));
    }
    out
}

/// `f_{n,k}(x)`: `F` applied until no occurrence of `u` or `refl(u)` is
/// left. Each application must push the first occurrence strictly right.
pub fn iterate_f_nk(ctx: &CollapseContext, x: &Word) -> Result<Word> {
    apply_f(ctx, x)?;
    Word::new(iterate_digits(ctx, x.digits())?, ctx.alphabet())
}

fn iterate_digits(ctx: &CollapseContext, x: &[u8]) -> Result<Vec<u8>> {
    let mut cur = x.to_vec();
    for _ in 0..=x.len() {
        let Some(before) = first_occurrence_digits(&cur, ctx) else {
            return Ok(cur);
        };
        let next = apply_f_digits(ctx, &cur);
        let after = first_occurrence_digits(&next, ctx);
        if after.is_some_and(|a| a <= before) {
            return Err(Error::NonContraction {
                word: digits_string(&cur, ctx.alphabet()),
                before,
                after,
            });
        }
        cur = next;
    }
    Err(Error::Internal("iteration count exceeded word length".into()))
}

fn digits_string(d: &[u8], alphabet: Alphabet) -> String {
    Word::new(d.to_vec(), alphabet)
        .map(|w| w.to_string())
        .unwrap_or_default()
}

/// Outcome of the factorization scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FactorCase {
    /// `l(m) > 0` at the reported length.
    PositiveL { m: usize, l: usize },
    /// No periodic tail detected within the scanned digits.
    CaseA,
    /// The scanned digits are consistent with `α(q) = v_s w_s^∞`;
    /// tentative unless `α(q)` is known exactly.
    CaseB { s: usize, tail: String, exact: bool },
}

/// `α(q) = v_1 w_1 w_2 …` with each `w_i` the shortest word satisfying
/// `v_i w_i 0^∞ ≻ v_i (refl(v_i)^+)^∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WFactorization {
    pub v1: Word,
    pub ws: Vec<Word>,
    pub rs: Vec<usize>,
    pub case: FactorCase,
    /// Digits of `α(q)` the scan relied on.
    pub depth: usize,
    /// Whether `m_1` came from the bounded-scan default.
    pub m1_heuristic: bool,
    /// Whether `(v_1^-)^∞ ≻ α(q_KL)`.
    pub m1_exceeds_kl: bool,
}

impl WFactorization {
    /// `v_i = v_1 w_1 … w_{i−1}` (1-based).
    pub fn v(&self, i: usize) -> Word {
        let mut d = self.v1.digits().to_vec();
        for w in &self.ws[..i - 1] {
            d.extend_from_slice(w.digits());
        }
        Word::new(d, self.v1.alphabet()).expect("factor digits lie in the alphabet")
    }

    pub fn m(&self, i: usize) -> usize {
        self.v1.len() + self.rs[..i - 1].iter().sum::<usize>()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "v1": self.v1.to_string(),
            "ws": self.ws.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "rs": self.rs,
            "case": self.case,
            "depth": self.depth,
            "m1_heuristic": self.m1_heuristic,
            "m1_exceeds_kl": self.m1_exceeds_kl,
        })
    }
}

/// Bounded-scan default for `m_1`: the least `m` in the visible part of
/// `N(q)` beyond which every visible decomposition has `l = 0`.
pub fn default_m1(alpha: &AlphaPrefix) -> Result<usize> {
    let a = alpha.scan_digits(512);
    let max = alpha.alphabet().max_digit();
    let mut members = Vec::new();
    for m in 1..=a.len() / 2 {
        let v = Word::new(a[..m].to_vec(), alpha.alphabet())?;
        if is_primitive_digits(&a[..m], max) && a[m - 1] > 0 && minus_periodic_exceeds_kl(&v).unwrap_or(false) {
            let l = match decompose_lr(alpha, m) {
                Ok(d) => Some(d.l),
                Err(_) => None,
            };
            members.push((m, l));
        }
    }
    let last_positive = members.iter().rposition(|&(_, l)| l.is_some_and(|l| l > 0));
    let start = last_positive.map_or(0, |p| p + 1);
    members
        .get(start)
        .map(|&(m, _)| m)
        .ok_or_else(|| Error::NotApplicable("no length with l = 0 in the scanned part of N(q)".into()))
}

pub fn factorize_w(alpha: &AlphaPrefix, m1: Option<usize>) -> Result<WFactorization> {
    let (m1, heuristic) = match m1 {
        Some(m) => (m, false),
        None => (default_m1(alpha)?, true),
    };
    let alphabet = alpha.alphabet();
    let max = alphabet.max_digit();
    let a = alpha.scan_digits(EXACT_SCAN);
    if m1 == 0 || m1 >= a.len() {
        return Err(Error::PrefixTooShort {
            needed: m1 + 1,
            available: a.len(),
        });
    }
    let v1 = Word::new(a[..m1].to_vec(), alphabet)?;
    if !v1.is_primitive()? {
        return Err(Error::NotPrimitive(v1.to_string()));
    }
    let exceeds = minus_periodic_exceeds_kl(&v1)?;
    let exact = alpha.exact_sequence().is_some();
    let mut ws = Vec::new();
    let mut rs = Vec::new();
    let mut m = m1;
    let mut case = None;
    while m < a.len() {
        let pattern = plus_pattern(&a[..m], max, a.len());
        let Some(t) = (m..a.len()).find(|&i| a[i] != pattern[i]) else {
            let tail = digits_string(&pattern[m..2 * m], alphabet);
            case = Some(FactorCase::CaseB {
                s: ws.len() + 1,
                tail,
                exact,
            });
            break;
        };
        if a[t] < pattern[t] {
            return Err(Error::NotApplicable(format!("α(q) ≺ v(refl(v)^+)^∞ for |v| = {m}")));
        }
        let r = t + 1 - m;
        if r > m {
            case = Some(FactorCase::PositiveL { m, l: (t - m) / m });
            break;
        }
        if !is_primitive_digits(&a[..=t], max) {
            return Err(Error::Internal(format!("v_{} is not primitive", ws.len() + 2)));
        }
        ws.push(Word::new(a[m..=t].to_vec(), alphabet)?);
        rs.push(r);
        m = t + 1;
    }
    let case = match case {
        Some(c) => c,
        None => {
            if ws.len() < 2 {
                return Err(Error::PrefixTooShort {
                    needed: 2,
                    available: ws.len(),
                });
            }
            periodic_tail(&v1, &ws, max).unwrap_or(FactorCase::CaseA)
        }
    };
    Ok(WFactorization {
        v1,
        ws,
        rs,
        case,
        depth: a.len(),
        m1_heuristic: heuristic,
        m1_exceeds_kl: exceeds,
    })
}

/// Least `s` whose factor repeats to the end of the scan, with at least two
/// repetitions observed and `w_s = refl(a_1…a_{r_s})^+`.
fn periodic_tail(v1: &Word, ws: &[Word], max: u8) -> Option<FactorCase> {
    let a: Vec<u8> = v1
        .digits()
        .iter()
        .chain(ws.iter().flat_map(|w| w.digits()))
        .copied()
        .collect();
    let mut start = v1.len();
    for (i, w) in ws.iter().enumerate() {
        let r = w.len();
        let rest = &a[start..];
        let mut expect = reflect_digits(&a[..r], max);
        plus_last(&mut expect);
        if rest.len() >= 2 * r
            && w.digits() == expect.as_slice()
            && rest.iter().enumerate().all(|(j, &d)| d == w.digits()[j % r])
        {
            return Some(FactorCase::CaseB {
                s: i + 1,
                tail: w.to_string(),
                exact: false,
            });
        }
        start += r;
    }
    None
}

/// Result of grouping `B_k(V_{q,n})` by its image under `f_{n,k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberCensus {
    pub n: usize,
    pub k: usize,
    /// `N = ⌊n/2⌋`.
    pub half: usize,
    pub domain: usize,
    pub images: usize,
    pub max_fiber: usize,
    /// `(2N)^{k/N}`.
    pub bound: f64,
    /// `max_fiber^N ≤ (2N)^k`, decided in integers.
    pub within_bound: bool,
}

fn fiber_bound_holds(max_fiber: usize, half: usize, k: usize) -> bool {
    use num_bigint::BigUint;
    let lhs = num_traits::pow(BigUint::from(max_fiber), half);
    let rhs = num_traits::pow(BigUint::from(2 * half), k);
    lhs <= rhs
}

pub fn fiber_census(ctx: &CollapseContext, k: usize) -> Result<FiberCensus> {
    let domain = v_domain(ctx, k)?;
    census_of(ctx, k, &domain)
}

fn v_domain(ctx: &CollapseContext, k: usize) -> Result<Vec<Word>> {
    if (k as f64) * (ctx.alphabet().size() as f64).log2() > 24.0 {
        return Err(Error::Resource(format!(
            "enumerating words of length {k} exceeds the census budget"
        )));
    }
    Sft::from_bound(ctx.u.clone(), SftKind::VWeak)?.words(k)
}

fn census_of(ctx: &CollapseContext, k: usize, domain: &[Word]) -> Result<FiberCensus> {
    let images = images_of(ctx, domain)?;
    let mut fibers: HashMap<&[u8], usize> = HashMap::new();
    for y in &images {
        *fibers.entry(y.as_slice()).or_default() += 1;
    }
    let half = (ctx.n() / 2).max(1);
    let max_fiber = fibers.values().copied().max().unwrap_or(0);
    Ok(FiberCensus {
        n: ctx.n(),
        k,
        half,
        domain: domain.len(),
        images: fibers.len(),
        max_fiber,
        bound: ((2 * half) as f64).powf(k as f64 / half as f64),
        within_bound: fiber_bound_holds(max_fiber, half, k),
    })
}

fn images_of(ctx: &CollapseContext, domain: &[Word]) -> Result<Vec<Vec<u8>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        domain.par_iter().map(|x| iterate_digits(ctx, x.digits())).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        domain.iter().map(|x| iterate_digits(ctx, x.digits())).collect()
    }
}

/// Pass/fail tally for one property.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub input: String,
    pub expected: String,
    pub actual: String,
}

const MAX_WITNESSES: usize = 8;

impl CheckTally {
    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }
}

/// Exhaustive check of one context at one word length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextReport {
    pub u: String,
    pub v: String,
    pub n: usize,
    pub k: usize,
    /// Domain words accepted by the window test, and the count of window-test
    /// words that agree with the automaton language.
    pub domain_agreement: CheckTally,
    pub stays_in_v: CheckTally,
    pub index_advance: CheckTally,
    /// Smallest observed advance of the first occurrence.
    pub min_advance: Option<usize>,
    pub reflection: CheckTally,
    pub image_in_u: CheckTally,
    pub fiber: FiberCensus,
}

impl ContextReport {
    pub fn failures(&self) -> usize {
        [
            &self.domain_agreement,
            &self.stays_in_v,
            &self.index_advance,
            &self.reflection,
            &self.image_in_u,
        ]
        .iter()
        .map(|t| t.failed)
        .sum::<usize>()
            + usize::from(!self.fiber.within_bound)
    }
}

/// Runs every per-word property over `B_k(V_{q,n})` for one context.
pub fn verify_context(ctx: &CollapseContext, k: usize) -> Result<ContextReport> {
    let alphabet = ctx.alphabet();
    let max = ctx.max();
    let u = ctx.u.digits();
    let n = ctx.n();
    let domain = v_domain(ctx, k)?;
    let u_sft = Sft::from_bound(ctx.u.clone(), SftKind::UStrict)?;
    let show = |d: &[u8]| digits_string(d, alphabet);

    let mut domain_agreement = CheckTally::default();
    for x in &domain {
        domain_agreement.record(in_window_language(x.digits(), u, max, SftKind::VWeak), || Witness {
            input: x.to_string(),
            expected: "window test accepts automaton word".into(),
            actual: "rejected".into(),
        });
    }
    if k <= 20 {
        let accepted = (0..alphabet.size().pow(k as u32))
            .filter(|&code| {
                let mut d = vec![0u8; k];
                let mut c = code;
                for slot in d.iter_mut().rev() {
                    *slot = (c % alphabet.size()) as u8;
                    c /= alphabet.size();
                }
                in_window_language(&d, u, max, SftKind::VWeak)
            })
            .count();
        domain_agreement.record(accepted == domain.len(), || Witness {
            input: format!("all words of length {k}"),
            expected: domain.len().to_string(),
            actual: accepted.to_string(),
        });
    }

    let mut stays_in_v = CheckTally::default();
    let mut index_advance = CheckTally::default();
    let mut reflection = CheckTally::default();
    let mut image_in_u = CheckTally::default();
    let mut min_advance: Option<usize> = None;
    let need = n.div_ceil(2);
    for x in &domain {
        let xd = x.digits();
        let y = apply_f_digits(ctx, xd);
        if let Some(i) = first_occurrence_digits(xd, ctx) {
            stays_in_v.record(in_window_language(&y, u, max, SftKind::VWeak), || Witness {
                input: x.to_string(),
                expected: "F(x) in B_k(V)".into(),
                actual: show(&y),
            });
            let after = first_occurrence_digits(&y, ctx);
            if let Some(j) = after {
                let adv = j.saturating_sub(i);
                min_advance = Some(min_advance.map_or(adv, |m| m.min(adv)));
            }
            index_advance.record(after.is_none_or(|j| j >= i + need), || Witness {
                input: x.to_string(),
                expected: format!("first occurrence ≥ {}", i + need),
                actual: format!("{after:?}"),
            });
        }
        let rx: Vec<u8> = xd.iter().map(|d| max - d).collect();
        let fr = apply_f_digits(ctx, &rx);
        let rf: Vec<u8> = y.iter().map(|d| max - d).collect();
        reflection.record(fr == rf, || Witness {
            input: x.to_string(),
            expected: show(&rf),
            actual: show(&fr),
        });
        match iterate_digits(ctx, xd) {
            Ok(img) => {
                let w = Word::new(img.clone(), alphabet)?;
                let ok = in_window_language(&img, u, max, SftKind::UStrict) && u_sft.contains(&w);
                image_in_u.record(ok, || Witness {
                    input: x.to_string(),
                    expected: "f(x) in B_k(U)".into(),
                    actual: show(&img),
                });
            }
            Err(e) => image_in_u.record(false, || Witness {
                input: x.to_string(),
                expected: "f(x) defined".into(),
                actual: e.to_string(),
            }),
        }
    }
    let fiber = census_of(ctx, k, &domain).or_else(|e| match e {
        Error::NonContraction { .. } => Ok(FiberCensus {
            n,
            k,
            half: n / 2,
            domain: domain.len(),
            images: 0,
            max_fiber: 0,
            bound: 0.0,
            within_bound: false,
        }),
        e => Err(e),
    })?;
    Ok(ContextReport {
        u: ctx.u.to_string(),
        v: ctx.v.to_string(),
        n,
        k,
        domain_agreement,
        stays_in_v,
        index_advance,
        min_advance,
        reflection,
        image_in_u,
        fiber,
    })
}

/// The base sequence `u (refl(u)^+)^∞` whose prefixes realize a context.
pub fn right_end_sequence(u: &Word) -> Result<EventuallyPeriodicSeq> {
    EventuallyPeriodicSeq::new(u, &u.reflect().plus_last()?)
}
