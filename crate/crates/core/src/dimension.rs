//! Certified entropy sandwiches `h(U_{q,n}) ≤ H(q) ≤ h(V_{q,n})`, the
//! dimension `dim_H 𝒰_q = H(q)/log q`, entropy plateaus, the two-state graph
//! `X_G` and its restrictions, grid sweeps and a box-counting cross-check.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansions::{
    base_from_alpha, kl_digit, minus_periodic_exceeds_kl, quasi_greedy_alpha, AlphaPrefix, AlphaTarget, Base,
};
use crate::interval::{
    decimal_string, ln_bracket, ln_enclosure, rat_int, rational_string, to_f64, RatInterval, Rational, DEFAULT_LOG_BITS,
};
use crate::subshifts::{build_sft, entropy_bounds_with, EntropyBounds, Sft, SftKind};
use crate::words::{is_primitive_digits, Alphabet, EventuallyPeriodicSeq, Word};

/// Parameters of a sandwich computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandwichConfig {
    pub tol: Rational,
    pub n_max: usize,
    pub k_max: usize,
    pub log_bits: u32,
    /// Stop as soon as the gap is within `tol`.
    pub stop_early: bool,
    /// Explicit window lengths instead of the doubling schedule.
    pub lengths: Option<Vec<usize>>,
}

impl SandwichConfig {
    pub fn new(tol: Rational, n_max: usize) -> Self {
        SandwichConfig {
            tol,
            n_max,
            k_max: 64,
            log_bits: DEFAULT_LOG_BITS,
            stop_early: true,
            lengths: None,
        }
    }
}

/// Largest window length whose automaton stays near `2^19` states.
pub fn default_n_max(alphabet: Alphabet) -> usize {
    ((20.0 / (alphabet.size() as f64).log2()).floor() as usize).max(4)
}

/// Where the lower end of an estimate comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerSource {
    /// Collatz–Wielandt bound on `U_{q,n}`.
    Spectral,
    /// `α(q) = (a_1…a_p)^∞`: then `V_q = V_{q,p}` and `H(q) = h(V_{q,p})`.
    PeriodicExpansion { period: usize },
    /// `α(q) = a_1…a_r (refl(a_1…a_r)^+)^∞`: `H(q) = log 2 / r`.
    XgGraph { r: usize },
}

/// Bounds at one window length, and the running envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandwichStep {
    pub n: usize,
    pub primitive: bool,
    pub u: EntropyBounds,
    pub v: EntropyBounds,
    pub lower: Rational,
    pub upper: Rational,
}

impl SandwichStep {
    pub fn gap(&self) -> Rational {
        &self.upper - &self.lower
    }
}

#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    pub q: Base,
    pub n_used: usize,
    pub lower: Rational,
    pub upper: Rational,
    pub dim_lower: Rational,
    pub dim_upper: Rational,
    pub converged: bool,
    pub source: LowerSource,
    pub steps: Vec<SandwichStep>,
}

impl EntropyEstimate {
    pub fn entropy(&self) -> RatInterval {
        RatInterval::new(self.lower.clone(), self.upper.clone())
    }

    pub fn dimension(&self) -> RatInterval {
        RatInterval::new(self.dim_lower.clone(), self.dim_upper.clone())
    }

    pub fn gap(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "q": self.q.to_json(),
            "n_used": self.n_used,
            "entropy": self.entropy().to_json(),
            "dimension": self.dimension().to_json(),
            "converged": self.converged,
            "lower_source": self.source,
            "steps": self.steps.iter().map(|s| serde_json::json!({
                "n": s.n,
                "primitive": s.primitive,
                "u": { "lo": rational_string(&s.u.lower), "hi": rational_string(&s.u.upper) },
                "v": { "lo": rational_string(&s.v.lower), "hi": rational_string(&s.v.upper) },
                "lower": rational_string(&s.lower),
                "upper": rational_string(&s.upper),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Doubling from 4, each length replaced by the largest primitive length
/// in its range when there is one.
pub fn sandwich_schedule(alpha: &[u8], max: u8, n_max: usize) -> Vec<usize> {
    let n_max = n_max.min(alpha.len());
    let mut targets = Vec::new();
    let mut t = 4;
    while t < n_max {
        targets.push(t);
        t *= 2;
    }
    targets.push(n_max);
    let mut out = Vec::new();
    let mut prev = 0;
    for t in targets {
        let pick = (prev + 1..=t)
            .rev()
            .find(|&n| is_primitive_digits(&alpha[..n], max))
            .unwrap_or(t);
        if pick > prev {
            out.push(pick);
            prev = t;
        }
    }
    out
}

/// Whether an eventually periodic sequence exceeds `λ(M)`.
fn sequence_exceeds_kl(seq: &EventuallyPeriodicSeq) -> Result<bool> {
    let alphabet = seq.alphabet();
    for i in 0..(1 << 14) {
        let a = seq.digit(i);
        let b = kl_digit(alphabet, i as u64 + 1);
        if a != b {
            return Ok(a > b);
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "{seq} agrees with λ for 16384 digits"
    )))
}

/// `r` with `α(q) = w (refl(w)^+)^∞`, `w = a_1…a_r` primitive.
fn xg_generator(seq: &EventuallyPeriodicSeq) -> Option<usize> {
    let max = seq.alphabet().max_digit();
    (1..=seq.shift_orbit_len()).find(|&r| {
        let w = seq.prefix_word(r);
        is_primitive_digits(w.digits(), max)
            && w.reflect()
                .plus_last()
                .ok()
                .and_then(|b| EventuallyPeriodicSeq::new(&w, &b).ok())
                .as_ref()
                == Some(seq)
    })
}

fn special_bounds(
    alpha: &AlphaPrefix,
    cfg: &SandwichConfig,
) -> Result<Option<(LowerSource, usize, Rational, Rational)>> {
    let Some(seq) = alpha.exact_sequence() else {
        return Ok(None);
    };
    let top = seq.is_purely_periodic() && seq.period().iter().all(|&d| d == seq.alphabet().max_digit());
    if !top && !sequence_exceeds_kl(seq)? {
        return Ok(None);
    }
    if seq.is_purely_periodic() && seq.period().len() <= cfg.n_max.max(default_n_max(seq.alphabet())) {
        let p = seq.period().len();
        let sft = Sft::from_bound(seq.prefix_word(p), SftKind::VWeak)?;
        let e = entropy_bounds_with(&sft, cfg.k_max, cfg.log_bits)?;
        return Ok(Some((
            LowerSource::PeriodicExpansion { period: p },
            p,
            e.lower,
            e.upper,
        )));
    }
    if let Some(r) = xg_generator(seq) {
        let w = seq.prefix_word(r);
        if !minus_periodic_exceeds_kl(&w)? {
            let ln2 = ln_enclosure(&rat_int(2), cfg.log_bits)?;
            let r_rat = rat_int(r as i64);
            return Ok(Some((LowerSource::XgGraph { r }, r, ln2.lo / &r_rat, ln2.hi / r_rat)));
        }
    }
    Ok(None)
}

/// Entropy sandwich with the default settings for the alphabet.
pub fn sandwich_entropy(q: &Base, tol: &Rational, n_max: usize) -> Result<EntropyEstimate> {
    sandwich_with(q, &SandwichConfig::new(tol.clone(), n_max))
}

pub fn sandwich_with(q: &Base, cfg: &SandwichConfig) -> Result<EntropyEstimate> {
    if cfg.tol <= Rational::zero() {
        return Err(Error::Input("tolerance must be positive".into()));
    }
    if cfg.n_max == 0 {
        return Err(Error::Input("n_max must be positive".into()));
    }
    let n_cap = q.available_len().map_or(cfg.n_max, |a| a.min(cfg.n_max));
    let alpha = quasi_greedy_alpha(q, n_cap)?;
    let max = q.alphabet().max_digit();
    let mut lower = Rational::zero();
    let mut upper = ln_enclosure(&rat_int(q.alphabet().size() as i64), cfg.log_bits)?.hi;
    let mut source = LowerSource::Spectral;
    let mut n_used = 0;
    if let Some((src, n, lo, hi)) = special_bounds(&alpha, cfg)? {
        source = src;
        n_used = n;
        lower = lo;
        upper = upper.min(hi);
    }
    let mut steps = Vec::new();
    let lengths = match &cfg.lengths {
        Some(l) => l.iter().copied().filter(|&n| n >= 1 && n <= n_cap).collect(),
        None => sandwich_schedule(alpha.digits(), max, n_cap),
    };
    for n in lengths {
        if cfg.stop_early && &upper - &lower <= cfg.tol {
            break;
        }
        let u = entropy_bounds_with(&build_sft(&alpha, n, SftKind::UStrict)?, cfg.k_max, cfg.log_bits)?;
        let v = entropy_bounds_with(&build_sft(&alpha, n, SftKind::VWeak)?, cfg.k_max, cfg.log_bits)?;
        if u.lower > upper || v.upper < lower || u.lower > v.upper {
            return Err(Error::Internal(format!(
                "inconsistent sandwich at n = {n}: U ≥ {}, V ≤ {}, envelope [{}, {}]",
                to_f64(&u.lower),
                to_f64(&v.upper),
                to_f64(&lower),
                to_f64(&upper)
            )));
        }
        if u.lower > lower {
            lower = u.lower.clone();
            if source == LowerSource::Spectral || n_used < n {
                source = LowerSource::Spectral;
            }
        }
        if v.upper < upper {
            upper = v.upper.clone();
        }
        n_used = n_used.max(n);
        steps.push(SandwichStep {
            n,
            primitive: is_primitive_digits(&alpha.digits()[..n], max),
            u,
            v,
            lower: lower.clone(),
            upper: upper.clone(),
        });
    }
    let converged = &upper - &lower <= cfg.tol;
    let dim = dimension_of(q, &RatInterval::new(lower.clone(), upper.clone()), cfg.log_bits)?;
    Ok(EntropyEstimate {
        q: alpha.base().clone(),
        n_used,
        lower,
        upper,
        dim_lower: dim.lo,
        dim_upper: dim.hi,
        converged,
        source,
        steps,
    })
}

/// `entropy / log q`, outward over the bracket, capped at 1.
pub fn dimension_of(q: &Base, entropy: &RatInterval, bits: u32) -> Result<RatInterval> {
    let ln_q = ln_bracket(q.lo(), q.hi(), bits)?;
    let d = entropy.div_nonneg(&ln_q).rounded(bits + 4);
    let one = Rational::one();
    Ok(RatInterval::new(d.lo.min(one.clone()), d.hi.min(one)))
}

/// `dim_H 𝒰_q` as a certified interval.
pub fn hausdorff_dimension(q: &Base, tol: &Rational) -> Result<RatInterval> {
    Ok(sandwich_entropy(q, tol, default_n_max(q.alphabet()))?.dimension())
}

/// An entropy plateau `[q_L, q_R]` generated by a primitive word.
#[derive(Debug, Clone)]
pub struct Plateau {
    pub word: Word,
    pub q_l: Base,
    pub q_r: Base,
    /// `(w^-)^∞ ≻ α(q_KL)`.
    pub exceeds_kl: bool,
}

impl Plateau {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "word": self.word.to_string(),
            "q_l": self.q_l.to_json(),
            "q_r": self.q_r.to_json(),
            "alpha_q_l": self.left_sequence().map(|s| s.to_string()).unwrap_or_default(),
            "alpha_q_r": self.right_sequence().map(|s| s.to_string()).unwrap_or_default(),
            "exceeds_kl": self.exceeds_kl,
        })
    }

    pub fn left_sequence(&self) -> Result<EventuallyPeriodicSeq> {
        EventuallyPeriodicSeq::periodic(&self.word.minus_last()?)
    }

    pub fn right_sequence(&self) -> Result<EventuallyPeriodicSeq> {
        EventuallyPeriodicSeq::new(&self.word, &self.word.reflect().plus_last()?)
    }
}

/// `α(q_L) = (w^-)^∞` and `α(q_R) = w (refl(w)^+)^∞`.
pub fn plateau_from_word(w: &Word, width: &Rational) -> Result<Plateau> {
    if w.is_empty() || !w.is_primitive()? {
        return Err(Error::NotPrimitive(w.to_string()));
    }
    let left = EventuallyPeriodicSeq::periodic(&w.minus_last()?)?;
    let q_l = base_from_alpha(&AlphaTarget::Periodic(left), width)?;
    let right = EventuallyPeriodicSeq::new(w, &w.reflect().plus_last()?)?;
    let q_r = base_from_alpha(&AlphaTarget::Periodic(right), width)?;
    if q_l.hi() > q_r.lo() && !(q_l.lo() < q_r.lo()) {
        return Err(Error::Internal(format!("plateau endpoints out of order for {w}")));
    }
    Ok(Plateau {
        word: w.clone(),
        q_l,
        q_r,
        exceeds_kl: minus_periodic_exceeds_kl(w)?,
    })
}

/// Bracket of the root of `x^n = 1 + x + … + x^{n−1}` in `[1, 2]`.
pub fn multinacci_phi(n: usize, width: &Rational) -> Result<RatInterval> {
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    if n == 1 {
        return Ok(RatInterval::point(Rational::one()));
    }
    // p(x) = x^n − Σ_{j<n} x^j is negative at 1 and positive at 2
    let p = |x: &Rational| -> Ordering {
        let mut pow = Rational::one();
        let mut sum = Rational::zero();
        for _ in 0..n {
            sum += &pow;
            pow *= x;
        }
        pow.cmp(&sum)
    };
    let mut lo = Rational::one();
    let mut hi = rat_int(2);
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / rat_int(2);
        match p(&mid) {
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return Ok(RatInterval::point(mid)),
        }
    }
    Ok(RatInterval::new(lo, hi))
}

/// A finite graph whose edges carry words of one common length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub states: usize,
    pub edges: Vec<(usize, usize, Vec<u8>)>,
    pub alphabet: Alphabet,
}

impl LabeledGraph {
    fn label_len(&self) -> usize {
        self.edges.first().map_or(1, |e| e.2.len())
    }

    /// Out-edges of each state carry distinct labels.
    pub fn is_right_resolving(&self) -> bool {
        (0..self.states).all(|s| {
            let labels: Vec<&Vec<u8>> = self.edges.iter().filter(|e| e.0 == s).map(|e| &e.2).collect();
            labels.iter().collect::<HashSet<_>>().len() == labels.len()
        })
    }

    /// Exact integer Collatz–Wielandt bracket on the adjacency matrix after
    /// `rounds` steps of `(A + I)`.
    fn spectral_bracket(&self, rounds: usize) -> (Rational, Rational) {
        let mut v = vec![BigUint::one(); self.states];
        let step = |v: &[BigUint]| -> Vec<BigUint> {
            let mut out = vec![BigUint::zero(); v.len()];
            for (from, to, _) in &self.edges {
                out[*from] += &v[*to];
            }
            out
        };
        for _ in 0..rounds {
            let av = step(&v);
            v = av.into_iter().zip(&v).map(|(a, b)| a + b).collect();
        }
        let av = step(&v);
        let ratios: Vec<Rational> = av
            .iter()
            .zip(&v)
            .map(|(a, b)| Rational::new(a.clone().into(), b.clone().into()))
            .collect();
        (
            ratios.iter().min().unwrap().clone(),
            ratios.iter().max().unwrap().clone(),
        )
    }

    /// `#B_k` of the label language, by enumerating label paths.
    pub fn count_words(&self, k: usize) -> Result<usize> {
        let r = self.label_len();
        let edges = k / r + 2;
        let paths =
            (self.states as f64) * 2f64.powf(edges as f64 * (self.edges.len() as f64 / self.states as f64).log2());
        if paths > (1u64 << 22) as f64 {
            return Err(Error::Resource(format!("enumerating label paths for k = {k}")));
        }
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut stack: Vec<(usize, Vec<u8>)> = (0..self.states).map(|s| (s, Vec::new())).collect();
        while let Some((s, word)) = stack.pop() {
            if word.len() >= k + r {
                for off in 0..r {
                    seen.insert(word[off..off + k].to_vec());
                }
                continue;
            }
            for (from, to, label) in &self.edges {
                if *from == s {
                    let mut w = word.clone();
                    w.extend_from_slice(label);
                    stack.push((*to, w));
                }
            }
        }
        Ok(seen.len())
    }

    /// Entropy of the label shift: the path-shift bracket divided by the
    /// label length, tightened by `log #B_k / k`.
    pub fn entropy_bounds(&self, k_max: usize, bits: u32) -> Result<EntropyBounds> {
        if !self.is_right_resolving() {
            return Err(Error::Input("labeled graph is not right-resolving".into()));
        }
        let r = rat_int(self.label_len() as i64);
        let (lo, hi) = self.spectral_bracket(256);
        let ln_or_zero = |x: &Rational, upper: bool| -> Result<Rational> {
            if x <= &Rational::one() {
                return Ok(Rational::zero());
            }
            let e = ln_enclosure(x, bits)?;
            Ok(if upper { e.hi } else { e.lo })
        };
        let lower = ln_or_zero(&lo, false)? / &r;
        let mut upper = ln_or_zero(&hi, true)? / &r;
        let mut k_used = 0;
        for k in 1..=k_max {
            let Ok(c) = self.count_words(k) else { break };
            if c == 0 {
                upper = Rational::zero();
                break;
            }
            let bound = ln_or_zero(&rat_int(c as i64), true)? / rat_int(k as i64);
            if bound < upper {
                upper = bound;
                k_used = k;
            }
        }
        Ok(EntropyBounds {
            lower,
            upper,
            k_used,
            scc_count: 1,
            empty: self.edges.is_empty(),
            spectral_radius: (lo == hi).then_some(lo),
        })
    }
}

/// The two-state graph with loops `refl(a)^+` at A and `a^-` at B, and
/// edges `refl(a)` from A to B and `a` from B to A.
pub fn xg_graph(a: &Word) -> Result<LabeledGraph> {
    let refl = a.reflect();
    Ok(LabeledGraph {
        states: 2,
        edges: vec![
            (0, 0, refl.plus_last()?.into_digits()),
            (0, 1, refl.into_digits()),
            (1, 1, a.minus_last()?.into_digits()),
            (1, 0, a.digits().to_vec()),
        ],
        alphabet: a.alphabet(),
    })
}

/// `X_G` without `a (refl(a)^+)^n` and its reflection: after crossing to a
/// state, at most `n − 1` loops follow.
pub fn xg_restricted(a: &Word, n: usize) -> Result<LabeledGraph> {
    if n == 0 {
        return Err(Error::Input("restriction length must be positive".into()));
    }
    let g = xg_graph(a)?;
    let label = |i: usize| g.edges[i].2.clone();
    // states: A_j = j, B_j = n + j, j loops since the last crossing
    let mut edges = Vec::new();
    for j in 0..n {
        if j + 1 < n {
            edges.push((j, j + 1, label(0)));
            edges.push((n + j, n + j + 1, label(2)));
        }
        edges.push((j, n, label(1)));
        edges.push((n + j, 0, label(3)));
    }
    Ok(LabeledGraph {
        states: 2 * n,
        edges,
        alphabet: a.alphabet(),
    })
}

/// The generator `M^r` used for the stand-alone check.
fn xg_default_generator(alphabet: Alphabet, r: usize) -> Result<Word> {
    Word::new(vec![alphabet.max_digit(); r], alphabet)
}

/// Bounds for `h(X_G)` with a length-`r` generator; they must bracket
/// `log 2 / r`.
pub fn xg_entropy_check(r: usize, k_max: usize) -> Result<EntropyBounds> {
    xg_entropy_check_for(&xg_default_generator(Alphabet::binary(), r)?, k_max)
}

pub fn xg_entropy_check_for(a: &Word, k_max: usize) -> Result<EntropyBounds> {
    if a.is_empty() {
        return Err(Error::Input("r must be at least 1".into()));
    }
    let e = xg_graph(a)?.entropy_bounds(k_max, DEFAULT_LOG_BITS)?;
    let ln2 = ln_enclosure(&rat_int(2), DEFAULT_LOG_BITS)?;
    let r = rat_int(a.len() as i64);
    if e.lower > &ln2.hi / &r || e.upper < &ln2.lo / &r {
        return Err(Error::Internal(format!("X_G bounds miss log 2 / {}", a.len())));
    }
    Ok(e)
}

/// Bounds for the restricted graph; they must bracket `log φ_n / r`.
pub fn xg_restricted_check(a: &Word, n: usize, k_max: usize) -> Result<EntropyBounds> {
    xg_restricted(a, n)?.entropy_bounds(k_max, DEFAULT_LOG_BITS)
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub q: Base,
    pub outcome: std::result::Result<EntropyEstimate, Error>,
}

impl SweepRow {
    pub fn status(&self) -> String {
        match &self.outcome {
            Ok(e) if e.converged => "ok".into(),
            Ok(_) => "tolerance_not_reached".into(),
            Err(e) => format!("error: {e}").replace(',', ";"),
        }
    }

    pub fn csv_line(&self) -> String {
        const DIGITS: u32 = 12;
        let q_lo = decimal_string(self.q.lo(), DIGITS, false);
        let q_hi = decimal_string(self.q.hi(), DIGITS, true);
        match &self.outcome {
            Ok(e) => format!(
                "{q_lo},{q_hi},{},{},{},{},{},{}",
                e.n_used,
                decimal_string(&e.lower, DIGITS, false),
                decimal_string(&e.upper, DIGITS, true),
                decimal_string(&e.dim_lower, DIGITS, false),
                decimal_string(&e.dim_upper, DIGITS, true),
                self.status()
            ),
            Err(_) => format!("{q_lo},{q_hi},,,,,,{}", self.status()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.outcome {
            Ok(e) => serde_json::json!({
                "index": self.index,
                "q": self.q.to_json(),
                "n_used": e.n_used,
                "entropy": e.entropy().to_json(),
                "dimension": e.dimension().to_json(),
                "lower_source": e.source,
                "status": self.status(),
            }),
            Err(_) => serde_json::json!({ "index": self.index, "q": self.q.to_json(), "status": self.status() }),
        }
    }
}

pub const SWEEP_CSV_HEADER: &str = "q_lo,q_hi,n_used,entropy_lo,entropy_hi,dim_lo,dim_hi,status";

/// `steps + 1` evenly spaced exact bases from `q_from` to `q_to`.
pub fn sweep_grid(q_from: &Rational, q_to: &Rational, steps: usize, alphabet: Alphabet) -> Result<Vec<Base>> {
    if steps == 0 || q_from >= q_to {
        return Err(Error::Input("sweep needs q_from < q_to and at least one step".into()));
    }
    let h = (q_to - q_from) / rat_int(steps as i64);
    (0..=steps)
        .map(|i| Base::exact(q_from + &h * rat_int(i as i64), alphabet))
        .collect()
}

/// Sandwich at every grid point; per-point failures are recorded in the
/// row and the sweep continues.
pub fn sweep(grid: &[Base], cfg: &SandwichConfig) -> Vec<SweepRow> {
    let run = |(index, q): (usize, &Base)| SweepRow {
        index,
        q: q.clone(),
        outcome: sandwich_with(q, cfg),
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().enumerate().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().enumerate().map(run).collect()
    }
}

/// Consistency of a sweep with a nondecreasing continuous entropy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCheck {
    /// Pairs `i < j` whose lower bound at `i` exceeds the upper bound at `j`.
    pub order_violations: usize,
    /// Adjacent points whose lower entropy bound decreases.
    pub lower_decreases: usize,
    /// Largest gap between adjacent certified dimension intervals.
    pub max_dim_jump: f64,
}

pub fn sweep_check(rows: &[SweepRow]) -> SweepCheck {
    let ok: Vec<&EntropyEstimate> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let mut order_violations = 0;
    let mut min_upper_after = vec![None::<Rational>; ok.len()];
    for i in (0..ok.len()).rev() {
        let u = ok[i].upper.clone();
        min_upper_after[i] = Some(match &min_upper_after.get(i + 1).cloned().flatten() {
            Some(m) if m < &u => m.clone(),
            _ => u,
        });
    }
    for i in 0..ok.len().saturating_sub(1) {
        if let Some(m) = &min_upper_after[i + 1] {
            if &ok[i].lower > m {
                order_violations += 1;
            }
        }
    }
    let lower_decreases = ok.windows(2).filter(|w| w[1].lower < w[0].lower).count();
    let max_dim_jump = ok
        .windows(2)
        .map(|w| to_f64(&w[0].dimension().gap(&w[1].dimension())))
        .fold(0.0, f64::max);
    SweepCheck {
        order_violations,
        lower_decreases,
        max_dim_jump,
    }
}

/// Uncertified single-scale box count of `π_q(B_k(U_{q,n}))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCount {
    pub n: usize,
    pub k: usize,
    pub words: usize,
    pub boxes: usize,
    pub estimate: f64,
}

pub fn box_count_estimate(q: &Base, n: usize, k: usize) -> Result<BoxCount> {
    if k == 0 {
        return Err(Error::Input("k must be positive".into()));
    }
    let alpha = quasi_greedy_alpha(q, n)?;
    let sft = build_sft(&alpha, n, SftKind::UStrict)?;
    let words = sft.words(k)?;
    let lo = to_f64(q.lo());
    let mid = q.mid_f64();
    let m = q.alphabet().max_digit() as f64;
    let delta = m / (lo - 1.0) * lo.powi(-(k as i32));
    let mut boxes: HashSet<i64> = HashSet::new();
    for w in &words {
        let x = w.digits().iter().rev().fold(0.0f64, |acc, &d| (acc + d as f64) / mid);
        boxes.insert((x / delta).floor() as i64);
    }
    let estimate = if boxes.len() <= 1 {
        0.0
    } else {
        (boxes.len() as f64).ln() / (k as f64 * mid.ln())
    };
    Ok(BoxCount {
        n,
        k,
        words: words.len(),
        boxes: boxes.len(),
        estimate,
    })
}
