//! The window-defined subshifts `U_{q,n}` (strict) and `V_{q,n}` (weak) as
//! de Bruijn automata on `(n−1)`-words, exact language counts, and
//! certified entropy bounds.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expansions::AlphaPrefix;
use crate::interval::{ln_biguint, ln_enclosure, Rational, DEFAULT_LOG_BITS};
use crate::words::{Alphabet, Word};

/// Default cap on automaton states, overridable by `UNIVOQUE_STATE_CAP`.
pub const DEFAULT_STATE_CAP: usize = 1 << 22;

/// Default cap on `k · states` work in a single count.
pub const DEFAULT_COUNT_BUDGET: u64 = 1 << 36;

pub fn state_cap() -> usize {
    std::env::var("UNIVOQUE_STATE_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SftKind {
    /// `refl(a_1…a_n) ≺ w ≺ a_1…a_n` for every window.
    UStrict,
    /// `refl(a_1…a_n) ≼ w ≼ a_1…a_n` for every window.
    VWeak,
}

/// Which states survive pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Trim {
    /// States with an infinite forward continuation.
    #[default]
    Forward,
    /// States with infinite forward and backward continuations.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SftDefinition {
    Window { kind: SftKind, bound: Word },
    Forbidden(Vec<Word>),
}

/// A subshift of finite type given by allowed length-`n` windows, stored as
/// its trimmed de Bruijn graph in compressed sparse row form.
#[derive(Debug, Clone)]
pub struct Sft {
    n: usize,
    alphabet: Alphabet,
    definition: SftDefinition,
    trim: Trim,
    /// Live states, sorted; big-endian base-`(M+1)` codes of `(n−1)`-words.
    states: Vec<u128>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    labels: Vec<u8>,
}

fn window_between(w: &[u8], lo: &[u8], hi: &[u8], strict: bool) -> bool {
    let a = w.cmp(&lo[..w.len()]);
    let b = w.cmp(&hi[..w.len()]);
    if strict {
        a == Ordering::Greater && b == Ordering::Less
    } else {
        a != Ordering::Less && b != Ordering::Greater
    }
}

/// `U_{q,n}` or `V_{q,n}` from a certified prefix of `α(q)`.
pub fn build_sft(alpha: &AlphaPrefix, n: usize, kind: SftKind) -> Result<Sft> {
    if n == 0 {
        return Err(Error::Input("window length must be at least 1".into()));
    }
    if n > alpha.certified_len() {
        return Err(Error::Input(format!(
            "window length {n} exceeds the {} certified digits",
            alpha.certified_len()
        )));
    }
    Sft::from_bound(alpha.word().prefix(n), kind)
}

impl Sft {
    /// The window subshift bounded by `bound = a_1…a_n` and its reflection.
    pub fn from_bound(bound: Word, kind: SftKind) -> Result<Self> {
        Self::from_bound_with(bound, kind, Trim::Forward, state_cap())
    }

    pub fn from_bound_with(bound: Word, kind: SftKind, trim: Trim, cap: usize) -> Result<Self> {
        let n = bound.len();
        if n == 0 {
            return Err(Error::Input("window length must be at least 1".into()));
        }
        let hi = bound.digits().to_vec();
        let lo = bound.reflect().into_digits();
        let strict = kind == SftKind::UStrict;
        let partial = |s: &[u8]| window_between(s, &lo, &hi, false);
        let full = |w: &[u8]| window_between(w, &lo, &hi, strict);
        let alphabet = bound.alphabet();
        Self::build(
            alphabet,
            n,
            SftDefinition::Window { kind, bound },
            trim,
            cap,
            &partial,
            &full,
        )
    }

    /// Sequences avoiding every listed word; `n` is the longest length.
    pub fn from_forbidden(alphabet: Alphabet, forbidden: Vec<Word>) -> Result<Self> {
        let n = forbidden.iter().map(Word::len).max().unwrap_or(1).max(1);
        let list: Vec<Vec<u8>> = forbidden.iter().map(|w| w.digits().to_vec()).collect();
        let clean = |s: &[u8]| {
            !list
                .iter()
                .any(|f| !f.is_empty() && s.windows(f.len()).any(|x| x == f.as_slice()))
        };
        let partial = |s: &[u8]| clean(s);
        let full = |w: &[u8]| clean(w);
        Self::build(
            alphabet,
            n,
            SftDefinition::Forbidden(forbidden),
            Trim::Forward,
            state_cap(),
            &partial,
            &full,
        )
    }

    /// `partial` must accept every suffix-segment of a word that can occur
    /// inside an admissible sequence; `full` decides length-`n` windows.
    fn build(
        alphabet: Alphabet,
        n: usize,
        definition: SftDefinition,
        trim: Trim,
        cap: usize,
        partial: &dyn Fn(&[u8]) -> bool,
        full: &dyn Fn(&[u8]) -> bool,
    ) -> Result<Self> {
        let base = alphabet.size() as u128;
        let width = n - 1;
        if (width as f64) * (base as f64).log2() >= 127.0 {
            return Err(Error::Resource(format!(
                "(n−1)-words of length {width} do not fit the state encoding"
            )));
        }
        // Candidate states: (n−1)-words whose every suffix is weakly
        // admissible, in lexicographic (hence code) order.
        let mut states: Vec<u128> = Vec::new();
        let mut word = Vec::with_capacity(width);
        let mut stack: Vec<(usize, u8)> = vec![(0, 0)];
        if width == 0 {
            states.push(0);
            stack.clear();
        }
        while let Some((depth, digit)) = stack.pop() {
            word.truncate(depth);
            if digit > alphabet.max_digit() {
                continue;
            }
            if digit < alphabet.max_digit() {
                stack.push((depth, digit + 1));
            }
            word.push(digit);
            if !(0..word.len()).all(|j| partial(&word[j..])) {
                continue;
            }
            if word.len() == width {
                if states.len() >= cap {
                    return Err(Error::Resource(format!("more than {cap} automaton states at n = {n}")));
                }
                states.push(word.iter().fold(0u128, |acc, &d| acc * base + d as u128));
            } else {
                stack.push((depth + 1, 0));
            }
        }
        states.sort_unstable();
        let modulus = base.pow(width as u32);
        let mut offsets = Vec::with_capacity(states.len() + 1);
        let mut targets = Vec::new();
        let mut labels = Vec::new();
        let mut window = vec![0u8; n];
        offsets.push(0u32);
        for &s in &states {
            decode_into(s, base, &mut window[..width]);
            for d in 0..=alphabet.max_digit() {
                window[width] = d;
                if full(&window) {
                    let t = if width == 0 {
                        0
                    } else {
                        (s % (modulus / base)) * base + d as u128
                    };
                    if let Ok(j) = states.binary_search(&t) {
                        targets.push(j as u32);
                        labels.push(d);
                    }
                }
            }
            offsets.push(targets.len() as u32);
        }
        let raw = Sft {
            n,
            alphabet,
            definition,
            trim,
            states,
            offsets,
            targets,
            labels,
        };
        Ok(raw.trimmed(trim))
    }

    fn trimmed(self, trim: Trim) -> Self {
        let count = self.states.len();
        let mut alive = vec![true; count];
        let mut out_deg: Vec<u32> = (0..count).map(|i| self.offsets[i + 1] - self.offsets[i]).collect();
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); count];
        let mut in_deg = vec![0u32; count];
        for i in 0..count {
            for e in self.offsets[i]..self.offsets[i + 1] {
                let t = self.targets[e as usize] as usize;
                preds[t].push(i as u32);
                in_deg[t] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..count)
            .filter(|&i| out_deg[i] == 0 || (trim == Trim::TwoSided && in_deg[i] == 0))
            .collect();
        for &i in &queue {
            alive[i] = false;
        }
        while let Some(i) = queue.pop() {
            for &p in &preds[i] {
                let p = p as usize;
                out_deg[p] -= 1;
                if alive[p] && out_deg[p] == 0 {
                    alive[p] = false;
                    queue.push(p);
                }
            }
            if trim == Trim::TwoSided {
                for e in self.offsets[i]..self.offsets[i + 1] {
                    let t = self.targets[e as usize] as usize;
                    in_deg[t] -= 1;
                    if alive[t] && in_deg[t] == 0 {
                        alive[t] = false;
                        queue.push(t);
                    }
                }
            }
        }
        let mut index = vec![u32::MAX; count];
        let mut states = Vec::new();
        for i in 0..count {
            if alive[i] {
                index[i] = states.len() as u32;
                states.push(self.states[i]);
            }
        }
        let mut offsets = vec![0u32];
        let mut targets = Vec::new();
        let mut labels = Vec::new();
        for i in 0..count {
            if !alive[i] {
                continue;
            }
            for e in self.offsets[i]..self.offsets[i + 1] {
                let t = self.targets[e as usize] as usize;
                if alive[t] {
                    targets.push(index[t]);
                    labels.push(self.labels[e as usize]);
                }
            }
            offsets.push(targets.len() as u32);
        }
        Sft {
            states,
            offsets,
            targets,
            labels,
            trim,
            ..self
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn definition(&self) -> &SftDefinition {
        &self.definition
    }

    pub fn trim(&self) -> Trim {
        self.trim
    }

    pub fn kind(&self) -> Option<SftKind> {
        match &self.definition {
            SftDefinition::Window { kind, .. } => Some(*kind),
            SftDefinition::Forbidden(_) => None,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn base(&self) -> u128 {
        self.alphabet.size() as u128
    }

    /// The `(n−1)`-word of a live state.
    pub fn state_word(&self, i: usize) -> Word {
        let mut digits = vec![0u8; self.n - 1];
        decode_into(self.states[i], self.base(), &mut digits);
        Word::new(digits, self.alphabet).expect("state digits lie in the alphabet")
    }

    /// `(digit, successor)` pairs of a live state.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = (u8, usize)> + '_ {
        let (a, b) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
        self.labels[a..b]
            .iter()
            .copied()
            .zip(self.targets[a..b].iter().map(|&t| t as usize))
    }

    fn find_state(&self, digits: &[u8]) -> Option<usize> {
        let code = digits.iter().fold(0u128, |acc, &d| acc * self.base() + d as u128);
        self.states.binary_search(&code).ok()
    }

    /// Membership in the language `B_{|w|}` of the trimmed automaton.
    pub fn contains(&self, w: &Word) -> bool {
        if w.alphabet() != self.alphabet || self.is_empty() {
            return false;
        }
        let d = w.digits();
        let width = self.n - 1;
        if d.len() < width {
            let rest = (width - d.len()) as u32;
            let lo = d.iter().fold(0u128, |acc, &x| acc * self.base() + x as u128) * self.base().pow(rest);
            let hi = lo + self.base().pow(rest);
            let start = self.states.partition_point(|&s| s < lo);
            return start < self.states.len() && self.states[start] < hi;
        }
        let Some(mut state) = self.find_state(&d[..width]) else {
            return false;
        };
        for &digit in &d[width..] {
            match self.successors(state).find(|&(l, _)| l == digit) {
                Some((_, t)) => state = t,
                None => return false,
            }
        }
        true
    }

    /// All words of `B_k`, in lexicographic order.
    pub fn words(&self, k: usize) -> Result<Vec<Word>> {
        let count = count_words(self, k)?.count;
        if count > BigUint::from(1u32 << 24) {
            return Err(Error::Resource(format!("B_{k} has {count} words")));
        }
        let mut out = Vec::new();
        let width = self.n - 1;
        if k <= width {
            let mut last: Option<Vec<u8>> = None;
            for i in 0..self.states.len() {
                let w = self.state_word(i).into_digits()[..k].to_vec();
                if last.as_ref() != Some(&w) {
                    out.push(Word::new(w.clone(), self.alphabet)?);
                    last = Some(w);
                }
            }
            return Ok(out);
        }
        for i in 0..self.states.len() {
            let mut path = self.state_word(i).into_digits();
            self.extend_paths(i, k - width, &mut path, &mut out)?;
        }
        Ok(out)
    }

    fn extend_paths(&self, state: usize, steps: usize, path: &mut Vec<u8>, out: &mut Vec<Word>) -> Result<()> {
        if steps == 0 {
            out.push(Word::new(path.clone(), self.alphabet)?);
            return Ok(());
        }
        for (d, t) in self.successors(state) {
            path.push(d);
            self.extend_paths(t, steps - 1, path, out)?;
            path.pop();
        }
        Ok(())
    }

    /// One line per live state: `word: digit->word …`.
    pub fn adjacency_text(&self) -> String {
        let mut s = String::new();
        let show = |w: Word| if w.is_empty() { "ε".to_string() } else { w.to_string() };
        for i in 0..self.states.len() {
            let _ = write!(s, "{}:", show(self.state_word(i)));
            for (d, t) in self.successors(i) {
                let _ = write!(s, " {}->{}", d, show(self.state_word(t)));
            }
            s.push('\n');
        }
        s
    }

    /// Strongly connected components of the live graph (iterative Tarjan),
    /// each as a list of state indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let count = self.states.len();
        let mut index = vec![usize::MAX; count];
        let mut low = vec![0usize; count];
        let mut on_stack = vec![false; count];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut next = 0usize;
        for root in 0..count {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, self.offsets[root] as usize)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut e)) = call.last_mut() {
                if *e < self.offsets[v + 1] as usize {
                    let w = self.targets[*e] as usize;
                    *e += 1;
                    if index[w] == usize::MAX {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, self.offsets[w] as usize));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }
}

fn decode_into(mut code: u128, base: u128, out: &mut [u8]) {
    for slot in out.iter_mut().rev() {
        *slot = (code % base) as u8;
        code /= base;
    }
}

/// `#B_k` for one `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordCount {
    pub k: usize,
    pub count: BigUint,
}

/// `#B_k` exactly, by dynamic programming over the live graph.
pub fn count_words(s: &Sft, k: usize) -> Result<WordCount> {
    Ok(count_words_upto(s, k, k)?.pop().expect("one count requested"))
}

/// `#B_j` for `k_from ≤ j ≤ k_to`.
pub fn count_words_upto(s: &Sft, k_from: usize, k_to: usize) -> Result<Vec<WordCount>> {
    count_words_budget(s, k_from, k_to, DEFAULT_COUNT_BUDGET)
}

pub fn count_words_budget(s: &Sft, k_from: usize, k_to: usize, budget: u64) -> Result<Vec<WordCount>> {
    if k_from == 0 || k_from > k_to {
        return Err(Error::Input(format!("word lengths must satisfy 1 ≤ {k_from} ≤ {k_to}")));
    }
    let work = (k_to as u64).saturating_mul(s.edge_count().max(s.state_count()) as u64);
    if work > budget {
        return Err(Error::Resource(format!(
            "counting to k = {k_to} on {} edges exceeds the budget {budget}",
            s.edge_count()
        )));
    }
    let width = s.n - 1;
    let mut out = Vec::new();
    for k in k_from..=k_to.min(width) {
        let div = s.base().pow((width - k) as u32);
        let mut distinct = 0u64;
        let mut last = None;
        for &code in &s.states {
            let p = code / div;
            if last != Some(p) {
                distinct += 1;
                last = Some(p);
            }
        }
        out.push(WordCount {
            k,
            count: BigUint::from(distinct),
        });
    }
    if k_to <= width {
        return Ok(out);
    }
    if s.is_empty() {
        out.extend((k_from.max(width + 1)..=k_to).map(|k| WordCount {
            k,
            count: BigUint::zero(),
        }));
        return Ok(out);
    }
    // paths[i] = number of paths with k − (n−1) edges leaving state i
    let mut paths = PathCounts::Small(vec![1u128; s.state_count()]);
    for k in width + 1..=k_to {
        paths = paths.step(s);
        if k >= k_from {
            out.push(WordCount {
                k,
                count: paths.total(),
            });
        }
    }
    Ok(out)
}

enum PathCounts {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

impl PathCounts {
    fn step(self, s: &Sft) -> Self {
        match self {
            PathCounts::Small(v) => {
                let next: Option<Vec<u128>> = (0..v.len())
                    .map(|i| s.successors(i).try_fold(0u128, |acc, (_, j)| acc.checked_add(v[j])))
                    .collect();
                match next {
                    Some(next) => PathCounts::Small(next),
                    None => PathCounts::Big(v.into_iter().map(BigUint::from).collect()).step(s),
                }
            }
            PathCounts::Big(v) => PathCounts::Big(
                (0..v.len())
                    .map(|i| s.successors(i).map(|(_, j)| &v[j]).sum())
                    .collect(),
            ),
        }
    }

    fn total(&self) -> BigUint {
        match self {
            PathCounts::Small(v) => match v.iter().try_fold(0u128, |acc, &x| acc.checked_add(x)) {
                Some(t) => BigUint::from(t),
                None => v.iter().map(|&x| BigUint::from(x)).sum(),
            },
            PathCounts::Big(v) => v.iter().sum(),
        }
    }
}

/// JSON array of decimal strings.
pub fn counts_json(counts: &[WordCount]) -> serde_json::Value {
    serde_json::Value::Array(
        counts
            .iter()
            .map(|c| serde_json::Value::String(c.count.to_string()))
            .collect(),
    )
}

/// Certified bounds on the topological entropy (natural log).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyBounds {
    pub lower: Rational,
    pub upper: Rational,
    /// The word length achieving the counting upper bound.
    pub k_used: usize,
    pub scc_count: usize,
    pub empty: bool,
    /// `exp(h)` when the Collatz–Wielandt bracket closes on the dominant
    /// component.
    pub spectral_radius: Option<Rational>,
}

impl EntropyBounds {
    pub fn gap(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn is_zero(&self) -> bool {
        self.upper.is_zero()
    }

    fn empty() -> Self {
        EntropyBounds {
            lower: Rational::zero(),
            upper: Rational::zero(),
            k_used: 0,
            scc_count: 0,
            empty: true,
            spectral_radius: None,
        }
    }
}

/// Collatz–Wielandt bracket `c_low ≤ ρ ≤ c_up` for one component.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CwBracket {
    low: Rational,
    up: Rational,
}

fn cw_component(s: &Sft, comp: &[usize]) -> CwBracket {
    let size = comp.len();
    let mut local = std::collections::HashMap::with_capacity(size);
    for (li, &g) in comp.iter().enumerate() {
        local.insert(g, li);
    }
    let edges: Vec<Vec<usize>> = comp
        .iter()
        .map(|&g| s.successors(g).filter_map(|(_, t)| local.get(&t).copied()).collect())
        .collect();
    let internal: usize = edges.iter().map(Vec::len).sum();
    if internal == 0 {
        return CwBracket {
            low: Rational::zero(),
            up: Rational::zero(),
        };
    }
    if edges.iter().all(|e| e.len() == 1) {
        return CwBracket {
            low: Rational::one(),
            up: Rational::one(),
        };
    }
    // Power iteration on A + I, which is primitive on an irreducible block.
    let mut x = vec![1.0f64; size];
    let mut y = vec![0.0f64; size];
    for round in 0..4000 {
        for (i, e) in edges.iter().enumerate() {
            y[i] = x[i] + e.iter().map(|&j| x[j]).sum::<f64>();
        }
        let m = y.iter().cloned().fold(0.0f64, f64::max);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = (yi / m).max(1e-280);
        }
        if round % 16 == 15 {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (i, e) in edges.iter().enumerate() {
                let r = e.iter().map(|&j| x[j]).sum::<f64>() / x[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
    }
    let m = x.iter().cloned().fold(0.0f64, f64::max);
    let scale = (1u64 << 40) as f64;
    let w: Vec<u64> = x.iter().map(|&v| ((v / m) * scale).ceil().max(1.0) as u64).collect();
    let mut low: Option<(u128, u128)> = None;
    let mut up: Option<(u128, u128)> = None;
    for (i, e) in edges.iter().enumerate() {
        let aw: u128 = e.iter().map(|&j| w[j] as u128).sum();
        let wi = w[i] as u128;
        if low.is_none_or(|(n, d)| aw * d < n * wi) {
            low = Some((aw, wi));
        }
        if up.is_none_or(|(n, d)| aw * d > n * wi) {
            up = Some((aw, wi));
        }
    }
    let to_rat = |(n, d): (u128, u128)| Rational::new(n.into(), d.into());
    CwBracket {
        low: to_rat(low.unwrap()),
        up: to_rat(up.unwrap()),
    }
}

fn cw_all(s: &Sft, comps: &[Vec<usize>]) -> Vec<CwBracket> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        comps.par_iter().map(|c| cw_component(s, c)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        comps.iter().map(|c| cw_component(s, c)).collect()
    }
}

/// Entropy bounds: the lower end is the best Collatz–Wielandt lower bound
/// over components; the upper end is the least of the Collatz–Wielandt
/// upper bound, `min_{k ≤ k_max} log #B_k / k` and `log(M+1)`.
pub fn entropy_bounds(s: &Sft, k_max: usize) -> Result<EntropyBounds> {
    entropy_bounds_with(s, k_max, DEFAULT_LOG_BITS)
}

pub fn entropy_bounds_with(s: &Sft, k_max: usize, bits: u32) -> Result<EntropyBounds> {
    if k_max == 0 {
        return Err(Error::Input("k_max must be at least 1".into()));
    }
    if s.is_empty() {
        return Ok(EntropyBounds::empty());
    }
    let comps = s.components();
    let brackets = cw_all(s, &comps);
    let c_low = brackets.iter().map(|b| b.low.clone()).max().unwrap();
    let c_up = brackets.iter().map(|b| b.up.clone()).max().unwrap();
    let dominant = brackets.iter().find(|b| b.low == c_low).unwrap();
    let spectral_radius = (dominant.low == dominant.up && c_up == c_low).then(|| c_low.clone());

    let lower = if c_low <= Rational::one() {
        Rational::zero()
    } else {
        ln_enclosure(&c_low, bits)?.lo
    };
    let mut upper = if c_up <= Rational::one() {
        Rational::zero()
    } else {
        ln_enclosure(&c_up, bits)?.hi
    };
    let full = ln_enclosure(&Rational::from_integer((s.alphabet.size() as i64).into()), bits)?.hi;
    if full < upper {
        upper = full;
    }
    let mut k_used = 0;
    if !upper.is_zero() {
        let counts = count_words_upto(s, 1, k_max)?;
        let best = counts.iter().filter(|c| !c.count.is_zero()).min_by(|a, b| {
            let fa = approx_ln(&a.count) / a.k as f64;
            let fb = approx_ln(&b.count) / b.k as f64;
            fa.partial_cmp(&fb).unwrap_or(Ordering::Equal)
        });
        if let Some(best) = best {
            let bound = if best.count.is_one() {
                Rational::zero()
            } else {
                ln_biguint(&best.count, bits)?.hi / Rational::from_integer((best.k as i64).into())
            };
            if bound < upper {
                upper = bound;
                k_used = best.k;
            }
        }
    }
    if lower > upper {
        return Err(Error::Internal(format!(
            "entropy bounds crossed: {} > {}",
            crate::interval::to_f64(&lower),
            crate::interval::to_f64(&upper)
        )));
    }
    Ok(EntropyBounds {
        lower,
        upper,
        k_used,
        scc_count: comps.len(),
        empty: false,
        spectral_radius,
    })
}

fn approx_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 60;
        (x >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Whether every suffix of `w` lies weakly between the α-prefix of its
/// length and the reflection of that prefix. For `q ∈ 𝒰` this is
/// membership in `B_{|w|}(V_q)`; elsewhere it can accept words with no
/// admissible continuation (`0010001` at `q = 1.85`).
pub fn v_language_member(w: &Word, alpha: &AlphaPrefix) -> Result<bool> {
    if w.len() > alpha.certified_len() {
        return Err(Error::PrefixTooShort {
            needed: w.len(),
            available: alpha.certified_len(),
        });
    }
    if w.alphabet() != alpha.alphabet() {
        return Err(Error::Input("word and expansion use different alphabets".into()));
    }
    Ok(weakly_admissible(
        w.digits(),
        alpha.digits(),
        alpha.alphabet().max_digit(),
    ))
}

/// The suffix test behind [`v_language_member`] on raw digits.
pub fn weakly_admissible(w: &[u8], a: &[u8], max: u8) -> bool {
    (0..w.len()).all(|j| {
        let s = &w[j..];
        let l = s.len();
        s <= &a[..l]
            && s.iter()
                .zip(&a[..l])
                .map(|(&x, &y)| x.cmp(&(max - y)))
                .find(|o| *o != Ordering::Equal)
                != Some(Ordering::Less)
    })
}
