use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use univoque::collapse::{
    apply_f, decompose_lr, factorize_w, first_occurrence, in_window_language, iterate_f_nk, right_end_sequence,
    CollapseContext,
};
use univoque::dimension::plateau_from_word;
use univoque::expansions::{base_from_alpha, greedy_beta, minus_periodic_exceeds_kl, quasi_greedy_alpha};
use univoque::interval::{decimal_string, ln_enclosure, parse_rational, rat, to_f64};
use univoque::subshifts::{build_sft, count_words, entropy_bounds, Sft, SftKind};
use univoque::words::lex_compare;
use univoque::{AlphaTarget, Alphabet, Base, EventuallyPeriodicSeq, Rational, Sequence, Word};

fn bin() -> Alphabet {
    Alphabet::binary()
}

fn base(thousandths: i64) -> Base {
    Base::exact(rat(thousandths, 1000), bin()).unwrap()
}

fn word(d: Vec<u8>) -> Word {
    Word::new(d, bin()).unwrap()
}

fn periodic_context_alpha(lit: &str, len: usize) -> univoque::AlphaPrefix {
    let seq = EventuallyPeriodicSeq::parse(lit, bin()).unwrap();
    let q = base_from_alpha(&AlphaTarget::Periodic(seq), &rat(1, 1 << 40)).unwrap();
    quasi_greedy_alpha(&q, len).unwrap()
}

fn contexts() -> Vec<CollapseContext> {
    let mut out = Vec::new();
    for lit in ["1110011(0001101)", "1110010011(0001101101)"] {
        let a = periodic_context_alpha(lit, 40);
        let d = decompose_lr(&a, 3).unwrap();
        out.push(CollapseContext::from_decomposition(&a, &d).unwrap());
    }
    let a = periodic_context_alpha("11101(00011)", 40);
    out.push(CollapseContext::case_a(&factorize_w(&a, Some(2)).unwrap(), 1).unwrap());
    out
}

fn count(s: &Sft, k: usize) -> BigUint {
    count_words(s, k).unwrap().count
}

fn word_set(s: &Sft, k: usize) -> HashSet<Vec<u8>> {
    s.words(k).unwrap().into_iter().map(Word::into_digits).collect()
}

fn digits() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, 0..12)
}

fn sequence() -> impl Strategy<Value = EventuallyPeriodicSeq> {
    (
        prop::collection::vec(0u8..=1, 0..5),
        prop::collection::vec(0u8..=1, 1..5),
    )
        .prop_map(|(pre, per)| EventuallyPeriodicSeq::from_digits(pre, per, bin()).unwrap())
}

fn operand() -> impl Strategy<Value = Sequence> {
    prop_oneof![
        digits().prop_map(|d| Sequence::from(word(d))),
        sequence().prop_map(Sequence::from)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lex_order_is_total(a in operand(), b in operand(), c in operand()) {
        let ab = lex_compare(&a, &b).unwrap();
        prop_assert_eq!(ab.reverse(), lex_compare(&b, &a).unwrap());
        let bc = lex_compare(&b, &c).unwrap();
        if ab != Ordering::Greater && bc != Ordering::Greater {
            prop_assert_ne!(lex_compare(&a, &c).unwrap(), Ordering::Greater);
        }
    }

    #[test]
    fn periodic_canonical_form(pre in prop::collection::vec(0u8..=1, 0..5), per in prop::collection::vec(0u8..=1, 1..5)) {
        let s = EventuallyPeriodicSeq::from_digits(pre.clone(), per.clone(), bin()).unwrap();
        let mut naive = pre.clone();
        while naive.len() < 40 {
            naive.extend_from_slice(&per);
        }
        prop_assert_eq!(s.prefix(40), naive[..40].to_vec());
        prop_assert!(s.period().len() <= per.len() && s.preperiod().len() <= pre.len());
    }

    #[test]
    fn reflection_is_an_involution(d in digits()) {
        let w = word(d);
        prop_assert_eq!(w.reflect().reflect(), w);
    }

    #[test]
    fn quasi_greedy_satisfies_parry(q in 1001i64..=2000) {
        let a = quasi_greedy_alpha(&base(q), 40).unwrap();
        let d = a.digits();
        for n in 1..d.len() {
            prop_assert!(d[n..] <= d[..d.len() - n], "σ^{} α ≻ α at q = {}", n, q);
        }
        let b = greedy_beta(&base(q), 40).unwrap();
        prop_assert!(b.digits.digits() >= d);
    }

    #[test]
    fn alpha_is_left_continuous(q in 1001i64..=2000) {
        let exact_q = rat(q, 1000);
        let below = Base::exact(&exact_q - rat(1, 1_000_000_000_000), bin()).unwrap();
        let a = quasi_greedy_alpha(&base(q), 20).unwrap();
        let b = quasi_greedy_alpha(&below, 20).unwrap();
        prop_assert_eq!(a.digits(), b.digits());
    }

    #[test]
    fn counts_are_subadditive(q in 1500i64..=2000, n in 1usize..=8, j in 1usize..=8, k in 1usize..=8) {
        let alpha = quasi_greedy_alpha(&base(q), 8).unwrap();
        for kind in [SftKind::UStrict, SftKind::VWeak] {
            let s = build_sft(&alpha, n, kind).unwrap();
            prop_assert!(count(&s, j + k) <= count(&s, j) * count(&s, k));
        }
    }

    #[test]
    fn sandwich_is_monotone(q in 1500i64..=2000, n in 1usize..=7, k in 1usize..=10) {
        let alpha = quasi_greedy_alpha(&base(q), 8).unwrap();
        let u = word_set(&build_sft(&alpha, n, SftKind::UStrict).unwrap(), k);
        let u_next = word_set(&build_sft(&alpha, n + 1, SftKind::UStrict).unwrap(), k);
        let v = word_set(&build_sft(&alpha, n, SftKind::VWeak).unwrap(), k);
        let v_next = word_set(&build_sft(&alpha, n + 1, SftKind::VWeak).unwrap(), k);
        prop_assert!(u.is_subset(&u_next));
        prop_assert!(v_next.is_subset(&v));
        prop_assert!(u_next.is_subset(&v_next));
    }

    #[test]
    fn languages_are_reflection_closed(q in 1500i64..=2000, n in 1usize..=8, k in 1usize..=10) {
        let alpha = quasi_greedy_alpha(&base(q), 8).unwrap();
        for kind in [SftKind::UStrict, SftKind::VWeak] {
            let s = word_set(&build_sft(&alpha, n, kind).unwrap(), k);
            for w in &s {
                let r: Vec<u8> = w.iter().map(|d| 1 - d).collect();
                prop_assert!(s.contains(&r));
            }
        }
    }

    #[test]
    fn entropy_bounds_are_consistent(q in 1500i64..=2000, n in 1usize..=8) {
        let alpha = quasi_greedy_alpha(&base(q), 8).unwrap();
        let ln2 = ln_enclosure(&rat(2, 1), 128).unwrap();
        for kind in [SftKind::UStrict, SftKind::VWeak] {
            let s = build_sft(&alpha, n, kind).unwrap();
            let e = entropy_bounds(&s, 24).unwrap();
            prop_assert!(e.lower <= e.upper && e.lower >= Rational::from_integer(0.into()));
            prop_assert!(e.upper <= ln2.hi);
            for k in [4usize, 9, 16] {
                let c = count(&s, k);
                if c > BigUint::from(0u8) {
                    let per_k = to_f64(&e.lower) * k as f64;
                    prop_assert!(per_k <= (c.bits() as f64) * std::f64::consts::LN_2 + 1e-9);
                    prop_assert!(per_k <= c.to_string().parse::<f64>().unwrap().ln() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn collapse_map_commutes_with_reflection(pick in 0usize..3, d in prop::collection::vec(0u8..=1, 5..18)) {
        let ctx = &contexts()[pick];
        let x = word(d);
        prop_assume!(in_window_language(x.digits(), ctx.u().digits(), 1, SftKind::VWeak));
        let fx = apply_f(ctx, &x).unwrap();
        prop_assert_eq!(apply_f(ctx, &x.reflect()).unwrap(), fx.reflect());
        prop_assert!(in_window_language(fx.digits(), ctx.u().digits(), 1, SftKind::VWeak));
    }

    #[test]
    fn iterate_is_idempotent(pick in 0usize..3, d in prop::collection::vec(0u8..=1, 5..18)) {
        let ctx = &contexts()[pick];
        let x = word(d);
        prop_assume!(in_window_language(x.digits(), ctx.u().digits(), 1, SftKind::VWeak));
        let y = iterate_f_nk(ctx, &x).unwrap();
        prop_assert_eq!(first_occurrence(&y, ctx), None);
        prop_assert_eq!(iterate_f_nk(ctx, &y).unwrap(), y.clone());
        prop_assert!(in_window_language(y.digits(), ctx.u().digits(), 1, SftKind::UStrict));
    }

    #[test]
    fn factorization_postconditions(d in prop::collection::vec(0u8..=1, 3..9)) {
        let mut d = d;
        d[0] = 1;
        let w = word(d);
        prop_assume!(*w.digits().last().unwrap() == 1 && w.is_primitive().unwrap());
        let seq = right_end_sequence(&w).unwrap();
        let q = base_from_alpha(&AlphaTarget::Periodic(seq), &rat(1, 1 << 40)).unwrap();
        let alpha = quasi_greedy_alpha(&q, 200).unwrap();
        let mut checked = 0;
        for m1 in (1..w.len()).filter(|&m| w.prefix(m).is_primitive().unwrap()) {
            let Ok(f) = factorize_w(&alpha, Some(m1)) else { continue };
            checked += 1;
            let mut joined = f.v1.digits().to_vec();
            for (i, wi) in f.ws.iter().enumerate() {
                let vi = f.v(i + 1);
                prop_assert!(!wi.is_empty());
                prop_assert!(1 <= f.rs[i] && f.rs[i] <= vi.len() && f.rs[i] == wi.len());
                prop_assert!(vi.is_primitive().unwrap());
                let padded = EventuallyPeriodicSeq::new(wi, &word(vec![0])).unwrap();
                let bound = EventuallyPeriodicSeq::periodic(&vi.reflect().plus_last().unwrap()).unwrap();
                prop_assert_eq!(padded.lex_cmp(&bound).unwrap(), Ordering::Greater);
                joined.extend_from_slice(wi.digits());
            }
            prop_assert!(f.v(f.ws.len() + 1).is_primitive().unwrap());
            prop_assert_eq!(&alpha.digits_to(joined.len()).unwrap(), &joined);
        }
        prop_assume!(checked > 0);
    }

    #[test]
    fn plateau_endpoints_are_ordered(d in prop::collection::vec(0u8..=1, 2..9)) {
        let mut d = d;
        d[0] = 1;
        let w = word(d);
        prop_assume!(w.is_primitive().unwrap() && *w.digits().last().unwrap() > 0);
        let p = plateau_from_word(&w, &rat(1, 1 << 30)).unwrap();
        prop_assert!(p.q_l.hi() < p.q_r.lo());
        prop_assert_eq!(p.exceeds_kl, minus_periodic_exceeds_kl(&w).unwrap());
    }

    #[test]
    fn decimal_strings_round_outward(num in 1i64..10_000_000, den in 1i64..10_000) {
        let x = rat(num, den);
        let lo = parse_rational(&decimal_string(&x, 6, false)).unwrap();
        let hi = parse_rational(&decimal_string(&x, 6, true)).unwrap();
        prop_assert!(lo <= x && x <= hi && &hi - &lo <= rat(1, 1_000_000));
    }
}

#[test]
fn collapse_counting_consequence() {
    // #B_k(V)^N ≤ #B_k(U)^N (2N)^k, decided in integers
    for ctx in contexts() {
        let n = ctx.n();
        let half = n / 2;
        let v = Sft::from_bound(ctx.u().clone(), SftKind::VWeak).unwrap();
        let u = Sft::from_bound(ctx.u().clone(), SftKind::UStrict).unwrap();
        for k in n..=n + 6 {
            let lhs = num_traits::pow(count(&v, k), half);
            let rhs = num_traits::pow(count(&u, k), half) * num_traits::pow(BigUint::from(2 * half), k);
            assert!(lhs <= rhs, "u = {} k = {k}", ctx.u());
        }
    }
}
