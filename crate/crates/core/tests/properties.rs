//! Randomized checks of the algorithms against brute-force oracles.

use std::collections::{BTreeSet, HashSet, VecDeque};

use multiseq::corpus;
use multiseq::{
    check_btp, decompose_k, dw_explore, equiv_up_to, falsify_lipschitz, parse_automaton, render_automaton,
    verify_lip_witness, BtpResult, Budget, Error, FreeWord, GroupContext, GroupElement, Symbol, Transition,
    WeightedAutomaton,
};
use proptest::prelude::*;

const ALPHABET: [char; 2] = ['a', 'b'];

/// A random automaton over `Z` with up to `max_states` states.
fn z_automaton(max_states: usize, max_trans: usize) -> impl Strategy<Value = WeightedAutomaton> {
    (1..=max_states).prop_flat_map(move |n| {
        let trans = prop::collection::vec((0..n, 0..2usize, -2i64..=2, 0..n), 1..=max_trans);
        let init = prop::collection::vec((0..n, -1i64..=1), 1..=2);
        let fin = prop::collection::vec((0..n, -1i64..=1), 1..=2);
        (trans, init, fin).prop_map(move |(trans, init, fin)| {
            let states = (0..n).map(|i| format!("q{i}")).collect();
            let transitions = trans
                .into_iter()
                .map(|(src, a, e, dst)| Transition { src, letter: ALPHABET[a], weight: GroupElement::Int(e), dst })
                .collect();
            let rel = |v: Vec<(usize, i64)>| v.into_iter().map(|(q, e)| (q, GroupElement::Int(e))).collect();
            WeightedAutomaton::new(GroupContext::integers(), ALPHABET, states, rel(init), rel(fin), transitions)
                .unwrap()
                .trim()
        })
    })
}

fn free_word(max_len: usize) -> impl Strategy<Value = FreeWord> {
    prop::collection::vec((0..2usize, any::<bool>()), 0..=max_len)
        .prop_map(|v| FreeWord::new(v.into_iter().map(|(l, inv)| Symbol { letter: ['a', 'b'][l], inverse: inv })))
}

/// A random transducer-like automaton over the free group on `{a, b}`.
fn free_automaton() -> impl Strategy<Value = WeightedAutomaton> {
    (1..=3usize).prop_flat_map(|n| {
        let trans = prop::collection::vec((0..n, 0..2usize, free_word(2), 0..n), 1..=6);
        let init = prop::collection::vec((0..n, free_word(1)), 1..=2);
        let fin = prop::collection::vec((0..n, free_word(1)), 1..=2);
        (trans, init, fin).prop_map(move |(trans, init, fin)| {
            let states = (0..n).map(|i| format!("s{i}")).collect();
            let transitions = trans
                .into_iter()
                .map(|(src, a, e, dst)| Transition { src, letter: ['x', 'y'][a], weight: GroupElement::Word(e), dst })
                .collect();
            let rel = |v: Vec<(usize, FreeWord)>| v.into_iter().map(|(q, e)| (q, GroupElement::Word(e))).collect();
            WeightedAutomaton::new(
                GroupContext::free("ab".chars()),
                ['x', 'y'],
                states,
                rel(init),
                rel(fin),
                transitions,
            )
            .unwrap()
        })
    })
}

/// A random structurally sequential automaton; `weight` draws transition weights.
fn sequential<E: Strategy<Value = GroupElement> + Clone>(
    ctx: GroupContext,
    alphabet: [char; 2],
    weight: E,
) -> impl Strategy<Value = WeightedAutomaton> {
    (1..=3usize).prop_flat_map(move |n| {
        let row = prop::option::weighted(0.8, (weight.clone(), 0..n));
        let table = prop::collection::vec(row, 2 * n);
        let fin = prop::collection::vec(prop::option::of(weight.clone()), n);
        let (ctx, alphabet) = (ctx.clone(), alphabet);
        (table, fin, weight.clone()).prop_map(move |(table, fin, init)| {
            let states = (0..n).map(|i| format!("r{i}")).collect();
            let transitions = table
                .into_iter()
                .enumerate()
                .filter_map(|(i, cell)| {
                    cell.map(|(e, dst)| Transition { src: i / 2, letter: alphabet[i % 2], weight: e, dst })
                })
                .collect();
            let finals = fin.into_iter().enumerate().filter_map(|(q, e)| e.map(|e| (q, e))).collect();
            WeightedAutomaton::new(ctx.clone(), alphabet, states, vec![(0, init)], finals, transitions).unwrap()
        })
    })
}

fn z_weight() -> impl Strategy<Value = GroupElement> + Clone {
    (-2i64..=2).prop_map(GroupElement::Int)
}

fn positive_weight() -> impl Strategy<Value = GroupElement> + Clone {
    prop::collection::vec(prop::sample::select(vec!['a', 'b']), 0..=2)
        .prop_map(|v| GroupElement::word(&v.into_iter().collect::<String>()))
}

/// The union of two random sequential automata, so of degree at most 2.
fn two_sequential_z() -> impl Strategy<Value = WeightedAutomaton> {
    let s = || sequential(GroupContext::integers(), ALPHABET, z_weight());
    (s(), s()).prop_map(|(x, y)| x.union(&y).unwrap())
}

fn two_sequential_transducer() -> impl Strategy<Value = WeightedAutomaton> {
    let s = || sequential(GroupContext::free("ab".chars()), ['x', 'y'], positive_weight());
    (s(), s()).prop_map(|(x, y)| x.union(&y).unwrap())
}

/// A loop changing the delay of two runs on a common input, searched over
/// inputs `u` and loops `v` of bounded length. Finding one refutes BTP-1.
fn transducer_btp1_violation(w: &WeightedAutomaton, max_u: usize, max_v: usize) -> bool {
    let ctx = w.ctx();
    for u in multiseq::words_up_to(w.alphabet(), max_u) {
        let mut f: BTreeSet<_> = w.init().iter().cloned().collect();
        for &a in &u {
            f = w.step_frontier(&f, a).unwrap();
        }
        let f: Vec<_> = f.into_iter().collect();
        for (i, (p, x)) in f.iter().enumerate() {
            for (q, y) in &f[i + 1..] {
                let before = ctx.delay(x, y).unwrap();
                for v in multiseq::words_up_to(w.alphabet(), max_v).filter(|v| !v.is_empty()) {
                    let a = w.runs_on(&[*p], &v).unwrap();
                    let b = w.runs_on(&[*q], &v).unwrap();
                    for ra in a.iter().filter(|r| r.end == *p) {
                        for rb in b.iter().filter(|r| r.end == *q) {
                            let after =
                                ctx.delay(&ctx.op(x, &ra.weight).unwrap(), &ctx.op(y, &rb.weight).unwrap()).unwrap();
                            if after != before {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

/// BTP-1 over `Z` by brute force: some pair of states reachable on a common
/// input from initial states has a synchronized loop with different weights.
/// A closed walk with a non-zero difference exists iff one of length at most
/// `3·|Q|²` does, so the search is bounded.
fn btp1_fails_brute(w: &WeightedAutomaton) -> bool {
    let n = w.num_states();
    let mut reach = HashSet::new();
    let mut queue = VecDeque::new();
    for (p, _) in w.init() {
        for (q, _) in w.init() {
            if reach.insert((*p, *q)) {
                queue.push_back((*p, *q));
            }
        }
    }
    let step = |p: usize, q: usize| {
        let mut out = Vec::new();
        for t in w.transitions().iter().filter(|t| t.src == p) {
            for u in w.transitions().iter().filter(|u| u.src == q && u.letter == t.letter) {
                let d = t.weight.as_int().unwrap() - u.weight.as_int().unwrap();
                out.push((t.dst, u.dst, d));
            }
        }
        out
    };
    while let Some((p, q)) = queue.pop_front() {
        for (p2, q2, _) in step(p, q) {
            if reach.insert((p2, q2)) {
                queue.push_back((p2, q2));
            }
        }
    }
    let max_len = 3 * n * n;
    for &(p, q) in &reach {
        let mut seen = HashSet::from([(p, q, 0i64)]);
        let mut layer = vec![(p, q, 0i64)];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for &(a, b, d) in &layer {
                for (a2, b2, dd) in step(a, b) {
                    let s = (a2, b2, d + dd);
                    if a2 == p && b2 == q && s.2 != 0 {
                        return true;
                    }
                    if seen.insert(s) {
                        next.push(s);
                    }
                }
            }
            layer = next;
        }
    }
    false
}

fn budget() -> Budget {
    Budget { power_cap: 200_000, state_cap: 20_000, config_cap: 200_000, ..Budget::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn btp1_matches_brute_force(w in z_automaton(3, 7)) {
        prop_assume!(!w.init().is_empty());
        let r = check_btp(&w, 1, &budget()).unwrap();
        prop_assert!(!matches!(r, BtpResult::Inconclusive(_)));
        prop_assert_eq!(r.is_fails(), btp1_fails_brute(&w), "{}", render_automaton(&w));
        if let BtpResult::Fails(c) = r {
            prop_assert!(c.verify(&w).is_ok());
        }
    }

    #[test]
    fn btp_monotone_and_machine_independent(w in z_automaton(3, 6)) {
        prop_assume!(!w.init().is_empty());
        let doubled = w.union(&w).unwrap();
        let mut previous = false;
        for k in 1..=3 {
            let r = check_btp(&w, k, &budget()).unwrap();
            prop_assert!(!previous || r.is_holds(), "BTP-{} fails after BTP-{} holds", k, k - 1);
            previous = r.is_holds();
            if k <= 2 {
                let rd = check_btp(&doubled, k, &budget()).unwrap();
                prop_assert_eq!(rd.is_holds(), r.is_holds());
            }
            if let BtpResult::Fails(c) = &r {
                prop_assert!(c.verify(&w).is_ok());
            }
        }
    }

    #[test]
    fn decomposition_matches_oracle(w in z_automaton(3, 6)) {
        prop_assume!(!w.init().is_empty());
        match decompose_k(&w, 2, &budget()) {
            Ok(parts) => {
                prop_assert!(parts.len() <= 2);
                prop_assert!(parts.iter().all(WeightedAutomaton::is_structurally_sequential));
                let union = WeightedAutomaton::union_all(&parts).unwrap();
                prop_assert!(equiv_up_to(&union, &w, 7).unwrap(), "{}", render_automaton(&w));
            }
            Err(Error::BtpViolated { k: 2 }) => {
                prop_assert!(check_btp(&w, 2, &budget()).unwrap().is_fails());
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn two_sequential_decomposes(w in two_sequential_z(), word in prop::collection::vec(prop::sample::select(vec!['a', 'b']), 0..30)) {
        let w = w.trim();
        prop_assume!(!w.init().is_empty());
        prop_assert!(check_btp(&w, 2, &budget()).unwrap().is_holds());
        let parts = decompose_k(&w, 2, &budget()).unwrap();
        prop_assert!(parts.len() <= 2);
        prop_assert!(parts.iter().all(WeightedAutomaton::is_structurally_sequential));
        let union = WeightedAutomaton::union_all(&parts).unwrap();
        prop_assert!(equiv_up_to(&union, &w, 7).unwrap(), "{}", render_automaton(&w));
        prop_assert_eq!(union.eval(&word).unwrap(), w.eval(&word).unwrap());
    }

    #[test]
    fn two_sequential_transducers(w in two_sequential_transducer()) {
        let w = w.trim();
        prop_assume!(!w.init().is_empty());
        prop_assert!(check_btp(&w, 2, &budget()).unwrap().is_holds());
        let r = check_btp(&w, 1, &budget()).unwrap();
        prop_assert!(!matches!(r, BtpResult::Inconclusive(_)));
        if transducer_btp1_violation(&w, 3, 3) {
            prop_assert!(r.is_fails(), "{}", render_automaton(&w));
        }
        match r {
            BtpResult::Fails(c) => prop_assert!(c.verify(&w).is_ok()),
            _ => {
                let parts = decompose_k(&w, 1, &budget()).unwrap();
                prop_assert_eq!(parts.len(), 1);
            }
        }
    }

    #[test]
    fn delay_construction_invariants(w in z_automaton(3, 7)) {
        prop_assume!(!w.init().is_empty());
        let frag = dw_explore(&w, 4, 5_000).unwrap();
        for (i, s) in frag.states.iter().enumerate() {
            prop_assert!(i == 0 || s.has_identity_delay());
            // every pair is witnessed by a run on the access word
            let mut frontier: BTreeSet<_> = w.init().iter().cloned().collect();
            for &a in &frag.access[i] {
                frontier = w.step_frontier(&frontier, a).unwrap();
            }
            for (q, beta) in &s.pairs {
                let total = w.ctx().op(&frag.access_output[i], beta).unwrap();
                prop_assert!(frontier.contains(&(*q, total)));
            }
        }
    }

    #[test]
    fn lipschitz_witnesses_verify(w in z_automaton(3, 6), l in 1u64..20) {
        prop_assume!(!w.init().is_empty());
        if let BtpResult::Fails(c) = check_btp(&w, 1, &budget()).unwrap() {
            let wit = falsify_lipschitz(&w, &c, l).unwrap();
            prop_assert!(verify_lip_witness(&w, &wit));
        }
    }

    #[test]
    fn format_round_trip_z(w in z_automaton(4, 8)) {
        let text = render_automaton(&w);
        prop_assert_eq!(&parse_automaton(&text).unwrap(), &w);
    }

    #[test]
    fn format_round_trip_free(w in free_automaton()) {
        let text = render_automaton(&w);
        prop_assert_eq!(&parse_automaton(&text).unwrap(), &w);
    }

    #[test]
    fn transducer_btp_is_consistent(w in free_automaton()) {
        let w = w.trim();
        prop_assume!(!w.init().is_empty());
        let all_positive = w.transitions().iter().map(|t| &t.weight)
            .chain(w.init().iter().map(|(_, e)| e))
            .chain(w.finals().iter().map(|(_, e)| e))
            .all(|e| e.as_word().is_some_and(FreeWord::is_positive));
        prop_assume!(all_positive);
        let r1 = check_btp(&w, 1, &budget()).unwrap();
        let r2 = check_btp(&w, 2, &budget()).unwrap();
        prop_assert!(!r1.is_holds() || r2.is_holds());
        if let BtpResult::Fails(c) = r1 {
            prop_assert!(c.verify(&w).is_ok());
        }
    }

    #[test]
    fn free_delay_compatible_with_extension(
        a in free_word(3), ap in free_word(3), b in free_word(3), c in free_word(3), cp in free_word(3)
    ) {
        let ctx = GroupContext::free("ab".chars());
        let (a, ap, b, c, cp) =
            (GroupElement::Word(a), GroupElement::Word(ap), GroupElement::Word(b), GroupElement::Word(c), GroupElement::Word(cp));
        let bp = ctx.op(&b, &ctx.delay(&a, &ap).unwrap()).unwrap();
        prop_assert_eq!(ctx.delay(&b, &bp).unwrap(), ctx.delay(&a, &ap).unwrap());
        let lhs = ctx.delay(&ctx.op(&a, &c).unwrap(), &ctx.op(&ap, &cp).unwrap()).unwrap();
        let rhs = ctx.delay(&ctx.op(&b, &c).unwrap(), &ctx.op(&bp, &cp).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn w0_decomposition_on_long_words(word in prop::collection::vec(prop::sample::select(vec!['a', 'b']), 0..60)) {
        let w0 = corpus::w0();
        let parts = decompose_k(&w0, 2, &Budget::default()).unwrap();
        let union = WeightedAutomaton::union_all(&parts).unwrap();
        prop_assert_eq!(union.eval(&word).unwrap(), w0.eval(&word).unwrap());
    }
}

/// A k-sequential relation is Lipschitz of order k with constant `4·M_W`:
/// no `k + 1` pairs of short words violate it.
#[test]
fn lipschitz_bound_on_multi_sequential_corpus() {
    for entry in corpus::builtin_corpus() {
        let Some(d) = entry.expected_degree else { continue };
        let w = &entry.automaton;
        let len = if w.alphabet().len() <= 2 { 8 } else { 5 };
        let l = 4 * w.mw_constant();
        let found = multiseq::find_lip_violation(w, d, l, len).unwrap();
        assert!(found.is_none(), "{}: {:?}", entry.name, found);
    }
}
