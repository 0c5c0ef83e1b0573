//! Reference automata with known answers.

use std::collections::BTreeMap;

use crate::cra::{CostRegisterAutomaton, CraBuilder};
use crate::group::GroupContext;
use crate::wa::{AutomatonBuilder, WeightedAutomaton};

/// Expected outcome of the BTP check at a given order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedBtp {
    Holds,
    Fails,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub automaton: WeightedAutomaton,
    /// `None` when the relation is not multi-sequential.
    pub expected_degree: Option<usize>,
    pub expected_btp: BTreeMap<usize, ExpectedBtp>,
    /// Where the expected values come from.
    pub provenance: &'static str,
}

fn w0_builder(alphabet: &str) -> AutomatonBuilder {
    AutomatonBuilder::new(GroupContext::integers(), alphabet.chars())
        .states(["q_a", "q_f", "q_b"])
        .init("q_a", "0")
        .init("q_f", "0")
        .init("q_b", "0")
        .trans("q_a", 'b', "0", "q_a")
        .trans("q_a", 'a', "1", "q_a")
        .trans("q_a", 'a', "1", "q_f")
        .trans("q_b", 'a', "0", "q_b")
        .trans("q_b", 'b', "1", "q_b")
        .trans("q_b", 'b', "1", "q_f")
}

/// `f_last`: maps a word to the number of occurrences of its last letter
/// (0 on the empty word).
pub fn w0() -> WeightedAutomaton {
    w0_builder("ab").final_("q_f", "0").build().expect("valid automaton")
}

/// `f_last` applied to both halves of `u#v`, summed.
pub fn w1() -> WeightedAutomaton {
    let mut b = w0_builder("ab#").states(["q'_a", "q'_f", "q'_b"]).final_("q'_f", "0");
    for (src, letter, weight, dst) in [
        ("q'_a", 'b', "0", "q'_a"),
        ("q'_a", 'a', "1", "q'_a"),
        ("q'_a", 'a', "1", "q'_f"),
        ("q'_b", 'a', "0", "q'_b"),
        ("q'_b", 'b', "1", "q'_b"),
        ("q'_b", 'b', "1", "q'_f"),
        ("q_f", '#', "0", "q'_a"),
        ("q_f", '#', "0", "q'_f"),
        ("q_f", '#', "0", "q'_b"),
    ] {
        b = b.trans(src, letter, weight, dst);
    }
    b.build().expect("valid automaton")
}

/// `f_last*`: `u₁#…#u_n` maps to the sum of `f_last(u_i)`.
pub fn w_star() -> WeightedAutomaton {
    w0_builder("ab#")
        .final_("q_f", "0")
        .trans("q_f", '#', "0", "q_a")
        .trans("q_f", '#', "0", "q_b")
        .trans("q_f", '#', "0", "q_f")
        .build()
        .expect("valid automaton")
}

/// Counts the letters `b` (sequential).
pub fn last_letter_b_counter() -> WeightedAutomaton {
    AutomatonBuilder::new(GroupContext::integers(), "ab".chars())
        .state("q")
        .init("q", "0")
        .final_("q", "0")
        .trans("q", 'a', "0", "q")
        .trans("q", 'b', "1", "q")
        .build()
        .expect("valid automaton")
}

/// The identity transducer over `{a, b}`.
pub fn identity_transducer() -> WeightedAutomaton {
    AutomatonBuilder::new(GroupContext::free("ab".chars()), "ab".chars())
        .state("q")
        .init("q", "")
        .final_("q", "")
        .trans("q", 'a', "a", "q")
        .trans("q", 'b', "b", "q")
        .build()
        .expect("valid automaton")
}

/// `aⁿ ↦ {aⁿ, bⁿ}`.
pub fn a_to_a_or_b() -> WeightedAutomaton {
    AutomatonBuilder::new(GroupContext::free("ab".chars()), "a".chars())
        .states(["p", "r"])
        .init("p", "")
        .init("r", "")
        .final_("p", "")
        .final_("r", "")
        .trans("p", 'a', "a", "p")
        .trans("r", 'a', "b", "r")
        .build()
        .expect("valid automaton")
}

/// `aⁿ ↦ {aⁿ, a²ⁿ}`.
pub fn doubling_transducer() -> WeightedAutomaton {
    AutomatonBuilder::new(GroupContext::free("a".chars()), "a".chars())
        .states(["p", "r"])
        .init("p", "")
        .init("r", "")
        .final_("p", "")
        .final_("r", "")
        .trans("p", 'a', "a", "p")
        .trans("r", 'a', "a a", "r")
        .build()
        .expect("valid automaton")
}

fn btp(entries: &[(usize, ExpectedBtp)]) -> BTreeMap<usize, ExpectedBtp> {
    entries.iter().copied().collect()
}

/// The reference automata and their expected degrees and BTP outcomes.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    use ExpectedBtp::{Fails, Holds};
    vec![
        CorpusEntry {
            name: "w0",
            automaton: w0(),
            expected_degree: Some(2),
            expected_btp: btp(&[(1, Fails), (2, Holds)]),
            provenance: "f_last has degree of sequentiality 2",
        },
        CorpusEntry {
            name: "w1",
            automaton: w1(),
            expected_degree: Some(4),
            expected_btp: btp(&[(1, Fails), (2, Fails), (3, Fails), (4, Holds)]),
            provenance: "f_last concatenated with itself through # has degree 4",
        },
        CorpusEntry {
            name: "w_star",
            automaton: w_star(),
            expected_degree: None,
            expected_btp: btp(&[(1, Fails), (2, Fails), (3, Fails)]),
            provenance: "f_last* is not multi-sequential",
        },
        CorpusEntry {
            name: "count_b",
            automaton: last_letter_b_counter(),
            expected_degree: Some(1),
            expected_btp: btp(&[(1, Holds)]),
            provenance: "structurally sequential",
        },
        CorpusEntry {
            name: "identity",
            automaton: identity_transducer(),
            expected_degree: Some(1),
            expected_btp: btp(&[(1, Holds)]),
            provenance: "structurally sequential",
        },
        CorpusEntry {
            name: "a_to_a_or_b",
            automaton: a_to_a_or_b(),
            expected_degree: Some(2),
            expected_btp: btp(&[(1, Fails), (2, Holds)]),
            provenance: "two runs of equal output length whose first letters differ; union of two sequential machines",
        },
        CorpusEntry {
            name: "doubling",
            automaton: doubling_transducer(),
            expected_degree: Some(2),
            expected_btp: btp(&[(1, Fails), (2, Holds)]),
            provenance: "loop outputs of lengths 1 and 2; union of two sequential machines",
        },
    ]
}

/// `C₀`: `f_last` with one register per letter counting its occurrences.
pub fn c0() -> CostRegisterAutomaton {
    CraBuilder::new(GroupContext::integers(), "ab".chars())
        .states(["q_a", "q_b"])
        .registers(["X_a", "X_b"])
        .init("q_a")
        .trans("q_a", 'a', "q_a", &[("X_a", "X_a", "1")])
        .trans("q_b", 'a', "q_a", &[("X_a", "X_a", "1")])
        .trans("q_a", 'b', "q_b", &[("X_b", "X_b", "1")])
        .trans("q_b", 'b', "q_b", &[("X_b", "X_b", "1")])
        .output("q_a", "X_a", "0")
        .output("q_b", "X_b", "0")
        .build()
        .expect("valid register automaton")
}

/// One state, one register, per-letter update `X := X·a·a⁻¹·b`.
pub fn cancelling_cra() -> CostRegisterAutomaton {
    CraBuilder::new(GroupContext::free("ab".chars()), "x".chars())
        .states(["q"])
        .registers(["X"])
        .init("q")
        .trans("q", 'x', "q", &[("X", "X", "a a' b")])
        .output("q", "X", "")
        .build()
        .expect("valid register automaton")
}

/// The factors `a`, `a⁻¹`, `b` applied on three consecutive letters, so that
/// registers hold values with a pending `a` in between.
pub fn phased_cra() -> CostRegisterAutomaton {
    CraBuilder::new(GroupContext::free("ab".chars()), "x".chars())
        .states(["q0", "q1", "q2"])
        .registers(["X"])
        .init("q0")
        .trans("q0", 'x', "q1", &[("X", "X", "a")])
        .trans("q1", 'x', "q2", &[("X", "X", "a'")])
        .trans("q2", 'x', "q0", &[("X", "X", "b")])
        .output("q0", "X", "")
        .output("q1", "X", "")
        .output("q2", "X", "")
        .build()
        .expect("valid register automaton")
}

/// The reference register automata with a note on what they compute.
pub fn builtin_cras() -> Vec<(&'static str, CostRegisterAutomaton, &'static str)> {
    vec![
        ("c0", c0(), "f_last with two independent registers"),
        ("cancelling", cancelling_cra(), "x^n to b^n through updates a a' b"),
        ("phased", phased_cra(), "x^n through the factors a, a', b in turn"),
    ]
}
