//! Shared inputs for the benchmarks.

use multiseq::corpus;
use multiseq::WeightedAutomaton;

/// Corpus automata paired with the largest order worth checking on each.
pub fn btp_inputs() -> Vec<(&'static str, WeightedAutomaton, usize)> {
    corpus::builtin_corpus()
        .into_iter()
        .map(|e| {
            let k = e.expected_btp.keys().copied().max().unwrap_or(1);
            (e.name, e.automaton, k)
        })
        .collect()
}
