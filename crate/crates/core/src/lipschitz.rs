//! The Lipschitz property of order k: witnesses of its failure, obtained by
//! pumping the loops of a BTP counterexample, and a bounded search for them.

use crate::btp::BtpCounterexample;
use crate::error::{Error, Result};
use crate::group::{word_dist, GroupElement};
use crate::wa::{words_up_to, WeightedAutomaton, Word};

/// `k + 1` pairs of the relation, pairwise further apart than `L·(dist + 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LipWitness {
    pub l: u64,
    pub pairs: Vec<(Word, GroupElement)>,
}

/// For one pair of witness entries: the weight distance and the bound it must exceed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Margin {
    pub i: usize,
    pub j: usize,
    pub weight_distance: u64,
    pub bound: u128,
}

impl Margin {
    pub fn violates(&self) -> bool {
        u128::from(self.weight_distance) > self.bound
    }
}

impl LipWitness {
    pub fn margins(&self, w: &WeightedAutomaton) -> Result<Vec<Margin>> {
        let mut out = Vec::new();
        for i in 0..self.pairs.len() {
            for j in i + 1..self.pairs.len() {
                out.push(margin(w, self.l, &self.pairs[i], &self.pairs[j], i, j)?);
            }
        }
        Ok(out)
    }
}

fn margin(
    w: &WeightedAutomaton,
    l: u64,
    a: &(Word, GroupElement),
    b: &(Word, GroupElement),
    i: usize,
    j: usize,
) -> Result<Margin> {
    let weight_distance = w.ctx().distance(&a.1, &b.1)?;
    let bound = u128::from(l) * (word_dist(&a.0, &b.0) as u128 + 1);
    Ok(Margin { i, j, weight_distance, bound })
}

/// Whether every pair belongs to `⟦w⟧` and every two pairs violate the bound.
pub fn verify_lip_witness(w: &WeightedAutomaton, witness: &LipWitness) -> bool {
    let in_relation = witness.pairs.iter().all(|(u, x)| w.eval(u).is_ok_and(|out| out.contains(x)));
    in_relation && witness.pairs.len() >= 2 && witness.margins(w).is_ok_and(|ms| ms.iter().all(Margin::violates))
}

const MAX_PUMP: u64 = 1 << 40;

/// Pumps the loops of `cex` into `k + 1` pairs of `⟦w⟧` violating Lip-k for `l`.
///
/// Loops are handled from the last to the first. Loop `i` is repeated the
/// least power-of-two number of times that makes every pair of runs first
/// separated at `i` violate the bound on the completed words; pumping earlier
/// loops changes neither the words' distance nor the delay of such a pair.
pub fn falsify_lipschitz(w: &WeightedAutomaton, cex: &BtpCounterexample, l: u64) -> Result<LipWitness> {
    cex.verify(w)?;
    let ctx = w.ctx();
    let k = cex.k;
    let runs = cex.runs.len();
    let mut first_sep = Vec::new();
    for j in 0..runs {
        for jp in j + 1..runs {
            let i = cex
                .separating_loop(w, j, jp)?
                .ok_or_else(|| Error::InvalidCounterexample(format!("runs {j} and {jp} are never separated")))?;
            first_sep.push((j, jp, i));
        }
    }
    let completions: Vec<(Word, GroupElement)> = cex
        .runs
        .iter()
        .map(|r| {
            let end = r.segments.iter().rev().find_map(|s| s.u_path.last()).map_or(r.initial, |&t| w.transition(t).dst);
            let path = w
                .shortest_completion(end)
                .ok_or_else(|| Error::InvalidCounterexample("a run cannot reach a final state".into()))?;
            let last = path.last().map_or(end, |&t| w.transition(t).dst);
            let letters: Word = path.iter().map(|&t| w.transition(t).letter).collect();
            let fin = w.final_weights(last).next().expect("final state").clone();
            let weight = ctx.op(&w.path_weight(&path)?, &fin)?;
            Ok((letters, weight))
        })
        .collect::<Result<_>>()?;

    let build = |counts: &[u64]| -> Result<Vec<(Word, GroupElement)>> {
        cex.runs
            .iter()
            .zip(&completions)
            .map(|(r, (suffix, tail))| {
                let mut word = Vec::new();
                let mut weight = r.gamma.clone();
                for (s, &t) in r.segments.iter().zip(counts) {
                    word.extend(&s.u);
                    for _ in 0..t {
                        word.extend(&s.v);
                    }
                    weight = ctx.op(&ctx.op(&weight, &s.alpha)?, &ctx.pow(&s.beta, t)?)?;
                }
                word.extend(suffix);
                Ok((word, ctx.op(&weight, tail)?))
            })
            .collect()
    };

    let mut counts = vec![1u64; k];
    for i in (1..=k).rev() {
        let pairs: Vec<(usize, usize)> =
            first_sep.iter().filter(|(_, _, s)| *s == i).map(|&(j, jp, _)| (j, jp)).collect();
        if pairs.is_empty() {
            continue;
        }
        loop {
            let entries = build(&counts)?;
            let mut ok = true;
            for &(j, jp) in &pairs {
                if !margin(w, l, &entries[j], &entries[jp], j, jp)?.violates() {
                    ok = false;
                    break;
                }
            }
            if ok {
                break;
            }
            if counts[i - 1] >= MAX_PUMP {
                return Err(Error::Inconclusive(format!("loop {i} needs more than {MAX_PUMP} repetitions")));
            }
            counts[i - 1] *= 2;
        }
    }
    let witness = LipWitness { l, pairs: build(&counts)? };
    if !verify_lip_witness(w, &witness) {
        return Err(Error::InvalidCounterexample("pumped words do not violate the bound".into()));
    }
    Ok(witness)
}

/// The pairs `(w, ω)` of `⟦w⟧` with `|w| ≤ max_len`.
pub fn relation_up_to(w: &WeightedAutomaton, max_len: usize) -> Result<Vec<(Word, GroupElement)>> {
    let mut out = Vec::new();
    for u in words_up_to(w.alphabet(), max_len) {
        for x in w.eval(&u)? {
            out.push((u.clone(), x));
        }
    }
    Ok(out)
}

/// Searches `k + 1` pairs among those of `⟦w⟧` with inputs of length at
/// most `max_len` that pairwise violate the Lipschitz bound for `l`.
pub fn find_lip_violation(w: &WeightedAutomaton, k: usize, l: u64, max_len: usize) -> Result<Option<LipWitness>> {
    let pairs = relation_up_to(w, max_len)?;
    let n = pairs.len();
    let mut far = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = margin(w, l, &pairs[i], &pairs[j], i, j)?.violates();
            far[i][j] = v;
            far[j][i] = v;
        }
    }
    // cliques of size k + 1 in the "too far apart" graph, extended in index order
    fn extend(far: &[Vec<bool>], chosen: &mut Vec<usize>, from: usize, size: usize) -> bool {
        if chosen.len() == size {
            return true;
        }
        for c in from..far.len() {
            if chosen.iter().all(|&x| far[x][c]) {
                chosen.push(c);
                if extend(far, chosen, c + 1, size) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if extend(&far, &mut chosen, 0, k + 1) {
        return Ok(Some(LipWitness { l, pairs: chosen.into_iter().map(|i| pairs[i].clone()).collect() }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btp::{check_btp, BtpResult};
    use crate::budget::Budget;
    use crate::corpus;

    fn word(s: &str) -> Word {
        s.chars().collect()
    }

    #[test]
    fn hand_witness() {
        let w0 = corpus::w0();
        let good = LipWitness {
            l: 1,
            pairs: vec![(word("aaaaa"), GroupElement::Int(5)), (word("aaaab"), GroupElement::Int(1))],
        };
        assert!(verify_lip_witness(&w0, &good));
        let same = LipWitness { l: 1, pairs: vec![good.pairs[0].clone(), good.pairs[0].clone()] };
        assert!(!verify_lip_witness(&w0, &same));
        let outside = LipWitness { l: 1, pairs: vec![(word("aaaaa"), GroupElement::Int(6)), good.pairs[1].clone()] };
        assert!(!verify_lip_witness(&w0, &outside));
    }

    fn cex(w: &WeightedAutomaton, k: usize) -> Box<BtpCounterexample> {
        match check_btp(w, k, &Budget::default()).unwrap() {
            BtpResult::Fails(c) => c,
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn pumping_w0() {
        let w0 = corpus::w0();
        let c = cex(&w0, 1);
        for l in [0, 1, 10, 100] {
            let wit = falsify_lipschitz(&w0, &c, l).unwrap();
            assert_eq!(wit.pairs.len(), 2);
            assert!(verify_lip_witness(&w0, &wit));
        }
    }

    #[test]
    fn pumping_rejects_bad_counterexamples() {
        let w0 = corpus::w0();
        let mut c = *cex(&w0, 1);
        c.runs[1] = c.runs[0].clone();
        assert!(matches!(falsify_lipschitz(&w0, &c, 1), Err(Error::InvalidCounterexample(_))));
    }

    #[test]
    fn pumping_across_corpus() {
        for entry in corpus::builtin_corpus() {
            for (&k, expected) in &entry.expected_btp {
                if *expected != corpus::ExpectedBtp::Fails {
                    continue;
                }
                let c = cex(&entry.automaton, k);
                for l in [1, 5, 25] {
                    let wit = falsify_lipschitz(&entry.automaton, &c, l).unwrap();
                    assert!(verify_lip_witness(&entry.automaton, &wit), "{} k={k} L={l}", entry.name);
                }
            }
        }
    }

    #[test]
    fn bounded_search() {
        let w0 = corpus::w0();
        assert!(find_lip_violation(&w0, 2, 4, 5).unwrap().is_none());
        let found = find_lip_violation(&w0, 1, 1, 5).unwrap().unwrap();
        assert!(verify_lip_witness(&w0, &found));
    }
}
