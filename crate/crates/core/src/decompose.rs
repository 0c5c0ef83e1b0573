//! Construction of k sequential automata whose union is equivalent to an
//! automaton satisfying BTP-k.
//!
//! The delay construction is explored while all delays stay below a
//! threshold. A state leaving that region is split into the runs whose delay
//! to a reference run is left unchanged by some synchronized loop and the
//! others; both halves have a smaller degree and are decomposed recursively.
//! Their sequential machines are then attached to copies of the explored region.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;

use crate::btp::{degree_of_sequentiality, Degree};
use crate::budget::Budget;
use crate::determinize::{dw_explore, dw_initial, dw_step, saturate, sequentialize_btp1, valuedness, SubsetState};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::wa::{first_disagreement, Run, StateId, Transition, WeightedAutomaton, Word};

/// `2·M_W·|Q|^{ℓ·|Q|}`.
pub fn n_threshold(w: &WeightedAutomaton, ell: usize) -> BigUint {
    let n = BigUint::from(w.num_states());
    let exp = ell.saturating_mul(w.num_states());
    BigUint::from(2u32) * BigUint::from(w.mw_constant()) * n.pow(exp as u32)
}

/// Synchronized loops cut out of a tuple of runs on a common input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunLoops {
    /// Disjoint position intervals `[start, end)` of the input, each a loop of every run.
    pub loops: Vec<(usize, usize)>,
    /// Positions left after removing the loops; consecutive ones are one letter apart.
    pub backbone: Vec<usize>,
}

impl RunLoops {
    pub fn backbone_len(&self) -> usize {
        self.backbone.len().saturating_sub(1)
    }
}

/// Cuts synchronized loops out of `runs` until the remaining backbone visits
/// every state vector at most once, so it is shorter than `|Q|^m`.
pub fn split_run_loops(w: &WeightedAutomaton, runs: &[Run]) -> Result<RunLoops> {
    let Some(first) = runs.first() else {
        return Err(Error::InvalidArgument("no runs to split".into()));
    };
    if runs.iter().any(|r| r.input != first.input) {
        return Err(Error::InvalidArgument("runs read different inputs".into()));
    }
    let n = first.input.len();
    let bound = w.num_states().saturating_pow(runs.len() as u32);
    if n < bound {
        return Err(Error::TooShort { len: n, bound });
    }
    let vector_at = |t: usize| -> Vec<StateId> {
        runs.iter().map(|r| if t == 0 { r.start } else { w.transition(r.transitions[t - 1]).dst }).collect()
    };
    let mut stack: Vec<usize> = Vec::new();
    let mut seen: HashMap<Vec<StateId>, usize> = HashMap::new();
    let mut loops: Vec<(usize, usize)> = Vec::new();
    for t in 0..=n {
        let v = vector_at(t);
        if let Some(&si) = seen.get(&v) {
            let s = stack[si];
            for &later in &stack[si + 1..] {
                seen.remove(&vector_at(later));
            }
            stack.truncate(si + 1);
            loops.retain(|&(a, _)| a < s);
            loops.push((s, t));
            stack[si] = t;
        } else {
            seen.insert(v, stack.len());
            stack.push(t);
        }
    }
    Ok(RunLoops { loops, backbone: stack })
}

/// Evidence for a split: witness runs on `word = w·v·w'` that all loop on `v`,
/// along which the delay between the reference and the large-delay run changes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitWitness {
    pub word: Word,
    /// `|w|`; the loop is `word[loop_start..loop_end]`.
    pub loop_start: usize,
    pub loop_end: usize,
    /// One run per pair of the split state, in the state's order.
    pub runs: Vec<Run>,
    pub reference: usize,
    pub large: usize,
}

/// Runs from the initial pairs on `word`, one for each reachable pair
/// `(state, initial weight · run weight)`.
fn witness_runs(w: &WeightedAutomaton, word: &[char]) -> Result<HashMap<(StateId, GroupElement), Run>> {
    let ctx = w.ctx();
    let mut layer: HashMap<(StateId, GroupElement), Run> = HashMap::new();
    for (q, g) in w.init() {
        layer.entry((*q, g.clone())).or_insert(Run {
            start: *q,
            input: Vec::new(),
            weight: ctx.identity(),
            end: *q,
            transitions: Vec::new(),
        });
    }
    for &a in word {
        let mut next: HashMap<(StateId, GroupElement), Run> = HashMap::new();
        let mut keys: Vec<_> = layer.keys().cloned().collect();
        keys.sort();
        for key in keys {
            let run = &layer[&key];
            for t in w.outgoing_on(key.0, a) {
                let tr = w.transition(t);
                let nk = (tr.dst, ctx.op(&key.1, &tr.weight)?);
                if next.contains_key(&nk) {
                    continue;
                }
                let mut r = run.clone();
                r.input.push(a);
                r.weight = ctx.op(&r.weight, &tr.weight)?;
                r.end = tr.dst;
                r.transitions.push(t);
                next.insert(nk, r);
            }
        }
        layer = next;
    }
    Ok(layer)
}

/// Splits `s`, reached in the delay construction by `access`, into the pairs
/// whose delay to the reference pair is unchanged along a synchronized loop
/// and the rest, which include a pair of norm above `threshold`.
pub fn split_state(
    w: &WeightedAutomaton,
    s: &SubsetState,
    access: &[char],
    threshold: u64,
) -> Result<(SubsetState, SubsetState, SplitWitness)> {
    let ctx = w.ctx();
    let pairs: Vec<(StateId, GroupElement)> = s.pairs.iter().cloned().collect();
    let large = (0..pairs.len())
        .filter(|&i| ctx.norm(&pairs[i].1) > threshold)
        .max_by_key(|&i| (ctx.norm(&pairs[i].1), std::cmp::Reverse(i)))
        .ok_or(Error::NoLargeDelay { threshold })?;
    let reference = (0..pairs.len()).find(|&i| pairs[i].1.is_identity()).unwrap_or(0);

    let mut state = dw_initial(w)?;
    let mut output = ctx.identity();
    for &a in access {
        let (alpha, next) = dw_step(w, &state, a)?;
        output = ctx.op(&output, &alpha)?;
        state = next;
    }
    if state != *s {
        return Err(Error::InvalidArgument("the access word does not lead to the state".into()));
    }
    let mut by_target = witness_runs(w, access)?;
    let mut runs = Vec::with_capacity(pairs.len());
    for (q, beta) in &pairs {
        let key = (*q, ctx.op(&output, beta)?);
        runs.push(by_target.remove(&key).expect("every pair of a reached state has a witness run"));
    }

    let n = access.len();
    let state_at = |r: &Run, t: usize| if t == 0 { r.start } else { w.transition(r.transitions[t - 1]).dst };
    let weight_at = |r: &Run, t: usize| -> Result<GroupElement> {
        Ok(ctx.product(r.transitions[..t].iter().map(|&i| &w.transition(i).weight))?)
    };
    // initial weights recovered from `γ·ρ = output·β`
    let gamma: Vec<GroupElement> = pairs
        .iter()
        .zip(&runs)
        .map(|((_, beta), r)| Ok(ctx.op(&ctx.op(&output, beta)?, &ctx.inverse(&r.weight)?)?))
        .collect::<Result<_>>()?;
    let delay_at = |i: usize, j: usize, t: usize| -> Result<GroupElement> {
        let x = ctx.op(&gamma[i], &weight_at(&runs[i], t)?)?;
        let y = ctx.op(&gamma[j], &weight_at(&runs[j], t)?)?;
        Ok(ctx.delay(&x, &y)?)
    };
    for len in 1..=n {
        for start in 0..=n - len {
            let end = start + len;
            if runs.iter().any(|r| state_at(r, start) != state_at(r, end)) {
                continue;
            }
            if delay_at(reference, large, start)? == delay_at(reference, large, end)? {
                continue;
            }
            let mut kept = SubsetState::new([]);
            let mut moved = SubsetState::new([]);
            for (i, p) in pairs.iter().enumerate() {
                if delay_at(reference, i, start)? == delay_at(reference, i, end)? {
                    kept.pairs.insert(p.clone());
                } else {
                    moved.pairs.insert(p.clone());
                }
            }
            let witness =
                SplitWitness { word: access.to_vec(), loop_start: start, loop_end: end, runs, reference, large };
            return Ok((kept, moved, witness));
        }
    }
    let bound = w.num_states().saturating_pow(pairs.len() as u32);
    Err(Error::TooShort { len: n, bound })
}

/// Longest word length (at most 8) for which exhaustive comparison stays cheap.
pub fn oracle_length(alphabet_size: usize) -> usize {
    let mut total = 1usize;
    let mut len = 0;
    while len < 8 {
        let next = total.saturating_add(alphabet_size.saturating_pow(len as u32 + 1));
        if next > 20_000 {
            break;
        }
        total = next;
        len += 1;
    }
    len
}

/// At most `k` sequential automata whose union is equivalent to `w`.
pub fn decompose_k(w: &WeightedAutomaton, k: usize, budget: &Budget) -> Result<Vec<WeightedAutomaton>> {
    if k == 0 {
        return Err(Error::InvalidArgument("the order k must be at least 1".into()));
    }
    let w = w.trim();
    if w.init().is_empty() {
        return Ok(Vec::new());
    }
    let d = match degree_of_sequentiality(&w, k, budget)? {
        Degree::Exactly(d) => d,
        Degree::AtLeast(_) => return Err(Error::BtpViolated { k }),
    };
    let ell = valuedness(&w, budget)?;
    let nw = saturate(&n_threshold(&w, ell));
    let mw = w.mw_constant();
    let mut threshold = budget.threshold.unwrap_or(4 * mw * w.num_states() as u64).max(1).min(nw.max(1));
    let len = oracle_length(w.alphabet().len());
    loop {
        let mut builder = Decomposer { budget, threshold, memo: HashMap::new() };
        match builder.run(&w, d) {
            Ok(machines) => {
                let union = WeightedAutomaton::union_all(&machines)?;
                if first_disagreement(&union, &w, len)?.is_none() {
                    return Ok(machines);
                }
            }
            Err(Error::TooShort { .. } | Error::NoLargeDelay { .. } | Error::Inconclusive(_)) => {}
            Err(Error::StateCapExceeded { limit }) => {
                return Err(Error::BudgetExceeded(format!("delay construction exceeded {limit} states")))
            }
            Err(e) => return Err(e),
        }
        if threshold >= nw {
            return Err(Error::Inconclusive(format!("no valid decomposition with delay thresholds up to {nw}")));
        }
        threshold = threshold.saturating_mul(2).min(nw);
    }
}

type Machines = Vec<WeightedAutomaton>;

/// A frontier edge `(source, letter)` and the machine attached to it, with its entry weight.
type Graft<'a> = (usize, char, Option<&'a (GroupElement, WeightedAutomaton)>);

struct Decomposer<'b> {
    budget: &'b Budget,
    threshold: u64,
    memo: HashMap<(Vec<(StateId, GroupElement)>, usize), Machines>,
}

/// Least pair's weight and the pairs shifted by its inverse.
fn normalize(w: &WeightedAutomaton, s: &SubsetState) -> Result<(GroupElement, Vec<(StateId, GroupElement)>)> {
    let ctx = w.ctx();
    let (_, alpha) = s.pairs.iter().next().ok_or(Error::EmptyAutomaton)?;
    let inv = ctx.inverse(alpha)?;
    let pairs = s.pairs.iter().map(|(q, b)| Ok((*q, ctx.op(&inv, b)?))).collect::<Result<Vec<_>>>()?;
    Ok((alpha.clone(), pairs))
}

impl Decomposer<'_> {
    /// `w` is trim and has degree at most `k`.
    fn run(&mut self, w: &WeightedAutomaton, k: usize) -> Result<Vec<WeightedAutomaton>> {
        if w.init().is_empty() {
            return Ok(Vec::new());
        }
        if k <= 1 {
            return match sequentialize_btp1(w, self.budget) {
                Ok(m) => Ok(vec![m]),
                Err(Error::NotTwinned(_)) => Err(Error::BtpViolated { k: 1 }),
                Err(e) => Err(e),
            };
        }
        let frag = dw_explore(w, self.threshold, self.budget.state_cap)?;
        if frag.is_complete() {
            return Ok(vec![frag.to_automaton(w)?]);
        }
        let mut attached: Vec<Vec<(GroupElement, WeightedAutomaton)>> = Vec::new();
        for edge in &frag.frontier {
            let mut access = frag.access[edge.src].clone();
            access.push(edge.letter);
            let (kept, moved, _) = split_state(w, &edge.target, &access, self.threshold)?;
            let mut parts = Vec::new();
            let mut ranks = 0;
            for part in [kept, moved] {
                let (alpha, init) = normalize(w, &part)?;
                let sub = w.with_initial(init.clone())?.trim();
                let rank = match degree_of_sequentiality(&sub, k - 1, self.budget)? {
                    Degree::Exactly(r) => r,
                    Degree::AtLeast(_) => return Err(Error::Inconclusive("split part has full degree".into())),
                };
                ranks += rank;
                parts.push((alpha, init, sub, rank));
            }
            if ranks > k {
                return Err(Error::Inconclusive(format!("split parts need {ranks} machines for order {k}")));
            }
            let mut machines = Vec::new();
            for (alpha, init, sub, rank) in parts {
                let key = (init, rank);
                let ms = match self.memo.get(&key) {
                    Some(ms) => ms.clone(),
                    None => {
                        let ms = self.run(&sub, rank)?;
                        self.memo.insert(key, ms.clone());
                        ms
                    }
                };
                let shift = w.ctx().op(&edge.output, &alpha)?;
                machines.extend(ms.into_iter().map(|m| (shift.clone(), m)));
            }
            attached.push(machines);
        }
        let count = attached.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let base = frag.to_automaton(w)?;
        (0..count)
            .map(|i| {
                let grafts: Vec<Graft<'_>> =
                    frag.frontier.iter().zip(&attached).map(|(e, ms)| (e.src, e.letter, ms.get(i))).collect();
                graft(w, &base, &grafts)
            })
            .collect()
    }
}

/// Attaches to `base` each sequential machine at its frontier edge, entering
/// its initial state with weight `shift · γ`.
fn graft(w: &WeightedAutomaton, base: &WeightedAutomaton, grafts: &[Graft<'_>]) -> Result<WeightedAutomaton> {
    let ctx = w.ctx();
    let mut states: Vec<String> = base.states().iter().map(|s| format!("u:{s}")).collect();
    let mut finals: Vec<(StateId, GroupElement)> = base.finals().to_vec();
    let mut transitions: Vec<Transition> = base.transitions().to_vec();
    let mut used = HashSet::new();
    for (idx, (src, letter, machine)) in grafts.iter().enumerate() {
        let Some((shift, m)) = machine else { continue };
        let Some((s0, gamma)) = m.init().first() else { continue };
        if !used.insert((*src, *letter)) {
            return Err(Error::InvalidArgument("two machines attached to one transition".into()));
        }
        let offset = states.len();
        states.extend(m.states().iter().map(|s| format!("e{idx}:{s}")));
        finals.extend(m.finals().iter().map(|(q, e)| (q + offset, e.clone())));
        transitions.extend(m.transitions().iter().map(|t| Transition {
            src: t.src + offset,
            letter: t.letter,
            weight: t.weight.clone(),
            dst: t.dst + offset,
        }));
        transitions.push(Transition { src: *src, letter: *letter, weight: ctx.op(shift, gamma)?, dst: s0 + offset });
    }
    WeightedAutomaton::new(ctx.clone(), w.alphabet().iter().copied(), states, base.init().to_vec(), finals, transitions)
}
