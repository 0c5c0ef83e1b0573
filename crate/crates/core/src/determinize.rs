//! Subset construction with delays.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;

use crate::btp::{check_btp, BtpResult};
use crate::budget::Budget;
use crate::decompose::n_threshold;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::wa::{StateId, Transition, WeightedAutomaton, Word};

/// A state of the delay construction: pairs `(q, delay)` sorted canonically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetState {
    pub pairs: BTreeSet<(StateId, GroupElement)>,
}

impl SubsetState {
    pub fn new(pairs: impl IntoIterator<Item = (StateId, GroupElement)>) -> Self {
        Self { pairs: pairs.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn has_identity_delay(&self) -> bool {
        self.pairs.iter().any(|(_, e)| e.is_identity())
    }

    pub fn max_norm(&self, w: &WeightedAutomaton) -> u64 {
        self.pairs.iter().map(|(_, e)| w.ctx().norm(e)).max().unwrap_or(0)
    }

    /// `{(q_a, 0), (q_b, -1)}` with state names taken from `w`.
    pub fn render(&self, w: &WeightedAutomaton) -> String {
        let mut s = String::from("{");
        for (i, (q, e)) in self.pairs.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "({}, {})", w.state_name(*q), e);
        }
        s.push('}');
        s
    }

    /// `{(S, α·β) | (q, α) ∈ S, (q, β) ∈ t_final}`.
    pub fn final_outputs(&self, w: &WeightedAutomaton) -> Result<BTreeSet<GroupElement>> {
        w.frontier_outputs(&self.pairs)
    }
}

pub fn dw_initial(w: &WeightedAutomaton) -> Result<SubsetState> {
    if w.init().is_empty() {
        return Err(Error::EmptyAutomaton);
    }
    Ok(SubsetState::new(w.init().iter().cloned()))
}

/// One transition of the delay construction: the output and the normalized successor.
pub fn dw_step(w: &WeightedAutomaton, s: &SubsetState, letter: char) -> Result<(GroupElement, SubsetState)> {
    w.check_word(&[letter])?;
    let raw = w.step_frontier(&s.pairs, letter)?;
    // the canonical least pair (state index, then element order) is the reference
    let (_, alpha) = raw.iter().next().ok_or(Error::DeadEnd(letter))?;
    let inv = w.ctx().inverse(alpha)?;
    let next = raw.iter().map(|(q, b)| Ok((*q, w.ctx().op(&inv, b)?))).collect::<Result<BTreeSet<_>>>()?;
    Ok((alpha.clone(), SubsetState { pairs: next }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DwTransition {
    pub src: usize,
    pub letter: char,
    pub output: GroupElement,
    pub dst: usize,
}

/// A transition leaving the explored fragment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DwFrontierEdge {
    pub src: usize,
    pub letter: char,
    pub output: GroupElement,
    pub target: SubsetState,
}

/// The explored part of the delay construction. State 0 is the initial state.
#[derive(Clone, Debug, Default)]
pub struct DwFragment {
    pub states: Vec<SubsetState>,
    /// A shortest input word reaching each state.
    pub access: Vec<Word>,
    /// The output accumulated along the access word.
    pub access_output: Vec<GroupElement>,
    pub transitions: Vec<DwTransition>,
    pub frontier: Vec<DwFrontierEdge>,
    index: HashMap<SubsetState, usize>,
}

impl DwFragment {
    pub fn index_of(&self, s: &SubsetState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn is_complete(&self) -> bool {
        self.frontier.is_empty()
    }

    /// The fragment as a sequential automaton; frontier edges are dropped.
    pub fn to_automaton(&self, w: &WeightedAutomaton) -> Result<WeightedAutomaton> {
        let states = self.states.iter().map(|s| s.render(w)).collect();
        let mut finals = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            finals.extend(s.final_outputs(w)?.into_iter().map(|e| (i, e)));
        }
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition { src: t.src, letter: t.letter, weight: t.output.clone(), dst: t.dst })
            .collect();
        WeightedAutomaton::new(
            w.ctx().clone(),
            w.alphabet().iter().copied(),
            states,
            vec![(0, w.ctx().identity())],
            finals,
            transitions,
        )
    }
}

/// Breadth-first exploration from `root` of the states whose delays all have
/// norm at most `norm_cap`. The root itself is always explored.
pub fn dw_explore_from(
    w: &WeightedAutomaton,
    root: SubsetState,
    norm_cap: u64,
    state_cap: usize,
) -> Result<DwFragment> {
    let mut frag = DwFragment::default();
    frag.index.insert(root.clone(), 0);
    frag.states.push(root);
    frag.access.push(Vec::new());
    frag.access_output.push(w.ctx().identity());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for &a in w.alphabet() {
            let (output, next) = match dw_step(w, &frag.states[i], a) {
                Ok(step) => step,
                Err(Error::DeadEnd(_)) => continue,
                Err(e) => return Err(e),
            };
            if let Some(j) = frag.index_of(&next) {
                frag.transitions.push(DwTransition { src: i, letter: a, output, dst: j });
                continue;
            }
            if next.max_norm(w) > norm_cap {
                frag.frontier.push(DwFrontierEdge { src: i, letter: a, output, target: next });
                continue;
            }
            if frag.states.len() >= state_cap {
                return Err(Error::StateCapExceeded { limit: state_cap });
            }
            let j = frag.states.len();
            let mut access = frag.access[i].clone();
            access.push(a);
            let access_output = w.ctx().op(&frag.access_output[i], &output)?;
            frag.index.insert(next.clone(), j);
            frag.states.push(next);
            frag.access.push(access);
            frag.access_output.push(access_output);
            frag.transitions.push(DwTransition { src: i, letter: a, output, dst: j });
            queue.push_back(j);
        }
    }
    Ok(frag)
}

pub fn dw_explore(w: &WeightedAutomaton, norm_cap: u64, state_cap: usize) -> Result<DwFragment> {
    dw_explore_from(w, dw_initial(w)?, norm_cap, state_cap)
}

/// The valuedness used for thresholds: the override, or the bounded estimate.
pub fn valuedness(w: &WeightedAutomaton, budget: &Budget) -> Result<usize> {
    if let Some(ell) = budget.ell {
        return Ok(ell.max(1));
    }
    let n = w.num_states();
    let bound = budget.len_bound.unwrap_or(n * n);
    Ok(w.valuedness_estimate(bound)?.max(1))
}

/// Largest value of a [`BigUint`] usable as a `u64` bound.
pub(crate) fn saturate(v: &BigUint) -> u64 {
    u64::try_from(v).unwrap_or(u64::MAX)
}

/// A sequential automaton equivalent to `w`, which must satisfy BTP-1.
///
/// The exploration starts with a small delay cap and doubles it while BTP-1 is
/// not refuted, up to the theoretical bound `N_W`.
pub fn sequentialize_btp1(w: &WeightedAutomaton, budget: &Budget) -> Result<WeightedAutomaton> {
    let w = w.trim();
    if w.init().is_empty() {
        return WeightedAutomaton::new(w.ctx().clone(), w.alphabet().iter().copied(), vec![], vec![], vec![], vec![]);
    }
    let ell = valuedness(&w, budget)?;
    let nw = saturate(&n_threshold(&w, ell));
    let mw = w.mw_constant();
    let mut cap = budget.threshold.unwrap_or(4 * mw * w.num_states() as u64).max(mw).min(nw);
    let mut refuted: Option<bool> = None;
    loop {
        let frag = match dw_explore(&w, cap, budget.state_cap) {
            Ok(f) => f,
            Err(Error::StateCapExceeded { limit }) => {
                return Err(Error::Inconclusive(format!("delay construction exceeded {limit} states")))
            }
            Err(e) => return Err(e),
        };
        if frag.is_complete() {
            return frag.to_automaton(&w);
        }
        if cap >= nw {
            return Err(Error::NotTwinned(format!("delays exceed the bound {nw}")));
        }
        if refuted.is_none() {
            refuted = Some(matches!(check_btp(&w, 1, budget), Ok(BtpResult::Fails(_))));
        }
        if refuted == Some(true) {
            return Err(Error::NotTwinned("BTP-1 fails".into()));
        }
        cap = cap.saturating_mul(2).max(1).min(nw);
    }
}
