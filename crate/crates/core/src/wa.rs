//! Weighted automata over a group with set semantics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::group::{GroupContext, GroupElement};

pub type StateId = usize;

/// An input word.
pub type Word = Vec<char>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: StateId,
    pub letter: char,
    pub weight: GroupElement,
    pub dst: StateId,
}

/// A run `start --input|weight--> end` (initial and final weights excluded).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub start: StateId,
    pub input: Word,
    pub weight: GroupElement,
    pub end: StateId,
    pub transitions: Vec<usize>,
}

/// A weighted automaton `(Q, t_init, t_final, T)` over a group.
///
/// The initial and final relations and the transition set are kept sorted
/// and free of duplicates, so two automata built from the same data compare
/// equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedAutomaton {
    ctx: GroupContext,
    alphabet: Vec<char>,
    states: Vec<String>,
    init: Vec<(StateId, GroupElement)>,
    finals: Vec<(StateId, GroupElement)>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl WeightedAutomaton {
    pub fn new(
        ctx: GroupContext,
        alphabet: impl IntoIterator<Item = char>,
        states: Vec<String>,
        init: Vec<(StateId, GroupElement)>,
        finals: Vec<(StateId, GroupElement)>,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        let alphabet: BTreeSet<char> = alphabet.into_iter().collect();
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateState(s.clone()));
            }
        }
        let n = states.len();
        let check_state = |q: StateId| {
            if q < n {
                Ok(())
            } else {
                Err(Error::UnknownState(format!("#{q}")))
            }
        };
        for (q, e) in init.iter().chain(&finals) {
            check_state(*q)?;
            ctx.check(e)?;
        }
        for t in &transitions {
            check_state(t.src)?;
            check_state(t.dst)?;
            ctx.check(&t.weight)?;
            if !alphabet.contains(&t.letter) {
                return Err(Error::UnknownLetter(t.letter));
            }
        }
        let init: BTreeSet<_> = init.into_iter().collect();
        let finals: BTreeSet<_> = finals.into_iter().collect();
        let transitions: BTreeSet<_> = transitions.into_iter().collect();
        let transitions: Vec<Transition> = transitions.into_iter().collect();
        let mut outgoing = vec![Vec::new(); n];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.src].push(i);
        }
        Ok(Self {
            ctx,
            alphabet: alphabet.into_iter().collect(),
            states,
            init: init.into_iter().collect(),
            finals: finals.into_iter().collect(),
            transitions,
            outgoing,
        })
    }

    pub fn ctx(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn init(&self) -> &[(StateId, GroupElement)] {
        &self.init
    }

    pub fn finals(&self) -> &[(StateId, GroupElement)] {
        &self.finals
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, idx: usize) -> &Transition {
        &self.transitions[idx]
    }

    /// Indices of the transitions leaving `q`, sorted by letter.
    pub fn outgoing(&self, q: StateId) -> &[usize] {
        &self.outgoing[q]
    }

    pub fn outgoing_on(&self, q: StateId, letter: char) -> impl Iterator<Item = usize> + '_ {
        self.outgoing[q].iter().copied().filter(move |&i| self.transitions[i].letter == letter)
    }

    pub fn final_weights(&self, q: StateId) -> impl Iterator<Item = &GroupElement> + '_ {
        self.finals.iter().filter(move |(p, _)| *p == q).map(|(_, e)| e)
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.iter().any(|(p, _)| *p == q)
    }

    pub fn check_word(&self, word: &[char]) -> Result<()> {
        match word.iter().find(|c| self.alphabet.binary_search(c).is_err()) {
            Some(&c) => Err(Error::UnknownLetter(c)),
            None => Ok(()),
        }
    }

    /// `W_S`: the same automaton with its initial relation replaced by `init`.
    pub fn with_initial(&self, init: Vec<(StateId, GroupElement)>) -> Result<Self> {
        Self::new(
            self.ctx.clone(),
            self.alphabet.iter().copied(),
            self.states.clone(),
            init,
            self.finals.clone(),
            self.transitions.clone(),
        )
    }

    /// One letter of the frontier simulation: `{(q, β·γ) | (p, β) ∈ S, (p, a, γ, q) ∈ T}`.
    pub fn step_frontier(
        &self,
        frontier: &BTreeSet<(StateId, GroupElement)>,
        letter: char,
    ) -> Result<BTreeSet<(StateId, GroupElement)>> {
        let mut next = BTreeSet::new();
        for (p, beta) in frontier {
            for i in self.outgoing_on(*p, letter) {
                let t = &self.transitions[i];
                next.insert((t.dst, self.ctx.op(beta, &t.weight)?));
            }
        }
        Ok(next)
    }

    /// Applies the final relation to a frontier.
    pub fn frontier_outputs(&self, frontier: &BTreeSet<(StateId, GroupElement)>) -> Result<BTreeSet<GroupElement>> {
        let mut out = BTreeSet::new();
        for (q, alpha) in frontier {
            for beta in self.final_weights(*q) {
                out.insert(self.ctx.op(alpha, beta)?);
            }
        }
        Ok(out)
    }

    /// The set of weights `γ_init · β_run · γ_final` of the accepting runs on `word`.
    pub fn eval(&self, word: &[char]) -> Result<BTreeSet<GroupElement>> {
        self.check_word(word)?;
        let mut frontier: BTreeSet<_> = self.init.iter().cloned().collect();
        for &a in word {
            if frontier.is_empty() {
                break;
            }
            frontier = self.step_frontier(&frontier, a)?;
        }
        self.frontier_outputs(&frontier)
    }

    /// Every run on `word` starting in a state of `starts`.
    pub fn runs_on(&self, starts: &[StateId], word: &[char]) -> Result<Vec<Run>> {
        self.check_word(word)?;
        let mut partial: Vec<(StateId, StateId, GroupElement, Vec<usize>)> =
            starts.iter().map(|&q| (q, q, self.ctx.identity(), Vec::new())).collect();
        for &a in word {
            let mut next = Vec::new();
            for (start, q, w, path) in &partial {
                for i in self.outgoing_on(*q, a) {
                    let t = &self.transitions[i];
                    let mut p = path.clone();
                    p.push(i);
                    next.push((*start, t.dst, self.ctx.op(w, &t.weight)?, p));
                }
            }
            partial = next;
        }
        Ok(partial
            .into_iter()
            .map(|(start, end, weight, transitions)| Run { start, input: word.to_vec(), weight, end, transitions })
            .collect())
    }

    /// Accepting runs on `word` together with the initial and final weights used.
    pub fn accepting_runs(&self, word: &[char]) -> Result<Vec<(GroupElement, Run, GroupElement)>> {
        let mut starts: Vec<StateId> = self.init.iter().map(|(q, _)| *q).collect();
        starts.dedup();
        let mut out = Vec::new();
        for run in self.runs_on(&starts, word)? {
            for (q, g) in &self.init {
                if *q != run.start {
                    continue;
                }
                for f in self.final_weights(run.end) {
                    out.push((g.clone(), run.clone(), f.clone()));
                }
            }
        }
        Ok(out)
    }

    /// Product of the weights of a transition sequence, checking that it chains.
    pub fn path_weight(&self, path: &[usize]) -> Result<GroupElement> {
        for w in path.windows(2) {
            if self.transitions[w[0]].dst != self.transitions[w[1]].src {
                return Err(Error::InvalidCounterexample("transitions do not chain".into()));
            }
        }
        Ok(self.ctx.product(path.iter().map(|&i| &self.transitions[i].weight))?)
    }

    /// States reachable from the initial states.
    pub fn accessible(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = self.init.iter().map(|(q, _)| *q).collect();
        while let Some(q) = stack.pop() {
            if std::mem::replace(&mut seen[q], true) {
                continue;
            }
            stack.extend(self.outgoing[q].iter().map(|&i| self.transitions[i].dst));
        }
        seen
    }

    /// States from which a final state is reachable.
    pub fn coaccessible(&self) -> Vec<bool> {
        let mut incoming = vec![Vec::new(); self.num_states()];
        for t in &self.transitions {
            incoming[t.dst].push(t.src);
        }
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = self.finals.iter().map(|(q, _)| *q).collect();
        while let Some(q) = stack.pop() {
            if std::mem::replace(&mut seen[q], true) {
                continue;
            }
            stack.extend(incoming[q].iter().copied());
        }
        seen
    }

    /// Restriction to the states lying on some accepting run.
    pub fn trim(&self) -> Self {
        let acc = self.accessible();
        let coacc = self.coaccessible();
        let keep: Vec<bool> = acc.iter().zip(&coacc).map(|(a, b)| *a && *b).collect();
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[bool]) -> Self {
        let mut remap = vec![usize::MAX; self.num_states()];
        let mut states = Vec::new();
        for (q, name) in self.states.iter().enumerate() {
            if keep[q] {
                remap[q] = states.len();
                states.push(name.clone());
            }
        }
        let map_rel = |rel: &[(StateId, GroupElement)]| {
            rel.iter().filter(|(q, _)| keep[*q]).map(|(q, e)| (remap[*q], e.clone())).collect()
        };
        let transitions = self
            .transitions
            .iter()
            .filter(|t| keep[t.src] && keep[t.dst])
            .map(|t| Transition { src: remap[t.src], letter: t.letter, weight: t.weight.clone(), dst: remap[t.dst] })
            .collect();
        Self::new(
            self.ctx.clone(),
            self.alphabet.iter().copied(),
            states,
            map_rel(&self.init),
            map_rel(&self.finals),
            transitions,
        )
        .expect("restriction of a valid automaton is valid")
    }

    /// `M_W`: the largest norm among transition, initial and final weights.
    pub fn mw_constant(&self) -> u64 {
        self.init
            .iter()
            .chain(&self.finals)
            .map(|(_, e)| e)
            .chain(self.transitions.iter().map(|t| &t.weight))
            .map(|e| self.ctx.norm(e))
            .max()
            .unwrap_or(0)
    }

    /// `max_q |{(q, α) ∈ t_final}|`.
    pub fn out_max(&self) -> usize {
        let mut counts: HashMap<StateId, usize> = HashMap::new();
        for (q, _) in &self.finals {
            *counts.entry(*q).or_default() += 1;
        }
        counts.into_values().max().unwrap_or(0)
    }

    /// Largest number of distinct outputs over words of length at most `length_bound`.
    ///
    /// Frontiers are normalized by their least weight before deduplication, which
    /// leaves the number of outputs unchanged since left translation is a bijection.
    pub fn valuedness_estimate(&self, length_bound: usize) -> Result<usize> {
        let start: BTreeSet<_> = self.init.iter().cloned().collect();
        let mut best = self.frontier_outputs(&start)?.len();
        let mut seen = HashSet::new();
        seen.insert(self.normalize_frontier(&start)?);
        let mut layer = vec![start];
        for _ in 0..length_bound {
            let mut next = Vec::new();
            for f in &layer {
                for &a in &self.alphabet {
                    let g = self.step_frontier(f, a)?;
                    if g.is_empty() {
                        continue;
                    }
                    let key = self.normalize_frontier(&g)?;
                    if seen.insert(key.clone()) {
                        best = best.max(self.frontier_outputs(&key)?.len());
                        next.push(key);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layer = next;
        }
        Ok(best)
    }

    fn normalize_frontier(&self, f: &BTreeSet<(StateId, GroupElement)>) -> Result<BTreeSet<(StateId, GroupElement)>> {
        let Some((_, base)) = f.iter().next() else { return Ok(BTreeSet::new()) };
        let inv = self.ctx.inverse(base)?;
        f.iter().map(|(q, e)| Ok((*q, self.ctx.op(&inv, e)?))).collect()
    }

    /// `|t_init| = 1` and at most one transition per state and letter.
    pub fn is_structurally_sequential(&self) -> bool {
        self.init.len() == 1 && self.is_deterministic()
    }

    fn is_deterministic(&self) -> bool {
        self.outgoing
            .iter()
            .all(|out| out.windows(2).all(|w| self.transitions[w[0]].letter != self.transitions[w[1]].letter))
    }

    /// If the automaton is a disjoint union of sequential parts, the number of
    /// parts (connected components carrying an initial pair).
    pub fn is_structurally_k_sequential(&self) -> Option<usize> {
        if !self.is_deterministic() {
            return None;
        }
        let n = self.num_states();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for t in &self.transitions {
            let (a, b) = (find(&mut parent, t.src), find(&mut parent, t.dst));
            parent[a] = b;
        }
        let mut inits_per_component: BTreeMap<usize, usize> = BTreeMap::new();
        for (q, _) in &self.init {
            *inits_per_component.entry(find(&mut parent, *q)).or_default() += 1;
        }
        if inits_per_component.values().all(|&c| c == 1) {
            Some(inits_per_component.len())
        } else {
            None
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// Disjoint union; states of the `i`-th operand are renamed `i.name` (1-based).
    pub fn union_all(parts: &[WeightedAutomaton]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyAutomaton)?;
        let mut states = Vec::new();
        let mut init = Vec::new();
        let mut finals = Vec::new();
        let mut transitions = Vec::new();
        for (i, w) in parts.iter().enumerate() {
            first.compatible(w)?;
            let offset = states.len();
            states.extend(w.states.iter().map(|s| format!("{}.{s}", i + 1)));
            init.extend(w.init.iter().map(|(q, e)| (q + offset, e.clone())));
            finals.extend(w.finals.iter().map(|(q, e)| (q + offset, e.clone())));
            transitions.extend(w.transitions.iter().map(|t| Transition {
                src: t.src + offset,
                letter: t.letter,
                weight: t.weight.clone(),
                dst: t.dst + offset,
            }));
        }
        Self::new(first.ctx.clone(), first.alphabet.iter().copied(), states, init, finals, transitions)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Self::union_all(&[self.clone(), other.clone()])
    }

    /// Shortest word leading from `q` to a final state, with its transitions.
    pub fn shortest_completion(&self, q: StateId) -> Option<Vec<usize>> {
        let mut prev: HashMap<StateId, Option<(StateId, usize)>> = HashMap::new();
        let mut queue = VecDeque::new();
        prev.insert(q, None);
        queue.push_back(q);
        while let Some(p) = queue.pop_front() {
            if self.is_final(p) {
                let mut path = Vec::new();
                let mut cur = p;
                while let Some(Some((from, t))) = prev.get(&cur) {
                    path.push(*t);
                    cur = *from;
                }
                path.reverse();
                return Some(path);
            }
            for &i in &self.outgoing[p] {
                let d = self.transitions[i].dst;
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(d) {
                    e.insert(Some((p, i)));
                    queue.push_back(d);
                }
            }
        }
        None
    }

    /// The synchronized product `W^arity`, built lazily.
    pub fn power(&self, arity: usize, cap: usize) -> Result<PowerAutomaton<'_>> {
        if arity == 0 {
            return Err(Error::SizeBoundExceeded { what: "power of order 0", limit: 0 });
        }
        let size = (self.num_states().max(1) as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::SizeBoundExceeded { what: "power automaton state space", limit: cap });
        }
        Ok(PowerAutomaton { wa: self, arity })
    }
}

/// Incremental construction by state name, with elements given in their
/// textual syntax (see [`GroupContext::parse_element`]).
#[derive(Clone, Debug)]
pub struct AutomatonBuilder {
    ctx: GroupContext,
    alphabet: BTreeSet<char>,
    states: Vec<String>,
    init: Vec<(String, String)>,
    finals: Vec<(String, String)>,
    trans: Vec<(String, char, String, String)>,
}

impl AutomatonBuilder {
    pub fn new(ctx: GroupContext, alphabet: impl IntoIterator<Item = char>) -> Self {
        Self {
            ctx,
            alphabet: alphabet.into_iter().collect(),
            states: Vec::new(),
            init: Vec::new(),
            finals: Vec::new(),
            trans: Vec::new(),
        }
    }

    /// Declares a state; states are numbered in declaration order.
    pub fn state(mut self, name: &str) -> Self {
        self.states.push(name.to_string());
        self
    }

    pub fn states<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.states.extend(names.into_iter().map(str::to_string));
        self
    }

    pub fn init(mut self, state: &str, elem: &str) -> Self {
        self.init.push((state.to_string(), elem.to_string()));
        self
    }

    pub fn final_(mut self, state: &str, elem: &str) -> Self {
        self.finals.push((state.to_string(), elem.to_string()));
        self
    }

    pub fn trans(mut self, src: &str, letter: char, elem: &str, dst: &str) -> Self {
        self.trans.push((src.to_string(), letter, elem.to_string(), dst.to_string()));
        self
    }

    pub fn build(self) -> Result<WeightedAutomaton> {
        let id = |name: &str| {
            self.states.iter().position(|s| s == name).ok_or_else(|| Error::UnknownState(name.to_string()))
        };
        let rel = |pairs: &[(String, String)]| -> Result<Vec<(StateId, GroupElement)>> {
            pairs.iter().map(|(q, e)| Ok((id(q)?, self.ctx.parse_element(e)?))).collect()
        };
        let init = rel(&self.init)?;
        let finals = rel(&self.finals)?;
        let transitions = self
            .trans
            .iter()
            .map(|(src, letter, e, dst)| {
                Ok(Transition { src: id(src)?, letter: *letter, weight: self.ctx.parse_element(e)?, dst: id(dst)? })
            })
            .collect::<Result<Vec<_>>>()?;
        WeightedAutomaton::new(
            self.ctx.clone(),
            self.alphabet.iter().copied(),
            self.states.clone(),
            init,
            finals,
            transitions,
        )
    }
}

/// All words over `alphabet` of length at most `max_len`, shortest first.
pub fn words_up_to(alphabet: &[char], max_len: usize) -> impl Iterator<Item = Word> + '_ {
    (0..=max_len).flat_map(move |len| {
        let total = alphabet.len().pow(len as u32);
        (0..total).map(move |mut idx| {
            let mut w = vec![' '; len];
            for slot in w.iter_mut().rev() {
                *slot = alphabet[idx % alphabet.len()];
                idx /= alphabet.len();
            }
            w
        })
    })
}

/// First word of length at most `length_bound` on which the two automata disagree.
pub fn first_disagreement(w1: &WeightedAutomaton, w2: &WeightedAutomaton, length_bound: usize) -> Result<Option<Word>> {
    w1.compatible(w2)?;
    // breadth-first over words, carrying both frontiers, so the reported word is shortest
    type Frontier = BTreeSet<(StateId, GroupElement)>;
    let mut queue: VecDeque<(Word, Frontier, Frontier)> =
        VecDeque::from([(Vec::new(), w1.init.iter().cloned().collect(), w2.init.iter().cloned().collect())]);
    while let Some((word, f1, f2)) = queue.pop_front() {
        if w1.frontier_outputs(&f1)? != w2.frontier_outputs(&f2)? {
            return Ok(Some(word));
        }
        if word.len() == length_bound || (f1.is_empty() && f2.is_empty()) {
            continue;
        }
        for &a in &w1.alphabet {
            let mut next = word.clone();
            next.push(a);
            queue.push_back((next, w1.step_frontier(&f1, a)?, w2.step_frontier(&f2, a)?));
        }
    }
    Ok(None)
}

/// Brute-force oracle: equal output sets on every word of length at most `length_bound`.
pub fn equiv_up_to(w1: &WeightedAutomaton, w2: &WeightedAutomaton, length_bound: usize) -> Result<bool> {
    Ok(first_disagreement(w1, w2, length_bound)?.is_none())
}

/// A transition of the product automaton: one underlying transition per coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerEdge {
    pub letter: char,
    pub transitions: Vec<usize>,
    pub dst: Vec<StateId>,
}

/// `W^p`: states are `p`-vectors of states, runs are `p` synchronized runs,
/// weights are carried per coordinate.
#[derive(Clone, Copy, Debug)]
pub struct PowerAutomaton<'a> {
    wa: &'a WeightedAutomaton,
    arity: usize,
}

impl<'a> PowerAutomaton<'a> {
    pub fn automaton(&self) -> &'a WeightedAutomaton {
        self.wa
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_states(&self) -> usize {
        self.wa.num_states().pow(self.arity as u32)
    }

    pub fn successors(&self, v: &[StateId]) -> Vec<PowerEdge> {
        debug_assert_eq!(v.len(), self.arity);
        let mut out = Vec::new();
        for &a in self.wa.alphabet() {
            let choices: Vec<Vec<usize>> = v.iter().map(|&q| self.wa.outgoing_on(q, a).collect()).collect();
            if choices.iter().any(|c| c.is_empty()) {
                continue;
            }
            let mut idx = vec![0usize; v.len()];
            loop {
                let transitions: Vec<usize> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
                let dst = transitions.iter().map(|&t| self.wa.transition(t).dst).collect();
                out.push(PowerEdge { letter: a, transitions, dst });
                if !advance(&mut idx, &choices) {
                    break;
                }
            }
        }
        out
    }

    pub fn edge_weights(&self, e: &PowerEdge) -> Vec<GroupElement> {
        e.transitions.iter().map(|&t| self.wa.transition(t).weight.clone()).collect()
    }

    /// Breadth-first exploration of the vectors reachable from `roots`.
    pub fn explore(&self, roots: &[Vec<StateId>], cap: usize) -> Result<PowerGraph> {
        let mut g = PowerGraph::default();
        g.grow(self, roots, cap)?;
        Ok(g)
    }
}

/// Odometer step over the cartesian product of `choices`; false once exhausted.
fn advance(idx: &mut [usize], choices: &[Vec<usize>]) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < choices[pos].len() {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

/// An explicit fragment of a power automaton.
#[derive(Clone, Debug, Default)]
pub struct PowerGraph {
    pub vectors: Vec<Vec<StateId>>,
    pub index: HashMap<Vec<StateId>, usize>,
    pub edges: Vec<Vec<(usize, PowerEdge)>>,
}

impl PowerGraph {
    /// Adds every vector reachable from `roots` that is not yet present.
    /// Nodes already present keep their index and are assumed fully expanded.
    pub fn grow(&mut self, power: &PowerAutomaton<'_>, roots: &[Vec<StateId>], cap: usize) -> Result<()> {
        let mut queue = VecDeque::new();
        for r in roots {
            let (i, fresh) = self.insert(r.clone());
            if fresh {
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let v = self.vectors[i].clone();
            let mut edges = Vec::new();
            for e in power.successors(&v) {
                let (j, fresh) = self.insert(e.dst.clone());
                if fresh {
                    if self.vectors.len() > cap {
                        return Err(Error::SizeBoundExceeded { what: "explored power automaton", limit: cap });
                    }
                    queue.push_back(j);
                }
                edges.push((j, e));
            }
            self.edges[i] = edges;
        }
        Ok(())
    }

    fn insert(&mut self, v: Vec<StateId>) -> (usize, bool) {
        if let Some(&i) = self.index.get(&v) {
            return (i, false);
        }
        let i = self.vectors.len();
        self.index.insert(v.clone(), i);
        self.vectors.push(v);
        self.edges.push(Vec::new());
        (i, true)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Strongly connected component id of every node (Tarjan, iterative).
    pub fn scc_ids(&self) -> Vec<usize> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comp = vec![usize::MAX; n];
        let mut next_index = 0;
        let mut next_comp = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut ei)) = call.last_mut() {
                if *ei < self.edges[v].len() {
                    let w = self.edges[v][*ei].0;
                    *ei += 1;
                    if index[w] == usize::MAX {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        while let Some(w) = stack.pop() {
                            on_stack[w] = false;
                            comp[w] = next_comp;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                }
            }
        }
        comp
    }
}
