//! Branching twinning property of order k: decision, counterexamples, degree.
//!
//! Runs that still have to be told apart travel together through a power of
//! the automaton. A group of runs at a state vector can split as soon as a
//! synchronized cycle around that vector changes the delay of one of its
//! pairs; the classes of the "delay unchanged" equivalence then continue
//! independently. Over the integers the delay change only depends on the cycle
//! weights, so the split available at a vector is a property of its strongly
//! connected component. For transducers the delays reached so far matter as
//! well: either two cycle outputs differ in length, or the outputs produced so
//! far already disagree on some letter and the cycle outputs are not empty.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group::{FreeWord, GroupElement};
use crate::wa::{PowerAutomaton, PowerEdge, PowerGraph, StateId, WeightedAutomaton, Word};

/// One segment `q_{i-1} --u|α--> q_i --v|β--> q_i` of a counterexample run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CexSegment {
    pub u: Word,
    pub u_path: Vec<usize>,
    pub alpha: GroupElement,
    pub v: Word,
    pub v_path: Vec<usize>,
    pub beta: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CexRun {
    pub initial: StateId,
    pub gamma: GroupElement,
    pub segments: Vec<CexSegment>,
}

/// `k + 1` runs with `k` loops each, such that every pair of runs sees its
/// delay change along a loop read while both runs still share their input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BtpCounterexample {
    pub k: usize,
    pub runs: Vec<CexRun>,
}

impl BtpCounterexample {
    /// Replays every run through `w` and checks the separation condition for
    /// every pair directly from the definition.
    pub fn verify(&self, w: &WeightedAutomaton) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCounterexample(msg));
        if self.k == 0 || self.runs.len() != self.k + 1 {
            return bad(format!("expected {} runs", self.k + 1));
        }
        let ctx = w.ctx();
        for (j, run) in self.runs.iter().enumerate() {
            if !w.init().iter().any(|(q, g)| *q == run.initial && *g == run.gamma) {
                return bad(format!("run {j} does not start with an initial pair"));
            }
            if run.segments.len() != self.k {
                return bad(format!("run {j} does not have {} loops", self.k));
            }
            let mut state = run.initial;
            for (i, seg) in run.segments.iter().enumerate() {
                let replay = |path: &[usize], word: &[char], from: StateId| -> Option<(StateId, GroupElement)> {
                    if path.len() != word.len() {
                        return None;
                    }
                    let mut q = from;
                    let mut weight = ctx.identity();
                    for (&t, &a) in path.iter().zip(word) {
                        let tr = w.transitions().get(t)?;
                        if tr.src != q || tr.letter != a {
                            return None;
                        }
                        weight = ctx.op(&weight, &tr.weight).ok()?;
                        q = tr.dst;
                    }
                    Some((q, weight))
                };
                let Some((after_u, alpha)) = replay(&seg.u_path, &seg.u, state) else {
                    return bad(format!("segment u of loop {} on run {j} is not a path", i + 1));
                };
                let Some((after_v, beta)) = replay(&seg.v_path, &seg.v, after_u) else {
                    return bad(format!("loop {} on run {j} is not a path", i + 1));
                };
                if after_v != after_u {
                    return bad(format!("loop {} on run {j} does not return to its state", i + 1));
                }
                if alpha != seg.alpha || beta != seg.beta {
                    return bad(format!("recorded weights of loop {} on run {j} are wrong", i + 1));
                }
                state = after_u;
            }
        }
        for j in 0..self.runs.len() {
            for jp in j + 1..self.runs.len() {
                if self.separating_loop(w, j, jp)?.is_none() {
                    return bad(format!("runs {j} and {jp} are never separated"));
                }
            }
        }
        Ok(())
    }

    /// The first loop (1-based) read by runs `j` and `j'` on a shared input
    /// prefix along which their delay changes.
    pub fn separating_loop(&self, w: &WeightedAutomaton, j: usize, jp: usize) -> Result<Option<usize>> {
        let ctx = w.ctx();
        let (r, rp) = (&self.runs[j], &self.runs[jp]);
        let (mut x, mut xp) = (r.gamma.clone(), rp.gamma.clone());
        for (i, (s, sp)) in r.segments.iter().zip(&rp.segments).enumerate() {
            if s.u != sp.u || s.v != sp.v {
                return Ok(None);
            }
            x = ctx.op(&x, &s.alpha)?;
            xp = ctx.op(&xp, &sp.alpha)?;
            let before = ctx.delay(&x, &xp)?;
            let after = ctx.delay(&ctx.op(&x, &s.beta)?, &ctx.op(&xp, &sp.beta)?)?;
            if before != after {
                return Ok(Some(i + 1));
            }
        }
        Ok(None)
    }

    /// Stable text form naming every `u_{i,j}`, `v_{i,j}` and weight.
    pub fn render(&self, w: &WeightedAutomaton) -> String {
        let word = |u: &Word| if u.is_empty() { "ε".to_string() } else { u.iter().collect() };
        let mut out = String::new();
        let _ = writeln!(out, "counterexample k={}", self.k);
        for (j, run) in self.runs.iter().enumerate() {
            let _ = writeln!(out, "run {j}: init {} gamma {}", w.state_name(run.initial), run.gamma);
            let mut state = run.initial;
            for (i, s) in run.segments.iter().enumerate() {
                if let Some(&t) = s.u_path.last() {
                    state = w.transition(t).dst;
                }
                let _ = writeln!(
                    out,
                    "  loop {}: u={} alpha={} state={} v={} beta={}",
                    i + 1,
                    word(&s.u),
                    s.alpha,
                    w.state_name(state),
                    word(&s.v),
                    s.beta
                );
            }
        }
        for j in 0..self.runs.len() {
            for jp in j + 1..self.runs.len() {
                if let Ok(Some(i)) = self.separating_loop(w, j, jp) {
                    let _ = writeln!(out, "pair ({j},{jp}) separated at loop {i}");
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BtpResult {
    Holds,
    Fails(Box<BtpCounterexample>),
    Inconclusive(String),
}

impl BtpResult {
    pub fn is_holds(&self) -> bool {
        matches!(self, BtpResult::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, BtpResult::Fails(_))
    }
}

/// The degree of sequentiality, or a lower bound when every checked order fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Exactly(usize),
    AtLeast(usize),
}

/// Initial pairs of the runs together with the plan laying them out.
type Found = (Vec<(StateId, GroupElement)>, Plan);

/// Decides BTP-k for an automaton over the integers or a transducer with outputs in `B*`.
pub fn check_btp(w: &WeightedAutomaton, k: usize, budget: &Budget) -> Result<BtpResult> {
    if w.ctx().is_commutative() {
        check_btp_integers(w, k, budget)
    } else if w.ctx().is_free() {
        check_btp_transducer(w, k, budget)
    } else {
        Err(Error::UnsupportedGroup(w.ctx().tag()))
    }
}

/// The least `d ≤ k_max` for which BTP-d holds.
pub fn degree_of_sequentiality(w: &WeightedAutomaton, k_max: usize, budget: &Budget) -> Result<Degree> {
    for d in 1..=k_max {
        match check_btp(w, d, budget)? {
            BtpResult::Holds => return Ok(Degree::Exactly(d)),
            BtpResult::Fails(_) => {}
            BtpResult::Inconclusive(why) => return Err(Error::Inconclusive(why)),
        }
    }
    Ok(Degree::AtLeast(k_max + 1))
}

/// Shortest synchronized cycle around `v` of length at most `max_len` along
/// which coordinates `j` and `j'` accumulate different weights.
pub fn find_diff_cycle(
    wp: &PowerAutomaton<'_>,
    v: &[StateId],
    j: usize,
    jp: usize,
    max_len: usize,
) -> Result<Option<Vec<PowerEdge>>> {
    let ctx = wp.automaton().ctx();
    type Key = (Vec<StateId>, GroupElement);
    let start: Key = (v.to_vec(), ctx.identity());
    let mut parent: HashMap<Key, Option<(Key, PowerEdge)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut layer = vec![start];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for key in &layer {
            for e in wp.successors(&key.0) {
                let w = wp.edge_weights(&e);
                let d = ctx.op(&ctx.op(&ctx.inverse(&w[j])?, &key.1)?, &w[jp])?;
                let nk = (e.dst.clone(), d);
                if parent.contains_key(&nk) {
                    continue;
                }
                parent.insert(nk.clone(), Some((key.clone(), e)));
                if nk.0 == v && !nk.1.is_identity() {
                    let mut path = Vec::new();
                    let mut cur = nk;
                    while let Some(Some((prev, e))) = parent.get(&cur) {
                        path.push(e.clone());
                        cur = prev.clone();
                    }
                    path.reverse();
                    return Ok(Some(path));
                }
                next.push(nk);
            }
        }
        layer = next;
    }
    Ok(None)
}

/// BTP-k over `(Z, +)`.
pub fn check_btp_integers(w: &WeightedAutomaton, k: usize, budget: &Budget) -> Result<BtpResult> {
    if !w.ctx().is_commutative() {
        return Err(Error::UnsupportedGroup(w.ctx().tag()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("the order k must be at least 1".into()));
    }
    let w = w.trim();
    let roots = initial_multisets(&w, k + 1, true);
    let mut search = IntSearch::new(&w, k + 1, budget.power_cap);
    let outcome = (|| -> Result<Option<Found>> {
        for root in &roots {
            let v: Vec<StateId> = root.iter().map(|(q, _)| *q).collect();
            if search.sep(&v)? {
                return Ok(Some((root.clone(), search.plan(&v)?)));
            }
        }
        Ok(None)
    })();
    match outcome {
        Ok(None) => Ok(BtpResult::Holds),
        Ok(Some((root, plan))) => Ok(BtpResult::Fails(Box::new(assemble(&w, k, &root, &plan)?))),
        Err(Error::SizeBoundExceeded { what, limit }) => {
            Ok(BtpResult::Inconclusive(format!("{what} exceeds the configured bound of {limit}")))
        }
        Err(e) => Err(e),
    }
}

/// BTP-k for a transducer: every initial, final and transition weight must be a word over `B`.
pub fn check_btp_transducer(w: &WeightedAutomaton, k: usize, budget: &Budget) -> Result<BtpResult> {
    if !w.ctx().is_free() {
        return Err(Error::UnsupportedGroup(w.ctx().tag()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("the order k must be at least 1".into()));
    }
    let non_positive = w
        .init()
        .iter()
        .chain(w.finals())
        .map(|(_, e)| e)
        .chain(w.transitions().iter().map(|t| &t.weight))
        .find(|e| !e.as_word().is_some_and(FreeWord::is_positive));
    if let Some(e) = non_positive {
        return Err(Error::NotPositive(e.to_string()));
    }
    let w = w.trim();
    let n = w.num_states() as u64;
    let theoretical =
        n.checked_pow(k as u32 + 1).and_then(|x| x.checked_mul(w.mw_constant().max(1))).unwrap_or(u64::MAX);
    let bound = budget.norm_cap.map_or(theoretical, |c| c.min(theoretical));
    let roots = initial_multisets(&w, k + 1, false);
    let mut search = WordSearch::new(&w, k + 1, budget, bound);
    let outcome = (|| -> Result<Option<Found>> {
        for root in &roots {
            let cfg = search.root_config(root);
            if let Some(plan) = search.sep(&cfg)? {
                return Ok(Some((root.clone(), plan)));
            }
        }
        Ok(None)
    })();
    match outcome {
        Ok(None) if search.truncated && bound < theoretical => Ok(BtpResult::Inconclusive(format!(
            "delay norms were capped at {bound}, below the closeness bound {theoretical}"
        ))),
        Ok(None) => Ok(BtpResult::Holds),
        Ok(Some((root, plan))) => Ok(BtpResult::Fails(Box::new(assemble(&w, k, &root, &plan)?))),
        Err(Error::SizeBoundExceeded { what, limit }) => {
            Ok(BtpResult::Inconclusive(format!("{what} exceeds the configured bound of {limit}")))
        }
        Err(Error::BudgetExceeded(why)) => Ok(BtpResult::Inconclusive(why)),
        Err(e) => Err(e),
    }
}

/// Sorted multisets of size `size` of initial pairs; with `by_state`, one pair per state.
fn initial_multisets(w: &WeightedAutomaton, size: usize, by_state: bool) -> Vec<Vec<(StateId, GroupElement)>> {
    let mut pool: Vec<(StateId, GroupElement)> = w.init().to_vec();
    if by_state {
        pool.dedup_by_key(|(q, _)| *q);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; size];
    if pool.is_empty() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| pool[i].clone()).collect());
        // next non-decreasing index vector
        let Some(pos) = (0..size).rev().find(|&p| idx[p] + 1 < pool.len()) else { break };
        let v = idx[pos] + 1;
        for slot in &mut idx[pos..] {
            *slot = v;
        }
    }
    out
}

/// How a group of runs moves to the vector where it splits, the loops read
/// there, and the plans of the resulting classes (as coordinate lists).
#[derive(Clone, Debug, Default)]
struct Plan {
    path: Vec<PowerEdge>,
    loops: Vec<Vec<PowerEdge>>,
    children: Vec<(Vec<usize>, Plan)>,
}

fn restrict<T: Clone>(v: &[T], coords: &[usize]) -> Vec<T> {
    coords.iter().map(|&c| v[c].clone()).collect()
}

/// Groups coordinates by label, in order of first appearance.
fn classes_of<L: PartialEq>(labels: &[L]) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..labels.len() {
        match classes.iter_mut().find(|c| labels[c[0]] == labels[i]) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

/// The explored part of one power of the automaton with its strongly
/// connected components and, per component, cycle potentials for an additive
/// per-coordinate measure of edges.
struct Level<'a> {
    power: PowerAutomaton<'a>,
    measure: fn(&WeightedAutomaton, usize) -> i128,
    cap: usize,
    graph: PowerGraph,
    analyzed: usize,
    comp: Vec<usize>,
    members: Vec<Vec<usize>>,
    rev: Vec<Vec<(usize, usize)>>,
    /// Per component, a class label per coordinate: equal labels iff every
    /// cycle of the component has equal measure on both coordinates.
    comp_classes: Vec<Vec<usize>>,
    /// Per component and coordinate, whether some edge has nonzero measure.
    comp_active: Vec<Vec<bool>>,
}

type Step = (usize, usize);

impl<'a> Level<'a> {
    fn new(
        w: &'a WeightedAutomaton,
        p: usize,
        cap: usize,
        measure: fn(&WeightedAutomaton, usize) -> i128,
    ) -> Result<Self> {
        Ok(Self {
            power: w.power(p, cap)?,
            measure,
            cap,
            graph: PowerGraph::default(),
            analyzed: 0,
            comp: Vec::new(),
            members: Vec::new(),
            rev: Vec::new(),
            comp_classes: Vec::new(),
            comp_active: Vec::new(),
        })
    }

    fn node(&mut self, v: &[StateId]) -> Result<usize> {
        if let Some(&i) = self.graph.index.get(v) {
            return Ok(i);
        }
        self.graph.grow(&self.power, &[v.to_vec()], self.cap)?;
        self.analyze();
        Ok(self.graph.index[v])
    }

    fn m(&self, e: &PowerEdge, coord: usize) -> i128 {
        (self.measure)(self.power.automaton(), e.transitions[coord])
    }

    fn analyze(&mut self) {
        if self.analyzed == self.graph.len() {
            return;
        }
        let n = self.graph.len();
        let p = self.power.arity();
        self.comp = self.graph.scc_ids();
        let ncomp = self.comp.iter().copied().max().map_or(0, |c| c + 1);
        self.members = vec![Vec::new(); ncomp];
        for (i, &c) in self.comp.iter().enumerate() {
            self.members[c].push(i);
        }
        self.rev = vec![Vec::new(); n];
        for (x, edges) in self.graph.edges.iter().enumerate() {
            for (ei, (y, _)) in edges.iter().enumerate() {
                self.rev[*y].push((x, ei));
            }
        }
        self.comp_classes = Vec::with_capacity(ncomp);
        self.comp_active = Vec::with_capacity(ncomp);
        let mut phi: Vec<Option<Vec<i128>>> = vec![None; n];
        for c in 0..ncomp {
            let root = self.members[c][0];
            phi[root] = Some(vec![0; p]);
            let mut queue = VecDeque::from([root]);
            let mut columns: Vec<Vec<i128>> = vec![Vec::new(); p];
            let mut active = vec![false; p];
            while let Some(x) = queue.pop_front() {
                let px = phi[x].clone().expect("visited");
                for (y, e) in &self.graph.edges[x] {
                    if self.comp[*y] != c {
                        continue;
                    }
                    let shifted: Vec<i128> = (0..p).map(|j| px[j] + self.m(e, j)).collect();
                    for (j, active) in active.iter_mut().enumerate() {
                        *active |= self.m(e, j) != 0;
                    }
                    match &phi[*y] {
                        None => {
                            phi[*y] = Some(shifted);
                            queue.push_back(*y);
                        }
                        Some(py) => {
                            for j in 0..p {
                                columns[j].push(shifted[j] - py[j]);
                            }
                        }
                    }
                }
            }
            let labels = classes_of(&columns);
            let mut per_coord = vec![0; p];
            for (label, class) in labels.iter().enumerate() {
                for &j in class {
                    per_coord[j] = label;
                }
            }
            self.comp_classes.push(per_coord);
            self.comp_active.push(active);
        }
        self.analyzed = n;
    }

    fn classes_at(&self, node: usize) -> Vec<Vec<usize>> {
        classes_of(&self.comp_classes[self.comp[node]])
    }

    fn edge(&self, s: Step) -> &PowerEdge {
        &self.graph.edges[s.0][s.1].1
    }

    fn dst(&self, s: Step) -> usize {
        self.graph.edges[s.0][s.1].0
    }

    /// Shortest paths inside the component of `node`: from `node` to every
    /// member, and from every member back to `node`.
    fn comp_paths(&self, node: usize) -> (HashMap<usize, Vec<Step>>, HashMap<usize, Vec<Step>>) {
        let c = self.comp[node];
        let mut fwd: HashMap<usize, Vec<Step>> = HashMap::from([(node, Vec::new())]);
        let mut queue = VecDeque::from([node]);
        while let Some(x) = queue.pop_front() {
            for (ei, (y, _)) in self.graph.edges[x].iter().enumerate() {
                if self.comp[*y] == c && !fwd.contains_key(y) {
                    let mut path = fwd[&x].clone();
                    path.push((x, ei));
                    fwd.insert(*y, path);
                    queue.push_back(*y);
                }
            }
        }
        let mut back: HashMap<usize, Vec<Step>> = HashMap::from([(node, Vec::new())]);
        let mut queue = VecDeque::from([node]);
        while let Some(y) = queue.pop_front() {
            for &(x, ei) in &self.rev[y] {
                if self.comp[x] == c && !back.contains_key(&x) {
                    let mut path = vec![(x, ei)];
                    path.extend(back[&y].iter().copied());
                    back.insert(x, path);
                    queue.push_back(x);
                }
            }
        }
        (fwd, back)
    }

    fn intra_edges(&self, node: usize) -> Vec<Step> {
        let c = self.comp[node];
        self.members[c]
            .iter()
            .flat_map(|&x| {
                self.graph.edges[x]
                    .iter()
                    .enumerate()
                    .filter(move |(_, (y, _))| self.comp[*y] == c)
                    .map(move |(ei, _)| (x, ei))
            })
            .collect()
    }

    fn diff(&self, path: &[Step], a: usize, b: usize) -> i128 {
        path.iter().map(|&s| self.m(self.edge(s), a) - self.m(self.edge(s), b)).sum()
    }

    /// A cycle around `node` whose measure differs on coordinates `a` and `b`,
    /// of length below twice the component size.
    fn separating_cycle(&self, node: usize, a: usize, b: usize) -> Option<Vec<PowerEdge>> {
        let (fwd, back) = self.comp_paths(node);
        for s in self.intra_edges(node) {
            let (x, y) = (s.0, self.dst(s));
            let mut through: Vec<Step> = fwd[&x].clone();
            through.push(s);
            through.extend(back[&y].iter().copied());
            if self.diff(&through, a, b) != 0 {
                return Some(self.edges_of(&through));
            }
            let mut direct = fwd[&y].clone();
            direct.extend(back[&y].iter().copied());
            if self.diff(&direct, a, b) != 0 {
                return Some(self.edges_of(&direct));
            }
        }
        None
    }

    /// A cycle around `node` through an edge of nonzero measure on `a` or `b`.
    fn active_cycle(&self, node: usize, a: usize, b: usize) -> Option<Vec<PowerEdge>> {
        let (fwd, back) = self.comp_paths(node);
        let s = self
            .intra_edges(node)
            .into_iter()
            .find(|&s| self.m(self.edge(s), a) != 0 || self.m(self.edge(s), b) != 0)?;
        let mut through: Vec<Step> = fwd[&s.0].clone();
        through.push(s);
        through.extend(back[&self.dst(s)].iter().copied());
        Some(self.edges_of(&through))
    }

    fn edges_of(&self, path: &[Step]) -> Vec<PowerEdge> {
        path.iter().map(|&s| self.edge(s).clone()).collect()
    }

    /// Shortest path from `from` to a node satisfying `goal`.
    fn path_to(&self, from: usize, goal: &HashSet<usize>) -> Option<(usize, Vec<PowerEdge>)> {
        let mut parent: HashMap<usize, Option<Step>> = HashMap::from([(from, None)]);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if goal.contains(&x) {
                let mut path = Vec::new();
                let mut cur = x;
                while let Some(Some(s)) = parent.get(&cur) {
                    path.push(self.edge(*s).clone());
                    cur = s.0;
                }
                path.reverse();
                return Some((x, path));
            }
            for (ei, (y, _)) in self.graph.edges[x].iter().enumerate() {
                if !parent.contains_key(y) {
                    parent.insert(*y, Some((x, ei)));
                    queue.push_back(*y);
                }
            }
        }
        None
    }
}

fn int_measure(w: &WeightedAutomaton, t: usize) -> i128 {
    w.transition(t).weight.as_int().unwrap_or(0) as i128
}

fn length_measure(w: &WeightedAutomaton, t: usize) -> i128 {
    w.ctx().norm(&w.transition(t).weight) as i128
}

/// The search over `(Z, +)`, where a group splits exactly along the cycle
/// classes of the component it reaches.
struct IntSearch<'a> {
    w: &'a WeightedAutomaton,
    cap: usize,
    levels: Vec<Option<Level<'a>>>,
    sep: Vec<HashMap<usize, bool>>,
    good: Vec<HashMap<usize, bool>>,
}

impl<'a> IntSearch<'a> {
    fn new(w: &'a WeightedAutomaton, max_arity: usize, cap: usize) -> Self {
        Self {
            w,
            cap,
            levels: (0..=max_arity).map(|_| None).collect(),
            sep: vec![HashMap::new(); max_arity + 1],
            good: vec![HashMap::new(); max_arity + 1],
        }
    }

    fn level(&mut self, p: usize) -> Result<&mut Level<'a>> {
        if self.levels[p].is_none() {
            self.levels[p] = Some(Level::new(self.w, p, self.cap, int_measure)?);
        }
        Ok(self.levels[p].as_mut().expect("initialized"))
    }

    /// Whether the runs at `v` can be pairwise separated.
    fn sep(&mut self, v: &[StateId]) -> Result<bool> {
        let p = v.len();
        if p <= 1 {
            return Ok(true);
        }
        let node = self.level(p)?.node(v)?;
        if let Some(&b) = self.sep[p].get(&node) {
            return Ok(b);
        }
        // components are numbered sinks first, so successors are settled before
        let ncomp = self.level(p)?.members.len();
        for c in 0..ncomp {
            let members = self.level(p)?.members[c].clone();
            if self.sep[p].contains_key(&members[0]) {
                continue;
            }
            let mut value = false;
            for &m in &members {
                if self.good(p, m)? {
                    value = true;
                    break;
                }
            }
            if !value {
                let lvl = self.level(p)?;
                let succ: Vec<usize> =
                    members.iter().flat_map(|&m| lvl.graph.edges[m].iter().map(|(y, _)| *y)).collect();
                value = succ.iter().any(|y| self.sep[p].get(y).copied().unwrap_or(false));
            }
            for m in members {
                self.sep[p].insert(m, value);
            }
        }
        Ok(self.sep[p][&node])
    }

    /// Whether the group splits at `node` into classes that are all separable.
    fn good(&mut self, p: usize, node: usize) -> Result<bool> {
        if let Some(&b) = self.good[p].get(&node) {
            return Ok(b);
        }
        let (classes, v) = {
            let lvl = self.level(p)?;
            (lvl.classes_at(node), lvl.graph.vectors[node].clone())
        };
        let mut value = classes.len() >= 2;
        if value {
            for class in classes.iter().filter(|c| c.len() >= 2) {
                if !self.sep(&restrict(&v, class))? {
                    value = false;
                    break;
                }
            }
        }
        self.good[p].insert(node, value);
        Ok(value)
    }

    fn plan(&mut self, v: &[StateId]) -> Result<Plan> {
        let p = v.len();
        let node = self.level(p)?.node(v)?;
        let reach = {
            let lvl = self.level(p)?;
            let mut seen = HashSet::from([node]);
            let mut stack = vec![node];
            while let Some(x) = stack.pop() {
                for (y, _) in &lvl.graph.edges[x] {
                    if seen.insert(*y) {
                        stack.push(*y);
                    }
                }
            }
            seen
        };
        let mut goals = HashSet::new();
        for x in reach {
            if self.good(p, x)? {
                goals.insert(x);
            }
        }
        let lvl = self.level(p)?;
        let (target, path) =
            lvl.path_to(node, &goals).ok_or_else(|| Error::Inconclusive("no split reachable".into()))?;
        let classes = lvl.classes_at(target);
        let label = &lvl.comp_classes[lvl.comp[target]];
        let mut current = vec![0usize; p];
        let mut loops = Vec::new();
        loop {
            let pair = (0..p)
                .flat_map(|a| (a + 1..p).map(move |b| (a, b)))
                .find(|&(a, b)| current[a] == current[b] && label[a] != label[b]);
            let Some((a, b)) = pair else { break };
            let cycle = lvl.separating_cycle(target, a, b).expect("classes come from a separating edge");
            let sums: Vec<i128> = (0..p).map(|j| cycle.iter().map(|e| lvl.m(e, j)).sum()).collect();
            let keyed: Vec<(usize, i128)> = (0..p).map(|j| (current[j], sums[j])).collect();
            let refined = classes_of(&keyed);
            for (id, class) in refined.iter().enumerate() {
                for &j in class {
                    current[j] = id;
                }
            }
            loops.push(cycle);
        }
        let target_v = lvl.graph.vectors[target].clone();
        let mut children = Vec::new();
        for class in classes.into_iter().filter(|c| c.len() >= 2) {
            let child = self.plan(&restrict(&target_v, &class))?;
            children.push((class, child));
        }
        Ok(Plan { path, loops, children })
    }
}

/// Delay between two runs of a transducer, forgotten once it exceeds the
/// closeness bound.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PairDelay {
    Exact(FreeWord),
    Far,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Config {
    v: Vec<StateId>,
    /// Delays of the pairs `(a, b)`, `a < b`, in lexicographic order.
    d: Vec<PairDelay>,
}

fn pair_index(p: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < p);
    a * p - a * (a + 1) / 2 + (b - a - 1)
}

/// A delay `s⁻¹t` between two output words disagreeing on some letter.
fn is_mismatch(d: &FreeWord) -> bool {
    let s = d.symbols();
    s.iter().any(|x| x.inverse) && s.iter().any(|x| !x.inverse)
}

struct WordSearch<'a> {
    w: &'a WeightedAutomaton,
    budget: &'a Budget,
    bound: u64,
    levels: Vec<Option<Level<'a>>>,
    memo: HashMap<Config, Option<Plan>>,
    configs: usize,
    truncated: bool,
}

impl<'a> WordSearch<'a> {
    fn new(w: &'a WeightedAutomaton, max_arity: usize, budget: &'a Budget, bound: u64) -> Self {
        Self {
            w,
            budget,
            bound,
            levels: (0..=max_arity).map(|_| None).collect(),
            memo: HashMap::new(),
            configs: 0,
            truncated: false,
        }
    }

    fn level(&mut self, p: usize) -> Result<&mut Level<'a>> {
        if self.levels[p].is_none() {
            self.levels[p] = Some(Level::new(self.w, p, self.budget.power_cap, length_measure)?);
        }
        Ok(self.levels[p].as_mut().expect("initialized"))
    }

    fn word(e: &GroupElement) -> &FreeWord {
        e.as_word().expect("free group element")
    }

    fn clamp(&mut self, d: FreeWord) -> PairDelay {
        if d.len() as u64 > self.bound {
            self.truncated = true;
            PairDelay::Far
        } else {
            PairDelay::Exact(d)
        }
    }

    fn root_config(&mut self, root: &[(StateId, GroupElement)]) -> Config {
        let p = root.len();
        let mut d = Vec::new();
        for a in 0..p {
            for b in a + 1..p {
                let delay = Self::word(&root[a].1).inverse().mul(Self::word(&root[b].1));
                d.push(self.clamp(delay));
            }
        }
        Config { v: root.iter().map(|(q, _)| *q).collect(), d }
    }

    fn step(&mut self, c: &Config, e: &PowerEdge) -> Config {
        let p = c.v.len();
        let outs: Vec<FreeWord> =
            e.transitions.iter().map(|&t| Self::word(&self.w.transition(t).weight).clone()).collect();
        let mut d = Vec::with_capacity(c.d.len());
        for a in 0..p {
            for b in a + 1..p {
                d.push(match &c.d[pair_index(p, a, b)] {
                    PairDelay::Far => PairDelay::Far,
                    PairDelay::Exact(x) => {
                        let next = outs[a].inverse().mul(x).mul(&outs[b]);
                        self.clamp(next)
                    }
                });
            }
        }
        Config { v: e.dst.clone(), d }
    }

    fn restrict_config(c: &Config, class: &[usize]) -> Config {
        let p = c.v.len();
        let mut d = Vec::new();
        for (i, &a) in class.iter().enumerate() {
            for &b in &class[i + 1..] {
                d.push(c.d[pair_index(p, a, b)].clone());
            }
        }
        Config { v: restrict(&c.v, class), d }
    }

    /// Classes of the "delay certainly unchanged" relation after reading `cycle` at `c`.
    fn split(&self, c: &Config, cycle: &[PowerEdge]) -> Vec<Vec<usize>> {
        let p = c.v.len();
        let ctx = self.w.ctx();
        let betas: Vec<FreeWord> = (0..p)
            .map(|j| {
                let weights: Vec<GroupElement> =
                    cycle.iter().map(|e| self.w.transition(e.transitions[j]).weight.clone()).collect();
                Self::word(&ctx.product(weights.iter()).expect("same group")).clone()
            })
            .collect();
        let mut parent: Vec<usize> = (0..p).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        for a in 0..p {
            for b in a + 1..p {
                let changed = match &c.d[pair_index(p, a, b)] {
                    PairDelay::Exact(d) => betas[a].inverse().mul(d).mul(&betas[b]) != *d,
                    PairDelay::Far => betas[a].len() != betas[b].len(),
                };
                if !changed {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let roots: Vec<usize> = (0..p).map(|j| find(&mut parent, j)).collect();
        classes_of(&roots)
    }

    /// Cycles around `c` that change the delay of at least one pair.
    fn candidate_cycles(&mut self, c: &Config) -> Result<Vec<Vec<PowerEdge>>> {
        let p = c.v.len();
        let node = self.level(p)?.node(&c.v)?;
        let lvl = self.level(p)?;
        let label = lvl.comp_classes[lvl.comp[node]].clone();
        let active = lvl.comp_active[lvl.comp[node]].clone();
        let mut out: Vec<Vec<PowerEdge>> = Vec::new();
        for a in 0..p {
            for b in a + 1..p {
                let cycle = if label[a] != label[b] {
                    lvl.separating_cycle(node, a, b)
                } else if matches!(&c.d[pair_index(p, a, b)], PairDelay::Exact(d) if is_mismatch(d))
                    && (active[a] || active[b])
                {
                    lvl.active_cycle(node, a, b)
                } else {
                    None
                };
                if let Some(cycle) = cycle {
                    if !out.contains(&cycle) {
                        out.push(cycle);
                    }
                }
            }
        }
        Ok(out)
    }

    fn sep(&mut self, root: &Config) -> Result<Option<Plan>> {
        if root.v.len() <= 1 {
            return Ok(Some(Plan::default()));
        }
        if let Some(m) = self.memo.get(root) {
            return Ok(m.clone());
        }
        let mut parent: HashMap<Config, Option<(Config, PowerEdge)>> = HashMap::from([(root.clone(), None)]);
        let mut queue = VecDeque::from([root.clone()]);
        let mut found = None;
        'bfs: while let Some(c) = queue.pop_front() {
            self.configs += 1;
            if self.configs > self.budget.config_cap {
                return Err(Error::BudgetExceeded(format!(
                    "explored more than {} delay configurations",
                    self.budget.config_cap
                )));
            }
            let cycles = self.candidate_cycles(&c)?;
            for cycle in &cycles {
                let classes = self.split(&c, cycle);
                if classes.len() < 2 {
                    continue;
                }
                let mut children = Vec::new();
                for class in classes.into_iter().filter(|cl| cl.len() >= 2) {
                    match self.sep(&Self::restrict_config(&c, &class))? {
                        Some(plan) => children.push((class, plan)),
                        None => continue 'bfs,
                    }
                }
                let mut path = Vec::new();
                let mut cur = c.clone();
                while let Some(Some((prev, e))) = parent.get(&cur) {
                    path.push(e.clone());
                    cur = prev.clone();
                }
                path.reverse();
                found = Some(Plan { path, loops: vec![cycle.clone()], children });
                break 'bfs;
            }
            // with exact delays a failed split rules out everything reachable from here
            if !cycles.is_empty() && c.d.iter().all(|d| matches!(d, PairDelay::Exact(_))) {
                continue;
            }
            let node = self.level(c.v.len())?.node(&c.v)?;
            let edges: Vec<PowerEdge> =
                self.level(c.v.len())?.graph.edges[node].iter().map(|(_, e)| e.clone()).collect();
            for e in edges {
                let next = self.step(&c, &e);
                if !parent.contains_key(&next) {
                    parent.insert(next.clone(), Some((c.clone(), e)));
                    queue.push_back(next);
                }
            }
        }
        self.memo.insert(root.clone(), found.clone());
        Ok(found)
    }
}

/// Lays the plan out as `k + 1` runs, drops loops that separate nothing new
/// and pads with empty loops up to `k`.
fn assemble(
    w: &WeightedAutomaton,
    k: usize,
    root: &[(StateId, GroupElement)],
    plan: &Plan,
) -> Result<BtpCounterexample> {
    let runs = root.len();
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); runs];
    let mut events: Vec<Vec<(Vec<usize>, Vec<usize>)>> = Vec::new();
    let members: Vec<usize> = (0..runs).collect();
    lay_out(plan, &members, &mut pending, &mut events);

    let ctx = w.ctx();
    let weight = |path: &[usize]| ctx.product(path.iter().map(|&t| &w.transition(t).weight));
    let mut prefix: Vec<GroupElement> = root.iter().map(|(_, g)| g.clone()).collect();
    let mut label = vec![0usize; runs];
    let mut carried: Vec<Vec<usize>> = vec![Vec::new(); runs];
    let mut kept: Vec<Vec<(Vec<usize>, Vec<usize>)>> = Vec::new();
    for event in events {
        let mut after = Vec::with_capacity(runs);
        for (j, (u, v)) in event.iter().enumerate() {
            prefix[j] = ctx.op(&prefix[j], &weight(u)?)?;
            after.push(ctx.op(&prefix[j], &weight(v)?)?);
        }
        // j, j' stay together iff no loop so far changed their delay
        let mut next_label = vec![usize::MAX; runs];
        let mut next_id = 0;
        for j in 0..runs {
            if next_label[j] != usize::MAX {
                continue;
            }
            next_label[j] = next_id;
            for jp in j + 1..runs {
                if next_label[jp] == usize::MAX
                    && label[jp] == label[j]
                    && ctx.delay(&prefix[j], &prefix[jp])? == ctx.delay(&after[j], &after[jp])?
                {
                    next_label[jp] = next_id;
                }
            }
            next_id += 1;
        }
        let refines = next_label.iter().max() != label.iter().max();
        label = next_label;
        if refines {
            let segs = event
                .into_iter()
                .enumerate()
                .map(|(j, (u, v))| {
                    let mut full = std::mem::take(&mut carried[j]);
                    full.extend(u);
                    (full, v)
                })
                .collect();
            kept.push(segs);
        } else {
            for (j, (u, _)) in event.into_iter().enumerate() {
                carried[j].extend(u);
            }
        }
    }
    if kept.len() > k {
        return Err(Error::InvalidCounterexample(format!("{} separating loops for order {k}", kept.len())));
    }
    while kept.len() < k {
        kept.push(vec![(Vec::new(), Vec::new()); runs]);
    }
    let word_of = |path: &[usize]| path.iter().map(|&t| w.transition(t).letter).collect::<Word>();
    let mut cex_runs = Vec::with_capacity(runs);
    for (j, (q, gamma)) in root.iter().enumerate() {
        let mut segments = Vec::with_capacity(k);
        for event in &kept {
            let (u, v) = &event[j];
            segments.push(CexSegment {
                u: word_of(u),
                u_path: u.clone(),
                alpha: weight(u)?,
                v: word_of(v),
                v_path: v.clone(),
                beta: weight(v)?,
            });
        }
        cex_runs.push(CexRun { initial: *q, gamma: gamma.clone(), segments });
    }
    let cex = BtpCounterexample { k, runs: cex_runs };
    cex.verify(w)?;
    Ok(cex)
}

fn lay_out(
    plan: &Plan,
    members: &[usize],
    pending: &mut [Vec<usize>],
    events: &mut Vec<Vec<(Vec<usize>, Vec<usize>)>>,
) {
    for e in &plan.path {
        for (local, &r) in members.iter().enumerate() {
            pending[r].push(e.transitions[local]);
        }
    }
    for cycle in &plan.loops {
        let mut event = vec![(Vec::new(), Vec::new()); pending.len()];
        for (local, &r) in members.iter().enumerate() {
            let v = cycle.iter().map(|e| e.transitions[local]).collect();
            event[r] = (std::mem::take(&mut pending[r]), v);
        }
        events.push(event);
    }
    for (coords, child) in &plan.children {
        let sub: Vec<usize> = coords.iter().map(|&c| members[c]).collect();
        lay_out(child, &sub, pending, events);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::group::GroupContext;
    use crate::wa::AutomatonBuilder;

    fn check(w: &WeightedAutomaton, k: usize) -> BtpResult {
        check_btp(w, k, &Budget::default()).unwrap()
    }

    #[test]
    fn w0_orders() {
        let w0 = corpus::w0();
        let BtpResult::Fails(cex) = check(&w0, 1) else { panic!("BTP-1 should fail") };
        cex.verify(&w0).unwrap();
        let loop_states: Vec<&str> = cex
            .runs
            .iter()
            .map(|r| {
                let last = r.segments[0].u_path.last().map_or(r.initial, |&t| w0.transition(t).dst);
                w0.state_name(last)
            })
            .collect();
        assert!(loop_states.contains(&"q_a") && loop_states.contains(&"q_b"), "{}", cex.render(&w0));
        assert_eq!(cex.runs[0].segments[0].v, vec!['a']);
        assert!(check(&w0, 2).is_holds());
    }

    #[test]
    fn w1_orders() {
        let w1 = corpus::w1();
        for k in 1..=3 {
            let BtpResult::Fails(cex) = check(&w1, k) else { panic!("BTP-{k} should fail") };
            cex.verify(&w1).unwrap();
        }
        assert!(check(&w1, 4).is_holds());
    }

    #[test]
    fn degrees() {
        let b = Budget::default();
        assert_eq!(degree_of_sequentiality(&corpus::w0(), 4, &b).unwrap(), Degree::Exactly(2));
        assert_eq!(degree_of_sequentiality(&corpus::w1(), 5, &b).unwrap(), Degree::Exactly(4));
        assert_eq!(degree_of_sequentiality(&corpus::w_star(), 3, &b).unwrap(), Degree::AtLeast(4));
    }

    #[test]
    fn diff_cycles() {
        let w0 = corpus::w0();
        let p2 = w0.power(2, 100).unwrap();
        let (qa, qb) = (0, 2);
        let cycle = find_diff_cycle(&p2, &[qa, qb], 0, 1, 18).unwrap().unwrap();
        assert_eq!(cycle.len(), 1);
        assert_eq!(cycle[0].letter, 'a');
        assert_eq!(p2.edge_weights(&cycle[0]), vec![GroupElement::Int(1), GroupElement::Int(0)]);
        assert!(find_diff_cycle(&p2, &[qa, qa], 0, 1, 18).unwrap().is_none());
        assert!(find_diff_cycle(&p2, &[qa, qb], 0, 1, 0).unwrap().is_none());
    }

    #[test]
    fn diff_cycles_agree_with_potentials() {
        for w in [corpus::w0(), corpus::w1(), corpus::w_star()] {
            let w = w.trim();
            let n = w.num_states();
            let p2 = w.power(2, 1000).unwrap();
            let mut level = Level::new(&w, 2, 1000, int_measure).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let node = level.node(&[a, b]).unwrap();
                    let split = level.classes_at(node).len() == 2;
                    let found = find_diff_cycle(&p2, &[a, b], 0, 1, 2 * n * n).unwrap().is_some();
                    assert_eq!(split, found, "({a},{b})");
                }
            }
        }
    }

    #[test]
    fn transducers() {
        assert!(check(&corpus::identity_transducer(), 1).is_holds());
        for t in [corpus::a_to_a_or_b(), corpus::doubling_transducer()] {
            let BtpResult::Fails(cex) = check(&t, 1) else { panic!("BTP-1 should fail") };
            cex.verify(&t).unwrap();
            assert!(check(&t, 2).is_holds());
        }
        let neg = AutomatonBuilder::new(GroupContext::free("a".chars()), "a".chars())
            .state("q")
            .init("q", "")
            .final_("q", "")
            .trans("q", 'a', "a'", "q")
            .build()
            .unwrap();
        assert!(matches!(check_btp(&neg, 1, &Budget::default()), Err(Error::NotPositive(_))));
    }

    #[test]
    fn transducer_mismatch_and_length_cases() {
        let BtpResult::Fails(cex) = check(&corpus::a_to_a_or_b(), 1) else { panic!() };
        let (s0, s1) = (&cex.runs[0].segments[0], &cex.runs[1].segments[0]);
        assert_eq!(s0.beta.as_word().unwrap().len(), s1.beta.as_word().unwrap().len());
        let BtpResult::Fails(cex) = check(&corpus::doubling_transducer(), 1) else { panic!() };
        let (s0, s1) = (&cex.runs[0].segments[0], &cex.runs[1].segments[0]);
        assert_ne!(s0.beta.as_word().unwrap().len(), s1.beta.as_word().unwrap().len());
    }

    #[test]
    fn verifier_rejects_tampering() {
        let w0 = corpus::w0();
        let BtpResult::Fails(cex) = check(&w0, 1) else { panic!() };
        let mut same = cex.clone();
        same.runs[1] = same.runs[0].clone();
        assert!(same.verify(&w0).is_err());
        let mut wrong_weight = (*cex).clone();
        wrong_weight.runs[0].segments[0].beta = GroupElement::Int(7);
        assert!(wrong_weight.verify(&w0).is_err());
        let mut short = (*cex).clone();
        short.runs.pop();
        assert!(short.verify(&w0).is_err());
    }

    #[test]
    fn multisets() {
        let w0 = corpus::w0();
        assert_eq!(initial_multisets(&w0, 2, true).len(), 6);
        assert_eq!(initial_multisets(&w0, 3, true).len(), 10);
    }

    #[test]
    fn pair_indices() {
        let p = 4;
        let mut expect = 0;
        for a in 0..p {
            for b in a + 1..p {
                assert_eq!(pair_index(p, a, b), expect);
                expect += 1;
            }
        }
    }

    #[test]
    fn power_cap_gives_inconclusive() {
        let b = Budget { power_cap: 10, ..Budget::default() };
        assert!(matches!(check_btp(&corpus::w1(), 2, &b).unwrap(), BtpResult::Inconclusive(_)));
    }

    #[test]
    fn order_zero_rejected() {
        assert!(check_btp(&corpus::w0(), 0, &Budget::default()).is_err());
    }
}
