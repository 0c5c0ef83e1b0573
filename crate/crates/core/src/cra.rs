//! Cost register automata, their correspondence with k-sequential automata,
//! and the rewriting of free-group register automata into ones over words.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::group::{FreeWord, GroupContext, GroupElement};
use crate::wa::{StateId, Transition, WeightedAutomaton};

pub type RegisterId = usize;

/// `δ(src, letter) = (dst, update)` where `update[Y] = (X, α)` means `Y := X·α`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CraTransition {
    pub src: StateId,
    pub letter: char,
    pub dst: StateId,
    pub update: Vec<(RegisterId, GroupElement)>,
}

/// A deterministic register machine with copyful updates and an output relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostRegisterAutomaton {
    ctx: GroupContext,
    alphabet: Vec<char>,
    states: Vec<String>,
    init: StateId,
    registers: Vec<String>,
    transitions: Vec<CraTransition>,
    output: Vec<(StateId, RegisterId, GroupElement)>,
    delta: HashMap<(StateId, char), usize>,
}

impl CostRegisterAutomaton {
    pub fn new(
        ctx: GroupContext,
        alphabet: impl IntoIterator<Item = char>,
        states: Vec<String>,
        init: StateId,
        registers: Vec<String>,
        transitions: Vec<CraTransition>,
        output: Vec<(StateId, RegisterId, GroupElement)>,
    ) -> Result<Self> {
        let alphabet: Vec<char> = alphabet.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut names = BTreeSet::new();
        for s in &states {
            if !names.insert(s) {
                return Err(Error::DuplicateState(s.clone()));
            }
        }
        let n = states.len();
        let r = registers.len();
        let state = |q: StateId| if q < n { Ok(()) } else { Err(Error::UnknownState(format!("#{q}"))) };
        let register =
            |x: RegisterId| if x < r { Ok(()) } else { Err(Error::InvalidArgument(format!("unknown register #{x}"))) };
        state(init)?;
        let mut transitions = transitions;
        transitions.sort();
        let mut delta = HashMap::new();
        for (i, t) in transitions.iter().enumerate() {
            state(t.src)?;
            state(t.dst)?;
            if alphabet.binary_search(&t.letter).is_err() {
                return Err(Error::UnknownLetter(t.letter));
            }
            if t.update.len() != r {
                return Err(Error::InvalidArgument(format!("update on '{}' does not assign every register", t.letter)));
            }
            for (x, e) in &t.update {
                register(*x)?;
                ctx.check(e)?;
            }
            if delta.insert((t.src, t.letter), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "two transitions from {} on '{}'",
                    states[t.src], t.letter
                )));
            }
        }
        for (q, x, e) in &output {
            state(*q)?;
            register(*x)?;
            ctx.check(e)?;
        }
        let output: Vec<_> = output.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(Self { ctx, alphabet, states, init, registers, transitions, output, delta })
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

    pub fn init(&self) -> StateId {
        self.init
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn transitions(&self) -> &[CraTransition] {
        &self.transitions
    }

    pub fn output(&self) -> &[(StateId, RegisterId, GroupElement)] {
        &self.output
    }

    pub fn step(&self, q: StateId, letter: char) -> Option<&CraTransition> {
        self.delta.get(&(q, letter)).map(|&i| &self.transitions[i])
    }

    /// Every update has the shape `X := X·α`.
    pub fn is_independent(&self) -> bool {
        self.transitions.iter().all(|t| t.update.iter().enumerate().all(|(y, (x, _))| *x == y))
    }
}

/// `(src, letter, dst, [(Y, X, element)])` by name.
type NamedTransition = (String, char, String, Vec<(String, String, String)>);

/// Construction by name with elements in their textual syntax. Registers not
/// mentioned in an update keep their value.
#[derive(Clone, Debug)]
pub struct CraBuilder {
    ctx: GroupContext,
    alphabet: Vec<char>,
    states: Vec<String>,
    init: Option<String>,
    registers: Vec<String>,
    trans: Vec<NamedTransition>,
    output: Vec<(String, String, String)>,
}

impl CraBuilder {
    pub fn new(ctx: GroupContext, alphabet: impl IntoIterator<Item = char>) -> Self {
        Self {
            ctx,
            alphabet: alphabet.into_iter().collect(),
            states: Vec::new(),
            init: None,
            registers: Vec::new(),
            trans: Vec::new(),
            output: Vec::new(),
        }
    }

    pub fn states<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.states.extend(names.into_iter().map(str::to_string));
        self
    }

    pub fn registers<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.registers.extend(names.into_iter().map(str::to_string));
        self
    }

    pub fn init(mut self, state: &str) -> Self {
        self.init = Some(state.to_string());
        self
    }

    /// `updates` lists `(Y, X, α)` for `Y := X·α`.
    pub fn trans(mut self, src: &str, letter: char, dst: &str, updates: &[(&str, &str, &str)]) -> Self {
        let updates = updates.iter().map(|(y, x, e)| (y.to_string(), x.to_string(), e.to_string())).collect();
        self.trans.push((src.to_string(), letter, dst.to_string(), updates));
        self
    }

    pub fn output(mut self, state: &str, register: &str, elem: &str) -> Self {
        self.output.push((state.to_string(), register.to_string(), elem.to_string()));
        self
    }

    pub fn build(self) -> Result<CostRegisterAutomaton> {
        let state = |name: &str| {
            self.states.iter().position(|s| s == name).ok_or_else(|| Error::UnknownState(name.to_string()))
        };
        let register = |name: &str| {
            self.registers
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown register {name:?}")))
        };
        let init = state(self.init.as_deref().ok_or(Error::EmptyAutomaton)?)?;
        let mut transitions = Vec::new();
        for (src, letter, dst, updates) in &self.trans {
            let mut update: Vec<(RegisterId, GroupElement)> =
                (0..self.registers.len()).map(|x| (x, self.ctx.identity())).collect();
            for (y, x, e) in updates {
                update[register(y)?] = (register(x)?, self.ctx.parse_element(e)?);
            }
            transitions.push(CraTransition { src: state(src)?, letter: *letter, dst: state(dst)?, update });
        }
        let output = self
            .output
            .iter()
            .map(|(q, x, e)| Ok((state(q)?, register(x)?, self.ctx.parse_element(e)?)))
            .collect::<Result<Vec<_>>>()?;
        CostRegisterAutomaton::new(
            self.ctx.clone(),
            self.alphabet.iter().copied(),
            self.states.clone(),
            init,
            self.registers.clone(),
            transitions,
            output,
        )
    }
}

/// The output set on `word`; empty when the run gets stuck.
pub fn cra_eval(c: &CostRegisterAutomaton, word: &[char]) -> Result<BTreeSet<GroupElement>> {
    if let Some(&a) = word.iter().find(|a| c.alphabet.binary_search(a).is_err()) {
        return Err(Error::UnknownLetter(a));
    }
    let ctx = &c.ctx;
    let mut q = c.init;
    let mut nu: Vec<GroupElement> = vec![ctx.identity(); c.registers.len()];
    for &a in word {
        let Some(t) = c.step(q, a) else { return Ok(BTreeSet::new()) };
        nu = t.update.iter().map(|(x, e)| ctx.op(&nu[*x], e)).collect::<Result<_, _>>()?;
        q = t.dst;
    }
    c.output.iter().filter(|(p, _, _)| *p == q).map(|(_, x, e)| Ok(ctx.op(&nu[*x], e)?)).collect()
}

/// A CRA with one independent register per machine, running all machines in
/// parallel. A fresh initial state applies the initial weights exactly once.
pub fn kseq_to_cra(machines: &[WeightedAutomaton]) -> Result<CostRegisterAutomaton> {
    let first = machines.first().ok_or_else(|| Error::InvalidArgument("no machines".into()))?;
    for (i, m) in machines.iter().enumerate() {
        if m.ctx() != first.ctx() {
            return Err(Error::ContextMismatch);
        }
        if m.alphabet() != first.alphabet() {
            return Err(Error::AlphabetMismatch);
        }
        if !m.init().is_empty() && !m.is_structurally_sequential() {
            return Err(Error::NotSequentialInput(i));
        }
    }
    let ctx = first.ctx().clone();
    let k = machines.len();
    type Tuple = Vec<Option<StateId>>;
    let mut states = vec!["init".to_string()];
    let mut index: HashMap<Tuple, StateId> = HashMap::new();
    let mut tuples: Vec<Tuple> = vec![Vec::new()];
    let mut transitions = Vec::new();
    let mut output = Vec::new();
    for (i, m) in machines.iter().enumerate() {
        if let Some((s0, gamma)) = m.init().first() {
            for phi in m.final_weights(*s0) {
                output.push((0, i, ctx.op(gamma, phi)?));
            }
        }
    }
    let name = |t: &Tuple, ms: &[WeightedAutomaton]| {
        let parts: Vec<&str> = t.iter().zip(ms).map(|(q, m)| q.map_or("-", |q| m.state_name(q))).collect();
        format!("({})", parts.join(","))
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(src) = queue.pop_front() {
        // the fresh initial state stands for the initial state of every machine
        let from: Vec<Option<(StateId, GroupElement)>> = if src == 0 {
            machines.iter().map(|m| m.init().first().cloned()).collect()
        } else {
            tuples[src].iter().map(|q| q.map(|q| (q, ctx.identity()))).collect()
        };
        for &a in first.alphabet() {
            let mut next: Tuple = Vec::with_capacity(k);
            let mut update = Vec::with_capacity(k);
            for (i, (m, cur)) in machines.iter().zip(&from).enumerate() {
                let step = cur.as_ref().and_then(|(q, pre)| {
                    m.outgoing_on(*q, a)
                        .next()
                        .map(|t| (m.transition(t).dst, pre.clone(), m.transition(t).weight.clone()))
                });
                match step {
                    Some((dst, pre, w)) => {
                        next.push(Some(dst));
                        update.push((i, ctx.op(&pre, &w)?));
                    }
                    None => {
                        next.push(None);
                        update.push((i, ctx.identity()));
                    }
                }
            }
            if next.iter().all(Option::is_none) {
                continue;
            }
            let dst = match index.get(&next) {
                Some(&d) => d,
                None => {
                    let d = tuples.len();
                    states.push(name(&next, machines));
                    for (i, (m, q)) in machines.iter().zip(&next).enumerate() {
                        if let Some(q) = q {
                            output.extend(m.final_weights(*q).map(|phi| (d, i, phi.clone())));
                        }
                    }
                    index.insert(next.clone(), d);
                    tuples.push(next);
                    queue.push_back(d);
                    d
                }
            };
            transitions.push(CraTransition { src, letter: a, dst, update });
        }
    }
    let registers = (1..=k).map(|i| format!("X{i}")).collect();
    CostRegisterAutomaton::new(ctx, first.alphabet().iter().copied(), states, 0, registers, transitions, output)
}

/// One sequential automaton per register: the projection of `c` on it, trimmed.
pub fn cra_to_kseq(c: &CostRegisterAutomaton) -> Result<Vec<WeightedAutomaton>> {
    if !c.is_independent() {
        return Err(Error::NotIndependent);
    }
    (0..c.registers.len())
        .map(|x| {
            let transitions = c
                .transitions
                .iter()
                .map(|t| Transition { src: t.src, letter: t.letter, weight: t.update[x].1.clone(), dst: t.dst })
                .collect();
            let finals = c.output.iter().filter(|(_, y, _)| *y == x).map(|(q, _, e)| (*q, e.clone())).collect();
            let w = WeightedAutomaton::new(
                c.ctx.clone(),
                c.alphabet.iter().copied(),
                c.states.clone(),
                vec![(c.init, c.ctx.identity())],
                finals,
                transitions,
            )?;
            Ok(w.trim())
        })
        .collect()
}

/// The pairs `(q, X)` such that the value of `X` in `q` can reach the output.
pub fn compute_alive(c: &CostRegisterAutomaton) -> BTreeSet<(StateId, RegisterId)> {
    let mut alive: BTreeSet<(StateId, RegisterId)> = c.output.iter().map(|(q, x, _)| (*q, *x)).collect();
    let mut queue: VecDeque<(StateId, RegisterId)> = alive.iter().copied().collect();
    let mut reads: HashMap<(StateId, RegisterId), Vec<(StateId, RegisterId)>> = HashMap::new();
    for t in &c.transitions {
        for (y, (x, _)) in t.update.iter().enumerate() {
            reads.entry((t.dst, y)).or_default().push((t.src, *x));
        }
    }
    while let Some(p) = queue.pop_front() {
        for &src in reads.get(&p).into_iter().flatten() {
            if alive.insert(src) {
                queue.push_back(src);
            }
        }
    }
    alive
}

/// The bound `N = |Q|·m + s` on residuals, with `m` and `s` the largest norms
/// of update and output values.
pub fn residual_bound(c: &CostRegisterAutomaton) -> usize {
    let m = c.transitions.iter().flat_map(|t| t.update.iter().map(|(_, e)| c.ctx.norm(e))).max().unwrap_or(0);
    let s = c.output.iter().map(|(_, _, e)| c.ctx.norm(e)).max().unwrap_or(0);
    (c.states.len() as u64 * m + s) as usize
}

/// The result of [`positivize`] with the residual kept in each new state.
#[derive(Clone, Debug)]
pub struct Positivized {
    pub automaton: CostRegisterAutomaton,
    /// Per new state, the original state and the residual of every register.
    pub residuals: Vec<(StateId, Vec<FreeWord>)>,
    pub bound: usize,
}

/// `x = x₁·x₂` with `x₁ ∈ B*` shortest such that `|x₂| ≤ n`.
fn commit(x: &FreeWord, n: usize) -> Option<(FreeWord, FreeWord)> {
    if x.len() <= n {
        return Some((FreeWord::default(), x.clone()));
    }
    let cut = x.len() - n;
    (x.positive_prefix_len() >= cut).then(|| x.split_at(cut))
}

/// An equivalent register automaton whose updates and outputs are words over
/// `B`, for a free-group automaton computing a relation into `B*`.
///
/// States carry the not yet committed suffix of every register. A register
/// that can no longer reach the output is reset to the empty word.
pub fn positivize(c: &CostRegisterAutomaton, budget: &Budget) -> Result<Positivized> {
    if !c.ctx.is_free() {
        return Err(Error::UnsupportedGroup(c.ctx.tag()));
    }
    let n = residual_bound(c);
    let alive = compute_alive(c);
    let word = |e: &GroupElement| e.as_word().cloned().expect("free group element");
    let r = c.registers.len();
    let render = |q: StateId, res: &[FreeWord]| {
        let mut s = c.states[q].clone();
        s.push('|');
        for (x, v) in res.iter().enumerate() {
            if x > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}={}", c.registers[x], GroupElement::Word(v.clone()));
        }
        s
    };
    let start = (c.init, vec![FreeWord::default(); r]);
    let mut index: HashMap<(StateId, Vec<FreeWord>), StateId> = HashMap::from([(start.clone(), 0)]);
    let mut residuals = vec![start];
    let mut transitions = Vec::new();
    let mut output = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (q, res) = residuals[i].clone();
        for (_, x, e) in c.output.iter().filter(|(p, _, _)| *p == q) {
            let v = res[*x].mul(&word(e));
            if !v.is_positive() {
                return Err(Error::NotWordRelation(format!(
                    "output {} of register {} in state {}",
                    GroupElement::Word(v),
                    c.registers[*x],
                    render(q, &res)
                )));
            }
            output.push((i, *x, GroupElement::Word(v)));
        }
        for &a in &c.alphabet {
            let Some(t) = c.step(q, a) else { continue };
            let mut update = Vec::with_capacity(r);
            let mut next = Vec::with_capacity(r);
            for (y, (x, e)) in t.update.iter().enumerate() {
                if !alive.contains(&(t.dst, y)) {
                    update.push((*x, GroupElement::Word(FreeWord::default())));
                    next.push(FreeWord::default());
                    continue;
                }
                let value = res[*x].mul(&word(e));
                let (committed, rest) = commit(&value, n).ok_or_else(|| {
                    Error::NotWordRelation(format!(
                        "value {} of register {} after '{a}' from {} has no committed prefix in B*",
                        GroupElement::Word(value.clone()),
                        c.registers[y],
                        render(q, &res)
                    ))
                })?;
                update.push((*x, GroupElement::Word(committed)));
                next.push(rest);
            }
            let key = (t.dst, next);
            let dst = match index.get(&key) {
                Some(&d) => d,
                None => {
                    let d = residuals.len();
                    if d >= budget.state_cap {
                        return Err(Error::StateCapExceeded { limit: budget.state_cap });
                    }
                    index.insert(key.clone(), d);
                    residuals.push(key);
                    queue.push_back(d);
                    d
                }
            };
            transitions.push(CraTransition { src: i, letter: a, dst, update });
        }
    }
    let states = residuals.iter().map(|(q, res)| render(*q, res)).collect();
    let automaton = CostRegisterAutomaton::new(
        c.ctx.clone(),
        c.alphabet.iter().copied(),
        states,
        0,
        c.registers.clone(),
        transitions,
        output,
    )?;
    Ok(Positivized { automaton, residuals, bound: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::decompose::decompose_k;
    use crate::wa::{equiv_up_to, words_up_to, AutomatonBuilder};

    fn letters(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn c0_eval_and_alive() {
        let c0 = corpus::c0();
        assert!(c0.is_independent());
        assert_eq!(cra_eval(&c0, &letters("aba")).unwrap(), BTreeSet::from([GroupElement::Int(2)]));
        assert_eq!(cra_eval(&c0, &[]).unwrap(), BTreeSet::from([GroupElement::Int(0)]));
        let w0 = corpus::w0();
        for w in words_up_to(&['a', 'b'], 6) {
            assert_eq!(cra_eval(&c0, &w).unwrap(), w0.eval(&w).unwrap());
        }
        assert_eq!(compute_alive(&c0).len(), 4);
    }

    #[test]
    fn empty_word_output() {
        let c = CraBuilder::new(GroupContext::integers(), "a".chars())
            .states(["q"])
            .registers(["X"])
            .init("q")
            .output("q", "X", "5")
            .build()
            .unwrap();
        assert_eq!(cra_eval(&c, &[]).unwrap(), BTreeSet::from([GroupElement::Int(5)]));
        assert!(cra_eval(&c, &['a']).unwrap().is_empty());
        assert!(cra_eval(&c, &['z']).is_err());
    }

    #[test]
    fn length_counter() {
        let m = AutomatonBuilder::new(GroupContext::integers(), "ab".chars())
            .state("q")
            .init("q", "0")
            .final_("q", "0")
            .trans("q", 'a', "1", "q")
            .trans("q", 'b', "1", "q")
            .build()
            .unwrap();
        let c = kseq_to_cra(std::slice::from_ref(&m)).unwrap();
        assert!(c.is_independent());
        assert_eq!(c.registers().len(), 1);
        for w in words_up_to(&['a', 'b'], 5) {
            assert_eq!(cra_eval(&c, &w).unwrap(), BTreeSet::from([GroupElement::Int(w.len() as i64)]));
        }
    }

    #[test]
    fn round_trip_through_decomposition() {
        let w0 = corpus::w0();
        let ms = decompose_k(&w0, 2, &Budget::default()).unwrap();
        let c = kseq_to_cra(&ms).unwrap();
        assert!(c.is_independent());
        assert_eq!(c.registers().len(), 2);
        for w in words_up_to(&['a', 'b'], 8) {
            assert_eq!(cra_eval(&c, &w).unwrap(), w0.eval(&w).unwrap());
        }
        let back = cra_to_kseq(&c).unwrap();
        assert!(back.iter().all(WeightedAutomaton::is_structurally_sequential));
        let union = WeightedAutomaton::union_all(&back).unwrap();
        assert!(equiv_up_to(&union, &WeightedAutomaton::union_all(&ms).unwrap(), 8).unwrap());
    }

    #[test]
    fn conversion_errors() {
        let z = corpus::w0();
        let t = corpus::identity_transducer();
        assert!(matches!(kseq_to_cra(&[corpus::last_letter_b_counter(), t]), Err(Error::ContextMismatch)));
        assert!(matches!(kseq_to_cra(&[z]), Err(Error::NotSequentialInput(0))));
        let other =
            AutomatonBuilder::new(GroupContext::integers(), "xy".chars()).state("q").init("q", "0").build().unwrap();
        assert!(matches!(kseq_to_cra(&[corpus::last_letter_b_counter(), other]), Err(Error::AlphabetMismatch)));
        let swap = CraBuilder::new(GroupContext::integers(), "a".chars())
            .states(["q"])
            .registers(["X", "Y"])
            .init("q")
            .trans("q", 'a', "q", &[("X", "Y", "0"), ("Y", "X", "1")])
            .output("q", "X", "0")
            .build()
            .unwrap();
        assert!(!swap.is_independent());
        assert!(matches!(cra_to_kseq(&swap), Err(Error::NotIndependent)));
    }

    #[test]
    fn unused_register_projects_to_empty_machine() {
        let c = CraBuilder::new(GroupContext::integers(), "a".chars())
            .states(["q"])
            .registers(["X", "Y"])
            .init("q")
            .trans("q", 'a', "q", &[("X", "X", "1"), ("Y", "Y", "2")])
            .output("q", "X", "0")
            .build()
            .unwrap();
        let ms = cra_to_kseq(&c).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[1].num_states(), 0);
        let alive = compute_alive(&c);
        assert!(alive.contains(&(0, 0)) && !alive.contains(&(0, 1)));
        let again = kseq_to_cra(&ms).unwrap();
        for w in words_up_to(&['a'], 5) {
            assert_eq!(cra_eval(&again, &w).unwrap(), cra_eval(&c, &w).unwrap());
        }
    }

    #[test]
    fn alive_is_a_fixpoint() {
        for c in [corpus::c0(), corpus::cancelling_cra(), corpus::phased_cra()] {
            let alive = compute_alive(&c);
            for t in c.transitions() {
                for (y, (x, _)) in t.update.iter().enumerate() {
                    if alive.contains(&(t.dst, y)) {
                        assert!(alive.contains(&(t.src, *x)));
                    }
                }
            }
        }
    }

    fn check_positivized(c: &CostRegisterAutomaton, len: usize) -> Positivized {
        let p = positivize(c, &Budget::default()).unwrap();
        let a = &p.automaton;
        assert!(a.is_independent() || !c.is_independent());
        let positive = |e: &GroupElement| e.as_word().unwrap().is_positive();
        assert!(a.transitions().iter().all(|t| t.update.iter().all(|(_, e)| positive(e))));
        assert!(a.output().iter().all(|(_, _, e)| positive(e)));
        assert!(p.residuals.iter().all(|(_, r)| r.iter().all(|v| v.len() <= p.bound)));
        for w in words_up_to(c.alphabet(), len) {
            assert_eq!(cra_eval(a, &w).unwrap(), cra_eval(c, &w).unwrap(), "{w:?}");
        }
        p
    }

    #[test]
    fn positivize_cancelling_updates() {
        let c = corpus::cancelling_cra();
        let p = check_positivized(&c, 6);
        // nothing is committed while the value fits in the residual bound
        assert_eq!(p.bound, 1);
        assert_eq!(p.automaton.num_states(), 2);
        let b = GroupElement::word("b");
        let looping = p.automaton.step(1, 'x').unwrap();
        assert_eq!((looping.dst, &looping.update[0].1), (1, &b));
        let phased = corpus::phased_cra();
        let p = check_positivized(&phased, 8);
        assert_eq!(p.bound, 3);
        assert!(p.residuals.iter().any(|(_, r)| !r[0].is_empty()));
    }

    #[test]
    fn positivize_mixed_transitions() {
        let c = CraBuilder::new(GroupContext::free("abc".chars()), "xy".chars())
            .states(["q0", "q1"])
            .registers(["X"])
            .init("q0")
            .trans("q0", 'x', "q1", &[("X", "X", "a b'")])
            .trans("q1", 'y', "q0", &[("X", "X", "b c")])
            .output("q0", "X", "")
            .output("q1", "X", "b")
            .build()
            .unwrap();
        check_positivized(&c, 6);
    }

    #[test]
    fn positivize_words_and_violations() {
        let id = kseq_to_cra(&[corpus::identity_transducer()]).unwrap();
        let p = check_positivized(&id, 5);
        assert_eq!(p.bound, 2);
        let bad = CraBuilder::new(GroupContext::free("a".chars()), "x".chars())
            .states(["q"])
            .registers(["X"])
            .init("q")
            .trans("q", 'x', "q", &[("X", "X", "a'")])
            .output("q", "X", "")
            .build()
            .unwrap();
        assert!(matches!(positivize(&bad, &Budget::default()), Err(Error::NotWordRelation(_))));
        assert!(matches!(positivize(&corpus::c0(), &Budget::default()), Err(Error::UnsupportedGroup(_))));
    }

    #[test]
    fn committed_prefix() {
        let w = FreeWord::from_letters("abc");
        assert_eq!(commit(&w, 5), Some((FreeWord::default(), w.clone())));
        assert_eq!(commit(&w, 1), Some((FreeWord::from_letters("ab"), FreeWord::from_letters("c"))));
        let mixed = FreeWord::from_letters("a").mul(&FreeWord::from_letters("b").inverse());
        assert_eq!(commit(&mixed, 0), None);
        assert!(commit(&mixed, 1).is_some());
    }
}
