//! JSON documents for automata and cost register automata, and DOT export.
//!
//! An automaton document looks like
//!
//! ```json
//! {
//!   "group": "Z",
//!   "alphabet": "ab",
//!   "states": ["p", "q"],
//!   "init": [["p", 0]],
//!   "final": [["q", 0]],
//!   "trans": [["p", "a", 1, "q"]]
//! }
//! ```
//!
//! Elements are integers (or decimal strings) over `Z`, and space-separated
//! letters with `'` for inverses over `free:<letters>`. The alphabet may be a
//! string or a list of one-letter strings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Deserialize;

use crate::cra::{CostRegisterAutomaton, CraTransition};
use crate::error::{Error, Result};
use crate::group::{GroupContext, GroupElement};
use crate::wa::{StateId, Transition, WeightedAutomaton};

#[derive(Deserialize)]
#[serde(untagged)]
enum Alphabet {
    Text(String),
    Letters(Vec<String>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Elem {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WaDoc {
    group: String,
    alphabet: Alphabet,
    states: Vec<String>,
    init: Vec<(String, Elem)>,
    #[serde(rename = "final")]
    finals: Vec<(String, Elem)>,
    trans: Vec<(String, String, Elem, String)>,
}

/// `{Y: [X, element]}`.
type Update = BTreeMap<String, (String, Elem)>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CraDoc {
    group: String,
    alphabet: Alphabet,
    states: Vec<String>,
    init: String,
    registers: Vec<String>,
    trans: Vec<(String, String, String, Update)>,
    output: Vec<(String, String, Elem)>,
    independent: Option<bool>,
}

/// Resolves semantic errors to a position by locating the offending token.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn position(&self, needle: &str) -> (usize, usize) {
        let quoted = serde_json::to_string(needle).unwrap_or_default();
        let offset = self.text.find(&quoted).or_else(|| self.text.find(needle));
        let Some(offset) = offset else { return (1, 1) };
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, column)
    }

    fn error(&self, near: &str, message: impl Into<String>) -> Error {
        let (line, column) = self.position(near);
        Error::Parse { line, column, message: message.into() }
    }

    fn json<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_str(self.text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
        })
    }

    fn group(&self, tag: &str) -> Result<GroupContext> {
        GroupContext::from_tag(tag)
            .ok_or_else(|| self.error(tag, format!("group must be \"Z\" or \"free:<letters>\", got {tag:?}")))
    }

    fn alphabet(&self, a: &Alphabet) -> Result<Vec<char>> {
        match a {
            Alphabet::Text(s) => Ok(s.chars().collect()),
            Alphabet::Letters(v) => v.iter().map(|s| self.letter(s)).collect(),
        }
    }

    fn letter(&self, s: &str) -> Result<char> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(self.error(s, format!("expected a single letter, got {s:?}"))),
        }
    }

    fn element(&self, ctx: &GroupContext, e: &Elem) -> Result<GroupElement> {
        match e {
            Elem::Int(v) => match ctx.kind() {
                crate::group::GroupKind::Integers => Ok(GroupElement::Int(*v)),
                _ => Err(self.error(&v.to_string(), format!("integer {v} used as a free-group element"))),
            },
            Elem::Text(s) => ctx.parse_element(s).map_err(|err| self.error(s, err.to_string())),
        }
    }

    fn state(&self, states: &[String], name: &str) -> Result<StateId> {
        states.iter().position(|s| s == name).ok_or_else(|| self.error(name, format!("unknown state {name:?}")))
    }
}

/// Parses an automaton document.
pub fn parse_automaton(text: &str) -> Result<WeightedAutomaton> {
    let src = Source { text };
    let doc: WaDoc = src.json()?;
    let ctx = src.group(&doc.group)?;
    let alphabet = src.alphabet(&doc.alphabet)?;
    let rel = |pairs: &[(String, Elem)]| -> Result<Vec<(StateId, GroupElement)>> {
        pairs.iter().map(|(q, e)| Ok((src.state(&doc.states, q)?, src.element(&ctx, e)?))).collect()
    };
    let init = rel(&doc.init)?;
    let finals = rel(&doc.finals)?;
    let mut transitions = Vec::new();
    for (p, a, e, q) in &doc.trans {
        let letter = src.letter(a)?;
        if !alphabet.contains(&letter) {
            return Err(src.error(a, format!("letter {a:?} is not in the alphabet")));
        }
        transitions.push(Transition {
            src: src.state(&doc.states, p)?,
            letter,
            weight: src.element(&ctx, e)?,
            dst: src.state(&doc.states, q)?,
        });
    }
    if let Some(dup) = duplicate(&doc.states) {
        return Err(src.error(dup, format!("state {dup:?} is declared twice")));
    }
    WeightedAutomaton::new(ctx, alphabet, doc.states, init, finals, transitions)
}

fn duplicate(names: &[String]) -> Option<&str> {
    let mut seen = BTreeSet::new();
    names.iter().find(|n| !seen.insert(n.as_str())).map(String::as_str)
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn element_json(ctx: &GroupContext, e: &GroupElement) -> String {
    match e {
        GroupElement::Int(v) => v.to_string(),
        GroupElement::Word(_) => quote(&ctx.format_element(e)),
    }
}

fn list(out: &mut String, key: &str, items: &[String], last: bool) {
    let comma = if last { "" } else { "," };
    if items.is_empty() {
        let _ = writeln!(out, "  {}: []{comma}", quote(key));
        return;
    }
    let _ = writeln!(out, "  {}: [", quote(key));
    for (i, item) in items.iter().enumerate() {
        let sep = if i + 1 == items.len() { "" } else { "," };
        let _ = writeln!(out, "    {item}{sep}");
    }
    let _ = writeln!(out, "  ]{comma}");
}

fn alphabet_json(alphabet: &[char]) -> String {
    quote(&alphabet.iter().collect::<String>())
}

fn names_json(names: &[String]) -> String {
    format!("[{}]", names.iter().map(|s| quote(s)).collect::<Vec<_>>().join(", "))
}

/// Renders an automaton; the output is a function of the automaton alone.
pub fn render_automaton(w: &WeightedAutomaton) -> String {
    let ctx = w.ctx();
    let name = |q: StateId| quote(w.state_name(q));
    let rel = |pairs: &[(StateId, GroupElement)]| -> Vec<String> {
        pairs.iter().map(|(q, e)| format!("[{}, {}]", name(*q), element_json(ctx, e))).collect()
    };
    let trans: Vec<String> = w
        .transitions()
        .iter()
        .map(|t| {
            format!(
                "[{}, {}, {}, {}]",
                name(t.src),
                quote(&t.letter.to_string()),
                element_json(ctx, &t.weight),
                name(t.dst)
            )
        })
        .collect();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"group\": {},", quote(&ctx.tag()));
    let _ = writeln!(out, "  \"alphabet\": {},", alphabet_json(w.alphabet()));
    let _ = writeln!(out, "  \"states\": {},", names_json(w.states()));
    list(&mut out, "init", &rel(w.init()), false);
    list(&mut out, "final", &rel(w.finals()), false);
    list(&mut out, "trans", &trans, true);
    out.push_str("}\n");
    out
}

/// Parses a cost register automaton document. Registers missing from an
/// update keep their value. If `independent` is present it must match the
/// shape of the updates.
pub fn parse_cra(text: &str) -> Result<CostRegisterAutomaton> {
    let src = Source { text };
    let doc: CraDoc = src.json()?;
    let ctx = src.group(&doc.group)?;
    let alphabet = src.alphabet(&doc.alphabet)?;
    if let Some(dup) = duplicate(&doc.states) {
        return Err(src.error(dup, format!("state {dup:?} is declared twice")));
    }
    if let Some(dup) = duplicate(&doc.registers) {
        return Err(src.error(dup, format!("register {dup:?} is declared twice")));
    }
    let register = |name: &str| {
        doc.registers
            .iter()
            .position(|r| r == name)
            .ok_or_else(|| src.error(name, format!("unknown register {name:?}")))
    };
    let mut transitions = Vec::new();
    for (p, a, q, upd) in &doc.trans {
        let letter = src.letter(a)?;
        if !alphabet.contains(&letter) {
            return Err(src.error(a, format!("letter {a:?} is not in the alphabet")));
        }
        let mut update: Vec<_> = (0..doc.registers.len()).map(|x| (x, ctx.identity())).collect();
        for (y, (x, e)) in upd {
            update[register(y)?] = (register(x)?, src.element(&ctx, e)?);
        }
        transitions.push(CraTransition {
            src: src.state(&doc.states, p)?,
            letter,
            dst: src.state(&doc.states, q)?,
            update,
        });
    }
    let output = doc
        .output
        .iter()
        .map(|(q, x, e)| Ok((src.state(&doc.states, q)?, register(x)?, src.element(&ctx, e)?)))
        .collect::<Result<Vec<_>>>()?;
    let init = src.state(&doc.states, &doc.init)?;
    let cra = CostRegisterAutomaton::new(ctx, alphabet, doc.states, init, doc.registers, transitions, output)
        .map_err(|e| src.error("trans", e.to_string()))?;
    if let Some(flag) = doc.independent {
        if flag != cra.is_independent() {
            return Err(src.error("independent", format!("\"independent\" is {flag} but the updates say otherwise")));
        }
    }
    Ok(cra)
}

/// Renders a cost register automaton; updates list every register.
pub fn render_cra(c: &CostRegisterAutomaton) -> String {
    let ctx = c.ctx();
    let state = |q: StateId| quote(&c.states()[q]);
    let reg = |x: usize| quote(&c.registers()[x]);
    let trans: Vec<String> = c
        .transitions()
        .iter()
        .map(|t| {
            let upd: Vec<String> = t
                .update
                .iter()
                .enumerate()
                .map(|(y, (x, e))| format!("{}: [{}, {}]", reg(y), reg(*x), element_json(ctx, e)))
                .collect();
            format!("[{}, {}, {}, {{{}}}]", state(t.src), quote(&t.letter.to_string()), state(t.dst), upd.join(", "))
        })
        .collect();
    let output: Vec<String> =
        c.output().iter().map(|(q, x, e)| format!("[{}, {}, {}]", state(*q), reg(*x), element_json(ctx, e))).collect();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"group\": {},", quote(&ctx.tag()));
    let _ = writeln!(out, "  \"alphabet\": {},", alphabet_json(c.alphabet()));
    let _ = writeln!(out, "  \"states\": {},", names_json(c.states()));
    let _ = writeln!(out, "  \"init\": {},", state(c.init()));
    let _ = writeln!(out, "  \"registers\": {},", names_json(c.registers()));
    list(&mut out, "trans", &trans, false);
    list(&mut out, "output", &output, false);
    let _ = writeln!(out, "  \"independent\": {}", c.is_independent());
    out.push_str("}\n");
    out
}

fn dot_label(ctx: &GroupContext, e: &GroupElement) -> String {
    let text = ctx.format_element(e);
    if text.is_empty() {
        "ε".to_string()
    } else {
        text
    }
}

/// Graphviz rendering: one node per state, edges labelled `letter : weight`,
/// and initial/final weights on edges from/to point nodes.
pub fn automaton_to_dot(w: &WeightedAutomaton) -> String {
    let ctx = w.ctx();
    let node = |q: StateId| quote(w.state_name(q));
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=circle];\n");
    for q in 0..w.num_states() {
        let _ = writeln!(out, "  {};", node(q));
    }
    for (i, (q, e)) in w.init().iter().enumerate() {
        let _ = writeln!(out, "  init{i} [shape=point];");
        let _ = writeln!(out, "  init{i} -> {} [label={}];", node(*q), quote(&dot_label(ctx, e)));
    }
    for (i, (q, e)) in w.finals().iter().enumerate() {
        let _ = writeln!(out, "  final{i} [shape=point];");
        let _ = writeln!(out, "  {} -> final{i} [label={}];", node(*q), quote(&dot_label(ctx, e)));
    }
    for t in w.transitions() {
        let label = format!("{} : {}", t.letter, dot_label(ctx, &t.weight));
        let _ = writeln!(out, "  {} -> {} [label={}];", node(t.src), node(t.dst), quote(&label));
    }
    out.push_str("}\n");
    out
}

/// Graphviz rendering of a register machine; edges carry the non-trivial updates.
pub fn cra_to_dot(c: &CostRegisterAutomaton) -> String {
    let ctx = c.ctx();
    let node = |q: StateId| quote(&c.states()[q]);
    let reg = |x: usize| c.registers()[x].as_str();
    let mut out = String::from("digraph cra {\n  rankdir=LR;\n  node [shape=circle];\n");
    for q in 0..c.num_states() {
        let _ = writeln!(out, "  {};", node(q));
    }
    let _ = writeln!(out, "  init [shape=point];\n  init -> {};", node(c.init()));
    for (i, (q, x, e)) in c.output().iter().enumerate() {
        let _ = writeln!(out, "  out{i} [shape=point];");
        let _ =
            writeln!(out, "  {} -> out{i} [label={}];", node(*q), quote(&format!("{}·{}", reg(*x), dot_label(ctx, e))));
    }
    for t in c.transitions() {
        let updates: Vec<String> = t
            .update
            .iter()
            .enumerate()
            .filter(|(y, (x, e))| *x != *y || *e != ctx.identity())
            .map(|(y, (x, e))| format!("{} := {}·{}", reg(y), reg(*x), dot_label(ctx, e)))
            .collect();
        let label =
            if updates.is_empty() { t.letter.to_string() } else { format!("{} | {}", t.letter, updates.join(", ")) };
        let _ = writeln!(out, "  {} -> {} [label={}];", node(t.src), node(t.dst), quote(&label));
    }
    out.push_str("}\n");
    out
}
