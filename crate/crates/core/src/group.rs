//! Infinitary finitely generated groups: the additive integers and free groups.
//!
//! Elements are kept canonical at all times. Integers are checked `i64`
//! values (overflow is reported, never wrapped); free-group elements are
//! reduced words over `B ∪ B⁻¹`.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Errors raised by group arithmetic and element parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("element does not belong to the group {0}")]
    MixedContext(String),
    #[error("integer overflow in group arithmetic")]
    Overflow,
    #[error("letter '{0}' is not a generator of the group")]
    UnknownGenerator(char),
    #[error("cannot parse group element {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// A generator of a free group or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub letter: char,
    pub inverse: bool,
}

impl Symbol {
    pub fn pos(letter: char) -> Self {
        Self { letter, inverse: false }
    }

    pub fn neg(letter: char) -> Self {
        Self { letter, inverse: true }
    }

    pub fn inverted(self) -> Self {
        Self { letter: self.letter, inverse: !self.inverse }
    }
}

// Letters of B sort before letters of B⁻¹.
impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.inverse, self.letter).cmp(&(other.inverse, other.letter))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A reduced word of the free group: no factor `x x⁻¹` or `x⁻¹ x`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FreeWord(Vec<Symbol>);

impl FreeWord {
    pub fn new<I: IntoIterator<Item = Symbol>>(symbols: I) -> Self {
        let mut w = FreeWord::default();
        w.extend(symbols);
        w
    }

    /// The positive word spelling `letters`.
    pub fn from_letters(letters: &str) -> Self {
        Self::new(letters.chars().map(Symbol::pos))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the word contains no inverse letter, i.e. lies in `B*`.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|s| !s.inverse)
    }

    fn push(&mut self, s: Symbol) {
        if self.0.last() == Some(&s.inverted()) {
            self.0.pop();
        } else {
            self.0.push(s);
        }
    }

    fn extend<I: IntoIterator<Item = Symbol>>(&mut self, symbols: I) {
        for s in symbols {
            self.push(s);
        }
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        out.extend(other.0.iter().copied());
        out
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|s| s.inverted()).collect())
    }

    /// Splits the word at position `at` (both halves are reduced).
    pub fn split_at(&self, at: usize) -> (FreeWord, FreeWord) {
        let (a, b) = self.0.split_at(at);
        (FreeWord(a.to_vec()), FreeWord(b.to_vec()))
    }

    /// Length of the longest prefix made only of positive letters.
    pub fn positive_prefix_len(&self) -> usize {
        self.0.iter().take_while(|s| !s.inverse).count()
    }
}

impl Ord for FreeWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", s.letter)?;
            if s.inverse {
                f.write_str("'")?;
            }
        }
        Ok(())
    }
}

/// An element of the active group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Int(i64),
    Word(FreeWord),
}

impl GroupElement {
    pub fn word(letters: &str) -> Self {
        GroupElement::Word(FreeWord::from_letters(letters))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            GroupElement::Int(v) => Some(*v),
            GroupElement::Word(_) => None,
        }
    }

    pub fn as_word(&self) -> Option<&FreeWord> {
        match self {
            GroupElement::Word(w) => Some(w),
            GroupElement::Int(_) => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Int(v) => *v == 0,
            GroupElement::Word(w) => w.is_empty(),
        }
    }
}

// Canonical order: integers numerically, words by length then symbols.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (GroupElement::Int(a), GroupElement::Int(b)) => a.cmp(b),
            (GroupElement::Word(a), GroupElement::Word(b)) => a.cmp(b),
            (GroupElement::Int(_), GroupElement::Word(_)) => Ordering::Less,
            (GroupElement::Word(_), GroupElement::Int(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(v) => write!(f, "{v}"),
            GroupElement::Word(w) if w.is_empty() => f.write_str("ε"),
            GroupElement::Word(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// `(Z, +, 0)` generated by `{1}`.
    Integers,
    /// The free group over the given (sorted, distinct) letters.
    Free(Vec<char>),
}

/// The group a weighted automaton computes in, with its fixed generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupContext {
    kind: GroupKind,
}

impl GroupContext {
    pub fn integers() -> Self {
        Self { kind: GroupKind::Integers }
    }

    pub fn free<I: IntoIterator<Item = char>>(letters: I) -> Self {
        let mut v: Vec<char> = letters.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self { kind: GroupKind::Free(v) }
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn is_commutative(&self) -> bool {
        matches!(self.kind, GroupKind::Integers)
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, GroupKind::Free(_))
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::Integers => GroupElement::Int(0),
            GroupKind::Free(_) => GroupElement::Word(FreeWord::default()),
        }
    }

    /// The generator set Γ.
    pub fn generators(&self) -> Vec<GroupElement> {
        match &self.kind {
            GroupKind::Integers => vec![GroupElement::Int(1)],
            GroupKind::Free(letters) => {
                letters.iter().map(|&c| GroupElement::Word(FreeWord::new([Symbol::pos(c)]))).collect()
            }
        }
    }

    /// Checks that `a` is an element of this group.
    pub fn check(&self, a: &GroupElement) -> Result<(), GroupError> {
        match (&self.kind, a) {
            (GroupKind::Integers, GroupElement::Int(_)) => Ok(()),
            (GroupKind::Free(letters), GroupElement::Word(w)) => {
                match w.symbols().iter().find(|s| letters.binary_search(&s.letter).is_err()) {
                    Some(s) => Err(GroupError::UnknownGenerator(s.letter)),
                    None => Ok(()),
                }
            }
            _ => Err(GroupError::MixedContext(self.tag())),
        }
    }

    pub fn op(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        match (&self.kind, a, b) {
            (GroupKind::Integers, GroupElement::Int(x), GroupElement::Int(y)) => {
                x.checked_add(*y).map(GroupElement::Int).ok_or(GroupError::Overflow)
            }
            (GroupKind::Free(_), GroupElement::Word(x), GroupElement::Word(y)) => Ok(GroupElement::Word(x.mul(y))),
            _ => Err(GroupError::MixedContext(self.tag())),
        }
    }

    /// Left-to-right product of a sequence of elements.
    pub fn product<'a, I>(&self, items: I) -> Result<GroupElement, GroupError>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        items.into_iter().try_fold(self.identity(), |acc, x| self.op(&acc, x))
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        match (&self.kind, a) {
            (GroupKind::Integers, GroupElement::Int(x)) => {
                x.checked_neg().map(GroupElement::Int).ok_or(GroupError::Overflow)
            }
            (GroupKind::Free(_), GroupElement::Word(w)) => Ok(GroupElement::Word(w.inverse())),
            _ => Err(GroupError::MixedContext(self.tag())),
        }
    }

    /// The delay `a⁻¹·b`.
    pub fn delay(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.op(&self.inverse(a)?, b)
    }

    /// Cayley norm with respect to the generators.
    pub fn norm(&self, a: &GroupElement) -> u64 {
        match a {
            GroupElement::Int(x) => x.unsigned_abs(),
            GroupElement::Word(w) => w.len() as u64,
        }
    }

    /// Cayley distance, i.e. `norm(delay(a, b))`.
    pub fn distance(&self, a: &GroupElement, b: &GroupElement) -> Result<u64, GroupError> {
        Ok(self.norm(&self.delay(a, b)?))
    }

    /// `a` raised to the power `n`.
    pub fn pow(&self, a: &GroupElement, n: u64) -> Result<GroupElement, GroupError> {
        match (&self.kind, a) {
            (GroupKind::Integers, GroupElement::Int(x)) => {
                let n = i64::try_from(n).map_err(|_| GroupError::Overflow)?;
                x.checked_mul(n).map(GroupElement::Int).ok_or(GroupError::Overflow)
            }
            (GroupKind::Free(_), GroupElement::Word(_)) => {
                // square-and-multiply keeps the number of reductions logarithmic
                let mut result = self.identity();
                let mut base = a.clone();
                let mut n = n;
                while n > 0 {
                    if n & 1 == 1 {
                        result = self.op(&result, &base)?;
                    }
                    n >>= 1;
                    if n > 0 {
                        base = self.op(&base, &base)?;
                    }
                }
                Ok(result)
            }
            _ => Err(GroupError::MixedContext(self.tag())),
        }
    }

    /// Textual tag used in automaton files: `Z` or `free:<letters>`.
    pub fn tag(&self) -> String {
        match &self.kind {
            GroupKind::Integers => "Z".to_string(),
            GroupKind::Free(letters) => format!("free:{}", letters.iter().collect::<String>()),
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        let tag = tag.trim();
        if tag == "Z" {
            return Some(Self::integers());
        }
        let letters = tag.strip_prefix("free:")?;
        if letters.chars().any(|c| c.is_whitespace() || c == '\'') {
            return None;
        }
        Some(Self::free(letters.chars()))
    }

    /// Parses an element: a signed decimal for `Z`, or space-separated
    /// letters with a `'` suffix for inverses. The empty string (or `ε`)
    /// is the identity.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement, GroupError> {
        let t = text.trim();
        let err = |reason: &str| GroupError::Parse { text: text.to_string(), reason: reason.to_string() };
        match &self.kind {
            GroupKind::Integers => {
                if t.is_empty() || t == "ε" {
                    return Ok(GroupElement::Int(0));
                }
                t.parse::<i64>().map(GroupElement::Int).map_err(|e| err(&e.to_string()))
            }
            GroupKind::Free(_) => {
                if t == "ε" {
                    return Ok(self.identity());
                }
                let mut symbols = Vec::new();
                for token in t.split_whitespace() {
                    let mut chars = token.chars();
                    let letter = chars.next().ok_or_else(|| err("empty token"))?;
                    let inverse = match chars.as_str() {
                        "" => false,
                        "'" => true,
                        _ => return Err(err("each token must be a letter optionally followed by '")),
                    };
                    symbols.push(Symbol { letter, inverse });
                }
                let e = GroupElement::Word(FreeWord::new(symbols));
                self.check(&e)?;
                Ok(e)
            }
        }
    }

    /// File representation of an element (identity is the empty string for words).
    pub fn format_element(&self, a: &GroupElement) -> String {
        match a {
            GroupElement::Int(v) => v.to_string(),
            GroupElement::Word(w) => w.to_string(),
        }
    }
}

/// Prefix distance between input words: `|u| + |v| - 2|lcp(u, v)|`.
pub fn word_dist<T: PartialEq>(u: &[T], v: &[T]) -> usize {
    let lcp = u.iter().zip(v).take_while(|(a, b)| a == b).count();
    u.len() + v.len() - 2 * lcp
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, VecDeque};

    fn fab() -> GroupContext {
        GroupContext::free(['a', 'b'])
    }

    #[test]
    fn integer_ops() {
        let z = GroupContext::integers();
        let (three, five) = (GroupElement::Int(3), GroupElement::Int(5));
        assert_eq!(z.op(&three, &five).unwrap(), GroupElement::Int(8));
        assert_eq!(z.inverse(&GroupElement::Int(7)).unwrap(), GroupElement::Int(-7));
        assert_eq!(z.delay(&three, &five).unwrap(), GroupElement::Int(2));
        assert_eq!(z.norm(&GroupElement::Int(-4)), 4);
        assert_eq!(z.norm(&z.identity()), 0);
        assert_eq!(z.op(&three, &z.identity()).unwrap(), three);
    }

    #[test]
    fn free_ops() {
        let g = fab();
        let ab = g.parse_element("a b").unwrap();
        let b_inv_a = g.parse_element("b' a").unwrap();
        assert_eq!(g.op(&ab, &b_inv_a).unwrap(), g.parse_element("a a").unwrap());
        assert_eq!(g.inverse(&ab).unwrap(), g.parse_element("b' a'").unwrap());
        assert_eq!(g.inverse(&g.identity()).unwrap(), g.identity());
        let a = g.parse_element("a").unwrap();
        assert_eq!(g.delay(&a, &ab).unwrap(), g.parse_element("b").unwrap());
        assert_eq!(g.norm(&g.parse_element("a b' a").unwrap()), 3);
        assert_eq!(g.op(&ab, &g.identity()).unwrap(), ab);
    }

    #[test]
    fn parsing_reduces_and_rejects() {
        let g = fab();
        assert_eq!(g.parse_element("a a' b").unwrap(), g.parse_element("b").unwrap());
        assert_eq!(g.parse_element("").unwrap(), g.identity());
        assert!(matches!(g.parse_element("c"), Err(GroupError::UnknownGenerator('c'))));
        assert!(g.parse_element("ab").is_err());
        assert!(GroupContext::integers().parse_element("x").is_err());
        let e = g.parse_element("a b' a").unwrap();
        assert_eq!(g.parse_element(&g.format_element(&e)).unwrap(), e);
    }

    #[test]
    fn mixed_context_and_overflow() {
        let z = GroupContext::integers();
        assert!(matches!(z.op(&GroupElement::Int(1), &GroupElement::word("a")), Err(GroupError::MixedContext(_))));
        assert_eq!(z.op(&GroupElement::Int(i64::MAX), &GroupElement::Int(1)), Err(GroupError::Overflow));
        assert_eq!(z.pow(&GroupElement::Int(i64::MAX / 2), 3), Err(GroupError::Overflow));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let g = fab();
        let x = g.parse_element("a b a'").unwrap();
        let mut acc = g.identity();
        for n in 0..7 {
            assert_eq!(g.pow(&x, n).unwrap(), acc);
            acc = g.op(&acc, &x).unwrap();
        }
    }

    #[test]
    fn word_distance() {
        assert_eq!(word_dist(&['a', 'b'], &['a', 'b']), 0);
        assert_eq!(word_dist(&['a', 'a', 'b'], &['a', 'a']), 1);
        assert_eq!(word_dist(&['a', 'b'], &['b', 'a']), 4);
    }

    #[test]
    fn canonical_order() {
        let g = fab();
        let p = |s: &str| g.parse_element(s).unwrap();
        assert!(p("") < p("a"));
        assert!(p("b") < p("a'"));
        assert!(p("b'") < p("a a"));
        assert!(GroupElement::Int(-3) < GroupElement::Int(2));
    }

    /// All free-group elements of norm at most `n`, reduced.
    fn ball(g: &GroupContext, n: usize) -> Vec<GroupElement> {
        let mut out = vec![g.identity()];
        let mut layer = vec![FreeWord::default()];
        let syms = [Symbol::pos('a'), Symbol::neg('a'), Symbol::pos('b'), Symbol::neg('b')];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &layer {
                for s in syms {
                    if w.symbols().last() == Some(&s.inverted()) {
                        continue;
                    }
                    let mut v = w.symbols().to_vec();
                    v.push(s);
                    next.push(FreeWord(v));
                }
            }
            out.extend(next.iter().cloned().map(GroupElement::Word));
            layer = next;
        }
        out
    }

    /// Shortest path between `from` and `to` in the undirected right Cayley graph.
    fn cayley_bfs(g: &GroupContext, from: &GroupElement, to: &GroupElement, limit: u64) -> u64 {
        let mut gens = g.generators();
        gens.extend(g.generators().iter().map(|x| g.inverse(x).unwrap()));
        let mut seen = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert(from.clone(), 0u64);
        queue.push_back(from.clone());
        while let Some(x) = queue.pop_front() {
            let d = seen[&x];
            if &x == to {
                return d;
            }
            if d >= limit {
                continue;
            }
            for s in &gens {
                let y = g.op(&x, s).unwrap();
                if !seen.contains_key(&y) {
                    seen.insert(y.clone(), d + 1);
                    queue.push_back(y);
                }
            }
        }
        panic!("target not reached within {limit}");
    }

    #[test]
    fn cayley_distance_equals_delay_norm_on_integers() {
        let z = GroupContext::integers();
        for a in -6..=6 {
            for b in -6..=6 {
                let (x, y) = (GroupElement::Int(a), GroupElement::Int(b));
                assert_eq!(cayley_bfs(&z, &x, &y, 20), z.distance(&x, &y).unwrap());
            }
        }
    }

    #[test]
    fn cayley_distance_equals_delay_norm_on_free_words() {
        let g = fab();
        let elems = ball(&g, 3);
        assert_eq!(elems.len(), 1 + 4 + 12 + 36);
        for x in &elems {
            for y in &elems {
                assert_eq!(cayley_bfs(&g, x, y, 8), g.distance(x, y).unwrap(), "{x} -> {y}");
            }
        }
    }

    #[test]
    fn delay_laws_on_small_free_words() {
        let g = fab();
        let elems = ball(&g, 2);
        for a in &elems {
            for b in &elems {
                let d = g.delay(a, b).unwrap();
                assert_eq!(d.is_identity(), a == b);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn free_elem() -> impl Strategy<Value = GroupElement> {
            proptest::collection::vec((prop_oneof![Just('a'), Just('b')], any::<bool>()), 0..8).prop_map(|v| {
                GroupElement::Word(FreeWord::new(v.into_iter().map(|(letter, inverse)| Symbol { letter, inverse })))
            })
        }

        fn int_elem() -> impl Strategy<Value = GroupElement> {
            (-1000i64..1000).prop_map(GroupElement::Int)
        }

        fn check_laws(g: &GroupContext, e: &[GroupElement]) {
            let [a, a2, b, _, c, c2] = e else { unreachable!() };
            // delay is the identity exactly on equal pairs
            assert_eq!(g.delay(a, b).unwrap().is_identity(), a == b);
            assert!(g.delay(a, a).unwrap().is_identity());
            // equal delays stay equal after extending both sides
            let b2 = g.op(b, &g.delay(a, a2).unwrap()).unwrap();
            assert_eq!(g.delay(a, a2).unwrap(), g.delay(b, &b2).unwrap());
            let l = g.delay(&g.op(a, c).unwrap(), &g.op(a2, c2).unwrap()).unwrap();
            let r = g.delay(&g.op(b, c).unwrap(), &g.op(&b2, c2).unwrap()).unwrap();
            assert_eq!(l, r);
            // associativity and inverses
            let l = g.op(&g.op(a, b).unwrap(), c).unwrap();
            let r = g.op(a, &g.op(b, c).unwrap()).unwrap();
            assert_eq!(l, r);
            assert!(g.op(a, &g.inverse(a).unwrap()).unwrap().is_identity());
            assert_eq!(g.distance(a, b).unwrap(), g.distance(b, a).unwrap());
        }

        proptest! {
            #[test]
            fn free_group_laws(e in proptest::collection::vec(free_elem(), 6)) {
                check_laws(&fab(), &e);
            }

            #[test]
            fn integer_laws(e in proptest::collection::vec(int_elem(), 6)) {
                check_laws(&GroupContext::integers(), &e);
            }

            #[test]
            fn words_stay_reduced(x in free_elem(), y in free_elem()) {
                let g = fab();
                let p = g.op(&x, &y).unwrap();
                let w = p.as_word().unwrap().symbols();
                prop_assert!(w.windows(2).all(|s| s[0] != s[1].inverted()));
            }
        }
    }
}
