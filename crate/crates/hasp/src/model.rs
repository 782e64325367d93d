//! The symbolic vocabulary: atoms, literals, blocks, generalized positions,
//! facts, interpretations, and initial conditions.
//!
//! Everything here is an immutable value with exact, decidable equality.
//! Time is an integer step index `k` (the real time is `k * delta_t`, with
//! `delta_t` stored as program metadata), and parameter values are exact
//! integers, rationals, or symbols, never floating point. Blocks remember
//! insertion order for deterministic serialization, but every semantic
//! operation treats them as sets.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::Rational;

/// A propositional atom. Names match `[a-z][A-Za-z0-9_]*`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(String);

impl Atom {
    /// Panics on names that do not match the atom lexical shape; parsed
    /// input goes through the frontend, which reports a proper error.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(is_valid_atom_name(&name), "invalid atom name: {name:?}");
        Atom(name)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

pub fn is_valid_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A classical literal: an atom or its classical negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }

    /// The classical complement: `a <-> -a`.
    pub fn complement(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.atom)
        } else {
            self.atom.fmt(f)
        }
    }
}

/// Shorthand for a positive literal over a fresh atom, used all over tests.
pub fn lit(name: &str) -> Literal {
    Literal::positive(Atom::new(name))
}

/// Shorthand for a classically negated literal.
pub fn neg_lit(name: &str) -> Literal {
    Literal::negative(Atom::new(name))
}

/// A block: a conjunction of literals and default-negated literals.
///
/// `positive` holds the plain literals, `negative` the ones under `not`.
/// Both parts keep insertion order with duplicates removed. The empty block
/// is legal, as are negative-only blocks and blocks whose two parts overlap
/// (those are simply unsatisfiable).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    positive: Vec<Literal>,
    negative: Vec<Literal>,
}

impl Block {
    pub fn empty() -> Self {
        Block::default()
    }

    pub fn new(
        positive: impl IntoIterator<Item = Literal>,
        negative: impl IntoIterator<Item = Literal>,
    ) -> Self {
        let mut block = Block::default();
        for l in positive {
            block.push_positive(l);
        }
        for l in negative {
            block.push_negative(l);
        }
        block
    }

    pub fn push_positive(&mut self, l: Literal) {
        if !self.positive.contains(&l) {
            self.positive.push(l);
        }
    }

    pub fn push_negative(&mut self, l: Literal) {
        if !self.negative.contains(&l) {
            self.negative.push(l);
        }
    }

    pub fn positive(&self) -> &[Literal] {
        &self.positive
    }

    pub fn negative(&self) -> &[Literal] {
        &self.negative
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    /// All literals mentioned by the block, as a set.
    pub fn literals(&self) -> BTreeSet<Literal> {
        self.positive
            .iter()
            .chain(self.negative.iter())
            .cloned()
            .collect()
    }

    /// The block holding only the positive part.
    pub fn positive_part(&self) -> Block {
        Block {
            positive: self.positive.clone(),
            negative: Vec::new(),
        }
    }

    /// The block holding only the default-negated part.
    pub fn negative_part(&self) -> Block {
        Block {
            positive: Vec::new(),
            negative: self.negative.clone(),
        }
    }

    /// Set difference on a block: removes members of `removed` from both
    /// parts and reconstructs a block, preserving the order of survivors.
    pub fn difference(&self, removed: &BTreeSet<Literal>) -> Block {
        Block {
            positive: self
                .positive
                .iter()
                .filter(|l| !removed.contains(l))
                .cloned()
                .collect(),
            negative: self
                .negative
                .iter()
                .filter(|l| !removed.contains(l))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.positive {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        for l in &self.negative {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "not {l}")?;
            first = false;
        }
        Ok(())
    }
}

/// A parameter value: an exact number (integer or rational) or a symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamValue {
    Number(Rational),
    Symbol(String),
}

impl ParamValue {
    pub fn int(n: i64) -> Self {
        ParamValue::Number(Rational::from_integer(n))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        ParamValue::Number(Rational::new(n, d))
    }

    pub fn symbol(s: impl Into<String>) -> Self {
        ParamValue::Symbol(s.into())
    }

    pub fn as_number(&self) -> Option<Rational> {
        match self {
            ParamValue::Number(r) => Some(*r),
            ParamValue::Symbol(_) => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(r) => r.fmt(f),
            ParamValue::Symbol(s) => f.write_str(s),
        }
    }
}

/// A generalized position: a time step plus named parameter values.
///
/// Two positions are equal exactly when the step and every parameter agree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneralizedPosition {
    step: u32,
    params: BTreeMap<String, ParamValue>,
}

impl GeneralizedPosition {
    pub fn at_step(step: u32) -> Self {
        GeneralizedPosition {
            step,
            params: BTreeMap::new(),
        }
    }

    pub fn new(step: u32, params: impl IntoIterator<Item = (String, ParamValue)>) -> Self {
        GeneralizedPosition {
            step,
            params: params.into_iter().collect(),
        }
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn params(&self) -> &BTreeMap<String, ParamValue> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<&ParamValue> {
        self.params.get(name)
    }

    /// A copy advanced by one step, parameters untouched.
    pub fn advanced(&self) -> Self {
        GeneralizedPosition {
            step: self.step + 1,
            params: self.params.clone(),
        }
    }

    /// A copy advanced by one step with one parameter replaced.
    pub fn advanced_with(&self, name: &str, value: ParamValue) -> Self {
        let mut params = self.params.clone();
        params.insert(name.to_string(), value);
        GeneralizedPosition {
            step: self.step + 1,
            params,
        }
    }
}

impl fmt::Display for GeneralizedPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step={}", self.step)?;
        for (name, value) in &self.params {
            write!(f, " {name}={value}")?;
        }
        Ok(())
    }
}

/// A tuple of generalized positions, the unit constraint sets range over.
pub type Tuple = Vec<GeneralizedPosition>;

/// Returns whether the tuple's steps are strictly increasing.
pub fn strictly_increasing(tuple: &[GeneralizedPosition]) -> bool {
    tuple.windows(2).all(|w| w[0].step() < w[1].step())
}

/// A literal holding at a generalized position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fact {
    pub literal: Literal,
    pub position: GeneralizedPosition,
}

impl Fact {
    pub fn new(literal: Literal, position: GeneralizedPosition) -> Self {
        Fact { literal, position }
    }
}

// Ordered by position first so interpretations list facts in canonical
// (step, params, literal) order.
impl Ord for Fact {
    fn cmp(&self, other: &Self) -> Ordering {
        self.position
            .cmp(&other.position)
            .then_with(|| self.literal.cmp(&other.literal))
    }
}

impl PartialOrd for Fact {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.literal, self.position)
    }
}

/// A finite set of facts.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interpretation {
    facts: BTreeSet<Fact>,
}

impl Interpretation {
    pub fn empty() -> Self {
        Interpretation::default()
    }

    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Self {
        Interpretation {
            facts: facts.into_iter().collect(),
        }
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn holds(&self, literal: &Literal, position: &GeneralizedPosition) -> bool {
        self.facts.contains(&Fact {
            literal: literal.clone(),
            position: position.clone(),
        })
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn union(&self, other: &Interpretation) -> Interpretation {
        Interpretation {
            facts: self.facts.union(&other.facts).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &Interpretation) -> Interpretation {
        Interpretation {
            facts: self.facts.intersection(&other.facts).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &Interpretation) -> Interpretation {
        Interpretation {
            facts: self.facts.difference(&other.facts).cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.facts.is_subset(&other.facts)
    }

    /// No atom holds together with its classical negation at any position.
    pub fn is_consistent(&self) -> bool {
        self.facts
            .iter()
            .filter(|f| !f.literal.negated)
            .all(|f| !self.holds(&f.literal.complement(), &f.position))
    }

    /// The positions at which some fact of the interpretation holds.
    pub fn positions(&self) -> BTreeSet<GeneralizedPosition> {
        self.facts.iter().map(|f| f.position.clone()).collect()
    }

    /// Whether some fact sits at `position`.
    pub fn mentions_position(&self, position: &GeneralizedPosition) -> bool {
        self.facts.iter().any(|f| &f.position == position)
    }

    /// The facts located at `position` (the restriction `M|_p`).
    pub fn restrict_to_position(&self, position: &GeneralizedPosition) -> Interpretation {
        Interpretation {
            facts: self
                .facts
                .iter()
                .filter(|f| &f.position == position)
                .cloned()
                .collect(),
        }
    }

    /// The literals holding at `position`.
    pub fn literals_at(&self, position: &GeneralizedPosition) -> BTreeSet<Literal> {
        self.facts
            .iter()
            .filter(|f| &f.position == position)
            .map(|f| f.literal.clone())
            .collect()
    }

    /// The slice of facts whose position sits at time step `step`.
    pub fn slice(&self, step: u32) -> Interpretation {
        Interpretation {
            facts: self
                .facts
                .iter()
                .filter(|f| f.position.step() == step)
                .cloned()
                .collect(),
        }
    }

    /// The facts at time steps `<= step`.
    pub fn up_to_step(&self, step: u32) -> Interpretation {
        Interpretation {
            facts: self
                .facts
                .iter()
                .filter(|f| f.position.step() <= step)
                .cloned()
                .collect(),
        }
    }

    pub fn max_step(&self) -> Option<u32> {
        self.facts.iter().map(|f| f.position.step()).max()
    }
}

impl FromIterator<Fact> for Interpretation {
    fn from_iter<T: IntoIterator<Item = Fact>>(iter: T) -> Self {
        Interpretation::new(iter)
    }
}

impl IntoIterator for Interpretation {
    type Item = Fact;
    type IntoIter = std::collections::btree_set::IntoIter<Fact>;

    fn into_iter(self) -> Self::IntoIter {
        self.facts.into_iter()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, fact) in self.facts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{fact}")?;
        }
        f.write_str("}")
    }
}

/// The set `J` of designated initial generalized positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InitialCondition {
    positions: BTreeSet<GeneralizedPosition>,
}

impl InitialCondition {
    pub fn new(positions: impl IntoIterator<Item = GeneralizedPosition>) -> Self {
        InitialCondition {
            positions: positions.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        InitialCondition::default()
    }

    pub fn positions(&self) -> &BTreeSet<GeneralizedPosition> {
        &self.positions
    }

    pub fn contains(&self, p: &GeneralizedPosition) -> bool {
        self.positions.contains(p)
    }

    /// The initial positions at time step `step` (the slice `J[step]`).
    pub fn at_step(&self, step: u32) -> BTreeSet<GeneralizedPosition> {
        self.positions
            .iter()
            .filter(|p| p.step() == step)
            .cloned()
            .collect()
    }

    /// Whether some initial position sits at time zero; the incremental
    /// solver requires this normalization.
    pub fn has_step_zero(&self) -> bool {
        self.positions.iter().any(|p| p.step() == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(step: u32) -> GeneralizedPosition {
        GeneralizedPosition::at_step(step)
    }

    #[test]
    fn literal_complement_is_involutive() {
        let l = lit("a");
        assert_eq!(l.complement().complement(), l);
        assert_ne!(l.complement(), l);
    }

    #[test]
    fn block_difference_removes_from_both_parts() {
        // (b1, b2; not b3, b4) \ {b1, b4} -> (b2; not b3)
        let block = Block::new([lit("b1"), lit("b2")], [lit("b3"), lit("b4")]);
        let removed: BTreeSet<_> = [lit("b1"), lit("b4")].into_iter().collect();
        let expected = Block::new([lit("b2")], [lit("b3")]);
        assert_eq!(block.difference(&removed), expected);
    }

    #[test]
    fn block_difference_identity_on_empty_set() {
        let block = Block::new([lit("a")], [lit("b")]);
        assert_eq!(block.difference(&BTreeSet::new()), block);
    }

    #[test]
    fn block_difference_strikes_shared_literal() {
        // (a; not a) \ {a} -> ()
        let block = Block::new([lit("a")], [lit("a")]);
        let removed: BTreeSet<_> = [lit("a")].into_iter().collect();
        assert!(block.difference(&removed).is_empty());
    }

    #[test]
    fn blocks_dedup_on_insert() {
        let block = Block::new([lit("a"), lit("a")], []);
        assert_eq!(block.positive().len(), 1);
    }

    #[test]
    fn position_equality_is_exact() {
        let a = GeneralizedPosition::new(0, [("x".to_string(), ParamValue::rational(1, 2))]);
        let b = GeneralizedPosition::new(0, [("x".to_string(), ParamValue::rational(2, 4))]);
        let c = GeneralizedPosition::new(0, [("x".to_string(), ParamValue::int(1))]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, p(0));
    }

    #[test]
    fn interpretation_consistency() {
        let ok = Interpretation::new([Fact::new(lit("a"), p(0)), Fact::new(neg_lit("a"), p(1))]);
        assert!(ok.is_consistent());
        let bad = Interpretation::new([Fact::new(lit("a"), p(0)), Fact::new(neg_lit("a"), p(0))]);
        assert!(!bad.is_consistent());
    }

    #[test]
    fn restriction_partitions_interpretation() {
        let m = Interpretation::new([
            Fact::new(lit("a"), p(0)),
            Fact::new(lit("b"), p(0)),
            Fact::new(lit("a"), p(1)),
        ]);
        let mut rebuilt = Interpretation::empty();
        for q in m.positions() {
            let part = m.restrict_to_position(&q);
            assert!(part.facts().all(|f| f.position == q));
            rebuilt = rebuilt.union(&part);
        }
        assert_eq!(rebuilt, m);
    }

    #[test]
    fn facts_order_by_position_then_literal() {
        let m = Interpretation::new([
            Fact::new(lit("b"), p(1)),
            Fact::new(lit("c"), p(1)),
            Fact::new(lit("a"), p(0)),
        ]);
        let listed: Vec<String> = m.facts().map(|f| f.to_string()).collect();
        assert_eq!(listed, ["a @ step=0", "b @ step=1", "c @ step=1"]);
    }

    #[test]
    fn initial_condition_dedups_and_slices() {
        let j = InitialCondition::new([p(0), p(0), p(2)]);
        assert_eq!(j.positions().len(), 2);
        assert_eq!(j.at_step(0).len(), 1);
        assert!(j.has_step_zero());
        assert!(!InitialCondition::new([p(1)]).has_step_zero());
    }

    fn arb_interp() -> impl Strategy<Value = Interpretation> {
        proptest::collection::btree_set((0u32..3, 0usize..3), 0..6).prop_map(|pairs| {
            let names = ["a", "b", "c"];
            Interpretation::new(
                pairs
                    .into_iter()
                    .map(|(step, i)| Fact::new(lit(names[i]), p(step))),
            )
        })
    }

    proptest! {
        #[test]
        fn set_laws_hold(m in arb_interp(), n in arb_interp()) {
            prop_assert_eq!(m.union(&n), n.union(&m));
            prop_assert_eq!(m.intersection(&n), n.intersection(&m));
            prop_assert_eq!(m.union(&n).difference(&n).union(&m.intersection(&n)), m.clone());
            prop_assert!(m.intersection(&n).is_subset(&m));
            prop_assert!(m.is_subset(&m.union(&n)));
        }

        #[test]
        fn slices_partition_by_step(m in arb_interp()) {
            let mut rebuilt = Interpretation::empty();
            for step in 0..4 {
                rebuilt = rebuilt.union(&m.slice(step));
            }
            prop_assert_eq!(rebuilt, m);
        }
    }
}
