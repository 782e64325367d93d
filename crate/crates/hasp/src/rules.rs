//! Rules and programs.
//!
//! A rule's constraint set, advancing algorithm, and boolean guard each come
//! in two forms: a named registry reference (what the parser produces) or an
//! explicit materialized value (what the splitting operators and the reduct
//! produce). Keeping both behind one type lets every semantic operation run
//! unchanged on source programs, bottoms, remainders, partial evaluations,
//! and reducts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{Atom, Block, GeneralizedPosition, Literal, Tuple};
use crate::rational::Rational;
use crate::registry::{AdvancingRef, BooleanRef, ConstraintRef, Env, RegistryError};

/// An explicit finite set of position tuples of a fixed arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TupleSet {
    arity: usize,
    tuples: BTreeSet<Tuple>,
}

impl TupleSet {
    pub fn new(arity: usize, tuples: impl IntoIterator<Item = Tuple>) -> Self {
        let tuples: BTreeSet<Tuple> = tuples.into_iter().collect();
        assert!(
            tuples.iter().all(|t| t.len() == arity),
            "tuple arity mismatch"
        );
        TupleSet { arity, tuples }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    pub fn contains(&self, tuple: &[GeneralizedPosition]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }
}

/// A constraint set: either a registry reference or a materialized tuple set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintSet {
    Named(ConstraintRef),
    Explicit(TupleSet),
}

impl ConstraintSet {
    pub fn arity(&self, env: &Env) -> Result<usize, RegistryError> {
        match self {
            ConstraintSet::Named(r) => env.registry.constraint_arity(r),
            ConstraintSet::Explicit(t) => Ok(t.arity()),
        }
    }

    pub fn contains(
        &self,
        env: &Env,
        tuple: &[GeneralizedPosition],
    ) -> Result<bool, RegistryError> {
        match self {
            ConstraintSet::Named(r) => env.registry.cs_contains(r, tuple),
            ConstraintSet::Explicit(t) => Ok(t.contains(tuple)),
        }
    }

    /// The member tuples drawn from `domain`, in lexicographic order.
    pub fn enumerate(
        &self,
        env: &Env,
        domain: &BTreeSet<GeneralizedPosition>,
    ) -> Result<Vec<Tuple>, RegistryError> {
        match self {
            ConstraintSet::Named(r) => env.registry.cs_enumerate(r, domain),
            ConstraintSet::Explicit(t) => Ok(t
                .tuples()
                .filter(|tuple| tuple.iter().all(|p| domain.contains(p)))
                .cloned()
                .collect()),
        }
    }
}

/// An advancing algorithm: a registry reference or a materialized map from
/// tuples to successor positions (absent tuples map to the empty set).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Advancer {
    Named(AdvancingRef),
    Mapped(BTreeMap<Tuple, BTreeSet<GeneralizedPosition>>),
}

impl Advancer {
    pub fn eval(
        &self,
        env: &Env,
        tuple: &[GeneralizedPosition],
    ) -> Result<BTreeSet<GeneralizedPosition>, RegistryError> {
        match self {
            Advancer::Named(r) => env.registry.eval_advancing(env, r, tuple),
            Advancer::Mapped(map) => Ok(map.get(tuple).cloned().unwrap_or_default()),
        }
    }
}

/// A boolean guard: a registry reference or an explicit tuple set the guard
/// holds on (and nowhere else).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoolGuard {
    Named(BooleanRef),
    Explicit(TupleSet),
}

impl BoolGuard {
    pub fn eval(&self, env: &Env, tuple: &[GeneralizedPosition]) -> Result<bool, RegistryError> {
        match self {
            BoolGuard::Named(r) => env.registry.eval_boolean(env, r, tuple),
            BoolGuard::Explicit(t) => Ok(t.contains(tuple)),
        }
    }
}

/// An advancing rule: derives its head at the successor positions the
/// advancing algorithm produces from a constraint-set tuple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AdvancingRule {
    pub head: Literal,
    pub blocks: Vec<Block>,
    pub cs: ConstraintSet,
    pub adv: Advancer,
}

/// A stationary rule: derives its head at the last position of a
/// constraint-set tuple accepted by the boolean guard.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StationaryRule {
    pub head: Literal,
    pub blocks: Vec<Block>,
    pub cs: ConstraintSet,
    pub guard: BoolGuard,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    Advancing(AdvancingRule),
    Stationary(StationaryRule),
}

impl Rule {
    pub fn head(&self) -> &Literal {
        match self {
            Rule::Advancing(r) => &r.head,
            Rule::Stationary(r) => &r.head,
        }
    }

    pub fn blocks(&self) -> &[Block] {
        match self {
            Rule::Advancing(r) => &r.blocks,
            Rule::Stationary(r) => &r.blocks,
        }
    }

    pub fn arity(&self) -> usize {
        self.blocks().len()
    }

    pub fn constraint_set(&self) -> &ConstraintSet {
        match self {
            Rule::Advancing(r) => &r.cs,
            Rule::Stationary(r) => &r.cs,
        }
    }

    pub fn is_advancing(&self) -> bool {
        matches!(self, Rule::Advancing(_))
    }

    /// Whether the rule mentions no default-negated literal.
    pub fn is_horn(&self) -> bool {
        self.blocks().iter().all(|b| b.negative().is_empty())
    }

    /// All literals occurring anywhere in the rule.
    pub fn literals(&self) -> BTreeSet<Literal> {
        let mut out: BTreeSet<Literal> = [self.head().clone()].into();
        for b in self.blocks() {
            out.extend(b.literals());
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- ", self.head())?;
        for (i, b) in self.blocks().iter().enumerate() {
            if i > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(" : ")?;
        match self.constraint_set() {
            ConstraintSet::Named(r) => write!(f, "cs {r}")?,
            ConstraintSet::Explicit(t) => write!(f, "cs <{} tuples>", t.len())?,
        }
        match self {
            Rule::Advancing(r) => match &r.adv {
                Advancer::Named(a) => write!(f, ", adv {a}"),
                Advancer::Mapped(_) => write!(f, ", adv <mapped>"),
            },
            Rule::Stationary(r) => match &r.guard {
                BoolGuard::Named(b) => write!(f, ", bool {b}"),
                BoolGuard::Explicit(t) => write!(f, ", bool <{} tuples>", t.len()),
            },
        }
    }
}

/// A hybrid program: a finite rule set plus the time-step metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    delta_t: Rational,
}

impl Program {
    /// Builds a program, dropping duplicate rules while keeping first
    /// occurrence order.
    pub fn new(rules: impl IntoIterator<Item = Rule>, delta_t: Rational) -> Self {
        assert!(delta_t.is_positive(), "delta_t must be positive");
        let mut seen = Vec::new();
        for r in rules {
            if !seen.contains(&r) {
                seen.push(r);
            }
        }
        Program {
            rules: seen,
            delta_t,
        }
    }

    pub fn empty() -> Self {
        Program::new([], Rational::ONE)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn delta_t(&self) -> Rational {
        self.delta_t
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The atoms occurring anywhere in the program.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.rules
            .iter()
            .flat_map(|r| r.literals())
            .map(|l| l.atom)
            .collect()
    }

    /// All classical literals over the program's atoms (`Lit_At`).
    pub fn literal_universe(&self) -> BTreeSet<Literal> {
        self.atoms()
            .into_iter()
            .flat_map(|a| [Literal::positive(a.clone()), Literal::negative(a)])
            .collect()
    }

    /// Checks every registry reference in every rule resolves and each
    /// rule's constraint arity matches its block count.
    pub fn validate(&self, env: &Env) -> Result<(), RegistryError> {
        for rule in &self.rules {
            let arity = rule.constraint_set().arity(env)?;
            if arity != rule.arity() {
                return Err(RegistryError::BadArgs {
                    name: format!("{rule}"),
                    reason: format!(
                        "constraint arity {arity} does not match {} body blocks",
                        rule.arity()
                    ),
                });
            }
            match rule {
                Rule::Advancing(r) => {
                    if let Advancer::Named(a) = &r.adv {
                        env.registry.validate_advancing(a)?;
                    }
                }
                Rule::Stationary(r) => {
                    if let BoolGuard::Named(b) = &r.guard {
                        env.registry.validate_boolean(b)?;
                    }
                }
            }
        }
        Ok(())
    }
}
