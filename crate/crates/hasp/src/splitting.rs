//! Splitting a hybrid program: splitting-set validation, the bottom, the
//! remainder, partial evaluation, and the two decomposition checks.
//!
//! Unlike classical ASP, a hybrid rule can contribute facts inside the
//! splitting set for some constraint tuples and outside it for others, so
//! splitting cuts through individual rules: the bottom restricts each rule
//! to the tuples (and advancing outputs) that land inside the set, and the
//! remainder keeps the tuple parts landing outside. All operators work over
//! a materialized finite universe; the constraint tuples and advancing
//! outputs they quantify over are enumerated, not manipulated symbolically.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::EngineError;
use crate::model::{Fact, GeneralizedPosition, InitialCondition, Interpretation, Literal, Tuple};
use crate::oracle::{self, FiniteUniverse};
use crate::registry::Env;
use crate::rules::{Advancer, AdvancingRule, ConstraintSet, Rule, StationaryRule, TupleSet};
use crate::semantics;

/// A set of facts used to split a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SplitSet {
    facts: BTreeSet<Fact>,
}

impl SplitSet {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Self {
        SplitSet {
            facts: facts.into_iter().collect(),
        }
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, literal: &Literal, position: &GeneralizedPosition) -> bool {
        self.facts.contains(&Fact {
            literal: literal.clone(),
            position: position.clone(),
        })
    }

    pub fn is_subset(&self, other: &SplitSet) -> bool {
        self.facts.is_subset(&other.facts)
    }

    /// The positions the set mentions.
    pub fn positions(&self) -> BTreeSet<GeneralizedPosition> {
        self.facts.iter().map(|f| f.position.clone()).collect()
    }

    /// The literals the set holds at one position.
    pub fn literals_at(&self, position: &GeneralizedPosition) -> BTreeSet<Literal> {
        self.facts
            .iter()
            .filter(|f| &f.position == position)
            .map(|f| f.literal.clone())
            .collect()
    }

    /// The split of an interpretation: facts inside and outside the set.
    pub fn partition(&self, m: &Interpretation) -> (Interpretation, Interpretation) {
        let inside = m
            .facts()
            .filter(|f| self.facts.contains(f))
            .cloned()
            .collect();
        let outside = m
            .facts()
            .filter(|f| !self.facts.contains(f))
            .cloned()
            .collect();
        (inside, outside)
    }
}

fn gp_of_split(u: &SplitSet, init: &InitialCondition) -> BTreeSet<GeneralizedPosition> {
    let mut out = u.positions();
    out.extend(init.positions().iter().cloned());
    out
}

/// Checks the splitting-set conditions: whenever a rule can contribute a
/// fact inside `u` for some constraint tuple, all of that tuple's block
/// facts lie inside `u` and all of its positions are positions of `u` or of
/// the initial condition.
pub fn is_splitting_set(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    init: &InitialCondition,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<bool, EngineError> {
    let known = gp_of_split(u, init);
    let support_ok = |blocks: &[crate::model::Block], tuple: &[GeneralizedPosition]| {
        blocks
            .iter()
            .zip(tuple.iter())
            .all(|(b, p)| b.literals().iter().all(|l| u.contains(l, p)))
            && tuple.iter().all(|p| known.contains(p))
    };
    for rule in rules {
        match rule {
            Rule::Advancing(r) => {
                for tuple in r.cs.enumerate(env, universe_positions)? {
                    let contributes = r
                        .adv
                        .eval(env, &tuple)?
                        .iter()
                        .any(|q| u.contains(&r.head, q));
                    if contributes && !support_ok(&r.blocks, &tuple) {
                        return Ok(false);
                    }
                }
            }
            Rule::Stationary(r) => {
                for tuple in r.cs.enumerate(env, universe_positions)? {
                    if u.contains(&r.head, tuple.last().unwrap()) && !support_ok(&r.blocks, &tuple)
                    {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Per-rule split data: the tuples contributing into `u` (with their
/// in-`u` advancing outputs) and the tuples contributing outside.
struct RuleSplit {
    cs_bottom: BTreeSet<Tuple>,
    adv_bottom: BTreeMap<Tuple, BTreeSet<GeneralizedPosition>>,
    cs_rem: BTreeSet<Tuple>,
    adv_rem: BTreeMap<Tuple, BTreeSet<GeneralizedPosition>>,
}

fn split_rule(
    env: &Env,
    u: &SplitSet,
    rule: &Rule,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<RuleSplit, EngineError> {
    let mut split = RuleSplit {
        cs_bottom: BTreeSet::new(),
        adv_bottom: BTreeMap::new(),
        cs_rem: BTreeSet::new(),
        adv_rem: BTreeMap::new(),
    };
    match rule {
        Rule::Advancing(r) => {
            for tuple in r.cs.enumerate(env, universe_positions)? {
                // Outputs beyond the materialized universe cannot carry
                // facts of any interpretation under check; they belong to
                // neither side of the split.
                let (inside, outside): (BTreeSet<_>, BTreeSet<_>) = r
                    .adv
                    .eval(env, &tuple)?
                    .into_iter()
                    .filter(|q| universe_positions.contains(q))
                    .partition(|q| u.contains(&r.head, q));
                if !inside.is_empty() {
                    split.adv_bottom.insert(tuple.clone(), inside);
                    split.cs_bottom.insert(tuple.clone());
                }
                if !outside.is_empty() {
                    split.adv_rem.insert(tuple.clone(), outside);
                    split.cs_rem.insert(tuple);
                }
            }
        }
        Rule::Stationary(r) => {
            for tuple in r.cs.enumerate(env, universe_positions)? {
                if !r.guard.eval(env, &tuple)? {
                    continue;
                }
                if u.contains(&r.head, tuple.last().unwrap()) {
                    split.cs_bottom.insert(tuple);
                } else {
                    split.cs_rem.insert(tuple);
                }
            }
        }
    }
    Ok(split)
}

/// The rules that could contribute a fact inside `u` for some tuple.
pub fn rules_contributing(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Rule>, EngineError> {
    let mut out = Vec::new();
    for rule in rules {
        if !split_rule(env, u, rule, universe_positions)?
            .cs_bottom
            .is_empty()
        {
            out.push(rule.clone());
        }
    }
    Ok(out)
}

/// The bottom of the program with respect to `u`: each contributing rule
/// restricted to the tuples whose conclusions land inside `u`, with
/// advancing outputs filtered to those inside `u`.
pub fn bottom(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Rule>, EngineError> {
    let mut out = Vec::new();
    for rule in rules {
        let split = split_rule(env, u, rule, universe_positions)?;
        if split.cs_bottom.is_empty() {
            continue;
        }
        out.push(match rule {
            Rule::Advancing(r) => Rule::Advancing(AdvancingRule {
                head: r.head.clone(),
                blocks: r.blocks.clone(),
                cs: ConstraintSet::Explicit(TupleSet::new(r.blocks.len(), split.cs_bottom)),
                adv: Advancer::Mapped(split.adv_bottom),
            }),
            Rule::Stationary(r) => Rule::Stationary(StationaryRule {
                head: r.head.clone(),
                blocks: r.blocks.clone(),
                cs: ConstraintSet::Explicit(TupleSet::new(r.blocks.len(), split.cs_bottom)),
                guard: r.guard.clone(),
            }),
        });
    }
    Ok(out)
}

/// The remainder: the parts of the contributing rules whose conclusions
/// land outside `u`.
pub fn remainder(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Rule>, EngineError> {
    let mut out = Vec::new();
    for rule in rules {
        let split = split_rule(env, u, rule, universe_positions)?;
        if split.cs_bottom.is_empty() || split.cs_rem.is_empty() {
            continue;
        }
        out.push(match rule {
            Rule::Advancing(r) => Rule::Advancing(AdvancingRule {
                head: r.head.clone(),
                blocks: r.blocks.clone(),
                cs: ConstraintSet::Explicit(TupleSet::new(r.blocks.len(), split.cs_rem)),
                adv: Advancer::Mapped(split.adv_rem),
            }),
            Rule::Stationary(r) => Rule::Stationary(StationaryRule {
                head: r.head.clone(),
                blocks: r.blocks.clone(),
                cs: ConstraintSet::Explicit(TupleSet::new(r.blocks.len(), split.cs_rem)),
                guard: r.guard.clone(),
            }),
        });
    }
    Ok(out)
}

/// Partial evaluation against a bottom answer set `x`: keeps the tuples
/// whose body projection onto `u` is satisfied by `x`, and emits one rule
/// per surviving tuple with the projected literals removed and a singleton
/// constraint set. Advancing and boolean algorithms carry over unchanged.
pub fn partial_eval(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    x: &Interpretation,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Rule>, EngineError> {
    let mut out: Vec<Rule> = Vec::new();
    for rule in rules {
        for tuple in rule.constraint_set().enumerate(env, universe_positions)? {
            let projection_satisfied = rule.blocks().iter().zip(tuple.iter()).all(|(b, p)| {
                b.positive()
                    .iter()
                    .filter(|l| u.contains(l, p))
                    .all(|l| x.holds(l, p))
                    && b.negative().iter().all(|l| !x.holds(l, p))
            });
            if !projection_satisfied {
                continue;
            }
            let blocks: Vec<crate::model::Block> = rule
                .blocks()
                .iter()
                .zip(tuple.iter())
                .map(|(b, p)| b.difference(&u.literals_at(p)))
                .collect();
            let cs = ConstraintSet::Explicit(TupleSet::new(tuple.len(), [tuple.clone()]));
            let new_rule = match rule {
                Rule::Advancing(r) => Rule::Advancing(AdvancingRule {
                    head: r.head.clone(),
                    blocks,
                    cs,
                    adv: r.adv.clone(),
                }),
                Rule::Stationary(r) => Rule::Stationary(StationaryRule {
                    head: r.head.clone(),
                    blocks,
                    cs,
                    guard: r.guard.clone(),
                }),
            };
            if !out.contains(&new_rule) {
                out.push(new_rule);
            }
        }
    }
    Ok(out)
}

fn rules_difference(rules: &[Rule], removed: &[Rule]) -> Vec<Rule> {
    rules
        .iter()
        .filter(|r| !removed.contains(r))
        .cloned()
        .collect()
}

/// The program whose answer sets (relative to a bottom answer set `x`)
/// characterize the part of an answer set outside `u`: the non-contributing
/// rules plus the remainder, partially evaluated against `x`.
pub fn top_program(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    x: &Interpretation,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Rule>, EngineError> {
    let contributing = rules_contributing(env, u, rules, universe_positions)?;
    let mut base = rules_difference(rules, &contributing);
    base.extend(remainder(env, u, rules, universe_positions)?);
    partial_eval(env, u, &base, x, universe_positions)
}

/// The split-decomposition verdicts for one interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitDecomposition {
    /// `M` intersected with the splitting set.
    pub inside: Interpretation,
    /// `M` minus the splitting set.
    pub outside: Interpretation,
    /// Whether `inside` is an answer set of the bottom w.i.c. the original
    /// initial condition.
    pub bottom_verdict: bool,
    /// Whether `outside` is an answer set of the partially evaluated top
    /// w.i.c. the positions of `inside` and the initial condition.
    pub top_verdict: bool,
}

impl SplitDecomposition {
    pub fn holds(&self) -> bool {
        self.bottom_verdict && self.top_verdict
    }
}

/// Decomposes `m` across the splitting set and reports both answer-set
/// verdicts; they both hold exactly when `m` is an answer set.
pub fn theorem1_decompose(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    init: &InitialCondition,
    universe_positions: &BTreeSet<GeneralizedPosition>,
    m: &Interpretation,
) -> Result<SplitDecomposition, EngineError> {
    if !is_splitting_set(env, u, rules, init, universe_positions)? {
        return Err(EngineError::NotSplittingSet);
    }
    let (inside, outside) = u.partition(m);
    let bottom_rules = bottom(env, u, rules, universe_positions)?;
    let bottom_verdict = semantics::is_answer_set(env, &bottom_rules, init, &inside)?;
    let top = top_program(env, u, rules, &inside, universe_positions)?;
    let top_init = InitialCondition::new(semantics::gp_with_initial(&inside, init));
    let top_verdict = semantics::is_answer_set(env, &top, &top_init, &outside)?;
    Ok(SplitDecomposition {
        inside,
        outside,
        bottom_verdict,
        top_verdict,
    })
}

/// Assembles every consistent union of a bottom answer set with an answer
/// set of the corresponding top; these are exactly the answer sets of the
/// program.
pub fn theorem1_assemble(
    env: &Env,
    u: &SplitSet,
    rules: &[Rule],
    init: &InitialCondition,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Interpretation>, EngineError> {
    if !is_splitting_set(env, u, rules, init, universe_positions)? {
        return Err(EngineError::NotSplittingSet);
    }
    let bottom_rules = bottom(env, u, rules, universe_positions)?;
    let mut assembled = Vec::new();
    for x in oracle::answer_sets_over(env, &bottom_rules, init, universe_positions)? {
        let top = top_program(env, u, rules, &x, universe_positions)?;
        let top_init = InitialCondition::new(semantics::gp_with_initial(&x, init));
        for y in oracle::answer_sets_over(env, &top, &top_init, universe_positions)? {
            let union = x.union(&y);
            if union.is_consistent() && !assembled.contains(&union) {
                assembled.push(union);
            }
        }
    }
    assembled.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(assembled)
}

/// The time-prefix splitting sequence over a finite universe: the i-th set
/// holds every universe fact at steps up to i. Each prefix is a splitting
/// set for any discrete-time program over the universe, and the last one
/// covers all universe facts.
pub fn prefix_sequence(universe: &FiniteUniverse) -> Vec<SplitSet> {
    (0..=universe.horizon())
        .map(|i| SplitSet::new(universe.facts().filter(|f| f.position.step() <= i)))
        .collect()
}

/// One layer of a sequence decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerDecomposition {
    /// `M` restricted to the facts this layer adds.
    pub layer: Interpretation,
    /// The layer's answer-set verdict.
    pub verdict: bool,
}

/// Decomposes `m` along a monotone sequence of splitting sets and checks
/// each layer: the first against the bottom of the first set, each later
/// layer against the partially evaluated difference program together with
/// the cumulative bottom condition. All verdicts hold exactly when `m` is
/// an answer set.
pub fn theorem2_decompose(
    env: &Env,
    sequence: &[SplitSet],
    rules: &[Rule],
    init: &InitialCondition,
    universe_positions: &BTreeSet<GeneralizedPosition>,
    m: &Interpretation,
) -> Result<Vec<LayerDecomposition>, EngineError> {
    check_sequence(env, sequence, rules, init, universe_positions)?;
    let last = sequence.last().expect("checked non-empty");
    if !m.facts().all(|f| last.facts().contains(f)) {
        return Err(EngineError::IncompleteSequence);
    }

    let mut layers = Vec::new();
    let (x0, _) = sequence[0].partition(m);
    let bottom0 = bottom(env, &sequence[0], rules, universe_positions)?;
    let verdict0 = semantics::is_answer_set(env, &bottom0, init, &x0)?;
    layers.push(LayerDecomposition {
        layer: x0.clone(),
        verdict: verdict0,
    });

    let mut cumulative = x0;
    for alpha in 0..sequence.len() - 1 {
        let (next_inside, _) = sequence[alpha + 1].partition(m);
        let layer = next_inside.difference(&cumulative);
        let eps_program = sequence_layer_program(
            env,
            &sequence[alpha],
            &sequence[alpha + 1],
            rules,
            &cumulative,
            universe_positions,
        )?;
        let layer_init = InitialCondition::new(semantics::gp_with_initial(&cumulative, init));
        let eps_verdict = semantics::is_answer_set(env, &eps_program, &layer_init, &layer)?;
        let bottom_alpha = bottom(env, &sequence[alpha], rules, universe_positions)?;
        let cumulative_verdict = semantics::is_answer_set(env, &bottom_alpha, init, &cumulative)?;
        layers.push(LayerDecomposition {
            layer: layer.clone(),
            verdict: eps_verdict && cumulative_verdict,
        });
        cumulative = cumulative.union(&layer);
    }
    Ok(layers)
}

/// The per-layer program of the sequence decomposition: the bottom of the
/// next set, minus its rules contributing to the current set, plus the
/// remainder of those rules, partially evaluated against the accumulated
/// layers.
fn sequence_layer_program(
    env: &Env,
    current: &SplitSet,
    next: &SplitSet,
    rules: &[Rule],
    accumulated: &Interpretation,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Rule>, EngineError> {
    let bottom_next = bottom(env, next, rules, universe_positions)?;
    let contributing = rules_contributing(env, current, &bottom_next, universe_positions)?;
    let mut base = rules_difference(&bottom_next, &contributing);
    base.extend(remainder(env, current, &bottom_next, universe_positions)?);
    partial_eval(env, current, &base, accumulated, universe_positions)
}

fn check_sequence(
    env: &Env,
    sequence: &[SplitSet],
    rules: &[Rule],
    init: &InitialCondition,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<(), EngineError> {
    if sequence.is_empty() {
        return Err(EngineError::IncompleteSequence);
    }
    for pair in sequence.windows(2) {
        if !pair[0].is_subset(&pair[1]) {
            return Err(EngineError::NonMonotoneSequence);
        }
    }
    for u in sequence {
        if !is_splitting_set(env, u, rules, init, universe_positions)? {
            return Err(EngineError::NotSplittingSet);
        }
    }
    Ok(())
}

/// Enumerates every layer-by-layer solution along the sequence and returns
/// the unions; by the sequence decomposition these are exactly the answer
/// sets of the program.
pub fn theorem2_assemble(
    env: &Env,
    sequence: &[SplitSet],
    rules: &[Rule],
    init: &InitialCondition,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Interpretation>, EngineError> {
    check_sequence(env, sequence, rules, init, universe_positions)?;
    let bottom0 = bottom(env, &sequence[0], rules, universe_positions)?;
    let mut branches = oracle::answer_sets_over(env, &bottom0, init, universe_positions)?;
    for alpha in 0..sequence.len() - 1 {
        let bottom_alpha = bottom(env, &sequence[alpha], rules, universe_positions)?;
        let mut next_branches = Vec::new();
        for accumulated in branches {
            if !semantics::is_answer_set(env, &bottom_alpha, init, &accumulated)? {
                continue;
            }
            let eps_program = sequence_layer_program(
                env,
                &sequence[alpha],
                &sequence[alpha + 1],
                rules,
                &accumulated,
                universe_positions,
            )?;
            let layer_init = InitialCondition::new(semantics::gp_with_initial(&accumulated, init));
            for layer in
                oracle::answer_sets_over(env, &eps_program, &layer_init, universe_positions)?
            {
                let union = accumulated.union(&layer);
                if union.is_consistent() && !next_branches.contains(&union) {
                    next_branches.push(union);
                }
            }
        }
        branches = next_branches;
    }
    branches.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    branches.dedup();
    Ok(branches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::worked_example;
    use crate::model::lit;
    use crate::oracle::{brute_force_answer_sets, reachable_universe};
    use crate::registry::Registry;
    use crate::rules::Program;

    fn p(step: u32) -> GeneralizedPosition {
        GeneralizedPosition::at_step(step)
    }

    fn fact(name: &str, step: u32) -> Fact {
        Fact::new(lit(name), p(step))
    }

    struct Fixture {
        program: Program,
        init: InitialCondition,
        universe: FiniteUniverse,
    }

    fn fixture(horizon: u32) -> (Registry, Fixture) {
        let reg = Registry::with_builtins();
        let (program, init) = worked_example();
        let env = Env::new(&reg, program.delta_t());
        let universe = reachable_universe(&env, &program, &init, horizon).unwrap();
        (
            reg,
            Fixture {
                program,
                init,
                universe,
            },
        )
    }

    fn full_answer_set() -> Interpretation {
        Interpretation::new([fact("a", 0), fact("b", 1), fact("c", 1)])
    }

    #[test]
    fn time_prefixes_are_splitting_sets() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        for u in prefix_sequence(&fx.universe) {
            assert!(is_splitting_set(
                &env,
                &u,
                fx.program.rules(),
                &fx.init,
                fx.universe.positions()
            )
            .unwrap());
        }
        // The empty set is vacuously a splitting set.
        assert!(is_splitting_set(
            &env,
            &SplitSet::default(),
            fx.program.rules(),
            &fx.init,
            fx.universe.positions()
        )
        .unwrap());
    }

    #[test]
    fn lone_interior_fact_is_not_a_splitting_set() {
        // {(b,1)} alone: the advancing rule contributes (b,1) from the
        // tuple (0) whose block fact (a,0) is outside the set.
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let u = SplitSet::new([fact("b", 1)]);
        assert!(!is_splitting_set(
            &env,
            &u,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions()
        )
        .unwrap());
    }

    fn step0_prefix(fx: &Fixture) -> SplitSet {
        prefix_sequence(&fx.universe).into_iter().next().unwrap()
    }

    #[test]
    fn contributing_rules_for_the_step0_prefix() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let u = step0_prefix(&fx);
        let rb = rules_contributing(&env, &u, fx.program.rules(), fx.universe.positions()).unwrap();
        // The initial rule lands (a,0) in U and the guarded rule can land
        // (c,0); the advancing rule only ever contributes at step >= 1.
        assert_eq!(rb.len(), 2);
        assert_eq!(rb[0], fx.program.rules()[0]);
        assert_eq!(rb[1], fx.program.rules()[2]);

        // The full universe captures every applicable rule.
        let all = SplitSet::new(fx.universe.facts());
        let rb =
            rules_contributing(&env, &all, fx.program.rules(), fx.universe.positions()).unwrap();
        assert_eq!(rb.len(), 3);

        // The empty set captures none.
        let rb = rules_contributing(
            &env,
            &SplitSet::default(),
            fx.program.rules(),
            fx.universe.positions(),
        )
        .unwrap();
        assert!(rb.is_empty());
    }

    #[test]
    fn bottom_restricts_tuples_into_the_set() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let u = step0_prefix(&fx);
        let b = bottom(&env, &u, fx.program.rules(), fx.universe.positions()).unwrap();
        assert_eq!(b.len(), 2);
        for rule in &b {
            match rule.constraint_set() {
                ConstraintSet::Explicit(t) => {
                    assert_eq!(t.tuples().cloned().collect::<Vec<_>>(), vec![vec![p(0)]]);
                }
                _ => panic!("bottom rules carry explicit tuple sets"),
            }
        }

        // An advancing rule whose every output leaves the set is excluded:
        // splitting on step 0 only, tick always lands at step >= 1.
        assert!(b.iter().all(|r| !r.is_advancing()));

        // Splitting on the full universe keeps all tuples of every rule.
        let all = SplitSet::new(fx.universe.facts());
        let b = bottom(&env, &all, fx.program.rules(), fx.universe.positions()).unwrap();
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn remainder_keeps_tuples_leaving_the_set() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let u = step0_prefix(&fx);
        let rem = remainder(&env, &u, fx.program.rules(), fx.universe.positions()).unwrap();
        // Only the guarded stationary rule has tuples on both sides: its
        // remainder keeps the step-1 and step-2 tuples. The initial rule is
        // pinned to step 0 and the advancing rule is not in the bottom.
        assert_eq!(rem.len(), 1);
        match &rem[0] {
            Rule::Stationary(r) => {
                assert_eq!(r.head, lit("c"));
                match &r.cs {
                    ConstraintSet::Explicit(t) => assert_eq!(
                        t.tuples().cloned().collect::<Vec<_>>(),
                        vec![vec![p(1)], vec![p(2)]]
                    ),
                    _ => panic!("explicit tuples expected"),
                }
            }
            _ => panic!("stationary remainder expected"),
        }

        // Splitting on the full universe leaves no remainder.
        let all = SplitSet::new(fx.universe.facts());
        assert!(
            remainder(&env, &all, fx.program.rules(), fx.universe.positions())
                .unwrap()
                .is_empty()
        );

        // And an empty split has no contributing rules at all.
        assert!(remainder(
            &env,
            &SplitSet::default(),
            fx.program.rules(),
            fx.universe.positions()
        )
        .unwrap()
        .is_empty());
    }

    #[test]
    fn partial_eval_projects_satisfied_prefixes() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let u = step0_prefix(&fx);
        let x = Interpretation::new([fact("a", 0)]);
        let top = top_program(&env, &u, fx.program.rules(), &x, fx.universe.positions()).unwrap();

        // From the advancing rule: the step-0 tuple loses its block (the
        // literal (a,0) sits inside U and is satisfied by X), while later
        // tuples keep the block untouched.
        let from_advancing: Vec<&Rule> = top.iter().filter(|r| r.is_advancing()).collect();
        assert_eq!(from_advancing.len(), 3);
        let tuple0 = from_advancing
            .iter()
            .find(|r| r.constraint_set().contains(&env, &[p(0)]).unwrap())
            .unwrap();
        assert!(tuple0.blocks()[0].is_empty());
        let tuple1 = from_advancing
            .iter()
            .find(|r| r.constraint_set().contains(&env, &[p(1)]).unwrap())
            .unwrap();
        assert_eq!(tuple1.blocks()[0], crate::model::Block::new([lit("a")], []));

        // A body fully inside U with an unsatisfied projection is dropped:
        // with X empty, the advancing rule's step-0 tuple disappears.
        let top_empty = top_program(
            &env,
            &u,
            fx.program.rules(),
            &Interpretation::empty(),
            fx.universe.positions(),
        )
        .unwrap();
        assert!(top_empty
            .iter()
            .filter(|r| r.is_advancing())
            .all(|r| !r.constraint_set().contains(&env, &[p(0)]).unwrap()));

        // Bodies disjoint from U keep every tuple with unchanged blocks:
        // the remainder tuples of the guarded rule at steps 1 and 2.
        assert!(top.iter().any(|r| !r.is_advancing()
            && r.constraint_set().contains(&env, &[p(1)]).unwrap()
            && r.blocks()[0] == crate::model::Block::new([lit("b")], [lit("a")])));
    }

    #[test]
    fn decompose_worked_example() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let u = step0_prefix(&fx);

        let d = theorem1_decompose(
            &env,
            &u,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions(),
            &full_answer_set(),
        )
        .unwrap();
        assert_eq!(d.inside, Interpretation::new([fact("a", 0)]));
        assert_eq!(d.outside, Interpretation::new([fact("b", 1), fact("c", 1)]));
        assert!(d.holds(), "expected (true, true), got {d:?}");

        // The empty interpretation fails at the bottom (the initial fact
        // is forced).
        let d = theorem1_decompose(
            &env,
            &u,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions(),
            &Interpretation::empty(),
        )
        .unwrap();
        assert!(!d.bottom_verdict);

        // The empty program decomposes trivially.
        let d = theorem1_decompose(
            &env,
            &SplitSet::default(),
            &[],
            &fx.init,
            fx.universe.positions(),
            &Interpretation::empty(),
        )
        .unwrap();
        assert!(d.holds());
    }

    #[test]
    fn decompose_rejects_invalid_splitting_sets() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let u = SplitSet::new([fact("b", 1)]);
        let err = theorem1_decompose(
            &env,
            &u,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions(),
            &full_answer_set(),
        )
        .unwrap_err();
        assert_eq!(err, EngineError::NotSplittingSet);
    }

    #[test]
    fn assembly_matches_oracle_on_worked_example() {
        let (reg, fx) = fixture(3);
        let env = Env::new(&reg, fx.program.delta_t());
        let oracle_sets = brute_force_answer_sets(&env, &fx.program, &fx.init, 3).unwrap();
        for u in prefix_sequence(&fx.universe) {
            let assembled = theorem1_assemble(
                &env,
                &u,
                fx.program.rules(),
                &fx.init,
                fx.universe.positions(),
            )
            .unwrap();
            assert_eq!(
                assembled,
                oracle_sets,
                "mismatch at split of {} facts",
                u.len()
            );
        }
    }

    #[test]
    fn prefix_sequence_shape() {
        let (_, fx) = fixture(2);
        let seq = prefix_sequence(&fx.universe);
        assert_eq!(seq.len(), 3);
        for (i, u) in seq.iter().enumerate() {
            // One position per step in this universe, six literals.
            assert_eq!(u.len(), 6 * (i + 1));
        }
        for pair in seq.windows(2) {
            assert!(pair[0].is_subset(&pair[1]));
        }
        assert_eq!(seq.last().unwrap().len(), fx.universe.fact_count());

        let (_, fx0) = fixture(0);
        let seq0 = prefix_sequence(&fx0.universe);
        assert_eq!(seq0.len(), 1);
        assert_eq!(seq0[0].len(), fx0.universe.fact_count());
    }

    #[test]
    fn sequence_decomposition_layers() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let seq = prefix_sequence(&fx.universe);
        let layers = theorem2_decompose(
            &env,
            &seq,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions(),
            &full_answer_set(),
        )
        .unwrap();
        assert_eq!(layers.len(), 3);
        assert_eq!(layers[0].layer, Interpretation::new([fact("a", 0)]));
        assert_eq!(
            layers[1].layer,
            Interpretation::new([fact("b", 1), fact("c", 1)])
        );
        assert!(layers[2].layer.is_empty());
        assert!(layers.iter().all(|l| l.verdict), "layers: {layers:?}");

        // Dropping (c,1) flips the step-1 verdict.
        let broken = Interpretation::new([fact("a", 0), fact("b", 1)]);
        let layers = theorem2_decompose(
            &env,
            &seq,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions(),
            &broken,
        )
        .unwrap();
        assert!(!layers[1].verdict);

        // The empty program: all layers empty and true.
        let layers = theorem2_decompose(
            &env,
            &seq,
            &[],
            &fx.init,
            fx.universe.positions(),
            &Interpretation::empty(),
        )
        .unwrap();
        assert!(layers.iter().all(|l| l.layer.is_empty() && l.verdict));
    }

    #[test]
    fn sequence_must_be_monotone() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let mut seq = prefix_sequence(&fx.universe);
        seq.reverse();
        let err = theorem2_decompose(
            &env,
            &seq,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions(),
            &full_answer_set(),
        )
        .unwrap_err();
        assert_eq!(err, EngineError::NonMonotoneSequence);
    }

    #[test]
    fn sequence_assembly_matches_oracle() {
        let (reg, fx) = fixture(2);
        let env = Env::new(&reg, fx.program.delta_t());
        let seq = prefix_sequence(&fx.universe);
        let assembled = theorem2_assemble(
            &env,
            &seq,
            fx.program.rules(),
            &fx.init,
            fx.universe.positions(),
        )
        .unwrap();
        let oracle_sets = brute_force_answer_sets(&env, &fx.program, &fx.init, 2).unwrap();
        assert_eq!(assembled, oracle_sets);
    }

    #[test]
    fn bottom_and_remainder_partition_rule_contributions() {
        // For every rule and constraint tuple over the universe, the
        // bottom and remainder parts split the rule's contributions by
        // membership in the splitting set: guarded stationary tuples land
        // on exactly one side, and the in-universe advancing outputs of a
        // tuple are the disjoint union of the two restricted maps.
        let reg = Registry::with_builtins();
        for seed in 0..30u64 {
            let inst =
                crate::corpus::generate_hybrid(seed, &crate::corpus::CorpusBounds::default());
            let env = Env::new(&reg, inst.program.delta_t());
            let universe =
                reachable_universe(&env, &inst.program, &inst.init, inst.horizon).unwrap();
            for u in prefix_sequence(&universe) {
                for rule in inst.program.rules() {
                    let split = split_rule(&env, &u, rule, universe.positions()).unwrap();
                    for tuple in rule
                        .constraint_set()
                        .enumerate(&env, universe.positions())
                        .unwrap()
                    {
                        match rule {
                            Rule::Advancing(r) => {
                                let within: BTreeSet<GeneralizedPosition> = r
                                    .adv
                                    .eval(&env, &tuple)
                                    .unwrap()
                                    .into_iter()
                                    .filter(|q| universe.positions().contains(q))
                                    .collect();
                                let empty = BTreeSet::new();
                                let inside = split.adv_bottom.get(&tuple).unwrap_or(&empty);
                                let outside = split.adv_rem.get(&tuple).unwrap_or(&empty);
                                assert!(inside.is_disjoint(outside));
                                let rebuilt: BTreeSet<GeneralizedPosition> =
                                    inside.union(outside).cloned().collect();
                                assert_eq!(rebuilt, within, "seed {seed}: outputs not partitioned");
                                assert!(inside.iter().all(|q| u.contains(&r.head, q)));
                                assert!(outside.iter().all(|q| !u.contains(&r.head, q)));
                            }
                            Rule::Stationary(r) => {
                                if !r.guard.eval(&env, &tuple).unwrap() {
                                    assert!(!split.cs_bottom.contains(&tuple));
                                    assert!(!split.cs_rem.contains(&tuple));
                                    continue;
                                }
                                let in_bottom = split.cs_bottom.contains(&tuple);
                                let in_rem = split.cs_rem.contains(&tuple);
                                assert!(in_bottom != in_rem, "seed {seed}: tuple on both sides");
                                assert_eq!(
                                    in_bottom,
                                    u.contains(&r.head, tuple.last().unwrap())
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}
