//! Brute-force answer-set enumeration over a finite reachable universe.
//!
//! This module is the ground truth the theorem checks compare against, and
//! it is deliberately exponential: every candidate subset is pushed through
//! the full answer-set test. Two observations keep it tractable at desk
//! scale without losing any answer set. First, the reduct can only derive
//! positions in `GP_I(M)`, so facts at positions outside the advancing
//! closure of the initial condition are never derivable and candidates can
//! be drawn from reachable positions only. Second, every fact of a stable
//! model is put there by a rule, so its literal is some rule head and its
//! position one that rule can reach; enumeration therefore ranges over the
//! per-rule derivable facts rather than all of `Lit x S`.

use std::collections::BTreeSet;

use crate::error::EngineError;
use crate::exec;
use crate::model::{Fact, GeneralizedPosition, InitialCondition, Interpretation, Literal};
use crate::registry::Env;
use crate::rules::{Program, Rule};
use crate::semantics;

/// A finite slice of the universe: the positions reachable from the initial
/// condition within a horizon, and all literals over the program's atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteUniverse {
    positions: BTreeSet<GeneralizedPosition>,
    literals: BTreeSet<Literal>,
    horizon: u32,
}

impl FiniteUniverse {
    pub fn positions(&self) -> &BTreeSet<GeneralizedPosition> {
        &self.positions
    }

    pub fn literals(&self) -> &BTreeSet<Literal> {
        &self.literals
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// All (literal, position) pairs of the universe.
    pub fn facts(&self) -> impl Iterator<Item = Fact> + '_ {
        self.positions.iter().flat_map(move |p| {
            self.literals
                .iter()
                .map(move |l| Fact::new(l.clone(), p.clone()))
        })
    }

    pub fn fact_count(&self) -> usize {
        self.positions.len() * self.literals.len()
    }
}

/// Closes the initial positions under every advancing algorithm of the
/// program over every constraint-valid tuple, truncating at `horizon`.
pub fn reachable_universe(
    env: &Env,
    program: &Program,
    init: &InitialCondition,
    horizon: u32,
) -> Result<FiniteUniverse, EngineError> {
    let mut positions: BTreeSet<GeneralizedPosition> = init
        .positions()
        .iter()
        .filter(|p| p.step() <= horizon)
        .cloned()
        .collect();
    loop {
        let mut fresh: BTreeSet<GeneralizedPosition> = BTreeSet::new();
        for rule in program.rules() {
            let Rule::Advancing(r) = rule else { continue };
            for tuple in r.cs.enumerate(env, &positions)? {
                for q in r.adv.eval(env, &tuple)? {
                    if q.step() <= horizon && !positions.contains(&q) {
                        fresh.insert(q);
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        positions.extend(fresh);
        if positions.len() > env.limits.max_positions {
            return Err(EngineError::GuardExceeded {
                what: "reachable position closure",
                size: positions.len(),
                limit: env.limits.max_positions,
            });
        }
    }
    Ok(FiniteUniverse {
        positions,
        literals: program.literal_universe(),
        horizon,
    })
}

/// The facts some rule can derive over the universe positions: head
/// literals at advancing outputs, or at the last position of a guarded
/// constraint tuple. Every answer set is a subset of this.
pub fn derivable_facts(
    env: &Env,
    rules: &[Rule],
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<BTreeSet<Fact>, EngineError> {
    let mut out = BTreeSet::new();
    for rule in rules {
        match rule {
            Rule::Advancing(r) => {
                for tuple in r.cs.enumerate(env, universe_positions)? {
                    for q in r.adv.eval(env, &tuple)? {
                        if universe_positions.contains(&q) {
                            out.insert(Fact::new(r.head.clone(), q));
                        }
                    }
                }
            }
            Rule::Stationary(r) => {
                for tuple in r.cs.enumerate(env, universe_positions)? {
                    if r.guard.eval(env, &tuple)? {
                        out.insert(Fact::new(r.head.clone(), tuple.last().unwrap().clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// All answer sets of `rules` with the given initial condition, by
/// exhaustive enumeration over the derivable facts of the universe.
/// Results are ordered by size, then lexicographically.
pub fn answer_sets_over(
    env: &Env,
    rules: &[Rule],
    init: &InitialCondition,
    universe_positions: &BTreeSet<GeneralizedPosition>,
) -> Result<Vec<Interpretation>, EngineError> {
    let base: Vec<Fact> = derivable_facts(env, rules, universe_positions)?
        .into_iter()
        .collect();
    if base.len() > env.limits.max_enum_facts.min(62) {
        return Err(EngineError::GuardExceeded {
            what: "brute-force enumeration base",
            size: base.len(),
            limit: env.limits.max_enum_facts.min(62),
        });
    }
    let mut found = exec::try_filter_map_range(1u64 << base.len(), |mask| {
        let candidate: Interpretation = base
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, f)| f.clone())
            .collect();
        if !candidate.is_consistent() {
            return Ok::<_, EngineError>(None);
        }
        Ok(semantics::is_answer_set(env, rules, init, &candidate)?.then_some(candidate))
    })?;
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found)
}

/// All answer sets of the program over its reachable universe at `horizon`.
pub fn brute_force_answer_sets(
    env: &Env,
    program: &Program,
    init: &InitialCondition,
    horizon: u32,
) -> Result<Vec<Interpretation>, EngineError> {
    let universe = reachable_universe(env, program, init, horizon)?;
    answer_sets_over(env, program.rules(), init, universe.positions())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::worked_example;
    use crate::model::{lit, Block};
    use crate::rational::Rational;
    use crate::registry::{BooleanRef, ConstraintRef, Registry};
    use crate::rules::{BoolGuard, ConstraintSet, StationaryRule};

    fn p(step: u32) -> GeneralizedPosition {
        GeneralizedPosition::at_step(step)
    }

    fn fact(name: &str, step: u32) -> Fact {
        Fact::new(lit(name), p(step))
    }

    #[test]
    fn closure_of_worked_example() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = Env::new(&reg, prog.delta_t());
        let uni = reachable_universe(&env, &prog, &j, 2).unwrap();
        assert_eq!(uni.positions(), &[p(0), p(1), p(2)].into());
        assert_eq!(uni.literals().len(), 6);
        assert_eq!(uni.fact_count(), 18);
    }

    #[test]
    fn closure_without_advancing_rules_is_the_initial_condition() {
        let reg = Registry::with_builtins();
        let stationary_only = Program::new(
            [Rule::Stationary(StationaryRule {
                head: lit("a"),
                blocks: vec![Block::empty()],
                cs: ConstraintSet::Named(ConstraintRef::plain("any1")),
                guard: BoolGuard::Named(BooleanRef::plain("true")),
            })],
            Rational::ONE,
        );
        let env = Env::new(&reg, Rational::ONE);
        let j = InitialCondition::new([p(0), p(2)]);
        let uni = reachable_universe(&env, &stationary_only, &j, 5).unwrap();
        assert_eq!(uni.positions(), j.positions());
    }

    #[test]
    fn closure_truncates_at_horizon_zero() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = Env::new(&reg, prog.delta_t());
        let uni = reachable_universe(&env, &prog, &j, 0).unwrap();
        assert_eq!(uni.positions(), &[p(0)].into());
    }

    #[test]
    fn closure_guard_fails_loudly() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let mut env = Env::new(&reg, prog.delta_t());
        env.limits.max_positions = 2;
        let err = reachable_universe(&env, &prog, &j, 5).unwrap_err();
        assert!(matches!(
            err,
            EngineError::GuardExceeded {
                what: "reachable position closure",
                ..
            }
        ));
    }

    #[test]
    fn worked_example_has_exactly_two_answer_sets() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = Env::new(&reg, prog.delta_t());
        let sets = brute_force_answer_sets(&env, &prog, &j, 3).unwrap();
        // The initial fact alone is stable (its successor position is
        // unexplored), and so is the fully expanded run.
        assert_eq!(
            sets,
            vec![
                Interpretation::new([fact("a", 0)]),
                Interpretation::new([fact("a", 0), fact("b", 1), fact("c", 1)]),
            ]
        );
    }

    #[test]
    fn empty_program_has_the_empty_answer_set() {
        let reg = Registry::with_builtins();
        let env = Env::new(&reg, Rational::ONE);
        let j = InitialCondition::new([p(0)]);
        let sets = brute_force_answer_sets(&env, &Program::empty(), &j, 3).unwrap();
        assert_eq!(sets, vec![Interpretation::empty()]);
    }

    #[test]
    fn odd_loop_has_no_answer_sets() {
        // a :- not a : any1, true  at the single initial position.
        let reg = Registry::with_builtins();
        let odd = Program::new(
            [Rule::Stationary(StationaryRule {
                head: lit("a"),
                blocks: vec![Block::new([], [lit("a")])],
                cs: ConstraintSet::Named(ConstraintRef::plain("any1")),
                guard: BoolGuard::Named(BooleanRef::plain("true")),
            })],
            Rational::ONE,
        );
        let env = Env::new(&reg, Rational::ONE);
        let j = InitialCondition::new([p(0)]);
        let sets = brute_force_answer_sets(&env, &odd, &j, 3).unwrap();
        assert!(sets.is_empty());
    }

    #[test]
    fn enumeration_guard_reports_sizes() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let mut env = Env::new(&reg, prog.delta_t());
        env.limits.max_enum_facts = 3;
        let err = brute_force_answer_sets(&env, &prog, &j, 3).unwrap_err();
        match err {
            EngineError::GuardExceeded { what, size, limit } => {
                assert_eq!(what, "brute-force enumeration base");
                assert!(size > limit);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn returned_sets_are_consistent_and_within_reach() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = Env::new(&reg, prog.delta_t());
        let uni = reachable_universe(&env, &prog, &j, 3).unwrap();
        for m in brute_force_answer_sets(&env, &prog, &j, 3).unwrap() {
            assert!(m.is_consistent());
            assert!(m.positions().is_subset(uni.positions()));
        }
    }
}
