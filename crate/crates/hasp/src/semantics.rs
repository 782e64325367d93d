//! Stable-model semantics for hybrid programs: satisfaction with an initial
//! condition, inapplicability, the reduct, the one-step provability
//! operator, its least fixpoint, and the answer-set test.
//!
//! The reduct of a rule materializes its surviving constraint tuples (and,
//! for advancing rules, the surviving successor positions) as explicit
//! values, so reduct programs are self-contained and fixpoint iteration
//! never consults the registry. Since an interpretation and an initial
//! condition are finite, the tuple space `GP_I(M)^n` these operators range
//! over is finite as well.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::EngineError;
use crate::model::{Block, Fact, GeneralizedPosition, InitialCondition, Interpretation, Tuple};
use crate::registry::Env;
use crate::rules::{
    Advancer, AdvancingRule, BoolGuard, ConstraintSet, Rule, StationaryRule, TupleSet,
};

/// The positions an interpretation and an initial condition jointly mention
/// (`GP_I(M)`).
pub fn gp_with_initial(
    m: &Interpretation,
    init: &InitialCondition,
) -> BTreeSet<GeneralizedPosition> {
    let mut out = m.positions();
    out.extend(init.positions().iter().cloned());
    out
}

/// Block satisfaction at a position.
///
/// A block with a non-empty positive part holds when all its positive
/// literals and none of its default-negated literals hold at `p`. A block
/// with an empty positive part additionally requires `p` itself to be a
/// known position (`p` in `GP_I(M)`).
pub fn satisfies_block(
    m: &Interpretation,
    init: &InitialCondition,
    block: &Block,
    p: &GeneralizedPosition,
) -> bool {
    let negative_clear = block.negative().iter().all(|l| !m.holds(l, p));
    if block.positive().is_empty() {
        negative_clear && (init.contains(p) || m.mentions_position(p))
    } else {
        negative_clear && block.positive().iter().all(|l| m.holds(l, p))
    }
}

/// Satisfaction of a rule body: each block at its tuple position.
pub fn satisfies_body(
    m: &Interpretation,
    init: &InitialCondition,
    blocks: &[Block],
    tuple: &[GeneralizedPosition],
) -> bool {
    assert_eq!(blocks.len(), tuple.len(), "body/tuple length mismatch");
    blocks
        .iter()
        .zip(tuple.iter())
        .all(|(b, p)| satisfies_block(m, init, b, p))
}

fn negative_body_satisfied(
    m: &Interpretation,
    init: &InitialCondition,
    blocks: &[Block],
    tuple: &[GeneralizedPosition],
) -> bool {
    blocks
        .iter()
        .zip(tuple.iter())
        .all(|(b, p)| satisfies_block(m, init, &b.negative_part(), p))
}

/// The inapplicability test: the rule is inapplicable for `(M, I)` when
/// every constraint tuple over `GP_I(M)` fails — by a violated negative
/// block, by an advancing output disjoint from `GP_I(M)`, or by a false
/// boolean guard.
pub fn is_inapplicable(
    env: &Env,
    rule: &Rule,
    m: &Interpretation,
    init: &InitialCondition,
) -> Result<bool, EngineError> {
    let domain = gp_with_initial(m, init);
    for tuple in rule.constraint_set().enumerate(env, &domain)? {
        let negative_violated = !negative_body_satisfied(m, init, rule.blocks(), &tuple);
        let external_fails = match rule {
            Rule::Advancing(r) => {
                let out = r.adv.eval(env, &tuple)?;
                out.iter().all(|q| !domain.contains(q))
            }
            Rule::Stationary(r) => !r.guard.eval(env, &tuple)?,
        };
        if !negative_violated && !external_fails {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The reduct of one applicable rule: positive blocks only, with the
/// surviving tuples (and successor positions) materialized. Returns `None`
/// when the rule is inapplicable for `(M, I)`.
pub fn reduct_rule_applicable(
    env: &Env,
    rule: &Rule,
    m: &Interpretation,
    init: &InitialCondition,
) -> Result<Option<Rule>, EngineError> {
    let domain = gp_with_initial(m, init);
    let positive_blocks: Vec<Block> = rule.blocks().iter().map(Block::positive_part).collect();
    match rule {
        Rule::Advancing(r) => {
            let mut kept = BTreeSet::new();
            let mut successors: BTreeMap<Tuple, BTreeSet<GeneralizedPosition>> = BTreeMap::new();
            for tuple in r.cs.enumerate(env, &domain)? {
                if !negative_body_satisfied(m, init, &r.blocks, &tuple) {
                    continue;
                }
                let restricted: BTreeSet<GeneralizedPosition> = r
                    .adv
                    .eval(env, &tuple)?
                    .into_iter()
                    .filter(|q| domain.contains(q))
                    .collect();
                if restricted.is_empty() {
                    continue;
                }
                successors.insert(tuple.clone(), restricted);
                kept.insert(tuple);
            }
            if kept.is_empty() {
                return Ok(None);
            }
            Ok(Some(Rule::Advancing(AdvancingRule {
                head: r.head.clone(),
                blocks: positive_blocks,
                cs: ConstraintSet::Explicit(TupleSet::new(r.blocks.len(), kept)),
                adv: Advancer::Mapped(successors),
            })))
        }
        Rule::Stationary(r) => {
            let mut kept = BTreeSet::new();
            for tuple in r.cs.enumerate(env, &domain)? {
                if !negative_body_satisfied(m, init, &r.blocks, &tuple) {
                    continue;
                }
                if r.guard.eval(env, &tuple)? {
                    kept.insert(tuple);
                }
            }
            if kept.is_empty() {
                return Ok(None);
            }
            let tuples = TupleSet::new(r.blocks.len(), kept);
            Ok(Some(Rule::Stationary(StationaryRule {
                head: r.head.clone(),
                blocks: positive_blocks,
                cs: ConstraintSet::Explicit(tuples.clone()),
                guard: BoolGuard::Explicit(tuples),
            })))
        }
    }
}

/// The reduct of one rule; the rule must be applicable for `(M, I)`.
pub fn reduct_rule(
    env: &Env,
    rule: &Rule,
    m: &Interpretation,
    init: &InitialCondition,
) -> Result<Rule, EngineError> {
    reduct_rule_applicable(env, rule, m, init)?.ok_or_else(|| {
        EngineError::Registry(crate::registry::RegistryError::InvalidTuple(format!(
            "reduct_rule called on a rule inapplicable for (M, I): {rule}"
        )))
    })
}

/// The reduct of a program: inapplicable rules eliminated, the rest
/// replaced by their reducts. The result is a Horn hybrid program with all
/// constraint sets materialized.
pub fn reduct_program(
    env: &Env,
    rules: &[Rule],
    m: &Interpretation,
    init: &InitialCondition,
) -> Result<Vec<Rule>, EngineError> {
    let mut out = Vec::new();
    for rule in rules {
        if let Some(r) = reduct_rule_applicable(env, rule, m, init)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// One application of the provability operator: `M` plus every head fact a
/// rule derives from a constraint tuple over `GP_I(M)` whose body `M`
/// satisfies.
pub fn one_step(
    env: &Env,
    rules: &[Rule],
    init: &InitialCondition,
    m: &Interpretation,
) -> Result<Interpretation, EngineError> {
    let mut out = m.clone();
    let domain = gp_with_initial(m, init);
    for rule in rules {
        for tuple in rule.constraint_set().enumerate(env, &domain)? {
            if !satisfies_body(m, init, rule.blocks(), &tuple) {
                continue;
            }
            match rule {
                Rule::Stationary(r) => {
                    if r.guard.eval(env, &tuple)? {
                        out.insert(Fact::new(r.head.clone(), tuple.last().unwrap().clone()));
                    }
                }
                Rule::Advancing(r) => {
                    for q in r.adv.eval(env, &tuple)? {
                        out.insert(Fact::new(r.head.clone(), q));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn require_horn(rules: &[Rule], what: &'static str) -> Result<(), EngineError> {
    if rules.iter().all(Rule::is_horn) {
        Ok(())
    } else {
        Err(EngineError::NonHorn { what })
    }
}

/// The least fixpoint of the provability operator from the empty
/// interpretation. Errors on non-Horn input and when the iteration cap is
/// reached (possible for raw Horn programs whose advancing algorithms keep
/// producing fresh positions).
pub fn least_fixpoint(
    env: &Env,
    rules: &[Rule],
    init: &InitialCondition,
) -> Result<Interpretation, EngineError> {
    require_horn(rules, "least_fixpoint")?;
    let mut current = Interpretation::empty();
    for _ in 0..env.limits.max_fixpoint_iterations {
        let next = one_step(env, rules, init, &current)?;
        if next == current {
            return Ok(current);
        }
        current = next;
    }
    Err(EngineError::IterationCap {
        limit: env.limits.max_fixpoint_iterations,
    })
}

/// Whether the least fixpoint of `rules` equals `target`, aborting as soon
/// as a derived fact leaves `target` (the fixpoint only grows, so such a
/// run can never come back to equality).
fn least_fixpoint_equals(
    env: &Env,
    rules: &[Rule],
    init: &InitialCondition,
    target: &Interpretation,
) -> Result<bool, EngineError> {
    let mut current = Interpretation::empty();
    for _ in 0..env.limits.max_fixpoint_iterations {
        let next = one_step(env, rules, init, &current)?;
        if !next.is_subset(target) {
            return Ok(false);
        }
        if next == current {
            return Ok(&current == target);
        }
        current = next;
    }
    Err(EngineError::IterationCap {
        limit: env.limits.max_fixpoint_iterations,
    })
}

/// The answer-set test: `M` is consistent and equals the least fixpoint of
/// its own reduct.
pub fn is_answer_set(
    env: &Env,
    rules: &[Rule],
    init: &InitialCondition,
    m: &Interpretation,
) -> Result<bool, EngineError> {
    if !m.is_consistent() {
        return Ok(false);
    }
    let reduct = reduct_program(env, rules, m, init)?;
    least_fixpoint_equals(env, &reduct, init, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::worked_example;
    use crate::model::{lit, InitialCondition};
    use crate::rational::Rational;
    use crate::registry::{AdvancingRef, BooleanRef, ConstraintRef, Registry};
    use crate::rules::Program;

    fn p(step: u32) -> GeneralizedPosition {
        GeneralizedPosition::at_step(step)
    }

    fn fact(name: &str, step: u32) -> Fact {
        Fact::new(lit(name), p(step))
    }

    fn e1_answer_set() -> Interpretation {
        Interpretation::new([fact("a", 0), fact("b", 1), fact("c", 1)])
    }

    #[test]
    fn gp_with_initial_unions() {
        let j = InitialCondition::new([p(0)]);
        assert_eq!(gp_with_initial(&Interpretation::empty(), &j), [p(0)].into());
        let m = Interpretation::new([fact("a", 1)]);
        assert_eq!(gp_with_initial(&m, &j), [p(0), p(1)].into());
        let m0 = Interpretation::new([fact("a", 0)]);
        assert_eq!(gp_with_initial(&m0, &j), [p(0)].into());
    }

    #[test]
    fn block_satisfaction_cases() {
        let j = InitialCondition::new([p(0)]);
        let m = Interpretation::new([fact("a", 0)]);
        assert!(satisfies_block(&m, &j, &Block::new([lit("a")], []), &p(0)));

        // Empty block: holds exactly at known positions.
        let empty = Block::empty();
        assert!(satisfies_block(&Interpretation::empty(), &j, &empty, &p(0)));
        assert!(!satisfies_block(
            &Interpretation::empty(),
            &j,
            &empty,
            &p(1)
        ));

        // (b; not a) at step 1 under {(b,1)}: both clauses hold.
        let m = Interpretation::new([fact("b", 1)]);
        let block = Block::new([lit("b")], [lit("a")]);
        assert!(satisfies_block(&m, &j, &block, &p(1)));
        // ... and fails once (a,1) appears.
        let m = Interpretation::new([fact("b", 1), fact("a", 1)]);
        assert!(!satisfies_block(&m, &j, &block, &p(1)));
    }

    #[test]
    fn body_satisfaction_is_a_conjunction() {
        let j = InitialCondition::new([p(0)]);
        assert!(satisfies_body(
            &Interpretation::empty(),
            &j,
            &[Block::empty()],
            &[p(0)]
        ));
        let m = Interpretation::new([fact("a", 0)]);
        let blocks = [Block::new([lit("a")], []), Block::new([lit("b")], [])];
        assert!(!satisfies_body(&m, &j, &blocks, &[p(0), p(1)]));
    }

    fn env_for<'r>(reg: &'r Registry, prog: &Program) -> Env<'r> {
        Env::new(reg, prog.delta_t())
    }

    #[test]
    fn inapplicability_cases() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);

        // A constraint set with no tuples over GP_I(M) is vacuously
        // inapplicable.
        let far = Rule::Stationary(crate::rules::StationaryRule {
            head: lit("x"),
            blocks: vec![Block::empty()],
            cs: ConstraintSet::Named(ConstraintRef::new(
                "time_eq",
                [crate::registry::AlgArg::int(5)],
            )),
            guard: BoolGuard::Named(BooleanRef::plain("true")),
        });
        let m = Interpretation::new([fact("a", 0), fact("b", 1)]);
        assert!(is_inapplicable(&env, &far, &m, &j).unwrap());

        // The advancing rule of the worked example is applicable under its
        // answer set.
        let m = e1_answer_set();
        assert!(!is_inapplicable(&env, &prog.rules()[1], &m, &j).unwrap());

        // A stationary rule guarded by `false` is always inapplicable.
        let blocked = Rule::Stationary(crate::rules::StationaryRule {
            head: lit("x"),
            blocks: vec![Block::empty()],
            cs: ConstraintSet::Named(ConstraintRef::plain("any1")),
            guard: BoolGuard::Named(BooleanRef::plain("false")),
        });
        assert!(is_inapplicable(&env, &blocked, &m, &j).unwrap());
    }

    #[test]
    fn inapplicability_agrees_with_reduct_absence() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);
        for m in [
            Interpretation::empty(),
            Interpretation::new([fact("a", 0)]),
            Interpretation::new([fact("a", 0), fact("b", 1)]),
            e1_answer_set(),
        ] {
            for rule in prog.rules() {
                assert_eq!(
                    is_inapplicable(&env, rule, &m, &j).unwrap(),
                    reduct_rule_applicable(&env, rule, &m, &j)
                        .unwrap()
                        .is_none(),
                    "rule {rule} disagrees under {m}"
                );
            }
        }
    }

    #[test]
    fn reduct_of_worked_example_under_its_answer_set() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);
        let m = e1_answer_set();

        // r2: head kept, tuple set {(0)}, successors (0) -> {1}.
        let r2 = reduct_rule(&env, &prog.rules()[1], &m, &j).unwrap();
        match &r2 {
            Rule::Advancing(r) => {
                assert_eq!(r.head, lit("b"));
                assert_eq!(
                    r.cs,
                    ConstraintSet::Explicit(TupleSet::new(1, [vec![p(0)]]))
                );
                assert_eq!(
                    r.adv,
                    Advancer::Mapped([(vec![p(0)], BTreeSet::from([p(1)]))].into())
                );
            }
            _ => panic!("expected advancing reduct"),
        }

        // r3: the tuple (0) is excluded because (a,0) violates `not a`;
        // only (1) survives.
        let r3 = reduct_rule(&env, &prog.rules()[2], &m, &j).unwrap();
        match &r3 {
            Rule::Stationary(r) => {
                assert_eq!(r.head, lit("c"));
                assert_eq!(r.blocks, vec![Block::new([lit("b")], [])]);
                assert_eq!(
                    r.cs,
                    ConstraintSet::Explicit(TupleSet::new(1, [vec![p(1)]]))
                );
            }
            _ => panic!("expected stationary reduct"),
        }
    }

    #[test]
    fn reduct_program_cases() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);

        // All three rules survive under the answer set.
        let reduct = reduct_program(&env, prog.rules(), &e1_answer_set(), &j).unwrap();
        assert_eq!(reduct.len(), 3);

        // A Horn program's applicable rules reduce one-for-one.
        let horn = Program::new(
            vec![prog.rules()[0].clone(), prog.rules()[1].clone()],
            Rational::ONE,
        );
        let m = Interpretation::new([fact("a", 0), fact("b", 1)]);
        let reduct = reduct_program(&env, horn.rules(), &m, &j).unwrap();
        assert_eq!(reduct.len(), 2);

        // Under the empty interpretation the advancing rule is inapplicable
        // (its successor is unknown), the `c` rule derives nothing yet the
        // tuple (0) survives via its negative body.
        let reduct = reduct_program(&env, prog.rules(), &Interpretation::empty(), &j).unwrap();
        assert_eq!(reduct.len(), 2);
    }

    #[test]
    fn one_step_walks_the_worked_example() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);
        let m = e1_answer_set();
        let reduct = reduct_program(&env, prog.rules(), &m, &j).unwrap();

        // No rules: identity.
        assert_eq!(
            one_step(&env, &[], &j, &Interpretation::empty()).unwrap(),
            Interpretation::empty()
        );

        let step1 = one_step(&env, &reduct, &j, &Interpretation::empty()).unwrap();
        assert_eq!(step1, Interpretation::new([fact("a", 0)]));

        let step2 = one_step(&env, &reduct, &j, &step1).unwrap();
        assert_eq!(step2, Interpretation::new([fact("a", 0), fact("b", 1)]));

        let step3 = one_step(&env, &reduct, &j, &step2).unwrap();
        assert_eq!(step3, m);
        assert_eq!(one_step(&env, &reduct, &j, &step3).unwrap(), m);
    }

    #[test]
    fn one_step_is_inflationary() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);
        let reduct = reduct_program(&env, prog.rules(), &e1_answer_set(), &j).unwrap();
        for m in [
            Interpretation::empty(),
            Interpretation::new([fact("b", 1)]),
            e1_answer_set(),
        ] {
            assert!(m.is_subset(&one_step(&env, &reduct, &j, &m).unwrap()));
        }
    }

    #[test]
    fn least_fixpoint_cases() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);

        assert_eq!(
            least_fixpoint(&env, &[], &j).unwrap(),
            Interpretation::empty()
        );

        let m = e1_answer_set();
        let reduct = reduct_program(&env, prog.rules(), &m, &j).unwrap();
        assert_eq!(least_fixpoint(&env, &reduct, &j).unwrap(), m);

        // `a :- a : any1, tick` never seeds its own body: the reduct under
        // the empty interpretation is empty, so the fixpoint is too.
        let self_feeding = Rule::Advancing(crate::rules::AdvancingRule {
            head: lit("a"),
            blocks: vec![Block::new([lit("a")], [])],
            cs: ConstraintSet::Named(ConstraintRef::plain("any1")),
            adv: Advancer::Named(AdvancingRef::plain("tick")),
        });
        let reduct = reduct_program(&env, &[self_feeding], &Interpretation::empty(), &j).unwrap();
        assert!(reduct.is_empty());
        assert_eq!(
            least_fixpoint(&env, &reduct, &j).unwrap(),
            Interpretation::empty()
        );
    }

    #[test]
    fn least_fixpoint_rejects_non_horn() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);
        let err = least_fixpoint(&env, prog.rules(), &j).unwrap_err();
        assert!(matches!(err, EngineError::NonHorn { .. }));
    }

    #[test]
    fn least_fixpoint_caps_runaway_programs() {
        let reg = Registry::with_builtins();
        let j = InitialCondition::new([p(0)]);
        let mut env = Env::new(&reg, Rational::ONE);
        env.limits.max_fixpoint_iterations = 8;
        // Horn and applicable forever: every step mints a new position.
        let runaway = Rule::Advancing(crate::rules::AdvancingRule {
            head: lit("a"),
            blocks: vec![Block::empty()],
            cs: ConstraintSet::Named(ConstraintRef::plain("any1")),
            adv: Advancer::Named(AdvancingRef::plain("tick")),
        });
        let err = least_fixpoint(&env, &[runaway], &j).unwrap_err();
        assert!(matches!(err, EngineError::IterationCap { limit: 8 }));
    }

    #[test]
    fn answer_set_test_on_worked_example() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);

        assert!(is_answer_set(&env, &[], &j, &Interpretation::empty()).unwrap());
        assert!(is_answer_set(&env, prog.rules(), &j, &e1_answer_set()).unwrap());

        // {(a,0)} is stable too: with its successor position unknown, the
        // advancing rule is inapplicable, so nothing forces (b,1).
        let small = Interpretation::new([fact("a", 0)]);
        assert!(is_answer_set(&env, prog.rules(), &j, &small).unwrap());

        // Dropping c from the full set is not stable: the stationary rule
        // fires at step 1 and overshoots.
        let partial = Interpretation::new([fact("a", 0), fact("b", 1)]);
        assert!(!is_answer_set(&env, prog.rules(), &j, &partial).unwrap());

        // The empty set is not stable: the initial stationary rule fires.
        assert!(!is_answer_set(&env, prog.rules(), &j, &Interpretation::empty()).unwrap());

        // Inconsistent sets are never answer sets.
        let inconsistent =
            Interpretation::new([fact("a", 0), Fact::new(crate::model::neg_lit("a"), p(0))]);
        assert!(!is_answer_set(&env, prog.rules(), &j, &inconsistent).unwrap());
    }

    #[test]
    fn answer_set_test_matches_plain_fixpoint_composition() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);
        for m in [
            Interpretation::empty(),
            Interpretation::new([fact("a", 0)]),
            Interpretation::new([fact("a", 0), fact("b", 1)]),
            Interpretation::new([fact("b", 1), fact("c", 1)]),
            e1_answer_set(),
        ] {
            let reduct = reduct_program(&env, prog.rules(), &m, &j).unwrap();
            let naive = m.is_consistent() && least_fixpoint(&env, &reduct, &j).unwrap() == m;
            assert_eq!(
                is_answer_set(&env, prog.rules(), &j, &m).unwrap(),
                naive,
                "divergence on {m}"
            );
        }
    }

    #[test]
    fn reduct_never_derives_outside_known_positions() {
        let reg = Registry::with_builtins();
        let (prog, j) = worked_example();
        let env = env_for(&reg, &prog);
        for m in [
            Interpretation::empty(),
            Interpretation::new([fact("a", 0)]),
            Interpretation::new([fact("a", 0), fact("b", 1), fact("b", 2)]),
            e1_answer_set(),
        ] {
            let reduct = reduct_program(&env, prog.rules(), &m, &j).unwrap();
            let fixpoint = least_fixpoint(&env, &reduct, &j).unwrap();
            let allowed = gp_with_initial(&m, &j);
            assert!(fixpoint.positions().is_subset(&allowed));
        }
    }
}
