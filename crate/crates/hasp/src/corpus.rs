//! Deterministic instance generation for differential testing and
//! benchmarks, plus the three-rule worked example used throughout the test
//! suites.

use crate::model::{Block, GeneralizedPosition, InitialCondition, Literal, ParamValue};
use crate::rational::Rational;
use crate::registry::{AdvancingRef, AlgArg, BooleanRef, ConstraintRef};
use crate::rules::{
    Advancer, AdvancingRule, BoolGuard, ConstraintSet, Program, Rule, StationaryRule,
};

/// SplitMix64: a tiny, fully deterministic PRNG. Good enough for corpus
/// generation and seeded selectors, with no dependency drift.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound` (bound must be nonzero).
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn chance(&mut self, numer: u32, denom: u32) -> bool {
        (self.next_u64() % denom as u64) < numer as u64
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

/// The worked three-rule example: an initial fact, an advancing step, and a
/// stationary rule guarded by default negation.
///
/// ```text
/// a :- : cs time_eq(0), bool true.
/// b :- a : cs any1, adv tick.
/// c :- b, not a : cs any1, bool true.
/// ```
///
/// with the single initial position at step 0.
pub fn worked_example() -> (Program, InitialCondition) {
    let r1 = Rule::Stationary(StationaryRule {
        head: crate::model::lit("a"),
        blocks: vec![Block::empty()],
        cs: ConstraintSet::Named(ConstraintRef::new("time_eq", [AlgArg::int(0)])),
        guard: BoolGuard::Named(BooleanRef::plain("true")),
    });
    let r2 = Rule::Advancing(AdvancingRule {
        head: crate::model::lit("b"),
        blocks: vec![Block::new([crate::model::lit("a")], [])],
        cs: ConstraintSet::Named(ConstraintRef::plain("any1")),
        adv: Advancer::Named(AdvancingRef::plain("tick")),
    });
    let r3 = Rule::Stationary(StationaryRule {
        head: crate::model::lit("c"),
        blocks: vec![Block::new(
            [crate::model::lit("b")],
            [crate::model::lit("a")],
        )],
        cs: ConstraintSet::Named(ConstraintRef::plain("any1")),
        guard: BoolGuard::Named(BooleanRef::plain("true")),
    });
    let program = Program::new([r1, r2, r3], Rational::ONE);
    let init = InitialCondition::new([GeneralizedPosition::at_step(0)]);
    (program, init)
}

/// A generated discrete-time instance.
#[derive(Clone, Debug)]
pub struct HybridInstance {
    pub program: Program,
    pub init: InitialCondition,
    pub horizon: u32,
}

/// Bounds the generator keeps every instance inside.
#[derive(Clone, Copy, Debug)]
pub struct CorpusBounds {
    pub max_atoms: usize,
    pub max_rules: usize,
    pub max_arity: usize,
    pub max_horizon: u32,
    pub max_positions: usize,
    /// Cap on the brute-force enumeration base, so the oracle stays fast.
    pub max_derivable_facts: usize,
}

impl Default for CorpusBounds {
    fn default() -> Self {
        CorpusBounds {
            max_atoms: 3,
            max_rules: 5,
            max_arity: 2,
            max_horizon: 3,
            max_positions: 12,
            max_derivable_facts: 13,
        }
    }
}

const ATOM_NAMES: [&str; 3] = ["a", "b", "c"];

fn random_literal(rng: &mut SplitMix64, atoms: &[&str]) -> Literal {
    let atom = crate::model::Atom::new(*rng.pick(atoms));
    if rng.chance(1, 6) {
        Literal::negative(atom)
    } else {
        Literal::positive(atom)
    }
}

fn random_block(rng: &mut SplitMix64, atoms: &[&str]) -> Block {
    let mut block = Block::empty();
    for _ in 0..rng.below(3) {
        let l = random_literal(rng, atoms);
        if rng.chance(1, 2) {
            block.push_negative(l);
        } else {
            block.push_positive(l);
        }
    }
    block
}

fn random_constraint(rng: &mut SplitMix64, arity: usize, max_horizon: u32) -> ConstraintRef {
    if arity == 1 {
        if rng.chance(1, 2) {
            ConstraintRef::plain("any1")
        } else {
            ConstraintRef::new(
                "time_eq",
                [AlgArg::int(rng.below(max_horizon as usize) as i64)],
            )
        }
    } else {
        match rng.below(3) {
            0 => ConstraintRef::plain("any2"),
            1 => ConstraintRef::plain("consecutive2"),
            _ => {
                let k1 = rng.below(max_horizon as usize) as i64;
                let k2 = k1 + 1 + rng.below(2) as i64;
                ConstraintRef::new("window", [AlgArg::int(k1), AlgArg::int(k2)])
            }
        }
    }
}

fn random_advancer(rng: &mut SplitMix64, with_params: bool) -> AdvancingRef {
    if !with_params || rng.chance(3, 5) {
        return AdvancingRef::plain("tick");
    }
    match rng.below(3) {
        0 => AdvancingRef::new(
            "set_param",
            [
                AlgArg::symbol("level"),
                AlgArg::Value(ParamValue::int(rng.below(3) as i64)),
            ],
        ),
        1 => {
            let v1 = rng.below(3) as i64;
            let v2 = v1 + 1 + rng.below(2) as i64;
            AdvancingRef::new(
                "fanout",
                [
                    AlgArg::symbol("level"),
                    AlgArg::Set(vec![ParamValue::int(v1), ParamValue::int(v2)]),
                ],
            )
        }
        _ => AdvancingRef::new(
            "euler",
            [
                AlgArg::Value(ParamValue::rational(1, 2)),
                AlgArg::symbol("level"),
            ],
        ),
    }
}

fn random_guard(rng: &mut SplitMix64, with_params: bool, max_horizon: u32) -> BooleanRef {
    match rng.below(20) {
        0 => BooleanRef::plain("false"),
        1..=3 => BooleanRef::new(
            "step_eq",
            [AlgArg::int(rng.below(max_horizon as usize + 1) as i64)],
        ),
        4..=7 if with_params => {
            let name = *rng.pick(&["param_ge", "param_le", "param_eq"]);
            BooleanRef::new(
                name,
                [
                    AlgArg::symbol("level"),
                    AlgArg::Value(ParamValue::int(rng.below(4) as i64)),
                ],
            )
        }
        _ => BooleanRef::plain("true"),
    }
}

fn candidate_instance(rng: &mut SplitMix64, bounds: &CorpusBounds) -> HybridInstance {
    let atom_count = 1 + rng.below(bounds.max_atoms);
    let atoms: Vec<&str> = ATOM_NAMES[..atom_count].to_vec();
    let with_params = rng.chance(1, 3);
    let delta_t = if rng.chance(1, 4) {
        Rational::new(1, 2)
    } else {
        Rational::ONE
    };
    let horizon = 1 + rng.below(bounds.max_horizon as usize) as u32;

    let rule_count = 1 + rng.below(bounds.max_rules);
    let mut rules = Vec::with_capacity(rule_count);
    for _ in 0..rule_count {
        let head = random_literal(rng, &atoms);
        let arity = if bounds.max_arity >= 2 && rng.chance(1, 4) {
            2
        } else {
            1
        };
        let blocks: Vec<Block> = (0..arity).map(|_| random_block(rng, &atoms)).collect();
        let cs = ConstraintSet::Named(random_constraint(rng, arity, bounds.max_horizon));
        rules.push(if rng.chance(2, 5) {
            Rule::Advancing(AdvancingRule {
                head,
                blocks,
                cs,
                adv: Advancer::Named(random_advancer(rng, with_params)),
            })
        } else {
            Rule::Stationary(StationaryRule {
                head,
                blocks,
                cs,
                guard: BoolGuard::Named(random_guard(rng, with_params, bounds.max_horizon)),
            })
        });
    }

    let mut positions = vec![if with_params {
        GeneralizedPosition::new(
            0,
            [("level".to_string(), ParamValue::int(rng.below(3) as i64))],
        )
    } else {
        GeneralizedPosition::at_step(0)
    }];
    if with_params && rng.chance(1, 4) {
        positions.push(GeneralizedPosition::new(
            0,
            [(
                "level".to_string(),
                ParamValue::int(3 + rng.below(2) as i64),
            )],
        ));
    }

    HybridInstance {
        program: Program::new(rules, delta_t),
        init: InitialCondition::new(positions),
        horizon,
    }
}

/// Generates a random discrete-time instance within the bounds: small atom
/// and rule counts, built-in algorithms only, initial positions at step 0,
/// and a reachable universe small enough for exhaustive checking. Fully
/// deterministic in the seed.
pub fn generate_hybrid(seed: u64, bounds: &CorpusBounds) -> HybridInstance {
    let mut rng = SplitMix64::new(seed);
    let registry = crate::registry::Registry::with_builtins();
    loop {
        let instance = candidate_instance(&mut rng, bounds);
        let mut env = crate::registry::Env::new(&registry, instance.program.delta_t());
        env.limits.max_positions = bounds.max_positions;
        let Ok(universe) = crate::oracle::reachable_universe(
            &env,
            &instance.program,
            &instance.init,
            instance.horizon,
        ) else {
            continue;
        };
        let Ok(base) =
            crate::oracle::derivable_facts(&env, instance.program.rules(), universe.positions())
        else {
            continue;
        };
        if base.len() > bounds.max_derivable_facts {
            continue;
        }
        return instance;
    }
}

/// Generates a stationary-only, negation-free instance over positive
/// atoms: the fragment whose answer set is unique.
pub fn generate_stationary_horn(seed: u64) -> HybridInstance {
    let mut rng = SplitMix64::new(seed);
    let atom_count = 1 + rng.below(3);
    let atoms: Vec<&str> = ATOM_NAMES[..atom_count].to_vec();
    let rule_count = 1 + rng.below(5);
    let mut rules = Vec::with_capacity(rule_count);
    for _ in 0..rule_count {
        let head = Literal::positive(crate::model::Atom::new(*rng.pick(&atoms)));
        let arity = if rng.chance(1, 4) { 2 } else { 1 };
        let blocks: Vec<Block> = (0..arity)
            .map(|_| {
                let mut b = Block::empty();
                for _ in 0..rng.below(3) {
                    b.push_positive(Literal::positive(crate::model::Atom::new(
                        *rng.pick(&atoms),
                    )));
                }
                b
            })
            .collect();
        let cs = ConstraintSet::Named(random_constraint(&mut rng, arity, 2));
        rules.push(Rule::Stationary(StationaryRule {
            head,
            blocks,
            cs,
            guard: BoolGuard::Named(random_guard(&mut rng, false, 2)),
        }));
    }
    let init = InitialCondition::new([
        GeneralizedPosition::at_step(0),
        GeneralizedPosition::at_step(1 + rng.below(2) as u32),
    ]);
    HybridInstance {
        program: Program::new(rules, Rational::ONE),
        init,
        horizon: 3,
    }
}

/// Generates a random ground normal program over up to four atoms.
pub fn generate_normal(seed: u64) -> crate::asp::NormalProgram {
    let mut rng = SplitMix64::new(seed);
    let names = ["a", "b", "c", "d"];
    let atoms: Vec<&str> = names[..1 + rng.below(4)].to_vec();
    let rule_count = 1 + rng.below(6);
    let rules = (0..rule_count).map(|_| {
        let head = random_literal(&mut rng, &atoms);
        let mut body = Block::empty();
        for _ in 0..rng.below(4) {
            let l = random_literal(&mut rng, &atoms);
            if rng.chance(1, 2) {
                body.push_negative(l);
            } else {
                body.push_positive(l);
            }
        }
        crate::asp::NormalRule::new(head, body)
    });
    let rules: Vec<_> = rules.collect();
    crate::asp::NormalProgram::new(rules)
}

/// Embeds a classical normal program as arity-1 stationary rules pinned to
/// time step 0, paired with the single initial position at step 0.
pub fn embed_normal(program: &crate::asp::NormalProgram) -> (Program, InitialCondition) {
    let rules = program.rules().iter().map(|r| {
        Rule::Stationary(StationaryRule {
            head: r.head.clone(),
            blocks: vec![r.body.clone()],
            cs: ConstraintSet::Named(ConstraintRef::new("time_eq", [AlgArg::int(0)])),
            guard: BoolGuard::Named(BooleanRef::plain("true")),
        })
    });
    let rules: Vec<_> = rules.collect();
    (
        Program::new(rules, Rational::ONE),
        InitialCondition::new([GeneralizedPosition::at_step(0)]),
    )
}
