//! Classical ground answer set programming: normal rules, the reduct, Horn
//! least models, the stable-model test, and exhaustive enumeration.
//!
//! The incremental solver reduces each time layer to one classical program
//! per position, and the regression suite checks hybrid results against
//! this module on embedded classical instances. Enumeration is exhaustive
//! over subsets — this is a semantics reference, not a competitive solver —
//! with a guard on the universe size.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::EngineError;
use crate::exec;
use crate::model::{Block, Literal};

/// A normal rule `head :- body`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct NormalRule {
    pub head: Literal,
    pub body: Block,
}

impl NormalRule {
    pub fn new(head: Literal, body: Block) -> Self {
        NormalRule { head, body }
    }

    pub fn fact(head: Literal) -> Self {
        NormalRule {
            head,
            body: Block::empty(),
        }
    }

    pub fn is_horn(&self) -> bool {
        self.body.negative().is_empty()
    }
}

impl fmt::Display for NormalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.body.is_empty() {
            write!(f, "{} :- .", self.head)
        } else {
            write!(f, "{} :- {}.", self.head, self.body)
        }
    }
}

/// A normal program together with its literal universe. The universe always
/// covers every literal occurring in a rule; a larger universe may be
/// declared for enumeration purposes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalProgram {
    rules: Vec<NormalRule>,
    universe: BTreeSet<Literal>,
}

impl NormalProgram {
    /// Builds a program whose universe is exactly the literals occurring in
    /// the rules.
    pub fn new(rules: impl IntoIterator<Item = NormalRule>) -> Self {
        let mut seen: Vec<NormalRule> = Vec::new();
        for r in rules {
            if !seen.contains(&r) {
                seen.push(r);
            }
        }
        let universe = seen
            .iter()
            .flat_map(|r| r.body.literals().into_iter().chain([r.head.clone()]))
            .collect();
        NormalProgram {
            rules: seen,
            universe,
        }
    }

    /// Widens the universe to include `extra` literals.
    pub fn with_universe(mut self, extra: impl IntoIterator<Item = Literal>) -> Self {
        self.universe.extend(extra);
        self
    }

    pub fn rules(&self) -> &[NormalRule] {
        &self.rules
    }

    pub fn universe(&self) -> &BTreeSet<Literal> {
        &self.universe
    }

    pub fn is_horn(&self) -> bool {
        self.rules.iter().all(NormalRule::is_horn)
    }
}

impl fmt::Display for NormalProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Classical block satisfaction: all positive members in `M`, no negative
/// member in `M`.
pub fn satisfies(m: &BTreeSet<Literal>, block: &Block) -> bool {
    block.positive().iter().all(|l| m.contains(l))
        && block.negative().iter().all(|l| !m.contains(l))
}

/// The Gelfond-Lifschitz reduct: rules whose negative body intersects `M`
/// are dropped, the rest lose their negative parts.
pub fn gl_reduct(program: &NormalProgram, m: &BTreeSet<Literal>) -> NormalProgram {
    let rules = program
        .rules
        .iter()
        .filter(|r| r.body.negative().iter().all(|l| !m.contains(l)))
        .map(|r| NormalRule::new(r.head.clone(), r.body.positive_part()));
    NormalProgram::new(rules).with_universe(program.universe.iter().cloned())
}

/// The least model of a Horn program, by iterating the one-step provability
/// operator from the empty set.
pub fn least_model(program: &NormalProgram) -> Result<BTreeSet<Literal>, EngineError> {
    if !program.is_horn() {
        return Err(EngineError::NonHorn {
            what: "least_model",
        });
    }
    let mut model = BTreeSet::new();
    loop {
        let mut changed = false;
        for r in &program.rules {
            if !model.contains(&r.head) && satisfies(&model, &r.body) {
                model.insert(r.head.clone());
                changed = true;
            }
        }
        if !changed {
            return Ok(model);
        }
    }
}

fn consistent(m: &BTreeSet<Literal>) -> bool {
    m.iter().all(|l| !m.contains(&l.complement()))
}

/// The stable-model test with the consistency requirement on classical
/// literals.
pub fn is_answer_set(program: &NormalProgram, m: &BTreeSet<Literal>) -> Result<bool, EngineError> {
    if !consistent(m) {
        return Ok(false);
    }
    Ok(&least_model(&gl_reduct(program, m))? == m)
}

/// All answer sets, ordered by size then lexicographically.
///
/// Enumeration ranges only over subsets of the head literals — a stable
/// model equals the least model of its reduct, and least models contain
/// only rule heads — but the guard applies to the declared universe.
pub fn answer_sets(program: &NormalProgram) -> Result<Vec<BTreeSet<Literal>>, EngineError> {
    answer_sets_with_limit(
        program,
        crate::registry::Limits::default().max_universe_literals,
    )
}

/// As [`answer_sets`], with an explicit universe guard.
pub fn answer_sets_with_limit(
    program: &NormalProgram,
    max_universe_literals: usize,
) -> Result<Vec<BTreeSet<Literal>>, EngineError> {
    if program.universe.len() > max_universe_literals.min(62) {
        return Err(EngineError::GuardExceeded {
            what: "classical enumeration universe",
            size: program.universe.len(),
            limit: max_universe_literals.min(62),
        });
    }
    let heads: Vec<Literal> = {
        let set: BTreeSet<Literal> = program.rules.iter().map(|r| r.head.clone()).collect();
        set.into_iter().collect()
    };
    let mut found = exec::try_filter_map_range(1u64 << heads.len(), |mask| {
        let candidate: BTreeSet<Literal> = heads
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| l.clone())
            .collect();
        Ok::<_, EngineError>(is_answer_set(program, &candidate)?.then_some(candidate))
    })?;
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lit, neg_lit};

    fn even_loop() -> NormalProgram {
        // a :- not b.  b :- not a.
        NormalProgram::new([
            NormalRule::new(lit("a"), Block::new([], [lit("b")])),
            NormalRule::new(lit("b"), Block::new([], [lit("a")])),
        ])
    }

    #[test]
    fn satisfaction() {
        assert!(satisfies(&BTreeSet::new(), &Block::empty()));
        let m: BTreeSet<_> = [lit("a")].into();
        let block = Block::new([lit("a")], [lit("b")]);
        assert!(satisfies(&m, &block));
        let m: BTreeSet<_> = [lit("a"), lit("b")].into();
        assert!(!satisfies(&m, &block));
    }

    #[test]
    fn reduct_cases() {
        // Horn programs are unchanged.
        let horn = NormalProgram::new([
            NormalRule::fact(lit("a")),
            NormalRule::new(lit("b"), Block::new([lit("a")], [])),
        ]);
        assert_eq!(gl_reduct(&horn, &[lit("a")].into()).rules(), horn.rules());

        // {a :- not b. b :- not a.} under {a} keeps only `a :- .`.
        let m: BTreeSet<_> = [lit("a")].into();
        let reduct = gl_reduct(&even_loop(), &m);
        assert_eq!(reduct.rules(), &[NormalRule::fact(lit("a"))]);

        // A self-blocking rule is eliminated under {a}.
        let odd = NormalProgram::new([NormalRule::new(lit("a"), Block::new([], [lit("a")]))]);
        assert!(gl_reduct(&odd, &m).rules().is_empty());
    }

    #[test]
    fn least_model_cases() {
        assert!(least_model(&NormalProgram::default()).unwrap().is_empty());

        let chain = NormalProgram::new([
            NormalRule::fact(lit("a")),
            NormalRule::new(lit("b"), Block::new([lit("a")], [])),
        ]);
        assert_eq!(least_model(&chain).unwrap(), [lit("a"), lit("b")].into());

        let unfounded = NormalProgram::new([NormalRule::new(lit("b"), Block::new([lit("a")], []))]);
        assert!(least_model(&unfounded).unwrap().is_empty());

        assert!(least_model(&even_loop()).is_err());
    }

    #[test]
    fn least_model_is_minimal_on_small_instances() {
        let chain = NormalProgram::new([
            NormalRule::fact(lit("a")),
            NormalRule::new(lit("b"), Block::new([lit("a")], [])),
            NormalRule::new(lit("c"), Block::new([lit("d")], [])),
        ]);
        let lm = least_model(&chain).unwrap();
        // Every model of the program contains the least model: check all
        // subsets of the universe.
        let universe: Vec<Literal> = chain.universe().iter().cloned().collect();
        for mask in 0u32..1 << universe.len() {
            let m: BTreeSet<Literal> = universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| l.clone())
                .collect();
            let is_model = chain
                .rules()
                .iter()
                .all(|r| !satisfies(&m, &r.body) || m.contains(&r.head));
            if is_model {
                assert!(lm.is_subset(&m));
            }
        }
    }

    #[test]
    fn stable_model_test() {
        let p = even_loop();
        assert!(is_answer_set(&p, &[lit("a")].into()).unwrap());
        assert!(!is_answer_set(&p, &[lit("a"), lit("b")].into()).unwrap());

        // Inconsistent sets are rejected up front.
        let contradictory =
            NormalProgram::new([NormalRule::fact(lit("a")), NormalRule::fact(neg_lit("a"))]);
        assert!(!is_answer_set(&contradictory, &[lit("a"), neg_lit("a")].into()).unwrap());
    }

    #[test]
    fn enumeration_cases() {
        let sets = answer_sets(&even_loop()).unwrap();
        assert_eq!(sets, vec![[lit("a")].into(), [lit("b")].into()]);

        let odd = NormalProgram::new([NormalRule::new(lit("a"), Block::new([], [lit("a")]))]);
        assert!(answer_sets(&odd).unwrap().is_empty());

        assert_eq!(
            answer_sets(&NormalProgram::default()).unwrap(),
            vec![BTreeSet::new()]
        );
    }

    #[test]
    fn enumeration_guard_fails_loudly() {
        let wide = NormalProgram::new((0..12).map(|i| NormalRule::fact(lit(&format!("a{i}")))));
        let err = answer_sets_with_limit(&wide, 10).unwrap_err();
        assert!(matches!(
            err,
            EngineError::GuardExceeded {
                what: "classical enumeration universe",
                size: 12,
                limit: 10
            }
        ));
    }

    #[test]
    fn answer_sets_form_an_antichain() {
        // Random-ish small programs: check no answer set contains another.
        let programs = [
            even_loop(),
            NormalProgram::new([
                NormalRule::new(lit("a"), Block::new([], [lit("b")])),
                NormalRule::new(lit("b"), Block::new([], [lit("a")])),
                NormalRule::new(lit("c"), Block::new([lit("a")], [])),
            ]),
            NormalProgram::new([
                NormalRule::fact(lit("a")),
                NormalRule::new(lit("b"), Block::new([lit("a")], [lit("c")])),
                NormalRule::new(lit("c"), Block::new([], [lit("b")])),
            ]),
        ];
        for p in &programs {
            let sets = answer_sets(p).unwrap();
            for x in &sets {
                for y in &sets {
                    if x != y {
                        assert!(!x.is_subset(y), "{x:?} inside {y:?}");
                    }
                }
            }
        }
    }
}
