//! The time-layered incremental solver.
//!
//! A discrete-time program is solved layer by layer: the facts at step 0
//! come from solving one classical program per initial position; afterwards
//! each layer expands a frontier of successor positions produced by the
//! active advancing rules (an *advancing selector* picks which successors
//! to keep) and solves one classical program per kept position (a
//! *stationary selector* picks one of its answer sets). The classical
//! program at a position collects the last block of every active
//! stationary rule plus one fact per advancing head that reaches it.
//!
//! A single run reports whether its result really is an answer set of the
//! full program; exhaustive enumeration branches over every selector
//! behavior and keeps exactly the validated results, which coincide with
//! the brute-force oracle's answer sets.

use std::collections::BTreeSet;

use crate::asp::{self, NormalProgram, NormalRule};
use crate::corpus::SplitMix64;
use crate::error::EngineError;
use crate::exec;
use crate::model::{Fact, GeneralizedPosition, InitialCondition, Interpretation, Literal};
use crate::rational::Rational;
use crate::registry::{increasing_tuples, Env};
use crate::rules::{Program, Rule, StationaryRule};
use crate::semantics::{self, gp_with_initial, satisfies_body};

/// Picks which frontier positions a layer keeps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdvancingSelector {
    /// Keep every candidate successor.
    All,
    /// Keep none (layers stop immediately).
    None,
    /// Keep each candidate independently with the given probability.
    Seeded { probability: Rational, seed: u64 },
}

impl AdvancingSelector {
    /// Parses `select_all`, `select_none`, or `seeded_random[(p)]`; the
    /// seed comes separately.
    pub fn parse(name: &str, seed: Option<u64>) -> Result<Self, EngineError> {
        match name {
            "select_all" => Ok(AdvancingSelector::All),
            "select_none" => Ok(AdvancingSelector::None),
            _ => {
                let probability = parse_seeded(name)?;
                let seed = seed.ok_or_else(|| {
                    EngineError::UnknownSelector(format!("{name} requires --seed"))
                })?;
                Ok(AdvancingSelector::Seeded { probability, seed })
            }
        }
    }

    fn choose(
        &self,
        rng: &mut Option<SplitMix64>,
        candidates: &BTreeSet<GeneralizedPosition>,
    ) -> BTreeSet<GeneralizedPosition> {
        match self {
            AdvancingSelector::All => candidates.clone(),
            AdvancingSelector::None => BTreeSet::new(),
            AdvancingSelector::Seeded { probability, .. } => {
                let rng = rng.as_mut().expect("seeded selector without rng");
                candidates
                    .iter()
                    .filter(|_| rng.chance(probability.numer() as u32, probability.denom() as u32))
                    .cloned()
                    .collect()
            }
        }
    }

    fn rng(&self) -> Option<SplitMix64> {
        match self {
            AdvancingSelector::Seeded { seed, .. } => Some(SplitMix64::new(*seed)),
            _ => None,
        }
    }
}

fn parse_seeded(name: &str) -> Result<Rational, EngineError> {
    if name == "seeded_random" {
        return Ok(Rational::new(1, 2));
    }
    let inner = name
        .strip_prefix("seeded_random(")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| EngineError::UnknownSelector(name.to_string()))?;
    let probability =
        Rational::parse(inner).ok_or_else(|| EngineError::UnknownSelector(name.to_string()))?;
    if probability < Rational::ZERO || probability > Rational::ONE {
        return Err(EngineError::UnknownSelector(format!(
            "{name}: probability outside [0, 1]"
        )));
    }
    Ok(probability)
}

/// Picks one answer set of a per-position classical program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StationarySelector {
    /// The first answer set in (size, lexicographic) order.
    First,
    /// A uniformly seeded choice among the answer sets.
    Seeded { seed: u64 },
}

impl StationarySelector {
    pub fn parse(name: &str, seed: Option<u64>) -> Result<Self, EngineError> {
        match name {
            "first" => Ok(StationarySelector::First),
            "seeded_random" => {
                let seed = seed.ok_or_else(|| {
                    EngineError::UnknownSelector("seeded_random requires --seed".to_string())
                })?;
                Ok(StationarySelector::Seeded { seed })
            }
            other => Err(EngineError::UnknownSelector(other.to_string())),
        }
    }

    /// `None` when the program has no answer set.
    fn choose(
        &self,
        rng: &mut Option<SplitMix64>,
        program: &NormalProgram,
        limit: usize,
    ) -> Result<Option<BTreeSet<Literal>>, EngineError> {
        let sets = asp::answer_sets_with_limit(program, limit)?;
        if sets.is_empty() {
            return Ok(None);
        }
        Ok(Some(match self {
            StationarySelector::First => sets.into_iter().next().unwrap(),
            StationarySelector::Seeded { .. } => {
                let rng = rng.as_mut().expect("seeded selector without rng");
                let i = rng.below(sets.len());
                sets.into_iter().nth(i).unwrap()
            }
        }))
    }

    fn rng(&self) -> Option<SplitMix64> {
        match self {
            StationarySelector::Seeded { seed } => Some(SplitMix64::new(*seed)),
            StationarySelector::First => None,
        }
    }
}

/// The advancing rules whose body `N` satisfies at some constraint tuple
/// ending at time step `k`.
pub fn rules_advancing_at_step(
    env: &Env,
    rules: &[Rule],
    n: &Interpretation,
    init: &InitialCondition,
    k: u32,
) -> Result<Vec<Rule>, EngineError> {
    let domain = gp_with_initial(n, init);
    let mut out = Vec::new();
    for rule in rules {
        let Rule::Advancing(r) = rule else { continue };
        for tuple in r.cs.enumerate(env, &domain)? {
            if tuple.last().unwrap().step() == k && satisfies_body(n, init, &r.blocks, &tuple) {
                out.push(rule.clone());
                break;
            }
        }
    }
    Ok(out)
}

/// The successor positions the advancing rules active at one tuple produce.
pub fn next_positions_at_tuple(
    env: &Env,
    rules: &[Rule],
    n: &Interpretation,
    init: &InitialCondition,
    tuple: &[GeneralizedPosition],
) -> Result<BTreeSet<GeneralizedPosition>, EngineError> {
    let mut out = BTreeSet::new();
    for rule in rules {
        let Rule::Advancing(r) = rule else { continue };
        if r.cs.contains(env, tuple)? && satisfies_body(n, init, &r.blocks, tuple) {
            out.extend(r.adv.eval(env, tuple)?);
        }
    }
    Ok(out)
}

/// Every successor position derivable from tuples ending at step `k`,
/// before any selector is applied.
pub fn frontier_candidates(
    env: &Env,
    rules: &[Rule],
    n: &Interpretation,
    init: &InitialCondition,
    k: u32,
) -> Result<BTreeSet<GeneralizedPosition>, EngineError> {
    let domain = gp_with_initial(n, init);
    let mut out = BTreeSet::new();
    for rule in rules {
        let Rule::Advancing(r) = rule else { continue };
        for tuple in r.cs.enumerate(env, &domain)? {
            if tuple.last().unwrap().step() == k && satisfies_body(n, init, &r.blocks, &tuple) {
                out.extend(r.adv.eval(env, &tuple)?);
            }
        }
    }
    Ok(out)
}

/// The frontier after the advancing selector picks its subset.
pub fn next_positions(
    env: &Env,
    rules: &[Rule],
    n: &Interpretation,
    init: &InitialCondition,
    k: u32,
    selector: &AdvancingSelector,
    rng: &mut Option<SplitMix64>,
) -> Result<BTreeSet<GeneralizedPosition>, EngineError> {
    let candidates = frontier_candidates(env, rules, n, init, k)?;
    Ok(selector.choose(rng, &candidates))
}

/// The heads every active advancing rule derives at `q`.
pub fn advancing_heads_at(
    env: &Env,
    rules: &[Rule],
    n: &Interpretation,
    init: &InitialCondition,
    q: &GeneralizedPosition,
) -> Result<BTreeSet<Literal>, EngineError> {
    let domain = gp_with_initial(n, init);
    let mut out = BTreeSet::new();
    for rule in rules {
        let Rule::Advancing(r) = rule else { continue };
        for tuple in r.cs.enumerate(env, &domain)? {
            if satisfies_body(n, init, &r.blocks, &tuple) && r.adv.eval(env, &tuple)?.contains(q) {
                out.insert(r.head.clone());
                break;
            }
        }
    }
    Ok(out)
}

/// The stationary rules active at a tuple: the tuple belongs to the
/// constraint set, the guard holds, and `N` satisfies every block except
/// the last (the last block is deferred to the per-position program).
pub fn stationary_rules_active(
    env: &Env,
    rules: &[Rule],
    n: &Interpretation,
    init: &InitialCondition,
    tuple: &[GeneralizedPosition],
) -> Result<Vec<Rule>, EngineError> {
    let mut out = Vec::new();
    for rule in rules {
        let Rule::Stationary(r) = rule else { continue };
        if r.blocks.len() != tuple.len() || !r.cs.contains(env, tuple)? {
            continue;
        }
        if !r.guard.eval(env, tuple)? {
            continue;
        }
        let prefix_len = tuple.len() - 1;
        if satisfies_body(n, init, &r.blocks[..prefix_len], &tuple[..prefix_len]) {
            out.push(rule.clone());
        }
    }
    Ok(out)
}

/// The classical rule a stationary rule contributes at the last position of
/// an active tuple: its head guarded by its last block.
pub fn applicable_reduct_rule(rule: &StationaryRule) -> NormalRule {
    NormalRule::new(
        rule.head.clone(),
        rule.blocks.last().expect("rules have arity >= 1").clone(),
    )
}

/// The classical program at position `z` relative to `N`: the applicable
/// reducts of every stationary rule active at some tuple ending in `z`.
pub fn position_program(
    env: &Env,
    rules: &[Rule],
    n: &Interpretation,
    init: &InitialCondition,
    z: &GeneralizedPosition,
    literal_universe: &BTreeSet<Literal>,
) -> Result<NormalProgram, EngineError> {
    let domain = gp_with_initial(n, init);
    let mut reducts = Vec::new();
    for rule in rules {
        let Rule::Stationary(r) = rule else { continue };
        let prefix_len = r.blocks.len() - 1;
        for mut prefix in increasing_tuples(&domain, prefix_len) {
            if prefix.last().is_some_and(|p| p.step() >= z.step()) {
                continue;
            }
            prefix.push(z.clone());
            if !stationary_rules_active(env, std::slice::from_ref(rule), n, init, &prefix)?
                .is_empty()
            {
                reducts.push(applicable_reduct_rule(r));
            }
        }
    }
    Ok(NormalProgram::new(reducts).with_universe(literal_universe.iter().cloned()))
}

/// One per-position solve in a layer trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionSolve {
    pub position: GeneralizedPosition,
    pub program: NormalProgram,
    /// The selected answer set, or `None` when the program has none.
    pub chosen: Option<BTreeSet<Literal>>,
}

/// What one layer of a run did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerTrace {
    /// The layer's time step.
    pub step: u32,
    /// The positions solved at this layer (the initial positions for step
    /// 0, the selected frontier afterwards).
    pub positions: Vec<GeneralizedPosition>,
    pub solves: Vec<PositionSolve>,
    /// The facts this layer contributed.
    pub layer: Interpretation,
}

/// Solves the step-0 layer: one classical program per initial position at
/// step 0. A position whose program has no answer set contributes nothing;
/// the failure stays visible in the trace.
pub fn initial_layer(
    env: &Env,
    program: &Program,
    init: &InitialCondition,
    selector: &StationarySelector,
    rng: &mut Option<SplitMix64>,
) -> Result<LayerTrace, EngineError> {
    let literal_universe = program.literal_universe();
    let empty = Interpretation::empty();
    let mut layer = Interpretation::empty();
    let mut solves = Vec::new();
    let positions: Vec<GeneralizedPosition> = init.at_step(0).into_iter().collect();
    for z in &positions {
        let at_z = position_program(env, program.rules(), &empty, init, z, &literal_universe)?;
        let chosen = selector.choose(rng, &at_z, env.limits.max_universe_literals)?;
        if let Some(set) = &chosen {
            for l in set {
                layer.insert(Fact::new(l.clone(), z.clone()));
            }
        }
        solves.push(PositionSolve {
            position: z.clone(),
            program: at_z,
            chosen,
        });
    }
    Ok(LayerTrace {
        step: 0,
        positions,
        solves,
        layer,
    })
}

/// Expands one layer: selects the step-`k+1` frontier and solves one
/// classical program per kept position. If any kept position's program has
/// no answer set the whole layer is empty.
#[allow(clippy::too_many_arguments)]
pub fn layer_step(
    env: &Env,
    program: &Program,
    init: &InitialCondition,
    n: &Interpretation,
    k: u32,
    advancing: &AdvancingSelector,
    stationary: &StationarySelector,
    adv_rng: &mut Option<SplitMix64>,
    stat_rng: &mut Option<SplitMix64>,
) -> Result<LayerTrace, EngineError> {
    let literal_universe = program.literal_universe();
    let frontier = next_positions(env, program.rules(), n, init, k, advancing, adv_rng)?;
    let positions: Vec<GeneralizedPosition> = frontier.into_iter().collect();
    let mut layer = Interpretation::empty();
    let mut solves = Vec::new();
    let mut failed = false;
    for z in &positions {
        let mut at_z = position_program(env, program.rules(), n, init, z, &literal_universe)?;
        let heads = advancing_heads_at(env, program.rules(), n, init, z)?;
        at_z = NormalProgram::new(
            at_z.rules()
                .iter()
                .cloned()
                .chain(heads.into_iter().map(NormalRule::fact)),
        )
        .with_universe(literal_universe.iter().cloned());
        let chosen = stationary.choose(stat_rng, &at_z, env.limits.max_universe_literals)?;
        match &chosen {
            Some(set) => {
                for l in set {
                    layer.insert(Fact::new(l.clone(), z.clone()));
                }
            }
            None => failed = true,
        }
        solves.push(PositionSolve {
            position: z.clone(),
            program: at_z,
            chosen,
        });
    }
    if failed {
        layer = Interpretation::empty();
    }
    Ok(LayerTrace {
        step: k + 1,
        positions,
        solves,
        layer,
    })
}

/// A full run of the incremental algorithm.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// The union of all layers.
    pub result: Interpretation,
    pub layers: Vec<LayerTrace>,
    /// Whether the result passed the full answer-set test. Selector paths
    /// that strand a position with an answer-set-free classical program
    /// produce non-answer-sets; the verdict makes that visible.
    pub validated: bool,
}

/// Runs the incremental algorithm up to `horizon`, stopping early when a
/// layer past the first comes out empty, then validates the result against
/// the full semantics.
pub fn run(
    env: &Env,
    program: &Program,
    init: &InitialCondition,
    advancing: &AdvancingSelector,
    stationary: &StationarySelector,
    horizon: u32,
) -> Result<RunOutcome, EngineError> {
    if !init.has_step_zero() {
        return Err(EngineError::NoStepZeroPosition);
    }
    let mut adv_rng = advancing.rng();
    let mut stat_rng = stationary.rng();
    let first = initial_layer(env, program, init, stationary, &mut stat_rng)?;
    let mut result = first.layer.clone();
    let mut last_layer = first.layer.clone();
    let mut layers = vec![first];
    for k in 0..horizon {
        if k > 0 && last_layer.is_empty() {
            break;
        }
        let trace = layer_step(
            env,
            program,
            init,
            &result,
            k,
            advancing,
            stationary,
            &mut adv_rng,
            &mut stat_rng,
        )?;
        last_layer = trace.layer.clone();
        result = result.union(&trace.layer);
        layers.push(trace);
        if last_layer.is_empty() {
            break;
        }
    }
    let validated = semantics::is_answer_set(env, program.rules(), init, &result)?;
    Ok(RunOutcome {
        result,
        layers,
        validated,
    })
}

/// Enumerates the results of every selector behavior: every subset choice
/// at each frontier and every answer-set choice at each position, layer by
/// layer, keeping exactly the candidates that pass the answer-set test.
pub fn enumerate_all(
    env: &Env,
    program: &Program,
    init: &InitialCondition,
    horizon: u32,
) -> Result<Vec<Interpretation>, EngineError> {
    if !init.has_step_zero() {
        return Err(EngineError::NoStepZeroPosition);
    }
    let literal_universe = program.literal_universe();
    let empty = Interpretation::empty();

    // Step-0 branches: the product of per-position answer-set choices.
    let mut branches: Vec<Interpretation> = vec![Interpretation::empty()];
    for z in init.at_step(0) {
        let at_z = position_program(env, program.rules(), &empty, init, &z, &literal_universe)?;
        let options = asp::answer_sets_with_limit(&at_z, env.limits.max_universe_literals)?;
        if options.is_empty() {
            // The position contributes nothing on any branch.
            continue;
        }
        let mut extended = Vec::with_capacity(branches.len() * options.len());
        for base in &branches {
            for option in &options {
                let mut next = base.clone();
                for l in option {
                    next.insert(Fact::new(l.clone(), z.clone()));
                }
                extended.push(next);
            }
        }
        branches = extended;
    }
    branches.sort();
    branches.dedup();

    let mut candidates: BTreeSet<Interpretation> = BTreeSet::new();
    let mut branch_count = branches.len();
    for k in 0..horizon {
        if branches.is_empty() {
            break;
        }
        let expansions = exec::try_map_vec(std::mem::take(&mut branches), |n| {
            expand_branch(env, program, init, &literal_universe, &n, k)
        })?;
        let mut alive: BTreeSet<Interpretation> = BTreeSet::new();
        for expansion in expansions {
            for outcome in expansion {
                match outcome {
                    BranchOutcome::Stopped(n) => {
                        candidates.insert(n);
                    }
                    BranchOutcome::Alive(n) => {
                        alive.insert(n);
                    }
                }
            }
        }
        branch_count += alive.len();
        if branch_count > env.limits.max_branches {
            return Err(EngineError::GuardExceeded {
                what: "selector enumeration branches",
                size: branch_count,
                limit: env.limits.max_branches,
            });
        }
        branches = alive.into_iter().collect();
    }
    candidates.extend(branches);

    let checked = exec::try_map_vec(candidates.into_iter().collect(), |m| {
        Ok::<_, EngineError>((semantics::is_answer_set(env, program.rules(), init, &m)?, m))
    })?;
    let mut out: Vec<Interpretation> = checked
        .into_iter()
        .filter_map(|(ok, m)| ok.then_some(m))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.dedup();
    Ok(out)
}

enum BranchOutcome {
    /// The branch stopped here; its accumulated interpretation is final.
    Stopped(Interpretation),
    /// The branch lives on with a non-empty new layer folded in.
    Alive(Interpretation),
}

/// All one-layer continuations of a branch at step `k`: every frontier
/// subset, and for non-empty subsets every combination of per-position
/// answer sets. A subset with a position whose program has no answer set
/// yields an empty layer, stopping the branch.
fn expand_branch(
    env: &Env,
    program: &Program,
    init: &InitialCondition,
    literal_universe: &BTreeSet<Literal>,
    n: &Interpretation,
    k: u32,
) -> Result<Vec<BranchOutcome>, EngineError> {
    let candidates: Vec<GeneralizedPosition> =
        frontier_candidates(env, program.rules(), n, init, k)?
            .into_iter()
            .collect();
    let subset_count = match 1u64.checked_shl(candidates.len() as u32) {
        Some(c) if c <= env.limits.max_branches as u64 => c,
        too_many => {
            return Err(EngineError::GuardExceeded {
                what: "selector enumeration branches",
                size: too_many.map_or(usize::MAX, |c| c.min(usize::MAX as u64) as usize),
                limit: env.limits.max_branches,
            })
        }
    };
    let mut outcomes = Vec::new();
    // Pre-solve each candidate position once; subsets share the results.
    let mut solved = Vec::with_capacity(candidates.len());
    for z in &candidates {
        let mut at_z = position_program(env, program.rules(), n, init, z, literal_universe)?;
        let heads = advancing_heads_at(env, program.rules(), n, init, z)?;
        at_z = NormalProgram::new(
            at_z.rules()
                .iter()
                .cloned()
                .chain(heads.into_iter().map(NormalRule::fact)),
        );
        solved.push(asp::answer_sets_with_limit(
            &at_z,
            env.limits.max_universe_literals,
        )?);
    }
    for mask in 0u64..subset_count {
        let picked: Vec<usize> = (0..candidates.len())
            .filter(|i| mask & (1 << i) != 0)
            .collect();
        if picked.is_empty() || picked.iter().any(|&i| solved[i].is_empty()) {
            // Empty frontier choice, or a failing position: the layer is
            // empty and the branch ends.
            outcomes.push(BranchOutcome::Stopped(n.clone()));
            continue;
        }
        let mut layer_choices: Vec<Interpretation> = vec![Interpretation::empty()];
        for &i in &picked {
            let mut extended = Vec::with_capacity(layer_choices.len() * solved[i].len());
            for base in &layer_choices {
                for option in &solved[i] {
                    let mut next = base.clone();
                    for l in option {
                        next.insert(Fact::new(l.clone(), candidates[i].clone()));
                    }
                    extended.push(next);
                }
            }
            layer_choices = extended;
        }
        for layer in layer_choices {
            if layer.is_empty() {
                outcomes.push(BranchOutcome::Stopped(n.clone()));
            } else {
                outcomes.push(BranchOutcome::Alive(n.union(&layer)));
            }
        }
    }
    Ok(outcomes)
}
