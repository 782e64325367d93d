//! The registry of outside sources: advancing algorithms, boolean
//! algorithms, and constraint sets, addressed by name plus arguments.
//!
//! Rules hold references (name + arguments) rather than closures, so
//! programs serialize; every reference is resolved against a registry when
//! the program is loaded, and the registry is treated as frozen afterwards.
//!
//! The built-in library:
//!
//! * advancing — `tick` (copy parameters, advance one step),
//!   `set_param(name, value)`, `euler(rate, var)` (one explicit Euler step
//!   of `x' = rate * x`), `fanout(name, {v1, ...})` (one successor per
//!   value);
//! * boolean — `true`, `false`, `param_ge(name, c)`, `param_le(name, c)`,
//!   `param_eq(name, c)`, `step_eq(k)`, all evaluated at the last position
//!   of the tuple;
//! * constraint sets — `anyN` (all strictly increasing n-tuples),
//!   `time_eq(k)` (1-tuples at step `k`), `consecutiveN` (adjacent steps),
//!   `window(k1, ..., kn)` (exactly those steps).
//!
//! In discrete-time mode every advancing output must sit exactly one step
//! after the last input position; the registry enforces that contract on
//! every evaluation and reports violations by algorithm name.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{strictly_increasing, GeneralizedPosition, ParamValue, Tuple};
use crate::rational::Rational;

/// An argument to a registered algorithm: a plain value or a value set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AlgArg {
    Value(ParamValue),
    Set(Vec<ParamValue>),
}

impl AlgArg {
    pub fn int(n: i64) -> Self {
        AlgArg::Value(ParamValue::int(n))
    }

    pub fn symbol(s: impl Into<String>) -> Self {
        AlgArg::Value(ParamValue::symbol(s))
    }

    fn as_value(&self) -> Option<&ParamValue> {
        match self {
            AlgArg::Value(v) => Some(v),
            AlgArg::Set(_) => None,
        }
    }

    fn as_number(&self) -> Option<Rational> {
        self.as_value().and_then(|v| v.as_number())
    }

    fn as_symbol(&self) -> Option<&str> {
        match self.as_value() {
            Some(ParamValue::Symbol(s)) => Some(s),
            _ => None,
        }
    }

    fn as_step(&self) -> Option<u32> {
        let n = self.as_number()?;
        if n.is_integer() && n.numer() >= 0 {
            u32::try_from(n.numer()).ok()
        } else {
            None
        }
    }
}

impl fmt::Display for AlgArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgArg::Value(v) => v.fmt(f),
            AlgArg::Set(vs) => {
                f.write_str("{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

fn fmt_call(f: &mut fmt::Formatter<'_>, name: &str, args: &[AlgArg]) -> fmt::Result {
    f.write_str(name)?;
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

macro_rules! named_ref {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
        pub struct $name {
            pub name: String,
            pub args: Vec<AlgArg>,
        }

        impl $name {
            pub fn new(name: impl Into<String>, args: impl IntoIterator<Item = AlgArg>) -> Self {
                Self {
                    name: name.into(),
                    args: args.into_iter().collect(),
                }
            }

            pub fn plain(name: impl Into<String>) -> Self {
                Self::new(name, [])
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt_call(f, &self.name, &self.args)
            }
        }
    };
}

named_ref!(
    /// A named advancing algorithm with bound arguments.
    AdvancingRef
);
named_ref!(
    /// A named boolean algorithm with bound arguments.
    BooleanRef
);
named_ref!(
    /// A named constraint set with bound arguments.
    ConstraintRef
);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown advancing algorithm `{0}`")]
    UnknownAdvancing(String),
    #[error("unknown boolean algorithm `{0}`")]
    UnknownBoolean(String),
    #[error("unknown constraint set `{0}`")]
    UnknownConstraint(String),
    #[error("bad arguments for `{name}`: {reason}")]
    BadArgs { name: String, reason: String },
    #[error("advancing algorithm `{algorithm}` broke the discrete-time contract: {detail}")]
    ContractViolation { algorithm: String, detail: String },
    #[error("invalid position tuple: {0}")]
    InvalidTuple(String),
}

fn bad_args(name: &str, reason: impl Into<String>) -> RegistryError {
    RegistryError::BadArgs {
        name: name.to_string(),
        reason: reason.into(),
    }
}

/// Resource limits for the exhaustive operations.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Iteration cap for fixpoint computations.
    pub max_fixpoint_iterations: usize,
    /// Cap on the number of candidate facts a brute-force enumeration may
    /// range over (the enumeration visits `2^facts` subsets).
    pub max_enum_facts: usize,
    /// Cap on the reachable-position closure.
    pub max_positions: usize,
    /// Cap on branch count in exhaustive selector enumeration.
    pub max_branches: usize,
    /// Cap on the literal universe of a classical program enumeration.
    pub max_universe_literals: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_fixpoint_iterations: 10_000,
            max_enum_facts: 22,
            max_positions: 64,
            max_branches: 100_000,
            max_universe_literals: 20,
        }
    }
}

/// Evaluation context: the registry plus per-program numeric metadata.
#[derive(Clone, Copy)]
pub struct Env<'r> {
    pub registry: &'r Registry,
    pub delta_t: Rational,
    pub limits: Limits,
}

impl<'r> Env<'r> {
    pub fn new(registry: &'r Registry, delta_t: Rational) -> Self {
        Env {
            registry,
            delta_t,
            limits: Limits::default(),
        }
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }
}

type AdvFn = dyn Fn(
        &Env,
        &[AlgArg],
        &[GeneralizedPosition],
    ) -> Result<BTreeSet<GeneralizedPosition>, RegistryError>
    + Send
    + Sync;
type BoolFn =
    dyn Fn(&Env, &[AlgArg], &[GeneralizedPosition]) -> Result<bool, RegistryError> + Send + Sync;
type CsFn = dyn Fn(&[AlgArg], &[GeneralizedPosition]) -> Result<bool, RegistryError> + Send + Sync;

struct CustomConstraint {
    arity: usize,
    contains: Box<CsFn>,
}

/// Name-indexed store of algorithm implementations. Built-ins are always
/// available; extensions can be registered before programs are loaded.
#[derive(Default)]
pub struct Registry {
    advancing: BTreeMap<String, Box<AdvFn>>,
    boolean: BTreeMap<String, Box<BoolFn>>,
    constraints: BTreeMap<String, CustomConstraint>,
    max_denominator: i64,
}

impl Registry {
    /// A registry holding exactly the built-in library.
    pub fn with_builtins() -> Self {
        Registry {
            advancing: BTreeMap::new(),
            boolean: BTreeMap::new(),
            constraints: BTreeMap::new(),
            max_denominator: 1_000_000,
        }
    }

    /// Maximum denominator numeric advancing results are rounded to.
    pub fn set_max_denominator(&mut self, max_denominator: i64) {
        assert!(max_denominator > 0);
        self.max_denominator = max_denominator;
    }

    pub fn max_denominator(&self) -> i64 {
        self.max_denominator
    }

    pub fn register_advancing<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: Fn(
                &Env,
                &[AlgArg],
                &[GeneralizedPosition],
            ) -> Result<BTreeSet<GeneralizedPosition>, RegistryError>
            + Send
            + Sync
            + 'static,
    {
        self.advancing.insert(name.into(), Box::new(f));
    }

    pub fn register_boolean<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: Fn(&Env, &[AlgArg], &[GeneralizedPosition]) -> Result<bool, RegistryError>
            + Send
            + Sync
            + 'static,
    {
        self.boolean.insert(name.into(), Box::new(f));
    }

    pub fn register_constraint<F>(&mut self, name: impl Into<String>, arity: usize, contains: F)
    where
        F: Fn(&[AlgArg], &[GeneralizedPosition]) -> Result<bool, RegistryError>
            + Send
            + Sync
            + 'static,
    {
        self.constraints.insert(
            name.into(),
            CustomConstraint {
                arity,
                contains: Box::new(contains),
            },
        );
    }

    pub fn has_advancing(&self, name: &str) -> bool {
        self.advancing.contains_key(name)
            || matches!(name, "tick" | "set_param" | "euler" | "fanout")
    }

    pub fn has_boolean(&self, name: &str) -> bool {
        self.boolean.contains_key(name)
            || matches!(
                name,
                "true" | "false" | "param_ge" | "param_le" | "param_eq" | "step_eq"
            )
    }

    /// Checks an advancing reference resolves and its arguments are well
    /// formed.
    pub fn validate_advancing(&self, r: &AdvancingRef) -> Result<(), RegistryError> {
        if self.advancing.contains_key(&r.name) {
            return Ok(());
        }
        match r.name.as_str() {
            "tick" => {
                if r.args.is_empty() {
                    Ok(())
                } else {
                    Err(bad_args("tick", "takes no arguments"))
                }
            }
            "set_param" => {
                if r.args.len() == 2
                    && r.args[0].as_symbol().is_some()
                    && r.args[1].as_value().is_some()
                {
                    Ok(())
                } else {
                    Err(bad_args("set_param", "expects (name, value)"))
                }
            }
            "euler" => {
                if r.args.len() == 2
                    && r.args[0].as_number().is_some()
                    && r.args[1].as_symbol().is_some()
                {
                    Ok(())
                } else {
                    Err(bad_args("euler", "expects (rate, var)"))
                }
            }
            "fanout" => {
                if r.args.len() == 2
                    && r.args[0].as_symbol().is_some()
                    && matches!(r.args[1], AlgArg::Set(_))
                {
                    Ok(())
                } else {
                    Err(bad_args("fanout", "expects (name, {values})"))
                }
            }
            other => Err(RegistryError::UnknownAdvancing(other.to_string())),
        }
    }

    pub fn validate_boolean(&self, r: &BooleanRef) -> Result<(), RegistryError> {
        if self.boolean.contains_key(&r.name) {
            return Ok(());
        }
        match r.name.as_str() {
            "true" | "false" => {
                if r.args.is_empty() {
                    Ok(())
                } else {
                    Err(bad_args(&r.name, "takes no arguments"))
                }
            }
            "param_ge" | "param_le" => {
                if r.args.len() == 2
                    && r.args[0].as_symbol().is_some()
                    && r.args[1].as_number().is_some()
                {
                    Ok(())
                } else {
                    Err(bad_args(&r.name, "expects (name, number)"))
                }
            }
            "param_eq" => {
                if r.args.len() == 2
                    && r.args[0].as_symbol().is_some()
                    && r.args[1].as_value().is_some()
                {
                    Ok(())
                } else {
                    Err(bad_args("param_eq", "expects (name, value)"))
                }
            }
            "step_eq" => {
                if r.args.len() == 1 && r.args[0].as_step().is_some() {
                    Ok(())
                } else {
                    Err(bad_args("step_eq", "expects a non-negative integer step"))
                }
            }
            other => Err(RegistryError::UnknownBoolean(other.to_string())),
        }
    }

    /// Checks a constraint reference resolves; returns its tuple arity.
    pub fn constraint_arity(&self, r: &ConstraintRef) -> Result<usize, RegistryError> {
        if let Some(c) = self.constraints.get(&r.name) {
            return Ok(c.arity);
        }
        if let Some(n) = parse_indexed_name(&r.name, "any")
            .or_else(|| parse_indexed_name(&r.name, "consecutive"))
        {
            if !r.args.is_empty() {
                return Err(bad_args(&r.name, "takes no arguments"));
            }
            return Ok(n);
        }
        match r.name.as_str() {
            "time_eq" => {
                if r.args.len() == 1 && r.args[0].as_step().is_some() {
                    Ok(1)
                } else {
                    Err(bad_args("time_eq", "expects a non-negative integer step"))
                }
            }
            "window" => {
                let steps: Option<Vec<u32>> = r.args.iter().map(AlgArg::as_step).collect();
                match steps {
                    Some(steps) if !steps.is_empty() && steps.windows(2).all(|w| w[0] < w[1]) => {
                        Ok(steps.len())
                    }
                    _ => Err(bad_args(
                        "window",
                        "expects strictly increasing non-negative integer steps",
                    )),
                }
            }
            other => Err(RegistryError::UnknownConstraint(other.to_string())),
        }
    }

    /// Applies an advancing algorithm to a tuple of positions.
    ///
    /// Enforces the discrete-time contract: every output must sit exactly
    /// one step after the last input position.
    pub fn eval_advancing(
        &self,
        env: &Env,
        r: &AdvancingRef,
        tuple: &[GeneralizedPosition],
    ) -> Result<BTreeSet<GeneralizedPosition>, RegistryError> {
        let last = check_tuple(tuple)?;
        let out = if let Some(f) = self.advancing.get(&r.name) {
            f(env, &r.args, tuple)?
        } else {
            self.eval_builtin_advancing(env, r, last)?
        };
        for q in &out {
            if q.step() != last.step() + 1 {
                return Err(RegistryError::ContractViolation {
                    algorithm: r.name.clone(),
                    detail: format!("output step {} from input step {}", q.step(), last.step()),
                });
            }
        }
        Ok(out)
    }

    fn eval_builtin_advancing(
        &self,
        env: &Env,
        r: &AdvancingRef,
        last: &GeneralizedPosition,
    ) -> Result<BTreeSet<GeneralizedPosition>, RegistryError> {
        self.validate_advancing(r)?;
        match r.name.as_str() {
            "tick" => Ok([last.advanced()].into()),
            "set_param" => {
                let name = r.args[0].as_symbol().unwrap();
                let value = r.args[1].as_value().unwrap().clone();
                Ok([last.advanced_with(name, value)].into())
            }
            "euler" => {
                let rate = r.args[0].as_number().unwrap();
                let var = r.args[1].as_symbol().unwrap();
                match last.param(var).and_then(ParamValue::as_number) {
                    Some(v) => {
                        let next =
                            (v + env.delta_t * rate * v).round_to_denominator(self.max_denominator);
                        Ok([last.advanced_with(var, ParamValue::Number(next))].into())
                    }
                    None => Ok(BTreeSet::new()),
                }
            }
            "fanout" => {
                let name = r.args[0].as_symbol().unwrap();
                let AlgArg::Set(values) = &r.args[1] else {
                    unreachable!()
                };
                Ok(values
                    .iter()
                    .map(|v| last.advanced_with(name, v.clone()))
                    .collect())
            }
            _ => unreachable!("validate_advancing admits only built-ins"),
        }
    }

    /// Applies a boolean algorithm to a tuple of positions. The built-ins
    /// test the last position of the tuple.
    pub fn eval_boolean(
        &self,
        env: &Env,
        r: &BooleanRef,
        tuple: &[GeneralizedPosition],
    ) -> Result<bool, RegistryError> {
        let last = check_tuple(tuple)?;
        if let Some(f) = self.boolean.get(&r.name) {
            return f(env, &r.args, tuple);
        }
        self.validate_boolean(r)?;
        Ok(match r.name.as_str() {
            "true" => true,
            "false" => false,
            "param_ge" | "param_le" => {
                let name = r.args[0].as_symbol().unwrap();
                let bound = r.args[1].as_number().unwrap();
                match last.param(name).and_then(ParamValue::as_number) {
                    Some(v) if r.name == "param_ge" => v >= bound,
                    Some(v) => v <= bound,
                    None => false,
                }
            }
            "param_eq" => {
                let name = r.args[0].as_symbol().unwrap();
                let value = r.args[1].as_value().unwrap();
                last.param(name) == Some(value)
            }
            "step_eq" => last.step() == r.args[0].as_step().unwrap(),
            _ => unreachable!("validate_boolean admits only built-ins"),
        })
    }

    /// Membership test for a constraint set. Tuples whose steps are not
    /// strictly increasing are rejected here, whatever the implementation
    /// says.
    pub fn cs_contains(
        &self,
        r: &ConstraintRef,
        tuple: &[GeneralizedPosition],
    ) -> Result<bool, RegistryError> {
        if tuple.is_empty() || !strictly_increasing(tuple) {
            return Ok(false);
        }
        if let Some(c) = self.constraints.get(&r.name) {
            if tuple.len() != c.arity {
                return Ok(false);
            }
            return (c.contains)(&r.args, tuple);
        }
        let arity = self.constraint_arity(r)?;
        if tuple.len() != arity {
            return Ok(false);
        }
        Ok(if parse_indexed_name(&r.name, "any").is_some() {
            true
        } else if parse_indexed_name(&r.name, "consecutive").is_some() {
            tuple.windows(2).all(|w| w[1].step() == w[0].step() + 1)
        } else if r.name == "time_eq" {
            tuple[0].step() == r.args[0].as_step().unwrap()
        } else {
            // window
            tuple
                .iter()
                .zip(r.args.iter())
                .all(|(p, k)| p.step() == k.as_step().unwrap())
        })
    }

    /// All tuples over `domain` that belong to the constraint set, in
    /// lexicographic position order.
    pub fn cs_enumerate(
        &self,
        r: &ConstraintRef,
        domain: &BTreeSet<GeneralizedPosition>,
    ) -> Result<Vec<Tuple>, RegistryError> {
        let arity = self.constraint_arity(r)?;
        let positions: Vec<&GeneralizedPosition> = domain.iter().collect();
        let mut out = Vec::new();
        let mut stack: Vec<usize> = Vec::with_capacity(arity);
        enumerate_increasing(&positions, arity, &mut stack, &mut |tuple| {
            if self.cs_contains(r, tuple)? {
                out.push(tuple.to_vec());
            }
            Ok(())
        })?;
        Ok(out)
    }
}

fn check_tuple(tuple: &[GeneralizedPosition]) -> Result<&GeneralizedPosition, RegistryError> {
    if !strictly_increasing(tuple) {
        return Err(RegistryError::InvalidTuple(
            "steps not strictly increasing".to_string(),
        ));
    }
    tuple
        .last()
        .ok_or_else(|| RegistryError::InvalidTuple("empty tuple".to_string()))
}

fn parse_indexed_name(name: &str, prefix: &str) -> Option<usize> {
    let suffix = name.strip_prefix(prefix)?;
    let n: usize = suffix.parse().ok()?;
    (n >= 1).then_some(n)
}

/// All strictly-increasing-step tuples of the given arity over the domain,
/// in lexicographic order. Arity zero yields the single empty tuple.
pub fn increasing_tuples(domain: &BTreeSet<GeneralizedPosition>, arity: usize) -> Vec<Tuple> {
    let positions: Vec<&GeneralizedPosition> = domain.iter().collect();
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(arity);
    let _ = enumerate_increasing(&positions, arity, &mut stack, &mut |tuple| {
        out.push(tuple.to_vec());
        Ok(())
    });
    out
}

/// Walks every strictly-increasing-step tuple of the given arity over the
/// (sorted) position slice, in lexicographic order.
fn enumerate_increasing<F>(
    positions: &[&GeneralizedPosition],
    arity: usize,
    chosen: &mut Vec<usize>,
    visit: &mut F,
) -> Result<(), RegistryError>
where
    F: FnMut(&[GeneralizedPosition]) -> Result<(), RegistryError>,
{
    if chosen.len() == arity {
        let tuple: Tuple = chosen.iter().map(|&i| positions[i].clone()).collect();
        return visit(&tuple);
    }
    for i in 0..positions.len() {
        if let Some(&prev) = chosen.last() {
            if positions[i].step() <= positions[prev].step() {
                continue;
            }
        }
        chosen.push(i);
        enumerate_increasing(positions, arity, chosen, visit)?;
        chosen.pop();
    }
    Ok(())
}
