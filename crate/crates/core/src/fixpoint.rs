//! Declarative semantics over a finite constant universe.
//!
//! For function-free programs the chain of interpretations
//! `A₀ ⊆ A₁ ⊆ …` is computed by naive re-evaluation of every clause under
//! every assignment of its variables to universe constants. Values only
//! grow and are drawn from a finite set of factor products, so the chain
//! becomes stationary; that stationary interpretation is the minimal model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::constraint::{enumerate_solutions, Assignment, Constraint, ConstraintError, Equation};
use crate::program::{Goal, Program};
use crate::term::{write_symbol, Symbol, Term};
use crate::value::Value;

/// Default bound on chain length.
pub const DEFAULT_ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixpointError {
    #[error("program is outside the function-free fragment: {0}")]
    Fragment(#[from] ConstraintError),
    #[error("internal error: chain did not stabilize within {0} steps")]
    IterationCap(usize),
    #[error("answer constraint has no solution over the universe")]
    UnsatisfiableAnswer,
    #[error("goal has no relational atom")]
    NoAtom,
}

/// A relation applied to constants.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub relation: Symbol,
    pub args: Vec<Symbol>,
}

impl GroundAtom {
    pub fn new(relation: &str, args: &[&str]) -> GroundAtom {
        GroundAtom {
            relation: Symbol::from(relation),
            args: args.iter().map(|a| Symbol::from(*a)).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbol(f, &self.relation)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write_symbol(f, a)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Membership degrees of ground atoms; absent atoms have degree 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FuzzyInterpretation {
    universe: BTreeSet<Symbol>,
    mu: BTreeMap<GroundAtom, Value>,
}

impl FuzzyInterpretation {
    /// The all-zero interpretation.
    pub fn bottom(universe: BTreeSet<Symbol>) -> FuzzyInterpretation {
        FuzzyInterpretation {
            universe,
            mu: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> &BTreeSet<Symbol> {
        &self.universe
    }

    pub fn get(&self, atom: &GroundAtom) -> Value {
        self.mu.get(atom).cloned().unwrap_or_else(Value::zero)
    }

    /// Sets a degree; panics if `value` is outside `[0,1]`.
    pub fn set(&mut self, atom: GroundAtom, value: Value) {
        assert!(value.in_unit_interval(), "membership degree {value} outside [0,1]");
        if value.is_zero() {
            self.mu.remove(&atom);
        } else {
            self.mu.insert(atom, value);
        }
    }

    /// Nonzero entries in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&GroundAtom, &Value)> {
        self.mu.iter()
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Fuzzy inclusion: pointwise `≤`.
    pub fn is_subset_of(&self, other: &FuzzyInterpretation) -> bool {
        self.mu.iter().all(|(a, v)| *v <= other.get(a))
    }

    /// One `relation(args) = p/q` line per nonzero atom, sorted.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (atom, value) in &self.mu {
            out.push_str(&format!("{atom} = {value}\n"));
        }
        out
    }
}

/// The chain `A₀, A₁, …` up to and including the first repeated step.
/// `steps[stabilized_at] == steps[stabilized_at + 1]`.
#[derive(Clone, Debug)]
pub struct ChainTrace {
    pub steps: Vec<FuzzyInterpretation>,
    pub stabilized_at: usize,
}

impl ChainTrace {
    /// Whether every consecutive pair is pointwise nondecreasing.
    pub fn is_monotone(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].is_subset_of(&w[1]))
    }
}

fn ensure_function_free(prog: &Program) -> Result<(), FixpointError> {
    if let Some((sym, arity)) = prog.signature().constructors.iter().find(|(_, a)| **a > 0) {
        return Err(ConstraintError::FragmentViolation {
            symbol: sym.clone(),
            arity: *arity,
        }
        .into());
    }
    Ok(())
}

fn ground(args: &[crate::term::Variable], alpha: &Assignment) -> Vec<Symbol> {
    args.iter().map(|v| alpha[v].clone()).collect()
}

/// Visits every clause instance `(head, value)` where `value` is the
/// clause factor times the aggregate of the body degrees under `current`.
fn for_each_instance(
    prog: &Program,
    current: &FuzzyInterpretation,
    mut visit: impl FnMut(GroundAtom, Value),
) -> Result<(), FixpointError> {
    ensure_function_free(prog)?;
    let mode = prog.mode();
    for clause in prog.clauses() {
        let vars = clause.vars();
        for alpha in enumerate_solutions(&clause.constraint, &vars, &current.universe)? {
            let body: Vec<Value> = clause
                .body
                .iter()
                .map(|b| {
                    current.get(&GroundAtom {
                        relation: b.relation.clone(),
                        args: ground(&b.args, &alpha),
                    })
                })
                .collect();
            let value = mode.apply(&clause.factor, &body);
            let head = GroundAtom {
                relation: clause.head.relation.clone(),
                args: ground(&clause.head.args, &alpha),
            };
            visit(head, value);
        }
    }
    Ok(())
}

/// One chain step: each ground atom gets the maximum, over all clause
/// instances with that head, of `factor ⊗ body`; atoms without any
/// applicable instance get 0.
pub fn chain_step(prog: &Program, current: &FuzzyInterpretation) -> Result<FuzzyInterpretation, FixpointError> {
    let mut next = FuzzyInterpretation::bottom(current.universe.clone());
    for_each_instance(prog, current, |head, value| {
        if value > next.get(&head) {
            next.set(head, value);
        }
    })?;
    Ok(next)
}

/// Minimal model over the constants of the program.
pub fn minimal_model(prog: &Program) -> Result<(FuzzyInterpretation, ChainTrace), FixpointError> {
    minimal_model_over(prog, prog.constants(), DEFAULT_ITERATION_CAP)
}

/// Minimal model over an explicit universe, iterating at most `cap` steps.
pub fn minimal_model_over(
    prog: &Program,
    universe: BTreeSet<Symbol>,
    cap: usize,
) -> Result<(FuzzyInterpretation, ChainTrace), FixpointError> {
    ensure_function_free(prog)?;
    let mut steps = vec![FuzzyInterpretation::bottom(universe)];
    for i in 0..cap {
        let next = chain_step(prog, &steps[i])?;
        let done = next == steps[i];
        steps.push(next);
        if done {
            let model = steps[i].clone();
            return Ok((
                model,
                ChainTrace {
                    steps,
                    stabilized_at: i,
                },
            ));
        }
    }
    Err(FixpointError::IterationCap(cap))
}

/// Whether `interp` satisfies every clause inequality under every
/// assignment over its universe.
pub fn model_check(prog: &Program, interp: &FuzzyInterpretation) -> bool {
    let mut ok = true;
    let result = for_each_instance(prog, interp, |head, value| {
        if interp.get(&head) < value {
            ok = false;
        }
    });
    result.is_ok() && ok
}

/// The largest `v` such that `interp` is a model of `answer →v goal`.
/// Goal variables outside the answer variables are existential: each
/// solution of `answer` scores the best degree over extensions satisfying
/// the goal constraint (0 if none), and the result is the minimum score.
pub fn consequence_value(
    interp: &FuzzyInterpretation,
    goal: &Goal,
    answer: &Constraint,
) -> Result<Value, FixpointError> {
    let atom = goal.atom.as_ref().ok_or(FixpointError::NoAtom)?;
    let mut outer = goal.answer_var_set();
    outer.extend(answer.constrained_vars());
    let solutions = enumerate_solutions(answer, &outer, &interp.universe)?;
    if solutions.is_empty() {
        return Err(FixpointError::UnsatisfiableAnswer);
    }
    let mut inner_vars = atom.vars();
    inner_vars.extend(goal.constraint.constrained_vars());
    inner_vars.retain(|v| !outer.contains(v));
    let mut value = Value::one();
    for alpha in &solutions {
        let fixed = Constraint::new(
            alpha
                .iter()
                .map(|(v, c)| Equation::new(Term::var(v), Term::App(c.clone(), Vec::new())))
                .collect(),
        );
        let mut best = Value::zero();
        let mut vars = inner_vars.clone();
        vars.extend(alpha.keys().cloned());
        for beta in enumerate_solutions(&fixed.and(&goal.constraint), &vars, &interp.universe)? {
            let degree = interp.get(&GroundAtom {
                relation: atom.relation.clone(),
                args: ground(&atom.args, &beta),
            });
            best = best.max_of(&degree);
        }
        value = value.min_of(&best);
    }
    Ok(value)
}
