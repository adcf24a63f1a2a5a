//! Three-way agreement between alpha-beta search, exhaustive search and the
//! minimal-model oracle on every ground goal of a function-free program.

use std::collections::BTreeSet;

use crate::constraint::{Constraint, Equation};
use crate::fixpoint::{minimal_model_over, ChainTrace, FixpointError, FuzzyInterpretation, GroundAtom, DEFAULT_ITERATION_CAP};
use crate::program::{Atom, Goal, Program};
use crate::solver::{best_proof, best_proof_deepening, enumerate_answers, SearchOptions, Strategy};
use crate::term::{Symbol, Term, Variable};
use crate::value::Value;

/// The goal `r(X1,...,Xn) & X1 = c1 & ... & Xn = cn` with no answer variables.
pub fn ground_goal(atom: &GroundAtom) -> Goal {
    let vars: Vec<Variable> = atom.args.iter().map(|_| Variable::fresh("_A")).collect();
    let equations = vars
        .iter()
        .zip(&atom.args)
        .map(|(v, c)| Equation::new(Term::var(v), Term::App(c.clone(), Vec::new())))
        .collect();
    Goal {
        atom: Some(Atom {
            relation: atom.relation.clone(),
            args: vars,
        }),
        constraint: Constraint::new(equations),
        answer_vars: Vec::new(),
    }
}

/// Every ground atom over the program's relations and `universe`.
pub fn ground_atoms(prog: &Program, universe: &BTreeSet<Symbol>) -> Vec<GroundAtom> {
    let consts: Vec<&Symbol> = universe.iter().collect();
    let mut out = Vec::new();
    for (relation, &arity) in &prog.signature().relations {
        let count = consts.len().pow(arity as u32);
        for mut n in 0..count {
            let mut args = Vec::with_capacity(arity);
            for _ in 0..arity {
                args.push(consts[n % consts.len()].clone());
                n /= consts.len();
            }
            args.reverse();
            out.push(GroundAtom {
                relation: relation.clone(),
                args,
            });
        }
    }
    out
}

/// Depth limit that suffices at desk scale: the chain length times the
/// longest body plus one, plus one.
pub fn heuristic_depth(prog: &Program, trace: &ChainTrace) -> usize {
    let max_body = prog.clauses().iter().map(|c| c.body.len()).max().unwrap_or(0);
    trace.stabilized_at * (max_body + 1) + 1
}

#[derive(Debug, Clone)]
pub struct GoalCheck {
    pub atom: GroundAtom,
    pub oracle: Value,
    pub alphabeta: Value,
    pub exhaustive: Value,
    /// Same first answer, proof tree included, from both strategies.
    pub same_first_answer: bool,
    pub alphabeta_nodes: usize,
    pub exhaustive_nodes: usize,
    /// Every enumerated answer is at most the oracle value.
    pub sound: bool,
    pub depth: usize,
}

impl GoalCheck {
    pub fn passed(&self) -> bool {
        self.oracle == self.alphabeta
            && self.alphabeta == self.exhaustive
            && self.same_first_answer
            && self.alphabeta_nodes <= self.exhaustive_nodes
            && self.sound
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub model: FuzzyInterpretation,
    pub stabilized_at: usize,
    pub depth_bound: usize,
    pub goals: Vec<GoalCheck>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.goals.iter().all(GoalCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &GoalCheck> {
        self.goals.iter().filter(|g| !g.passed())
    }
}

/// Checks every ground goal of `prog` over its own constants. `opts`
/// supplies mode and epsilon; the depth bound is [`heuristic_depth`].
pub fn check_program(prog: &Program, opts: &SearchOptions) -> Result<CheckReport, FixpointError> {
    check_program_over(prog, prog.constants(), opts)
}

pub fn check_program_over(
    prog: &Program,
    universe: BTreeSet<Symbol>,
    opts: &SearchOptions,
) -> Result<CheckReport, FixpointError> {
    let prog = prog.clone().with_mode(opts.mode);
    let (model, trace) = minimal_model_over(&prog, universe.clone(), DEFAULT_ITERATION_CAP)?;
    let bound = heuristic_depth(&prog, &trace);
    let mut goals = Vec::new();
    for atom in ground_atoms(&prog, &universe) {
        let goal = ground_goal(&atom);
        let oracle = model.get(&atom);
        let ab_opts = SearchOptions {
            depth_limit: bound,
            strategy: Strategy::AlphaBeta,
            ..opts.clone()
        };
        let (ab, ab_stats) = best_proof_deepening(&goal, &prog, &ab_opts);
        let depth = ab_stats.depth_limit;
        let ex_opts = SearchOptions {
            depth_limit: depth,
            strategy: Strategy::Exhaustive,
            ..opts.clone()
        };
        let (ex, ex_stats) = best_proof(&goal, &prog, &ex_opts);
        let all = enumerate_answers(&goal, &prog, &ex_opts);
        let value = |a: &Option<crate::solver::Answer>| a.as_ref().map(|a| a.value.clone()).unwrap_or_else(Value::zero);
        let same_first_answer = match (&ab, &ex) {
            (Some(a), Some(b)) => a.constraint == b.constraint && a.value == b.value && a.proof == b.proof,
            (None, None) => true,
            _ => false,
        };
        goals.push(GoalCheck {
            oracle: oracle.clone(),
            alphabeta: value(&ab),
            exhaustive: value(&ex),
            same_first_answer,
            alphabeta_nodes: ab_stats.expanded(),
            exhaustive_nodes: ex_stats.expanded(),
            sound: all.answers.iter().all(|a| a.value <= oracle),
            depth,
            atom,
        });
    }
    Ok(CheckReport {
        model,
        stabilized_at: trace.stabilized_at,
        depth_bound: bound,
        goals,
    })
}
