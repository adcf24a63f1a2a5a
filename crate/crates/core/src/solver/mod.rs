//! Operational semantics: goal reduction, min/max trees, answer
//! enumeration and best-proof search.
//!
//! Answers and best proofs come from a sequential depth-first search with
//! leftmost selection and clauses in file order, so every successful
//! derivation corresponds to one proof tree. The full min/max tree is built
//! separately by [`expand_minmax`].

mod engine;
mod minmax;
mod proof;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constraint::{Bindings, Constraint, ConstraintError, Equation};
use crate::program::{Atom, Goal, QuantClause, VarNamer};
use crate::term::{write_symbol, Term, Variable};
use crate::value::{CombinationMode, Value};

pub use engine::{best_proof, best_proof_deepening, enumerate_answers, enumerate_answers_deepening, Enumeration};
pub use minmax::expand_minmax;
pub use proof::{NodeKind, ProofNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exhaustive,
    AlphaBeta,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::AlphaBeta => "alphabeta",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "alphabeta" => Ok(Strategy::AlphaBeta),
            other => Err(format!("unknown strategy `{other}` (expected exhaustive or alphabeta)")),
        }
    }
}

/// Search bounds. Depth counts max-node to max-node steps: the goal atom
/// sits at depth 0 and an atom at depth `d` is reduced only if
/// `d < depth_limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub depth_limit: usize,
    pub epsilon: Value,
    pub strategy: Strategy,
    pub mode: CombinationMode,
}

pub const DEFAULT_DEPTH_LIMIT: usize = 64;

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            depth_limit: DEFAULT_DEPTH_LIMIT,
            epsilon: Value::zero(),
            strategy: Strategy::AlphaBeta,
            mode: CombinationMode::Min,
        }
    }
}

impl SearchOptions {
    pub fn with_depth(mut self, depth_limit: usize) -> Self {
        self.depth_limit = depth_limit;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_mode(mut self, mode: CombinationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_epsilon(mut self, epsilon: Value) -> Self {
        assert!(
            epsilon >= Value::zero() && epsilon < Value::one(),
            "epsilon must lie in [0,1)"
        );
        self.epsilon = epsilon;
        self
    }
}

/// Node counts of one search. Pruned branches are not counted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub max_nodes: usize,
    pub min_nodes: usize,
    pub success_nodes: usize,
    pub failure_nodes: usize,
    /// Branches abandoned because their bound could not beat the best answer.
    pub pruned: usize,
    /// Branches abandoned because their bound fell below epsilon.
    pub epsilon_pruned: usize,
    /// Goals cut because the same ground goal occurs among their ancestors.
    pub repeated_goal_cuts: usize,
    /// Whether some goal was left unexpanded by the depth limit.
    pub depth_truncated: bool,
    /// Depth limit of the run that produced these counts.
    pub depth_limit: usize,
}

impl SearchStats {
    pub fn expanded(&self) -> usize {
        self.max_nodes + self.min_nodes + self.success_nodes + self.failure_nodes
    }
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nodes {} (max {}, min {}, success {}, failure {}), pruned {}, epsilon-pruned {}, cuts {}, depth {}{}",
            self.expanded(),
            self.max_nodes,
            self.min_nodes,
            self.success_nodes,
            self.failure_nodes,
            self.pruned,
            self.epsilon_pruned,
            self.repeated_goal_cuts,
            self.depth_limit,
            if self.depth_truncated { " (truncated)" } else { "" }
        )
    }
}

/// A satisfiable answer constraint over the query variables, its value and
/// the proof tree it was read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub constraint: Constraint,
    pub value: Value,
    pub proof: ProofNode,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.constraint, self.value)
    }
}

/// Keeps the first answer of each (constraint, value) pair.
pub fn dedup_answers(answers: Vec<Answer>) -> Vec<Answer> {
    let mut seen = BTreeSet::new();
    answers
        .into_iter()
        .filter(|a| seen.insert((a.constraint.to_string(), a.value.clone())))
        .collect()
}

/// Result of one reduction step.
#[derive(Debug, Clone)]
pub struct Resolvent {
    /// Body atoms of the clause variant.
    pub body: Vec<Atom>,
    /// Goal constraint conjoined with the variant's constraint, unsolved.
    pub conjunction: Constraint,
    /// Solved form restricted to the goal and body variables; unsatisfiable
    /// when the branch fails.
    pub constraint: Constraint,
}

impl Resolvent {
    pub fn is_failure(&self) -> bool {
        self.constraint.is_unsatisfiable()
    }
}

/// A variant of `clause` whose head arguments are the variables `args`
/// and whose other variables are fresh.
pub(crate) fn clause_variant(clause: &QuantClause, args: &[Variable]) -> (Vec<Equation>, Vec<Atom>) {
    let mut map: BTreeMap<Variable, Term> = clause
        .head
        .args
        .iter()
        .zip(args)
        .map(|(h, g)| (h.clone(), Term::var(g)))
        .collect();
    for v in clause.vars() {
        map.entry(v.clone()).or_insert_with(|| Term::Var(v.fresh_variant()));
    }
    let rename = |v: &Variable| match &map[v] {
        Term::Var(w) => w.clone(),
        Term::App(..) => unreachable!("variables map to variables"),
    };
    let equations = clause
        .constraint
        .equations()
        .iter()
        .map(|e| Equation::new(e.lhs.substitute(&map), e.rhs.substitute(&map)))
        .collect();
    let body = clause
        .body
        .iter()
        .map(|a| Atom {
            relation: a.relation.clone(),
            args: a.args.iter().map(rename).collect(),
        })
        .collect();
    (equations, body)
}

/// Goal reduction followed by constraint solving. The clause variant is
/// apart from every variable of `goal`; its head is identified with the
/// goal atom. Returns `None` when the relation does not match.
pub fn reduce(goal: &Goal, clause: &QuantClause) -> Result<Option<Resolvent>, ConstraintError> {
    let Some(atom) = &goal.atom else {
        return Ok(None);
    };
    if atom.relation != clause.head.relation || atom.arity() != clause.head.arity() {
        return Ok(None);
    }
    let (equations, body) = clause_variant(clause, &atom.args);
    let conjunction = goal.constraint.and(&Constraint::new(equations));
    let mut keep = goal.vars();
    for a in &body {
        keep.extend(a.args.iter().cloned());
    }
    let constraint = match conjunction.bindings()? {
        None => Constraint::unsatisfiable(),
        Some(mut b) => {
            b.restrict(&keep);
            b.to_constraint()
        }
    };
    Ok(Some(Resolvent {
        body,
        conjunction,
        constraint,
    }))
}

/// Consistent variable naming for all labels of one tree.
#[derive(Default)]
pub(crate) struct Labeler {
    namer: VarNamer,
}

impl Labeler {
    pub(crate) fn term(&mut self, t: &Term) -> String {
        let mut out = String::new();
        self.namer.term(t, &mut out);
        out
    }

    pub(crate) fn atom(&mut self, relation: &str, args: &[Term]) -> String {
        let mut out = String::new();
        write_symbol(&mut out, relation).expect("string write");
        if !args.is_empty() {
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.namer.term(a, &mut out);
            }
            out.push(')');
        }
        out
    }

    pub(crate) fn equations<'a>(&mut self, eqs: impl IntoIterator<Item = (&'a Term, &'a Term)>) -> Vec<String> {
        eqs.into_iter()
            .map(|(l, r)| format!("{} = {}", self.term(l), self.term(r)))
            .collect()
    }

    /// `items` joined by ` & `, or `true` when empty.
    pub(crate) fn conj(items: Vec<String>) -> String {
        if items.is_empty() {
            "true".to_string()
        } else {
            items.join(" & ")
        }
    }

    /// The bindings of `vars` as equations, omitting trivial ones and
    /// hidden variables.
    pub(crate) fn bindings_on(&mut self, b: &Bindings, vars: &[Variable]) -> Vec<String> {
        let pairs: Vec<(Term, Term)> = vars
            .iter()
            .filter(|v| !v.is_hidden())
            .map(|v| (Term::var(v), b.resolve_var(v)))
            .filter(|(l, r)| l != r)
            .collect();
        self.equations(pairs.iter().map(|(l, r)| (l, r)))
    }

    /// `a` with its hidden arguments replaced by their values under `b`.
    pub(crate) fn atom_under(&mut self, a: &Atom, b: &Bindings) -> String {
        let args: Vec<Term> = a.args.iter().map(|v| show(b, &Term::var(v))).collect();
        self.atom(&a.relation, &args)
    }

    /// Equations with hidden variables replaced by their values under `b`;
    /// equations that become trivial are dropped.
    pub(crate) fn equations_under(&mut self, eqs: &[Equation], b: &Bindings) -> Vec<String> {
        let pairs: Vec<(Term, Term)> = eqs
            .iter()
            .map(|e| (show(b, &e.lhs), show(b, &e.rhs)))
            .filter(|(l, r)| l != r)
            .collect();
        self.equations(pairs.iter().map(|(l, r)| (l, r)))
    }
}

/// Replaces hidden variables bound in `b` by their images.
fn show(b: &Bindings, t: &Term) -> Term {
    match t {
        Term::Var(v) if v.is_hidden() => b.resolve_var(v),
        Term::Var(_) => t.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| show(b, a)).collect()),
    }
}
