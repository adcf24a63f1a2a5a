//! Sequential depth-first search over derivations.
//!
//! A state holds the solved constraint, the pending atoms (leftmost on top)
//! and an upper bound on the value of any proof tree completing it. Under
//! `min` the bound is the smallest path product seen so far, because
//! `f × min(a, b) = min(f × a, f × b)` makes a tree's value the minimum
//! over its leaf paths of the product of factors along the path. Under
//! `product` the bound is the product of all factors applied so far.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::constraint::Bindings;
use crate::program::{Atom, Goal, Program};
use crate::term::{Symbol, Term, Variable};
use crate::value::{CombinationMode, Factor, Value};

use super::{clause_variant, Answer, Labeler, NodeKind, ProofNode, SearchOptions, SearchStats, Strategy};

struct Ancestor {
    relation: Symbol,
    args: Vec<Term>,
    prev: Option<Rc<Ancestor>>,
}

fn has_ancestor(mut cur: &Option<Rc<Ancestor>>, relation: &Symbol, args: &[Term]) -> bool {
    while let Some(a) = cur {
        if a.relation == *relation && a.args == args {
            return true;
        }
        cur = &a.prev;
    }
    false
}

#[derive(Clone)]
struct Pending {
    id: usize,
    atom: Atom,
    depth: usize,
    /// Product of the factors on the path from the root.
    ceiling: Value,
    ancestors: Option<Rc<Ancestor>>,
}

/// One reduction, kept for rebuilding the proof tree of a success.
struct Step {
    node: usize,
    relation: Symbol,
    selected: Vec<Term>,
    clause: usize,
    factor: Factor,
    head: Vec<(Term, Term)>,
    body: Vec<(usize, Symbol, Vec<Term>)>,
    prev: Option<Rc<Step>>,
}

#[derive(Clone)]
struct State {
    bindings: Bindings,
    pending: Vec<Pending>,
    bound: Value,
    trail: Option<Rc<Step>>,
}

struct Search<'a> {
    prog: &'a Program,
    opts: &'a SearchOptions,
    answer_vars: BTreeSet<Variable>,
    stats: SearchStats,
    next_id: usize,
    best: Option<Value>,
    prune_by_best: bool,
}

impl<'a> Search<'a> {
    fn new(prog: &'a Program, opts: &'a SearchOptions, goal: &Goal, prune_by_best: bool) -> Search<'a> {
        Search {
            prog,
            opts,
            answer_vars: goal.answer_var_set(),
            stats: SearchStats {
                depth_limit: opts.depth_limit,
                ..SearchStats::default()
            },
            next_id: 1,
            best: None,
            prune_by_best,
        }
    }

    /// Runs the search, calling `found` on each success in discovery order.
    fn run(&mut self, goal: &Goal, mut found: impl FnMut(&mut Self, Answer)) {
        let mut bindings = Bindings::new();
        if goal.constraint.is_unsatisfiable() || !bindings.add_all(goal.constraint.equations()).unwrap_or(false) {
            self.stats.failure_nodes += 1;
            return;
        }
        let Some(atom) = &goal.atom else {
            self.stats.success_nodes += 1;
            let constraint = bindings.project(&self.answer_vars);
            let proof = ProofNode::success(constraint.to_string());
            found(
                self,
                Answer {
                    constraint,
                    value: Value::one(),
                    proof,
                },
            );
            return;
        };
        let root = Pending {
            id: 0,
            atom: atom.clone(),
            depth: 0,
            ceiling: Value::one(),
            ancestors: None,
        };
        let mut keep = self.answer_vars.clone();
        keep.extend(atom.args.iter().cloned());
        bindings.restrict(&keep);
        let mut stack = vec![State {
            bindings,
            pending: vec![root],
            bound: Value::one(),
            trail: None,
        }];
        while let Some(state) = stack.pop() {
            if state.bound < self.opts.epsilon {
                self.stats.epsilon_pruned += 1;
                continue;
            }
            if self.prune_by_best {
                if let Some(best) = &self.best {
                    if state.bound <= *best {
                        self.stats.pruned += 1;
                        continue;
                    }
                }
            }
            if state.pending.is_empty() {
                self.stats.success_nodes += 1;
                let answer = self.answer(&state);
                found(self, answer);
                continue;
            }
            let children = self.expand(state);
            stack.extend(children.into_iter().rev());
        }
    }

    fn expand(&mut self, mut state: State) -> Vec<State> {
        let top = state.pending.pop().expect("nonempty");
        self.stats.max_nodes += 1;
        let selected: Vec<Term> = top.atom.args.iter().map(|v| state.bindings.resolve_var(v)).collect();
        if top.depth >= self.opts.depth_limit {
            self.stats.failure_nodes += 1;
            self.stats.depth_truncated = true;
            return Vec::new();
        }
        let mut ancestors = top.ancestors.clone();
        if selected.iter().all(Term::is_ground) {
            if has_ancestor(&ancestors, &top.atom.relation, &selected) {
                self.stats.failure_nodes += 1;
                self.stats.repeated_goal_cuts += 1;
                return Vec::new();
            }
            ancestors = Some(Rc::new(Ancestor {
                relation: top.atom.relation.clone(),
                args: selected.clone(),
                prev: ancestors,
            }));
        }
        let mut children = Vec::new();
        for (index, clause) in self.prog.clauses_for(&top.atom.relation) {
            self.stats.min_nodes += 1;
            let (equations, body) = clause_variant(clause, &top.atom.args);
            let mut bindings = state.bindings.clone();
            // constructor arities are consistent in validated programs and
            // goals; a mismatch can only arise from a hand-built goal and is
            // treated as a clash
            if !bindings.add_all(&equations).unwrap_or(false) {
                self.stats.failure_nodes += 1;
                continue;
            }
            let ceiling = top.ceiling.mul(clause.factor.value());
            let bound = match self.opts.mode {
                CombinationMode::Min => state.bound.min_of(&ceiling),
                CombinationMode::Product => state.bound.mul(clause.factor.value()),
            };
            let head = top
                .atom
                .args
                .iter()
                .map(|v| (Term::var(v), bindings.resolve_var(v)))
                .collect();
            let mut pending = state.pending.clone();
            let mut body_info = Vec::with_capacity(body.len());
            for atom in &body {
                let id = self.next_id;
                self.next_id += 1;
                let resolved = atom.args.iter().map(|v| bindings.resolve_var(v)).collect();
                body_info.push((id, atom.relation.clone(), resolved));
            }
            for (atom, (id, _, _)) in body.into_iter().zip(&body_info).rev() {
                pending.push(Pending {
                    id: *id,
                    atom,
                    depth: top.depth + 1,
                    ceiling: ceiling.clone(),
                    ancestors: ancestors.clone(),
                });
            }
            let mut keep = self.answer_vars.clone();
            for p in &pending {
                keep.extend(p.atom.args.iter().cloned());
            }
            bindings.restrict(&keep);
            let step = Step {
                node: top.id,
                relation: top.atom.relation.clone(),
                selected: selected.clone(),
                clause: index + 1,
                factor: clause.factor.clone(),
                head,
                body: body_info,
                prev: state.trail.clone(),
            };
            children.push(State {
                bindings,
                pending,
                bound,
                trail: Some(Rc::new(step)),
            });
        }
        if children.is_empty() {
            // no clause applies, or every variant clashed
            self.stats.failure_nodes += usize::from(self.prog.clauses_for(&top.atom.relation).next().is_none());
        }
        children
    }

    fn answer(&self, state: &State) -> Answer {
        let constraint = state.bindings.project(&self.answer_vars);
        let mut steps: BTreeMap<usize, &Step> = BTreeMap::new();
        let mut cur = &state.trail;
        while let Some(s) = cur {
            steps.insert(s.node, s);
            cur = &s.prev;
        }
        let mut labeler = Labeler::default();
        let proof = build(0, &steps, self.opts.mode, &mut labeler);
        debug_assert_eq!(proof.value, state.bound, "proof value disagrees with the search bound");
        Answer {
            constraint,
            value: state.bound.clone(),
            proof,
        }
    }
}

fn build(node: usize, steps: &BTreeMap<usize, &Step>, mode: CombinationMode, labeler: &mut Labeler) -> ProofNode {
    let step = steps[&node];
    let head_eqs: Vec<String> = labeler.equations(
        step.head
            .iter()
            .filter(|(l, r)| l != r && !l.as_var().is_some_and(Variable::is_hidden))
            .map(|(l, r)| (l, r)),
    );
    let children: Vec<ProofNode> = if step.body.is_empty() {
        vec![ProofNode::success(Labeler::conj(head_eqs.clone()))]
    } else {
        step.body.iter().map(|(id, _, _)| build(*id, steps, mode, labeler)).collect()
    };
    let mut items = head_eqs;
    for (_, relation, args) in &step.body {
        items.push(labeler.atom(relation, args));
    }
    let value = mode.apply(&step.factor, children.iter().map(|c| &c.value));
    let min = ProofNode {
        kind: NodeKind::Min,
        label: Labeler::conj(items),
        clause: Some(step.clause),
        value: value.clone(),
        truncated: false,
        children,
    };
    ProofNode {
        kind: NodeKind::Max,
        label: labeler.atom(&step.relation, &step.selected),
        clause: None,
        value,
        truncated: false,
        children: vec![min],
    }
}

/// All answers within the depth limit, sorted by value descending with
/// ties in discovery order. Only epsilon pruning applies; the strategy is
/// ignored.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub answers: Vec<Answer>,
    pub stats: SearchStats,
}

impl Enumeration {
    /// Whether the depth limit cut some branch, so deeper search may find more.
    pub fn truncated(&self) -> bool {
        self.stats.depth_truncated
    }
}

pub fn enumerate_answers(goal: &Goal, prog: &Program, opts: &SearchOptions) -> Enumeration {
    let mut search = Search::new(prog, opts, goal, false);
    let mut answers = Vec::new();
    search.run(goal, |_, a| answers.push(a));
    answers.sort_by(|a, b| b.value.cmp(&a.value));
    Enumeration {
        answers,
        stats: search.stats,
    }
}

/// A maximum-value answer (the first in tie order) within the depth limit.
pub fn best_proof(goal: &Goal, prog: &Program, opts: &SearchOptions) -> (Option<Answer>, SearchStats) {
    let prune = opts.strategy == Strategy::AlphaBeta;
    let mut search = Search::new(prog, opts, goal, prune);
    let mut best: Option<Answer> = None;
    search.run(goal, |s, a| {
        if best.as_ref().map_or(true, |b| a.value > b.value) {
            s.best = Some(a.value.clone());
            best = Some(a);
        }
    });
    (best, search.stats)
}

/// [`best_proof`] at depth limits 1, 2, 4, … up to `opts.depth_limit`,
/// stopping at the first run that no depth cut affected. Returns the
/// result and the statistics of that final run.
pub fn best_proof_deepening(goal: &Goal, prog: &Program, opts: &SearchOptions) -> (Option<Answer>, SearchStats) {
    let mut depth = opts.depth_limit.min(1);
    loop {
        let run_opts = SearchOptions {
            depth_limit: depth,
            ..opts.clone()
        };
        let (answer, stats) = best_proof(goal, prog, &run_opts);
        if !stats.depth_truncated || depth >= opts.depth_limit {
            return (answer, stats);
        }
        depth = (depth * 2).min(opts.depth_limit);
    }
}

/// [`enumerate_answers`] with the same deepening schedule as
/// [`best_proof_deepening`].
pub fn enumerate_answers_deepening(goal: &Goal, prog: &Program, opts: &SearchOptions) -> Enumeration {
    let mut depth = opts.depth_limit.min(1);
    loop {
        let run_opts = SearchOptions {
            depth_limit: depth,
            ..opts.clone()
        };
        let result = enumerate_answers(goal, prog, &run_opts);
        if !result.truncated() || depth >= opts.depth_limit {
            return result;
        }
        depth = (depth * 2).min(opts.depth_limit);
    }
}
