//! The full min/max tree of a goal.
//!
//! Body atoms of a min-node are expanded independently under the min-node's
//! constraint. Because siblings may share variables, a node's value is the
//! best value among the answers it actually admits: each max-node carries
//! its set of (answer, value) pairs, and a min-node joins its children's
//! sets, dropping combinations whose constraints clash. A min-node's value
//! is therefore at most `f × aggregate(children)`, with equality whenever
//! the children share no variables.

use std::collections::BTreeMap;

use crate::constraint::{canonical_terms, Bindings};
use crate::program::{Atom, Goal, Program};
use crate::term::{Symbol, Term, Variable};
use crate::value::Value;

use super::{clause_variant, Labeler, NodeKind, ProofNode, SearchOptions};

type AnswerSet = Vec<(Bindings, Value)>;

struct Builder<'a> {
    prog: &'a Program,
    opts: &'a SearchOptions,
    labeler: Labeler,
    ancestors: Vec<(Symbol, Vec<Term>)>,
}

/// Builds the min/max tree of `goal` to `opts.depth_limit`. Max-nodes have
/// one min-child per clause of the goal relation in file order; min-nodes
/// have a `false` failure child when their constraint is unsatisfiable, a
/// success child when the clause has no body, and otherwise one max-child
/// per body atom. Goals cut by the depth limit or repeating a ground
/// ancestor goal become failure nodes with the truncation flag.
pub fn expand_minmax(goal: &Goal, prog: &Program, opts: &SearchOptions) -> ProofNode {
    let mut builder = Builder {
        prog,
        opts,
        labeler: Labeler::default(),
        ancestors: Vec::new(),
    };
    let mut incoming = Bindings::new();
    let satisfiable = !goal.constraint.is_unsatisfiable()
        && incoming.add_all(goal.constraint.equations()).unwrap_or(false);
    match (&goal.atom, satisfiable) {
        (_, false) => ProofNode::failure(goal.to_string(), false),
        (None, true) => {
            let vars: Vec<Variable> = goal.constraint.constrained_vars().into_iter().collect();
            let label = Labeler::conj(builder.labeler.bindings_on(&incoming, &vars));
            ProofNode::success(label)
        }
        (Some(atom), true) => builder.max_node(atom, &incoming, 0).0,
    }
}

fn key(b: &Bindings, vars: &[Variable]) -> String {
    let images: Vec<Term> = vars.iter().map(|v| b.resolve_var(v)).collect();
    format!("{:?}", canonical_terms(&images))
}

/// Merges duplicate answers, keeping the first occurrence with the largest
/// value.
fn dedup(set: AnswerSet, vars: &[Variable]) -> AnswerSet {
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut out: AnswerSet = Vec::new();
    for (b, v) in set {
        let k = key(&b, vars);
        match index.get(&k) {
            Some(&i) => {
                if v > out[i].1 {
                    out[i].1 = v;
                }
            }
            None => {
                index.insert(k, out.len());
                out.push((b, v));
            }
        }
    }
    out
}

fn best(set: &AnswerSet) -> Value {
    set.iter().map(|(_, v)| v.clone()).max().unwrap_or_else(Value::zero)
}

fn restricted(b: &Bindings, vars: &[Variable]) -> Bindings {
    let mut r = b.clone();
    r.restrict(&vars.iter().cloned().collect());
    r
}

impl Builder<'_> {
    fn max_node(&mut self, atom: &Atom, incoming: &Bindings, depth: usize) -> (ProofNode, AnswerSet) {
        let mut items = vec![self.labeler.atom_under(atom, incoming)];
        items.extend(self.labeler.bindings_on(incoming, &atom.args));
        let label = items.join(" & ");
        if depth >= self.opts.depth_limit {
            return (ProofNode::failure(label, true), Vec::new());
        }
        let resolved: Vec<Term> = atom.args.iter().map(|v| incoming.resolve_var(v)).collect();
        let ground = resolved.iter().all(Term::is_ground);
        if ground {
            let key = (atom.relation.clone(), resolved);
            if self.ancestors.contains(&key) {
                return (ProofNode::failure(label, true), Vec::new());
            }
            self.ancestors.push(key);
        }
        let mut children = Vec::new();
        let mut answers = Vec::new();
        for (index, _) in self.prog.clauses_for(&atom.relation) {
            let (node, set) = self.min_node(atom, incoming, index, depth);
            children.push(node);
            answers.extend(set);
        }
        if ground {
            self.ancestors.pop();
        }
        let answers = dedup(answers, &atom.args);
        let value = children.iter().map(|c| c.value.clone()).max().unwrap_or_else(Value::zero);
        debug_assert_eq!(value, best(&answers));
        let node = ProofNode {
            kind: NodeKind::Max,
            label,
            clause: None,
            value,
            truncated: false,
            children,
        };
        (node, answers)
    }

    fn min_node(&mut self, atom: &Atom, incoming: &Bindings, index: usize, depth: usize) -> (ProofNode, AnswerSet) {
        let clause = &self.prog.clauses()[index];
        let (equations, body) = clause_variant(clause, &atom.args);
        let mut solved = incoming.clone();
        let satisfiable = solved.add_all(&equations).unwrap_or(false);
        let mut items = self.labeler.bindings_on(incoming, &atom.args);
        items.extend(self.labeler.equations_under(&equations, incoming));
        for b in &body {
            let shown = self.labeler.atom_under(b, if satisfiable { &solved } else { incoming });
            items.push(shown);
        }
        let label = Labeler::conj(items);
        let mode = self.opts.mode;
        let (children, answers) = if !satisfiable {
            (vec![ProofNode::failure("false", false)], Vec::new())
        } else if body.is_empty() {
            let success = Labeler::conj(self.labeler.bindings_on(&solved, &atom.args));
            let answer = (restricted(&solved, &atom.args), clause.factor.value().clone());
            (vec![ProofNode::success(success)], vec![answer])
        } else {
            let mut children = Vec::with_capacity(body.len());
            let mut partial: AnswerSet = vec![(solved.clone(), Value::one())];
            for b in &body {
                let child_in = restricted(&solved, &b.args);
                let (child, set) = self.max_node(b, &child_in, depth + 1);
                children.push(child);
                let mut next = Vec::new();
                for (pb, pv) in &partial {
                    for (cb, cv) in &set {
                        let mut nb = pb.clone();
                        let ok = cb
                            .iter()
                            .all(|(v, t)| nb.unify(&Term::var(v), t).unwrap_or(false));
                        if ok {
                            next.push((nb, mode.combine(pv, cv)));
                        }
                    }
                }
                partial = next;
            }
            let answers = partial
                .into_iter()
                .map(|(b, v)| (restricted(&b, &atom.args), clause.factor.value().mul(&v)))
                .collect();
            (children, dedup(answers, &atom.args))
        };
        let node = ProofNode {
            kind: NodeKind::Min,
            label,
            clause: Some(index + 1),
            value: best(&answers),
            truncated: false,
            children,
        };
        (node, answers)
    }
}
