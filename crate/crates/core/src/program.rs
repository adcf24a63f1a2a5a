//! Quantitative definite clause programs: representation, parsing,
//! normalization, validation and printing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use crate::constraint::{Constraint, ConstraintError, Equation};
use crate::syntax::{self, Pos, RawAtom, RawClause, RawItem, RawQuery, SyntaxError};
use crate::term::{write_symbol, Symbol, Term, Variable};
use crate::value::{CombinationMode, Factor, Value};

/// A relation applied to pairwise distinct variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: Symbol,
    pub args: Vec<Variable>,
}

impl Atom {
    pub fn new(relation: &str, args: Vec<Variable>) -> Atom {
        Atom {
            relation: Symbol::from(relation),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn has_distinct_args(&self) -> bool {
        let set: BTreeSet<&Variable> = self.args.iter().collect();
        set.len() == self.args.len()
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        self.args.iter().cloned().collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbol(f, &self.relation)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.relation, self.args)
    }
}

/// `head <-factor constraint & body`.
#[derive(Clone, Debug)]
pub struct QuantClause {
    pub head: Atom,
    pub factor: Factor,
    pub constraint: Constraint,
    pub body: Vec<Atom>,
    pub pos: Option<Pos>,
}

impl QuantClause {
    pub fn new(head: Atom, factor: Factor, constraint: Constraint, body: Vec<Atom>) -> QuantClause {
        QuantClause {
            head,
            factor,
            constraint,
            body,
            pos: None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut set = self.head.vars();
        set.extend(self.constraint.constrained_vars());
        for a in &self.body {
            set.extend(a.args.iter().cloned());
        }
        set
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Option<Pos>,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: Option<Pos>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            pos,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    pub fn warning(pos: Option<Pos>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            pos,
            severity: Severity::Warning,
            message: message.into(),
        }
    }

    /// `file:line:col: severity: message`.
    pub fn render(&self, file: &str) -> String {
        let pos = self.pos.unwrap_or(Pos { line: 1, col: 1 });
        format!("{file}:{}:{}: {}: {}", pos.line, pos.col, self.severity, self.message)
    }
}

impl From<SyntaxError> for Diagnostic {
    fn from(e: SyntaxError) -> Self {
        Diagnostic::error(Some(e.pos), e.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{}:{}: {}: {}", p.line, p.col, self.severity, self.message),
            None => write!(f, "{}: {}", self.severity, self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Relation and constructor arities, each fixed by first use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub relations: BTreeMap<Symbol, usize>,
    pub constructors: BTreeMap<Symbol, usize>,
}

impl Signature {
    pub fn relation_arity(&self, r: &str) -> Option<usize> {
        self.relations.get(r).copied()
    }

    /// Constants (arity-0 constructors).
    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.constructors
            .iter()
            .filter(|(_, a)| **a == 0)
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn is_function_free(&self) -> bool {
        self.constructors.values().all(|a| *a == 0)
    }

    fn note_relation(&mut self, atom: &Atom, pos: Option<Pos>, diags: &mut Vec<Diagnostic>) {
        match self.relations.get(&atom.relation) {
            Some(&n) if n != atom.arity() => diags.push(Diagnostic::error(
                pos,
                format!(
                    "relation `{}` used with arity {}, but it was first used with arity {}",
                    atom.relation,
                    atom.arity(),
                    n
                ),
            )),
            Some(_) => {}
            None => {
                self.relations.insert(atom.relation.clone(), atom.arity());
            }
        }
    }

    fn note_constraint(&mut self, c: &Constraint, pos: Option<Pos>, diags: &mut Vec<Diagnostic>) {
        c.visit_functors(&mut |sym, arity| match self.constructors.get(sym) {
            Some(&n) if n != arity => diags.push(Diagnostic::error(
                pos,
                format!("constructor `{sym}` used with arity {arity}, but it was first used with arity {n}"),
            )),
            Some(_) => {}
            None => {
                self.constructors.insert(sym.clone(), arity);
            }
        });
    }
}

/// A validated quantitative definite clause specification.
#[derive(Debug, Clone)]
pub struct Program {
    clauses: Vec<QuantClause>,
    signature: Signature,
    mode: CombinationMode,
}

impl Default for Program {
    fn default() -> Self {
        Program {
            clauses: Vec::new(),
            signature: Signature::default(),
            mode: CombinationMode::Min,
        }
    }
}

impl Program {
    /// Builds the signature from the clauses (in order) and validates.
    pub fn new(clauses: Vec<QuantClause>, mode: CombinationMode) -> Result<Program, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let signature = build_signature(&clauses, &mut diags);
        let program = Program {
            clauses,
            signature,
            mode,
        };
        diags.extend(validate(&program));
        if has_errors(&diags) {
            Err(diags)
        } else {
            Ok(program)
        }
    }

    pub fn parse(text: &str) -> Result<Program, Vec<Diagnostic>> {
        parse_program(text)
    }

    pub fn clauses(&self) -> &[QuantClause] {
        &self.clauses
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn mode(&self) -> CombinationMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: CombinationMode) -> Program {
        self.mode = mode;
        self
    }

    /// Clause indices (file order) whose head relation is `relation`.
    pub fn clauses_for<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = (usize, &'a QuantClause)> + 'a {
        self.clauses
            .iter()
            .enumerate()
            .filter(move |(_, c)| &*c.head.relation == relation)
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.signature.constants()
    }

    /// Replaces every factor via `f`; used for the all-ones classical check
    /// and factor perturbation experiments.
    pub fn map_factors(&self, mut f: impl FnMut(usize, &Factor) -> Factor) -> Program {
        let mut p = self.clone();
        for (i, c) in p.clauses.iter_mut().enumerate() {
            c.factor = f(i, &c.factor);
        }
        p
    }

    /// Appends a clause, extending the signature.
    pub fn push_clause(&mut self, clause: QuantClause) -> Result<(), Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let mut sig = self.signature.clone();
        check_clause(&clause, &mut sig, &mut diags);
        if has_errors(&diags) {
            return Err(diags);
        }
        self.signature = sig;
        self.clauses.push(clause);
        Ok(())
    }
}

fn check_clause(clause: &QuantClause, sig: &mut Signature, diags: &mut Vec<Diagnostic>) {
    sig.note_relation(&clause.head, clause.pos, diags);
    sig.note_constraint(&clause.constraint, clause.pos, diags);
    for atom in &clause.body {
        sig.note_relation(atom, clause.pos, diags);
    }
}

fn build_signature(clauses: &[QuantClause], diags: &mut Vec<Diagnostic>) -> Signature {
    let mut sig = Signature::default();
    for c in clauses {
        check_clause(c, &mut sig, diags);
    }
    sig
}

/// Checks every program invariant; an empty result means the program is
/// well formed.
pub fn validate(prog: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let rebuilt = build_signature(&prog.clauses, &mut diags);
    if diags.is_empty() && rebuilt != prog.signature {
        diags.push(Diagnostic::error(None, "signature does not match the clauses"));
    }
    for (i, c) in prog.clauses.iter().enumerate() {
        let atoms = std::iter::once(&c.head).chain(c.body.iter());
        for atom in atoms {
            if !atom.has_distinct_args() {
                diags.push(Diagnostic::error(
                    c.pos,
                    format!("clause {}: atom `{atom}` has repeated argument variables", i + 1),
                ));
            }
        }
        if c.factor.value().is_zero() || !c.factor.value().in_unit_interval() {
            diags.push(Diagnostic::error(c.pos, format!("clause {}: factor outside (0,1]", i + 1)));
        }
        if c.constraint.is_unsatisfiable() {
            diags.push(Diagnostic::warning(c.pos, format!("clause {}: constraint is unsatisfiable", i + 1)));
        }
    }
    diags
}

/// Flattens non-variable and repeated arguments of `args` into fresh
/// variables plus equations.
fn flatten_args(args: &[Term], equations: &mut Vec<Equation>) -> Vec<Variable> {
    let mut out: Vec<Variable> = Vec::with_capacity(args.len());
    for t in args {
        match t {
            Term::Var(v) if !out.contains(v) => out.push(v.clone()),
            _ => {
                let fresh = Variable::fresh("_V");
                equations.push(Equation::new(Term::var(&fresh), t.clone()));
                out.push(fresh);
            }
        }
    }
    out
}

fn flatten_atom(raw: &RawAtom, equations: &mut Vec<Equation>) -> Atom {
    Atom {
        relation: raw.relation.clone(),
        args: flatten_args(&raw.args, equations),
    }
}

/// Normalizes a parsed clause: every head/body argument that is not a
/// variable, or repeats a variable already used in the same atom, is
/// replaced by a fresh variable `Y` and the equation `Y = t` is prepended
/// to the constraint.
pub fn normalize_clause(raw: &RawClause, factor: Factor) -> QuantClause {
    let mut flat = Vec::new();
    let head = flatten_atom(&raw.head, &mut flat);
    let mut body = Vec::new();
    let mut written = Vec::new();
    for item in &raw.body {
        match item {
            RawItem::Atom(a) => body.push(flatten_atom(a, &mut flat)),
            RawItem::Equation(e, _) => written.push(e.clone()),
        }
    }
    flat.extend(written);
    QuantClause {
        head,
        factor,
        constraint: Constraint::new(flat),
        body,
        pos: Some(raw.pos),
    }
}

/// Parses, normalizes and validates a program text.
pub fn parse_program(text: &str) -> Result<Program, Vec<Diagnostic>> {
    let raws = syntax::parse_clauses(text).map_err(|errs| errs.into_iter().map(Diagnostic::from).collect::<Vec<_>>())?;
    let mut diags = Vec::new();
    let mut clauses = Vec::with_capacity(raws.len());
    for raw in &raws {
        let factor = match &raw.factor {
            None => Factor::one(),
            Some((text, pos)) => match Value::parse(text).map_err(|e| e.to_string()).and_then(|v| {
                Factor::new(v).map_err(|e| e.to_string())
            }) {
                Ok(f) => f,
                Err(msg) => {
                    diags.push(Diagnostic::error(Some(*pos), msg));
                    continue;
                }
            },
        };
        clauses.push(normalize_clause(raw, factor));
    }
    let mut sig_diags = Vec::new();
    let signature = build_signature(&clauses, &mut sig_diags);
    diags.extend(sig_diags);
    if has_errors(&diags) {
        return Err(diags);
    }
    let program = Program {
        clauses,
        signature,
        mode: CombinationMode::Min,
    };
    let v = validate(&program);
    if has_errors(&v) {
        return Err(v);
    }
    Ok(program)
}

/// A normalized goal: at most one relational atom plus a constraint.
/// `answer_vars` are the query variables answers are projected onto.
#[derive(Debug, Clone)]
pub struct Goal {
    pub atom: Option<Atom>,
    pub constraint: Constraint,
    pub answer_vars: Vec<Variable>,
}

impl Goal {
    /// A goal whose answer variables are all of its variables.
    pub fn new(atom: Option<Atom>, constraint: Constraint) -> Goal {
        let mut vars: Vec<Variable> = atom.iter().flat_map(|a| a.args.iter().cloned()).collect();
        for v in constraint.constrained_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars.retain(|v| !v.is_hidden());
        Goal {
            atom,
            constraint,
            answer_vars: vars,
        }
    }

    /// All variables of the goal.
    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut set = self.constraint.constrained_vars();
        if let Some(a) = &self.atom {
            set.extend(a.args.iter().cloned());
        }
        set.extend(self.answer_vars.iter().cloned());
        set
    }

    pub fn answer_var_set(&self) -> BTreeSet<Variable> {
        self.answer_vars.iter().cloned().collect()
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.atom, self.constraint.is_empty()) {
            (Some(a), true) => write!(f, "{a}"),
            (Some(a), false) => write!(f, "{a} & {}", self.constraint),
            (None, _) => write!(f, "{}", self.constraint),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("{0}")]
    Syntax(String),
    #[error("{0}")]
    Invalid(String),
}

impl From<ConstraintError> for QueryError {
    fn from(e: ConstraintError) -> Self {
        QueryError::Invalid(e.to_string())
    }
}

/// Completes `prog` so that a compound goal becomes a single-atom goal. A
/// goal with at most one atom is returned unchanged; otherwise a clause
/// `goalN(V...) <-1 constraint & atoms` over all goal variables is added,
/// with `goalN` chosen to avoid every existing relation name.
pub fn normalize_goal(atoms: Vec<Atom>, constraint: Constraint, prog: &Program) -> (Program, Goal) {
    normalize_goal_with_vars(atoms, constraint, prog, None)
}

fn normalize_goal_with_vars(
    atoms: Vec<Atom>,
    constraint: Constraint,
    prog: &Program,
    answer_vars: Option<Vec<Variable>>,
) -> (Program, Goal) {
    let finish = |goal: Goal| match &answer_vars {
        Some(vars) => Goal {
            answer_vars: vars.clone(),
            ..goal
        },
        None => goal,
    };
    if atoms.len() <= 1 {
        let goal = Goal::new(atoms.into_iter().next(), constraint);
        return (prog.clone(), finish(goal));
    }
    let mut vars: Vec<Variable> = Vec::new();
    for a in &atoms {
        for v in &a.args {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
    }
    for v in constraint.constrained_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let name = fresh_relation_name(prog);
    let head = Atom {
        relation: name,
        args: vars.clone(),
    };
    let clause = QuantClause::new(head.clone(), Factor::one(), constraint, atoms);
    let mut completed = prog.clone();
    completed
        .push_clause(clause)
        .expect("a fresh relation over distinct variables is always valid");
    let goal = Goal::new(Some(head), Constraint::truth());
    (completed, finish(goal))
}

fn fresh_relation_name(prog: &Program) -> Symbol {
    (0..)
        .map(|i| format!("goal{i}"))
        .find(|n| !prog.signature.relations.contains_key(n.as_str()))
        .map(|n| Symbol::from(n.as_str()))
        .expect("unbounded supply of names")
}

/// Parses a query in clause-body syntax against `prog`, flattening atom
/// arguments and completing the program if the query has several atoms.
pub fn parse_goal(text: &str, prog: &Program) -> Result<(Program, Goal), QueryError> {
    let raw = syntax::parse_query(text).map_err(|e| QueryError::Syntax(format!("{}: {}", e.pos, e.message)))?;
    goal_from_raw(&raw, prog)
}

pub fn goal_from_raw(raw: &RawQuery, prog: &Program) -> Result<(Program, Goal), QueryError> {
    let mut flat = Vec::new();
    let mut atoms = Vec::new();
    let mut written = Vec::new();
    for item in &raw.items {
        match item {
            RawItem::Atom(a) => {
                if let Some(n) = prog.signature.relation_arity(&a.relation) {
                    if n != a.args.len() {
                        return Err(QueryError::Invalid(format!(
                            "relation `{}` has arity {n}, query uses {}",
                            a.relation,
                            a.args.len()
                        )));
                    }
                }
                atoms.push(flatten_atom(a, &mut flat));
            }
            RawItem::Equation(e, _) => written.push(e.clone()),
        }
    }
    flat.extend(written);
    let constraint = Constraint::new(flat);
    let mut sig = prog.signature.clone();
    let mut diags = Vec::new();
    sig.note_constraint(&constraint, None, &mut diags);
    if let Some(d) = diags.first() {
        return Err(QueryError::Invalid(d.message.clone()));
    }
    Ok(normalize_goal_with_vars(atoms, constraint, prog, Some(raw.variables.clone())))
}

/// Assigns printable, collision-free names to a clause's variables.
#[derive(Default)]
pub(crate) struct VarNamer {
    names: HashMap<Variable, String>,
    used: BTreeSet<String>,
}

impl VarNamer {
    pub(crate) fn name(&mut self, v: &Variable) -> String {
        if let Some(n) = self.names.get(v) {
            return n.clone();
        }
        let raw = v.name();
        let mut base: String = raw.split('~').next().unwrap_or("_").to_string();
        if base == "_" || base.is_empty() {
            base = "_G".to_string();
        }
        let mut candidate = base.clone();
        let mut k = 1;
        while self.used.contains(&candidate) {
            candidate = format!("{base}{k}");
            k += 1;
        }
        self.used.insert(candidate.clone());
        self.names.insert(v.clone(), candidate.clone());
        candidate
    }

    pub(crate) fn term(&mut self, t: &Term, out: &mut String) {
        match t {
            Term::Var(v) => out.push_str(&self.name(v)),
            Term::App(sym, args) => {
                write_symbol(out, sym).expect("string write");
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        self.term(a, out);
                    }
                    out.push(')');
                }
            }
        }
    }

    pub(crate) fn atom(&mut self, a: &Atom, out: &mut String) {
        write_symbol(out, &a.relation).expect("string write");
        if !a.args.is_empty() {
            out.push('(');
            for (i, v) in a.args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&self.name(v));
            }
            out.push(')');
        }
    }
}

/// Renders a clause in concrete syntax; the output reparses to a
/// structurally identical clause.
pub fn print_clause(c: &QuantClause) -> String {
    let mut namer = VarNamer::default();
    let mut out = String::new();
    namer.atom(&c.head, &mut out);
    let mut items: Vec<String> = Vec::new();
    for e in c.constraint.equations() {
        let mut s = String::new();
        namer.term(&e.lhs, &mut s);
        s.push_str(" = ");
        namer.term(&e.rhs, &mut s);
        items.push(s);
    }
    for a in &c.body {
        let mut s = String::new();
        namer.atom(a, &mut s);
        items.push(s);
    }
    let factor_one = c.factor.value().is_one();
    match (factor_one, items.is_empty()) {
        (true, true) => {}
        (true, false) => {
            let _ = write!(out, " <- {}", items.join(" & "));
        }
        (false, true) => {
            let _ = write!(out, " <- {}", c.factor.value().to_literal());
        }
        (false, false) => {
            let _ = write!(out, " <- {} : {}", c.factor.value().to_literal(), items.join(" & "));
        }
    }
    out.push('.');
    out
}

impl fmt::Display for QuantClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_clause(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{}", print_clause(c))?;
        }
        Ok(())
    }
}

/// A renaming-invariant rendering of a clause, for structural comparison.
pub fn canonical_clause(c: &QuantClause) -> String {
    let mut order: Vec<Variable> = Vec::new();
    for v in &c.head.args {
        Term::var(v).collect_vars(&mut order);
    }
    for e in c.constraint.equations() {
        e.lhs.collect_vars(&mut order);
        e.rhs.collect_vars(&mut order);
    }
    for a in &c.body {
        for v in &a.args {
            Term::var(v).collect_vars(&mut order);
        }
    }
    let index: HashMap<&Variable, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let var = |v: &Variable| format!("V{}", index[v]);
    let term = |t: &Term| -> String {
        fn go(t: &Term, var: &dyn Fn(&Variable) -> String) -> String {
            match t {
                Term::Var(v) => var(v),
                Term::App(f, args) => format!(
                    "{f}({})",
                    args.iter().map(|a| go(a, var)).collect::<Vec<_>>().join(",")
                ),
            }
        }
        go(t, &var)
    };
    let atom = |a: &Atom| format!("{}({})", a.relation, a.args.iter().map(var).collect::<Vec<_>>().join(","));
    format!(
        "{} <-{} [{}] [{}]",
        atom(&c.head),
        c.factor,
        c.constraint
            .equations()
            .iter()
            .map(|e| format!("{}={}", term(&e.lhs), term(&e.rhs)))
            .collect::<Vec<_>>()
            .join(","),
        c.body.iter().map(atom).collect::<Vec<_>>().join(",")
    )
}

/// Structural equality up to per-clause variable renaming.
pub fn structurally_equal(a: &Program, b: &Program) -> bool {
    a.clauses.len() == b.clauses.len()
        && a.signature == b.signature
        && a.clauses
            .iter()
            .zip(&b.clauses)
            .all(|(x, y)| canonical_clause(x) == canonical_clause(y))
}
