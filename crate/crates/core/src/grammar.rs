//! Weighted phrase-structure grammars compiled to quantitative programs.
//!
//! A rule `c -> x1 ... xn @ w` becomes the clause
//! `c(S0,Sn) <- w : x1(S0,S1) & ... & xn(S(n-1),Sn)`, where a terminal
//! `"t"` at position `i` contributes the equation `S(i-1) = cons(t,Si)`
//! instead of an atom. A sentence `t1 ... tk` is parsed by querying
//! `start(S,E) & E = nil & S = cons(t1,cons(...,nil))`.
//!
//! Grammar files hold one rule per line, `lhs -> rhs @ weight .`, with
//! terminals double-quoted and `@ 1` optional. `%` starts a comment.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::constraint::{Constraint, Equation};
use crate::program::{has_errors, Atom, Diagnostic, Goal, Program, QuantClause};
use crate::solver::{enumerate_answers, NodeKind, ProofNode, SearchOptions};
use crate::syntax::{Parser, Pos, SyntaxError, Tok};
use crate::term::{write_symbol, Symbol, Term, Variable};
use crate::value::{CombinationMode, Factor, Value};

pub const CONS: &str = "cons";
pub const NIL: &str = "nil";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Category(Symbol),
    Terminal(Symbol),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Category(c) => f.write_str(c),
            Item::Terminal(t) => write!(f, "\"{t}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedRule {
    pub lhs: Symbol,
    pub rhs: Vec<Item>,
    pub weight: Factor,
    pub pos: Option<Pos>,
}

impl WeightedRule {
    pub fn new(lhs: &str, rhs: Vec<Item>, weight: Factor) -> WeightedRule {
        WeightedRule {
            lhs: Symbol::from(lhs),
            rhs,
            weight,
            pos: None,
        }
    }

    /// Rule from a compact description: bare words are categories, words
    /// in double quotes are terminals.
    pub fn from_words(lhs: &str, rhs: &[&str], weight: Factor) -> WeightedRule {
        let rhs = rhs
            .iter()
            .map(|w| match w.strip_prefix('"').and_then(|w| w.strip_suffix('"')) {
                Some(t) => Item::Terminal(Symbol::from(t)),
                None => Item::Category(Symbol::from(*w)),
            })
            .collect();
        WeightedRule::new(lhs, rhs, weight)
    }

    pub fn categories(&self) -> impl Iterator<Item = &Symbol> {
        self.rhs.iter().filter_map(|i| match i {
            Item::Category(c) => Some(c),
            Item::Terminal(_) => None,
        })
    }
}

impl fmt::Display for WeightedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        for item in &self.rhs {
            write!(f, " {item}")?;
        }
        if !self.weight.value().is_one() {
            write!(f, " @ {}", self.weight.value().to_literal())?;
        }
        f.write_str(" .")
    }
}

/// Parses a grammar file. All syntax errors are reported, one per rule.
pub fn parse_rules(text: &str) -> Result<Vec<WeightedRule>, Vec<Diagnostic>> {
    let mut parser = Parser::new(text).map_err(|e| vec![Diagnostic::from(e)])?;
    let mut rules = Vec::new();
    let mut diags = Vec::new();
    while !parser.at_eof() {
        match rule(&mut parser) {
            Ok(Ok(r)) => rules.push(r),
            Ok(Err(d)) => diags.push(d),
            Err(e) => {
                diags.push(e.into());
                parser.recover();
            }
        }
    }
    if diags.is_empty() {
        Ok(rules)
    } else {
        Err(diags)
    }
}

fn rule(p: &mut Parser) -> Result<Result<WeightedRule, Diagnostic>, SyntaxError> {
    let pos = p.pos();
    let lhs = match p.bump().0 {
        Tok::Ident(s) => s,
        _ => return Err(SyntaxError::new(pos, "expected a category name")),
    };
    p.expect(Tok::RightArrow)?;
    let mut rhs = Vec::new();
    loop {
        match p.peek().clone() {
            Tok::Ident(s) => rhs.push(Item::Category(Symbol::from(s.as_str()))),
            Tok::Str(s) => rhs.push(Item::Terminal(Symbol::from(s.as_str()))),
            Tok::Var(s) => {
                return Err(SyntaxError::new(
                    p.pos(),
                    format!("category `{s}` must start with a lowercase letter"),
                ))
            }
            _ => break,
        }
        p.bump();
    }
    let mut weight = Ok(Factor::one());
    if *p.peek() == Tok::At {
        p.bump();
        let (text, wpos) = p.number()?;
        weight = Factor::parse(&text).map_err(|e| Diagnostic::error(Some(wpos), format!("invalid weight: {e}")));
    }
    p.expect(Tok::Dot)?;
    Ok(weight.map(|weight| WeightedRule {
        lhs: Symbol::from(lhs.as_str()),
        rhs,
        weight,
        pos: Some(pos),
    }))
}

/// Problems that keep a rule set from compiling: no rules, or a category
/// used on a right-hand side without any rule defining it.
pub fn grammar_diagnostics(rules: &[WeightedRule]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if rules.is_empty() {
        diags.push(Diagnostic::error(None, "grammar has no rules"));
    }
    let defined: BTreeSet<&Symbol> = rules.iter().map(|r| &r.lhs).collect();
    for r in rules {
        for c in r.categories() {
            if !defined.contains(c) {
                diags.push(Diagnostic::error(r.pos, format!("category `{c}` is used but has no rule")));
            }
        }
    }
    diags
}

fn list_cell(head: &Symbol, tail: Term) -> Term {
    Term::App(Symbol::from(CONS), vec![Term::App(head.clone(), Vec::new()), tail])
}

/// The clause for one rule.
pub fn compile_rule(rule: &WeightedRule) -> QuantClause {
    let n = rule.rhs.len();
    let s: Vec<Variable> = (0..=n).map(|i| Variable::fresh(&format!("S{i}"))).collect();
    let mut equations = Vec::new();
    let mut body = Vec::new();
    for (i, item) in rule.rhs.iter().enumerate() {
        match item {
            Item::Category(c) => body.push(Atom {
                relation: c.clone(),
                args: vec![s[i].clone(), s[i + 1].clone()],
            }),
            Item::Terminal(t) => equations.push(Equation::new(Term::var(&s[i]), list_cell(t, Term::var(&s[i + 1])))),
        }
    }
    if n == 0 {
        let end = Variable::fresh("S1");
        equations.push(Equation::new(Term::var(&s[0]), Term::var(&end)));
        let head = Atom {
            relation: rule.lhs.clone(),
            args: vec![s[0].clone(), end],
        };
        return QuantClause::new(head, rule.weight.clone(), Constraint::new(equations), body);
    }
    let head = Atom {
        relation: rule.lhs.clone(),
        args: vec![s[0].clone(), s[n].clone()],
    };
    QuantClause::new(head, rule.weight.clone(), Constraint::new(equations), body)
}

/// A compiled grammar. The start category is the left-hand side of the
/// first rule; clause `k` of the program comes from rule `k`.
#[derive(Debug, Clone)]
pub struct Grammar {
    rules: Vec<WeightedRule>,
    program: Program,
}

impl Grammar {
    pub fn compile(rules: Vec<WeightedRule>, mode: CombinationMode) -> Result<Grammar, Vec<Diagnostic>> {
        let diags = grammar_diagnostics(&rules);
        if has_errors(&diags) {
            return Err(diags);
        }
        let clauses = rules.iter().map(compile_rule).collect();
        let program = Program::new(clauses, mode)?;
        Ok(Grammar { rules, program })
    }

    pub fn parse(text: &str) -> Result<Grammar, Vec<Diagnostic>> {
        Grammar::compile(parse_rules(text)?, CombinationMode::Min)
    }

    pub fn rules(&self) -> &[WeightedRule] {
        &self.rules
    }

    pub fn start(&self) -> &Symbol {
        &self.rules[0].lhs
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn with_mode(mut self, mode: CombinationMode) -> Grammar {
        self.program = self.program.with_mode(mode);
        self
    }
}

/// `compile_grammar` as a free function returning only the program.
pub fn compile_grammar(rules: &[WeightedRule]) -> Result<Program, Vec<Diagnostic>> {
    Ok(Grammar::compile(rules.to_vec(), CombinationMode::Min)?.program)
}

/// The query for a token sequence: `start(S,E) & E = nil & S = [tokens]`.
pub fn sentence_goal(start: &Symbol, tokens: &[Symbol]) -> Goal {
    let s = Variable::fresh("S");
    let e = Variable::fresh("E");
    let list = tokens
        .iter()
        .rev()
        .fold(Term::constant(NIL), |tail, t| list_cell(t, tail));
    let constraint = Constraint::new(vec![
        Equation::new(Term::var(&e), Term::constant(NIL)),
        Equation::new(Term::var(&s), list),
    ]);
    let atom = Atom {
        relation: start.clone(),
        args: vec![s, e],
    };
    Goal {
        atom: Some(atom),
        constraint,
        answer_vars: Vec::new(),
    }
}

/// Whitespace-separated tokens.
pub fn tokenize_sentence(sentence: &str) -> Vec<Symbol> {
    sentence.split_whitespace().map(Symbol::from).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivationChild {
    Node(Derivation),
    Token(Symbol),
}

/// A derivation tree: the rule applied at each node, with the value the
/// solver reported for that subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub category: Symbol,
    /// 1-based rule number.
    pub rule: usize,
    pub value: Value,
    pub children: Vec<DerivationChild>,
}

impl Derivation {
    /// Reads the derivation off a proof tree rooted at a max-node.
    pub fn from_proof(proof: &ProofNode, rules: &[WeightedRule]) -> Option<Derivation> {
        if proof.kind != NodeKind::Max {
            return None;
        }
        let [min] = proof.children.as_slice() else {
            return None;
        };
        let rule_no = min.clause?;
        let rule = rules.get(rule_no.checked_sub(1)?)?;
        let mut subtrees = min.children.iter().filter(|c| c.kind == NodeKind::Max);
        let mut children = Vec::new();
        for item in &rule.rhs {
            match item {
                Item::Terminal(t) => children.push(DerivationChild::Token(t.clone())),
                Item::Category(_) => children.push(DerivationChild::Node(Derivation::from_proof(subtrees.next()?, rules)?)),
            }
        }
        Some(Derivation {
            category: rule.lhs.clone(),
            rule: rule_no,
            value: min.value.clone(),
            children,
        })
    }

    /// Bottom-up value from rule weights alone: weight times the aggregate
    /// of the category children, tokens contributing nothing.
    pub fn recompute(&self, rules: &[WeightedRule], mode: CombinationMode) -> Value {
        let sub: Vec<Value> = self
            .children
            .iter()
            .filter_map(|c| match c {
                DerivationChild::Node(d) => Some(d.recompute(rules, mode)),
                DerivationChild::Token(_) => None,
            })
            .collect();
        mode.apply(&rules[self.rule - 1].weight, &sub)
    }

    /// Whether every node's reported value equals its recomputed value.
    pub fn values_consistent(&self, rules: &[WeightedRule], mode: CombinationMode) -> bool {
        self.value == self.recompute(rules, mode)
            && self.children.iter().all(|c| match c {
                DerivationChild::Node(d) => d.values_consistent(rules, mode),
                DerivationChild::Token(_) => true,
            })
    }

    pub fn tokens(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens(&self, out: &mut Vec<Symbol>) {
        for c in &self.children {
            match c {
                DerivationChild::Node(d) => d.collect_tokens(out),
                DerivationChild::Token(t) => out.push(t.clone()),
            }
        }
    }

    /// Bracketed form without values, e.g. `[s [np [n john]] ...]`.
    pub fn shape(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, false);
        out
    }

    fn write(&self, out: &mut String, values: bool) {
        out.push('[');
        write_symbol(out, &self.category).expect("string write");
        if values {
            let _ = write!(out, "@{}", self.value);
        }
        for c in &self.children {
            out.push(' ');
            match c {
                DerivationChild::Node(d) => d.write(out, values),
                DerivationChild::Token(t) => write_symbol(out, t).expect("string write"),
            }
        }
        out.push(']');
    }
}

impl fmt::Display for Derivation {
    /// Bracketed form with per-node values, e.g. `[s@4/5 [np@1/1 ...] ...]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write(&mut out, true);
        f.write_str(&out)
    }
}

#[derive(Debug, Clone)]
pub struct ParseAnalysis {
    pub tree: Derivation,
    pub value: Value,
    pub answer: Constraint,
    pub proof: ProofNode,
}

/// All analyses of `tokens` within the depth limit, best first.
pub fn parse_sentence(grammar: &Grammar, tokens: &[Symbol], opts: &SearchOptions) -> Vec<ParseAnalysis> {
    let goal = sentence_goal(grammar.start(), tokens);
    enumerate_answers(&goal, grammar.program(), opts)
        .answers
        .into_iter()
        .map(|a| ParseAnalysis {
            tree: Derivation::from_proof(&a.proof, grammar.rules()).expect("proof trees of compiled grammars are derivations"),
            value: a.value,
            answer: a.constraint,
            proof: a.proof,
        })
        .collect()
}
