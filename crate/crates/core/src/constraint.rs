//! Herbrand equation constraints: solving, projection, renaming apart and
//! finite-universe solution enumeration.
//!
//! A solved constraint is an idempotent binding set: its left sides are
//! pairwise distinct variables and none of them occurs on any right side.
//! Variable-variable equations are oriented so that the older variable
//! (smaller id) is the one that gets bound.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::term::{Renaming, Symbol, Term, Variable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("constructor `{symbol}` used with arity {found}, but its arity is {expected}")]
    ArityMismatch {
        symbol: Symbol,
        expected: usize,
        found: usize,
    },
    #[error("constructor `{symbol}/{arity}` is outside the function-free fragment")]
    FragmentViolation { symbol: Symbol, arity: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Equation {
        Equation { lhs, rhs }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} = {:?}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Unsolved,
    Solved,
    Unsatisfiable,
}

/// A finite conjunction of term equations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    equations: Vec<Equation>,
    status: Status,
}

impl Default for Constraint {
    fn default() -> Self {
        Constraint::truth()
    }
}

impl Constraint {
    /// The empty conjunction, already in solved form.
    pub fn truth() -> Constraint {
        Constraint {
            equations: Vec::new(),
            status: Status::Solved,
        }
    }

    pub fn unsatisfiable() -> Constraint {
        Constraint {
            equations: Vec::new(),
            status: Status::Unsatisfiable,
        }
    }

    pub fn new(equations: Vec<Equation>) -> Constraint {
        let status = if equations.is_empty() {
            Status::Solved
        } else {
            Status::Unsolved
        };
        Constraint { equations, status }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Term, Term)>>(pairs: I) -> Constraint {
        Constraint::new(pairs.into_iter().map(|(l, r)| Equation::new(l, r)).collect())
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.status == Status::Unsatisfiable
    }

    pub fn is_solved(&self) -> bool {
        self.status == Status::Solved
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty() && self.status != Status::Unsatisfiable
    }

    /// Unsolved conjunction of both constraints.
    pub fn and(&self, other: &Constraint) -> Constraint {
        if self.is_unsatisfiable() || other.is_unsatisfiable() {
            return Constraint::unsatisfiable();
        }
        let mut equations = self.equations.clone();
        equations.extend(other.equations.iter().cloned());
        Constraint::new(equations)
    }

    pub fn with_equation(&self, lhs: Term, rhs: Term) -> Constraint {
        self.and(&Constraint::new(vec![Equation::new(lhs, rhs)]))
    }

    /// The variables constrained by this constraint.
    pub fn constrained_vars(&self) -> BTreeSet<Variable> {
        let mut set = BTreeSet::new();
        for eq in &self.equations {
            eq.lhs.visit_vars(&mut |v| {
                set.insert(v.clone());
            });
            eq.rhs.visit_vars(&mut |v| {
                set.insert(v.clone());
            });
        }
        set
    }

    pub fn visit_functors(&self, f: &mut impl FnMut(&Symbol, usize)) {
        for eq in &self.equations {
            eq.lhs.visit_functors(f);
            eq.rhs.visit_functors(f);
        }
    }

    pub fn rename(&self, renaming: &Renaming) -> Constraint {
        Constraint {
            equations: self
                .equations
                .iter()
                .map(|e| Equation::new(e.lhs.rename(renaming), e.rhs.rename(renaming)))
                .collect(),
            status: self.status,
        }
    }

    /// Syntactic unification with occurs-check. Returns the solved form or
    /// an unsatisfiable constraint.
    pub fn solve(&self) -> Result<Constraint, ConstraintError> {
        match self.status {
            Status::Unsatisfiable => return Ok(Constraint::unsatisfiable()),
            Status::Solved if self.is_canonical_solved() => return Ok(self.clone()),
            _ => {}
        }
        let mut bindings = Bindings::new();
        if bindings.add_all(&self.equations)? {
            Ok(bindings.to_constraint())
        } else {
            Ok(Constraint::unsatisfiable())
        }
    }

    fn is_canonical_solved(&self) -> bool {
        self.equations
            .windows(2)
            .all(|w| w[0].lhs < w[1].lhs)
    }

    /// The solved form as a binding set, or `None` when unsatisfiable.
    pub fn bindings(&self) -> Result<Option<Bindings>, ConstraintError> {
        let mut bindings = Bindings::new();
        if self.is_unsatisfiable() {
            return Ok(None);
        }
        Ok(bindings.add_all(&self.equations)?.then_some(bindings))
    }

    /// Solved form of `self`, restricted to `keep` with canonically named
    /// existential placeholders.
    pub fn project(&self, keep: &BTreeSet<Variable>) -> Result<Constraint, ConstraintError> {
        match self.bindings()? {
            None => Ok(Constraint::unsatisfiable()),
            Some(b) => Ok(b.project(keep)),
        }
    }

    /// Whether `self` and `other` have the same solutions on `vars`.
    pub fn equivalent_on(&self, other: &Constraint, vars: &BTreeSet<Variable>) -> Result<bool, ConstraintError> {
        let a = self.project(vars)?;
        let b = other.project(vars)?;
        Ok(canonical_key(&a, vars) == canonical_key(&b, vars))
    }
}

/// Renders the projection with placeholders replaced positionally, so
/// equal keys mean equal solution sets on `vars`.
fn canonical_key(c: &Constraint, vars: &BTreeSet<Variable>) -> Option<Vec<String>> {
    if c.is_unsatisfiable() {
        return None;
    }
    let map: BTreeMap<Variable, Term> = c
        .equations
        .iter()
        .filter_map(|e| e.lhs.as_var().map(|v| (v.clone(), e.rhs.clone())))
        .collect();
    let images: Vec<Term> = vars
        .iter()
        .map(|v| map.get(v).cloned().unwrap_or_else(|| Term::var(v)))
        .collect();
    Some(canonical_terms(&images).iter().map(|t| format!("{t:?}")).collect())
}

/// Renames every variable in `terms` to a positional placeholder in
/// first-occurrence order.
pub(crate) fn canonical_terms(terms: &[Term]) -> Vec<Term> {
    let mut order: Vec<Variable> = Vec::new();
    for t in terms {
        t.collect_vars(&mut order);
    }
    let map: BTreeMap<Variable, Term> = order
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), Term::constant(&format!("${i}"))))
        .collect();
    terms.iter().map(|t| t.substitute(&map)).collect()
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unsatisfiable() {
            return f.write_str("false");
        }
        if self.equations.is_empty() {
            return f.write_str("true");
        }
        for (i, e) in self.equations.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.status, self.equations)
    }
}

/// An idempotent substitution: the working representation of a solved
/// constraint.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    map: BTreeMap<Variable, Term>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: &Variable) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.map.iter()
    }

    /// Applies the substitution; the result contains no bound variable.
    pub fn resolve(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.resolve(a)).collect()),
        }
    }

    pub fn resolve_var(&self, v: &Variable) -> Term {
        self.map.get(v).cloned().unwrap_or_else(|| Term::var(v))
    }

    pub fn add_all(&mut self, equations: &[Equation]) -> Result<bool, ConstraintError> {
        for e in equations {
            if !self.unify(&e.lhs, &e.rhs)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Adds `s = t`. Returns `Ok(false)` on a clash or occurs-check failure,
    /// leaving `self` in an unspecified (but idempotent) state.
    pub fn unify(&mut self, s: &Term, t: &Term) -> Result<bool, ConstraintError> {
        let mut work = vec![(self.resolve(s), self.resolve(t))];
        while let Some((a, b)) = work.pop() {
            let a = self.resolve(&a);
            let b = self.resolve(&b);
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    if x == y {
                        continue;
                    }
                    // the older variable is bound
                    let (old, young) = if x < y { (x, y) } else { (y, x) };
                    self.bind(old, Term::Var(young));
                }
                (Term::Var(x), other) | (other, Term::Var(x)) => {
                    if other.occurs(&x) {
                        return Ok(false);
                    }
                    self.bind(x, other);
                }
                (Term::App(f, fa), Term::App(g, ga)) => {
                    if f != g {
                        return Ok(false);
                    }
                    if fa.len() != ga.len() {
                        return Err(ConstraintError::ArityMismatch {
                            symbol: f,
                            expected: fa.len(),
                            found: ga.len(),
                        });
                    }
                    work.extend(fa.into_iter().zip(ga));
                }
            }
        }
        Ok(true)
    }

    fn bind(&mut self, v: Variable, t: Term) {
        let single: BTreeMap<Variable, Term> = [(v.clone(), t.clone())].into_iter().collect();
        for image in self.map.values_mut() {
            if image.occurs(&v) {
                *image = image.substitute(&single);
            }
        }
        self.map.insert(v, t);
    }

    /// Drops bindings of variables outside `keep`. Sound because a bound
    /// variable never occurs in any image.
    pub fn restrict(&mut self, keep: &BTreeSet<Variable>) {
        self.map.retain(|v, _| keep.contains(v));
    }

    pub fn to_constraint(&self) -> Constraint {
        Constraint {
            equations: self
                .map
                .iter()
                .map(|(v, t)| Equation::new(Term::var(v), t.clone()))
                .collect(),
            status: Status::Solved,
        }
    }

    /// Projection onto `keep` (in id order). A keep variable whose image is
    /// a bare existential variable becomes that variable's representative;
    /// remaining existentials are renamed `_1`, `_2`, ... in first-occurrence
    /// order.
    pub fn project(&self, keep: &BTreeSet<Variable>) -> Constraint {
        let mut images: Vec<(Variable, Term)> = keep
            .iter()
            .map(|v| (v.clone(), self.resolve_var(v)))
            .collect();
        let mut representative: BTreeMap<Variable, Term> = BTreeMap::new();
        for (v, img) in &images {
            if let Term::Var(y) = img {
                if !keep.contains(y) && !representative.contains_key(y) {
                    representative.insert(y.clone(), Term::var(v));
                }
            }
        }
        for (_, img) in images.iter_mut() {
            *img = img.substitute(&representative);
        }
        let mut existentials: Vec<Variable> = Vec::new();
        for (_, img) in &images {
            img.visit_vars(&mut |y| {
                if !keep.contains(y) && !existentials.contains(y) {
                    existentials.push(y.clone());
                }
            });
        }
        let placeholders: BTreeMap<Variable, Term> = existentials
            .iter()
            .enumerate()
            .map(|(i, y)| (y.clone(), Term::Var(Variable::fresh(&format!("_{}", i + 1)))))
            .collect();
        let equations = images
            .into_iter()
            .filter(|(v, img)| img.as_var() != Some(v))
            .map(|(v, img)| Equation::new(Term::Var(v), img.substitute(&placeholders)))
            .collect();
        Constraint {
            equations,
            status: Status::Solved,
        }
    }
}

impl fmt::Debug for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.map.iter()).finish()
    }
}

/// Solves `φ & φ′` and restricts the result to `keep`.
pub fn conjoin_project(
    phi: &Constraint,
    phi_prime: &Constraint,
    keep: &BTreeSet<Variable>,
) -> Result<Constraint, ConstraintError> {
    phi.and(phi_prime).project(keep)
}

/// Maps every variable of `vars` that also lies in `avoid` to a fresh
/// variable; the others are left alone.
pub fn rename_apart(vars: &BTreeSet<Variable>, avoid: &BTreeSet<Variable>) -> Renaming {
    let mut renaming = Renaming::identity();
    for v in vars.intersection(avoid) {
        renaming
            .insert(v.clone(), v.fresh_variant())
            .expect("fresh variables never collide");
    }
    renaming
}

/// A total map from variables to constants.
pub type Assignment = BTreeMap<Variable, Symbol>;

/// Every assignment of `vars` to constants of `universe` that extends to a
/// solution of `phi`, where the variables of `phi` outside `vars` also
/// range over `universe`. Equations are checked directly on ground
/// instances rather than through unification.
pub fn enumerate_solutions(
    phi: &Constraint,
    vars: &BTreeSet<Variable>,
    universe: &BTreeSet<Symbol>,
) -> Result<Vec<Assignment>, ConstraintError> {
    let mut violation = None;
    phi.visit_functors(&mut |sym, arity| {
        if arity > 0 && violation.is_none() {
            violation = Some(ConstraintError::FragmentViolation {
                symbol: sym.clone(),
                arity,
            });
        }
    });
    if let Some(err) = violation {
        return Err(err);
    }
    if phi.is_unsatisfiable() {
        return Ok(Vec::new());
    }

    let mut order: Vec<Variable> = Vec::new();
    for e in phi.equations() {
        e.lhs.collect_vars(&mut order);
        e.rhs.collect_vars(&mut order);
    }
    for v in vars {
        if !order.contains(v) {
            order.push(v.clone());
        }
    }
    let position: BTreeMap<&Variable, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    // equations become checkable once their last variable is assigned
    let mut checks: Vec<Vec<&Equation>> = vec![Vec::new(); order.len() + 1];
    for e in phi.equations() {
        let mut last = None;
        e.lhs
            .visit_vars(&mut |v| last = last.max(Some(position[v])));
        e.rhs
            .visit_vars(&mut |v| last = last.max(Some(position[v])));
        match last {
            Some(i) => checks[i].push(e),
            None => checks[order.len()].push(e),
        }
    }

    let ground_ok = checks[order.len()].iter().all(|e| e.lhs == e.rhs);
    let mut found: BTreeSet<Vec<Symbol>> = BTreeSet::new();
    if ground_ok {
        let values: Vec<&Symbol> = universe.iter().collect();
        let mut current: Vec<Option<&Symbol>> = vec![None; order.len()];
        search(&order, &values, &checks, 0, &mut current, vars, &mut found);
    }
    let keep: Vec<&Variable> = vars.iter().collect();
    Ok(found
        .into_iter()
        .map(|row| keep.iter().map(|v| (*v).clone()).zip(row).collect())
        .collect())
}

fn ground_value<'a>(t: &'a Term, order: &[Variable], current: &[Option<&'a Symbol>]) -> Option<&'a Symbol> {
    match t {
        Term::Var(v) => {
            let i = order.iter().position(|w| w == v)?;
            current[i]
        }
        Term::App(sym, _) => Some(sym),
    }
}

fn search<'a>(
    order: &[Variable],
    values: &[&'a Symbol],
    checks: &[Vec<&'a Equation>],
    depth: usize,
    current: &mut Vec<Option<&'a Symbol>>,
    vars: &BTreeSet<Variable>,
    found: &mut BTreeSet<Vec<Symbol>>,
) {
    if depth == order.len() {
        let row = order
            .iter()
            .zip(current.iter())
            .filter(|(v, _)| vars.contains(*v))
            .map(|(v, c)| (v.clone(), (*c).expect("assigned").clone()))
            .collect::<BTreeMap<_, _>>();
        found.insert(row.into_values().collect());
        return;
    }
    for value in values {
        current[depth] = Some(value);
        let ok = checks[depth].iter().all(|e| {
            ground_value(&e.lhs, order, current) == ground_value(&e.rhs, order, current)
        });
        if ok {
            search(order, values, checks, depth + 1, current, vars, found);
        }
    }
    current[depth] = None;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str) -> Term {
        Term::constant(name)
    }

    fn universe(names: &[&str]) -> BTreeSet<Symbol> {
        names.iter().map(|n| Symbol::from(*n)).collect()
    }

    #[test]
    fn solve_single_binding() {
        let x = Variable::fresh("X");
        let phi = Constraint::from_pairs([(Term::var(&x), c("phi"))]);
        let solved = phi.solve().unwrap();
        assert!(solved.is_solved());
        assert_eq!(solved.to_string(), "X = phi");
    }

    #[test]
    fn solve_clash_is_unsatisfiable() {
        let x = Variable::fresh("X");
        let phi = Constraint::from_pairs([(Term::var(&x), c("psi")), (Term::var(&x), c("phi"))]);
        assert!(phi.solve().unwrap().is_unsatisfiable());
    }

    #[test]
    fn solve_trivial_equation_is_empty() {
        let x = Variable::fresh("X");
        let solved = Constraint::from_pairs([(Term::var(&x), Term::var(&x))]).solve().unwrap();
        assert!(solved.is_solved());
        assert!(solved.equations().is_empty());
    }

    #[test]
    fn solve_composes_bindings() {
        let x = Variable::fresh("X");
        let y = Variable::fresh("Y");
        let phi = Constraint::from_pairs([
            (Term::var(&x), Term::app("f", vec![Term::var(&y)])),
            (Term::var(&y), c("a")),
        ]);
        let solved = phi.solve().unwrap();
        assert_eq!(solved.to_string(), "X = f(a) & Y = a");
    }

    #[test]
    fn occurs_check() {
        let x = Variable::fresh("X");
        let phi = Constraint::from_pairs([(Term::var(&x), Term::app("f", vec![Term::var(&x)]))]);
        assert!(phi.solve().unwrap().is_unsatisfiable());
    }

    #[test]
    fn arity_mismatch_is_an_error_not_unsat() {
        let phi = Constraint::from_pairs([(
            Term::app("f", vec![c("a")]),
            Term::app("f", vec![c("a"), c("b")]),
        )]);
        assert!(matches!(phi.solve(), Err(ConstraintError::ArityMismatch { .. })));
    }

    #[test]
    fn older_variable_is_bound() {
        let x = Variable::fresh("X");
        let y = Variable::fresh("Y");
        let solved = Constraint::from_pairs([(Term::var(&y), Term::var(&x))]).solve().unwrap();
        assert_eq!(solved.equations()[0].lhs, Term::var(&x));
        assert_eq!(solved.equations()[0].rhs, Term::var(&y));
    }

    #[test]
    fn conjoin_project_examples() {
        let x = Variable::fresh("X");
        let keep: BTreeSet<Variable> = [x.clone()].into();
        let phi = Constraint::from_pairs([(Term::var(&x), c("phi"))]);
        let psi = Constraint::from_pairs([(Term::var(&x), c("psi"))]);
        assert_eq!(conjoin_project(&phi, &phi, &keep).unwrap().to_string(), "X = phi");
        assert!(conjoin_project(&psi, &phi, &keep).unwrap().is_unsatisfiable());
        let empty = conjoin_project(&Constraint::truth(), &Constraint::truth(), &keep).unwrap();
        assert!(empty.is_solved() && empty.equations().is_empty());
    }

    #[test]
    fn projection_uses_representatives_and_placeholders() {
        let x = Variable::fresh("X");
        let z = Variable::fresh("Z");
        let y = Variable::fresh("Y");
        let w = Variable::fresh("W");
        // X = Y, Z = g(Y, W)
        let phi = Constraint::from_pairs([
            (Term::var(&x), Term::var(&y)),
            (Term::var(&z), Term::app("g", vec![Term::var(&y), Term::var(&w)])),
        ]);
        let keep: BTreeSet<Variable> = [x.clone(), z.clone()].into();
        let projected = phi.project(&keep).unwrap();
        assert_eq!(projected.to_string(), "Z = g(X,_1)");
    }

    #[test]
    fn rename_apart_only_touches_avoided() {
        let x = Variable::fresh("X");
        let y = Variable::fresh("Y");
        let r = rename_apart(&[x.clone()].into(), &[x.clone()].into());
        assert_ne!(r.apply(&x), x);
        let r = rename_apart(&[x.clone(), y.clone()].into(), &BTreeSet::new());
        assert!(r.is_identity());
    }

    #[test]
    fn enumerate_examples() {
        let x = Variable::fresh("X");
        let y = Variable::fresh("Y");
        let phi = Constraint::from_pairs([(Term::var(&x), c("phi"))]);
        let sols = enumerate_solutions(&phi, &[x.clone()].into(), &universe(&["phi", "psi"])).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(&*sols[0][&x], "phi");

        let sols = enumerate_solutions(&Constraint::truth(), &[x.clone()].into(), &universe(&["a", "b"])).unwrap();
        assert_eq!(sols.len(), 2);

        let eq = Constraint::from_pairs([(Term::var(&x), Term::var(&y))]);
        let sols = enumerate_solutions(&eq, &[x.clone(), y.clone()].into(), &universe(&["a", "b"])).unwrap();
        assert_eq!(sols.len(), 2);
        assert!(sols.iter().all(|s| s[&x] == s[&y]));
    }

    #[test]
    fn enumerate_rejects_function_symbols() {
        let x = Variable::fresh("X");
        let phi = Constraint::from_pairs([(Term::var(&x), Term::app("f", vec![c("a")]))]);
        assert!(matches!(
            enumerate_solutions(&phi, &[x].into(), &universe(&["a"])),
            Err(ConstraintError::FragmentViolation { .. })
        ));
    }

    #[test]
    fn equivalence_on_vars() {
        let x = Variable::fresh("X");
        let y = Variable::fresh("Y");
        let a = Constraint::from_pairs([(Term::var(&x), Term::var(&y)), (Term::var(&y), c("a"))]);
        let b = Constraint::from_pairs([(Term::var(&x), c("a"))]);
        assert!(a.equivalent_on(&b, &[x.clone()].into()).unwrap());
        assert!(!a.equivalent_on(&Constraint::truth(), &[x].into()).unwrap());
    }
}
