//! Herbrand terms over a countably infinite variable supply.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Interned-by-value symbol for constructors and relations.
pub type Symbol = Arc<str>;

static NEXT_VARIABLE: AtomicU64 = AtomicU64::new(1);

/// A logic variable. Identity is the numeric id; the name is only a
/// display hint. Ids grow monotonically, so a smaller id is always the
/// older variable.
#[derive(Clone)]
pub struct Variable {
    id: u64,
    name: Symbol,
}

impl Variable {
    /// Issues a variable that has never been issued before.
    pub fn fresh(name: &str) -> Variable {
        let id = NEXT_VARIABLE.fetch_add(1, Ordering::Relaxed);
        Variable {
            id,
            name: Arc::from(name),
        }
    }

    /// A fresh variable whose display name is derived from `self`.
    pub fn fresh_variant(&self) -> Variable {
        let id = NEXT_VARIABLE.fetch_add(1, Ordering::Relaxed);
        let base = self.name.split('~').next().unwrap_or("_");
        Variable {
            id,
            name: Arc::from(format!("{base}~{id}")),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Variables whose name starts with `_` are never reported in answers.
    pub fn is_hidden(&self) -> bool {
        self.name.starts_with('_')
    }
}

impl PartialEq for Variable {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Variable {}

impl Hash for Variable {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Variable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.id)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A finite tree: a variable or a constructor applied to child terms.
/// Constants are constructors of arity zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Variable),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(v: &Variable) -> Term {
        Term::Var(v.clone())
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Arc::from(name), Vec::new())
    }

    pub fn app(functor: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(functor), args)
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: &Variable) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Appends variables in left-to-right first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<Variable>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut set = BTreeSet::new();
        self.visit_vars(&mut |v| {
            set.insert(v.clone());
        });
        set
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(&Variable)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    /// Visits every constructor use as `(symbol, arity)`.
    pub fn visit_functors(&self, f: &mut impl FnMut(&Symbol, usize)) {
        if let Term::App(sym, args) = self {
            f(sym, args.len());
            args.iter().for_each(|a| a.visit_functors(f));
        }
    }

    /// Simultaneous substitution of variables by terms.
    pub fn substitute(&self, map: &BTreeMap<Variable, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect())
            }
        }
    }

    pub fn rename(&self, renaming: &Renaming) -> Term {
        match self {
            Term::Var(v) => Term::Var(renaming.apply(v)),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(renaming)).collect()),
        }
    }
}

/// Lowercase-initial identifiers print bare, anything else single-quoted.
pub fn symbol_needs_quotes(sym: &str) -> bool {
    let mut chars = sym.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return true,
    }
    !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') || is_reserved_word(sym)
}

pub(crate) fn is_reserved_word(sym: &str) -> bool {
    sym == "true"
}

pub(crate) fn write_symbol(f: &mut impl fmt::Write, sym: &str) -> fmt::Result {
    if symbol_needs_quotes(sym) {
        write!(f, "'{}'", sym.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        f.write_str(sym)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(sym, args) => {
                write_symbol(f, sym)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
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
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v:?}"),
            Term::App(sym, args) if args.is_empty() => f.write_str(sym),
            Term::App(sym, args) => {
                write!(f, "{sym}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a:?}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A finite injective variable map; the identity outside its domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Renaming {
    map: BTreeMap<Variable, Variable>,
}

impl Renaming {
    pub fn identity() -> Renaming {
        Renaming::default()
    }

    /// Fails if the extension would break injectivity.
    pub fn insert(&mut self, from: Variable, to: Variable) -> Result<(), (Variable, Variable)> {
        if let Some(existing) = self.map.get(&from) {
            return if *existing == to { Ok(()) } else { Err((from, to)) };
        }
        if self.map.values().any(|v| *v == to) {
            return Err((from, to));
        }
        if from != to {
            self.map.insert(from, to);
        }
        Ok(())
    }

    pub fn apply(&self, v: &Variable) -> Variable {
        self.map.get(v).cloned().unwrap_or_else(|| v.clone())
    }

    pub fn domain(&self) -> impl Iterator<Item = &Variable> {
        self.map.keys()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Variable, &Variable)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    /// The inverse renaming, defined on the image of `self`.
    pub fn inverse(&self) -> Renaming {
        Renaming {
            map: self.map.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_variables_are_unique_and_ordered() {
        let a = Variable::fresh("X");
        let b = Variable::fresh("X");
        assert_ne!(a, b);
        assert!(a < b);
        let c = a.fresh_variant();
        assert!(c > b);
        assert!(c.name().starts_with("X~"));
        assert_eq!(c.fresh_variant().name().matches('~').count(), 1);
    }

    #[test]
    fn occurs_and_ground() {
        let x = Variable::fresh("X");
        let t = Term::app("f", vec![Term::var(&x), Term::constant("a")]);
        assert!(t.occurs(&x));
        assert!(!t.is_ground());
        assert!(Term::app("f", vec![Term::constant("a")]).is_ground());
    }

    #[test]
    fn renaming_rejects_non_injective_extension() {
        let (x, y, z) = (Variable::fresh("X"), Variable::fresh("Y"), Variable::fresh("Z"));
        let mut r = Renaming::identity();
        r.insert(x.clone(), z.clone()).unwrap();
        assert!(r.insert(y.clone(), z.clone()).is_err());
        assert_eq!(r.apply(&x), z);
        assert_eq!(r.apply(&y), y);
        assert_eq!(r.inverse().apply(&z), x);
    }

    #[test]
    fn quoting() {
        assert!(!symbol_needs_quotes("phi"));
        assert!(symbol_needs_quotes("Mary"));
        assert!(symbol_needs_quotes("true"));
        assert!(symbol_needs_quotes("a-b"));
        assert_eq!(Term::constant("Mary").to_string(), "'Mary'");
    }
}
