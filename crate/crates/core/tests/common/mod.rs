//! Seeded random function-free programs and reference evaluators that work
//! on the generator's own representation, independent of the library's
//! parser and oracle.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use qclp::value::{CombinationMode, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CONSTANTS: [&str; 4] = ["a", "b", "c", "d"];
pub const RELATIONS: [&str; 3] = ["p", "q", "r"];
pub const VARIABLES: [&str; 3] = ["X", "Y", "Z"];

/// Chance that a body variable is left free of the head.
pub const LOCAL_VARIABLE_RATE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GTerm {
    Var(usize),
    Const(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GAtom {
    pub rel: usize,
    pub args: Vec<GTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GClause {
    pub head: GAtom,
    /// Factor in tenths, 1..=10.
    pub tenths: i64,
    pub eqs: Vec<(GTerm, GTerm)>,
    pub body: Vec<GAtom>,
}

#[derive(Debug, Clone)]
pub struct GenProgram {
    pub n_consts: usize,
    pub arities: Vec<usize>,
    pub clauses: Vec<GClause>,
}

pub type GroundKey = (usize, Vec<usize>);

fn term_text(t: GTerm) -> &'static str {
    match t {
        GTerm::Var(i) => VARIABLES[i],
        GTerm::Const(i) => CONSTANTS[i],
    }
}

fn atom_text(a: &GAtom) -> String {
    let mut s = RELATIONS[a.rel].to_string();
    if !a.args.is_empty() {
        let args: Vec<&str> = a.args.iter().map(|t| term_text(*t)).collect();
        let _ = write!(s, "({})", args.join(","));
    }
    s
}

pub fn ground_text(key: &GroundKey) -> String {
    let mut s = RELATIONS[key.0].to_string();
    if !key.1.is_empty() {
        let args: Vec<&str> = key.1.iter().map(|&c| CONSTANTS[c]).collect();
        let _ = write!(s, "({})", args.join(","));
    }
    s
}

impl GenProgram {
    /// Draws a program: up to 4 constants, up to 3 relations of arity at
    /// most 2, up to 10 clauses with bodies of at most 2 atoms, factors in
    /// tenths.
    pub fn generate(seed: u64) -> GenProgram {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_consts = rng.gen_range(1..=CONSTANTS.len());
        let n_rels = rng.gen_range(1..=RELATIONS.len());
        let arities: Vec<usize> = (0..n_rels).map(|_| rng.gen_range(0..=2)).collect();
        let n_clauses = rng.gen_range(1..=10);
        let term = |rng: &mut ChaCha8Rng, var_bias: f64| {
            if rng.gen_bool(var_bias) {
                GTerm::Var(rng.gen_range(0..VARIABLES.len()))
            } else {
                GTerm::Const(rng.gen_range(0..n_consts))
            }
        };
        let atom = |rng: &mut ChaCha8Rng, var_bias: f64| {
            let rel = rng.gen_range(0..n_rels);
            let args = (0..arities[rel]).map(|_| term(rng, var_bias)).collect();
            GAtom { rel, args }
        };
        let mut clauses = Vec::new();
        for _ in 0..n_clauses {
            let body_len = *[0, 0, 1, 1, 2].choose(&mut rng).unwrap();
            let head = atom(&mut rng, if body_len == 0 { 0.3 } else { 0.8 });
            let head_vars: Vec<usize> = head
                .args
                .iter()
                .filter_map(|t| match t {
                    GTerm::Var(i) => Some(*i),
                    GTerm::Const(_) => None,
                })
                .collect();
            // Body variables mostly come from the head; open recursive
            // subgoals make depth-first search exponential in the depth.
            let body = (0..body_len)
                .map(|_| {
                    let mut a = atom(&mut rng, 0.8);
                    for t in &mut a.args {
                        if let GTerm::Var(_) = t {
                            if rng.gen_bool(LOCAL_VARIABLE_RATE) {
                                continue;
                            }
                            *t = match head_vars.choose(&mut rng) {
                                Some(&v) => GTerm::Var(v),
                                None => GTerm::Const(rng.gen_range(0..n_consts)),
                            };
                        }
                    }
                    a
                })
                .collect();
            let mut eqs = Vec::new();
            if rng.gen_bool(0.2) {
                eqs.push((GTerm::Var(rng.gen_range(0..VARIABLES.len())), term(&mut rng, 0.4)));
            }
            clauses.push(GClause {
                head,
                tenths: rng.gen_range(1..=10),
                eqs,
                body,
            });
        }
        let mut prog = GenProgram {
            n_consts,
            arities,
            clauses,
        };
        prog.confine_local_variables(&mut rng);
        prog
    }

    /// Rebinds every local body variable that occurs in an atom of a
    /// relation with rules, so that ground goals only spawn ground
    /// recursive subgoals. Locals over fact-only relations stay.
    fn confine_local_variables(&mut self, rng: &mut ChaCha8Rng) {
        let ruled: BTreeSet<usize> = self.clauses.iter().filter(|c| !c.body.is_empty()).map(|c| c.head.rel).collect();
        for c in &mut self.clauses {
            let head_vars: Vec<usize> = c
                .head
                .args
                .iter()
                .filter_map(|t| match t {
                    GTerm::Var(i) => Some(*i),
                    GTerm::Const(_) => None,
                })
                .collect();
            let mut rebind = BTreeSet::new();
            for a in c.body.iter().filter(|a| ruled.contains(&a.rel)) {
                for t in &a.args {
                    if let GTerm::Var(v) = t {
                        if !head_vars.contains(v) {
                            rebind.insert(*v);
                        }
                    }
                }
            }
            for v in rebind {
                let to = match head_vars.choose(rng) {
                    Some(&h) => GTerm::Var(h),
                    None => GTerm::Const(rng.gen_range(0..self.n_consts)),
                };
                for a in &mut c.body {
                    for t in &mut a.args {
                        if *t == GTerm::Var(v) {
                            *t = to;
                        }
                    }
                }
            }
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for c in &self.clauses {
            out.push_str(&atom_text(&c.head));
            let mut items: Vec<String> = c
                .eqs
                .iter()
                .map(|(l, r)| format!("{} = {}", term_text(*l), term_text(*r)))
                .collect();
            items.extend(c.body.iter().map(atom_text));
            let factor = if c.tenths == 10 { None } else { Some(format!("{}/10", c.tenths)) };
            match (factor, items.is_empty()) {
                (None, true) => {}
                (None, false) => {
                    let _ = write!(out, " <- {}", items.join(" & "));
                }
                (Some(f), true) => {
                    let _ = write!(out, " <- {f}");
                }
                (Some(f), false) => {
                    let _ = write!(out, " <- {f} : {}", items.join(" & "));
                }
            }
            out.push_str(".\n");
        }
        out
    }

    pub fn with_unit_factors(&self) -> GenProgram {
        let mut p = self.clone();
        for c in &mut p.clauses {
            c.tenths = 10;
        }
        p
    }

    /// Relations that occur somewhere in the program.
    pub fn used_relations(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for c in &self.clauses {
            s.insert(c.head.rel);
            s.extend(c.body.iter().map(|a| a.rel));
        }
        s
    }

    pub fn clauses_per_relation(&self, rel: usize) -> usize {
        self.clauses.iter().filter(|c| c.head.rel == rel).count()
    }

    pub fn max_body(&self) -> usize {
        self.clauses.iter().map(|c| c.body.len()).max().unwrap_or(0)
    }

    pub fn universe(&self) -> Vec<&'static str> {
        CONSTANTS[..self.n_consts].to_vec()
    }

    /// Every ground atom over the used relations.
    pub fn ground_atoms(&self) -> Vec<GroundKey> {
        let mut out = Vec::new();
        for rel in self.used_relations() {
            let arity = self.arities[rel];
            let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
            for _ in 0..arity {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        (0..self.n_consts).map(move |c| {
                            let mut t = t.clone();
                            t.push(c);
                            t
                        })
                    })
                    .collect();
            }
            out.extend(tuples.into_iter().map(|t| (rel, t)));
        }
        out
    }

    /// Ground instances `(head, factor, body)` of every clause whose
    /// equations hold.
    fn instances(&self) -> Vec<(GroundKey, i64, Vec<GroundKey>)> {
        let mut out = Vec::new();
        for c in &self.clauses {
            let nv = VARIABLES.len();
            let total = self.n_consts.pow(nv as u32);
            let mut seen = BTreeSet::new();
            for code in 0..total {
                let alpha: Vec<usize> = (0..nv).map(|i| (code / self.n_consts.pow(i as u32)) % self.n_consts).collect();
                let val = |t: &GTerm| match t {
                    GTerm::Var(i) => alpha[*i],
                    GTerm::Const(k) => *k,
                };
                if !c.eqs.iter().all(|(l, r)| val(l) == val(r)) {
                    continue;
                }
                let ground = |a: &GAtom| (a.rel, a.args.iter().map(val).collect::<Vec<_>>());
                let inst = (ground(&c.head), c.tenths, c.body.iter().map(ground).collect::<Vec<_>>());
                if seen.insert(inst.clone()) {
                    out.push(inst);
                }
            }
        }
        out
    }

    /// Fuzzy least model by iterating over ground instances until nothing
    /// changes. Absent atoms have value 0.
    pub fn reference_model(&self, mode: CombinationMode) -> BTreeMap<GroundKey, Value> {
        let instances = self.instances();
        let mut model: BTreeMap<GroundKey, Value> = BTreeMap::new();
        loop {
            let mut next: BTreeMap<GroundKey, Value> = BTreeMap::new();
            for (head, tenths, body) in &instances {
                let mut v = Value::ratio(*tenths, 10);
                let mut agg = Value::one();
                for b in body {
                    let bv = model.get(b).cloned().unwrap_or_else(Value::zero);
                    agg = match mode {
                        CombinationMode::Min => agg.min_of(&bv),
                        CombinationMode::Product => agg.mul(&bv),
                    };
                }
                v = v.mul(&agg);
                if v.is_zero() {
                    continue;
                }
                let slot = next.entry(head.clone()).or_insert_with(Value::zero);
                if v > *slot {
                    *slot = v;
                }
            }
            if next == model {
                return model;
            }
            model = next;
        }
    }

    /// Classical least model ignoring factors: naive bottom-up evaluation.
    pub fn reference_least_model(&self) -> BTreeSet<GroundKey> {
        let instances = self.instances();
        let mut facts: BTreeSet<GroundKey> = BTreeSet::new();
        loop {
            let before = facts.len();
            for (head, _, body) in &instances {
                if body.iter().all(|b| facts.contains(b)) {
                    facts.insert(head.clone());
                }
            }
            if facts.len() == before {
                return facts;
            }
        }
    }
}

/// A random interpretation over `atoms` with values in tenths.
pub fn random_values(seed: u64, atoms: &[GroundKey]) -> BTreeMap<GroundKey, Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    atoms
        .iter()
        .map(|a| (a.clone(), Value::ratio(rng.gen_range(0..=10), 10)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(GenProgram::generate(7).text(), GenProgram::generate(7).text());
    }
}
