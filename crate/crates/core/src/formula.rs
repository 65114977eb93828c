//! Boolean guard formulas over an interned symbol alphabet.
//!
//! Guards are kept close to what the user wrote: the only rewriting ever
//! applied is constant folding. Canonical comparison goes through
//! [`crate::bdd`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bdd::BddManager;
use crate::error::FormulaError;

/// Interned symbol handle. Only meaningful together with the
/// [`SymbolTable`] that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set of symbols that are present (true) in one step.
pub type Valuation = BTreeSet<Symbol>;

/// Assignment of truth values to a subset of the alphabet.
pub type PartialValuation = BTreeMap<Symbol, bool>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    ids: HashMap<String, Symbol>,
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, registering it on first use.
    pub fn intern(&mut self, name: &str) -> Symbol {
        if let Some(&s) = self.ids.get(name) {
            return s;
        }
        let s = Symbol(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), s);
        s
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, sym: Symbol) -> &str {
        &self.names[sym.index()]
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        sym.index() < self.names.len()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len() as u32).map(Symbol)
    }

    /// Rejects formulas mentioning ids this table never issued.
    pub fn check(&self, expr: &BoolExpr) -> Result<(), FormulaError> {
        match expr.atoms().into_iter().find(|s| !self.contains(*s)) {
            Some(s) => Err(FormulaError::UnregisteredSymbol(s.index())),
            None => Ok(()),
        }
    }

    pub fn names_of<'a>(&'a self, set: impl IntoIterator<Item = &'a Symbol>) -> Vec<String> {
        set.into_iter().map(|s| self.name(*s).to_owned()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Const(bool),
    Atom(Symbol),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub const TRUE: BoolExpr = BoolExpr::Const(true);
    pub const FALSE: BoolExpr = BoolExpr::Const(false);

    pub fn atom(s: Symbol) -> Self {
        BoolExpr::Atom(s)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    /// Conjunction with constant folding, so `and_all([])` is `1`.
    pub fn and_all(parts: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut acc: Option<BoolExpr> = None;
        for p in parts {
            match p {
                BoolExpr::Const(true) => {}
                BoolExpr::Const(false) => return BoolExpr::FALSE,
                p => {
                    acc = Some(match acc {
                        None => p,
                        Some(a) => BoolExpr::and(a, p),
                    })
                }
            }
        }
        acc.unwrap_or(BoolExpr::TRUE)
    }

    /// Disjunction with constant folding, so `or_all([])` is `0`.
    pub fn or_all(parts: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut acc: Option<BoolExpr> = None;
        for p in parts {
            match p {
                BoolExpr::Const(false) => {}
                BoolExpr::Const(true) => return BoolExpr::TRUE,
                p => {
                    acc = Some(match acc {
                        None => p,
                        Some(a) => BoolExpr::or(a, p),
                    })
                }
            }
        }
        acc.unwrap_or(BoolExpr::FALSE)
    }

    /// Negation with constant folding.
    pub fn negate(self) -> Self {
        match self {
            BoolExpr::Const(b) => BoolExpr::Const(!b),
            e => BoolExpr::not(e),
        }
    }

    pub fn is_const(&self) -> Option<bool> {
        match self {
            BoolExpr::Const(b) => Some(*b),
            _ => None,
        }
    }

    /// An atom is true iff its symbol is in `valuation`.
    pub fn eval(&self, valuation: &Valuation) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Atom(s) => valuation.contains(s),
            BoolExpr::Not(e) => !e.eval(valuation),
            BoolExpr::And(a, b) => a.eval(valuation) && b.eval(valuation),
            BoolExpr::Or(a, b) => a.eval(valuation) || b.eval(valuation),
        }
    }

    /// Like [`BoolExpr::eval`] but with membership given by a predicate.
    pub fn eval_with(&self, truth: &impl Fn(Symbol) -> bool) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Atom(s) => truth(*s),
            BoolExpr::Not(e) => !e.eval_with(truth),
            BoolExpr::And(a, b) => a.eval_with(truth) && b.eval_with(truth),
            BoolExpr::Or(a, b) => a.eval_with(truth) || b.eval_with(truth),
        }
    }

    /// Substitutes the fixed symbols and folds constants.
    pub fn residual(&self, fixed: &PartialValuation) -> BoolExpr {
        self.residual_with(&|s| fixed.get(&s).copied())
    }

    pub fn residual_with(&self, fixed: &impl Fn(Symbol) -> Option<bool>) -> BoolExpr {
        match self {
            BoolExpr::Const(b) => BoolExpr::Const(*b),
            BoolExpr::Atom(s) => match fixed(*s) {
                Some(b) => BoolExpr::Const(b),
                None => BoolExpr::Atom(*s),
            },
            BoolExpr::Not(e) => e.residual_with(fixed).negate(),
            BoolExpr::And(a, b) => {
                let a = a.residual_with(fixed);
                let b = b.residual_with(fixed);
                match (a.is_const(), b.is_const()) {
                    (Some(false), _) | (_, Some(false)) => BoolExpr::FALSE,
                    (Some(true), _) => b,
                    (_, Some(true)) => a,
                    _ => BoolExpr::and(a, b),
                }
            }
            BoolExpr::Or(a, b) => {
                let a = a.residual_with(fixed);
                let b = b.residual_with(fixed);
                match (a.is_const(), b.is_const()) {
                    (Some(true), _) | (_, Some(true)) => BoolExpr::TRUE,
                    (Some(false), _) => b,
                    (_, Some(false)) => a,
                    _ => BoolExpr::or(a, b),
                }
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Atom(s) => {
                out.insert(*s);
            }
            BoolExpr::Not(e) => e.collect_atoms(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Top-level conjuncts, flattening nested `*`.
    pub fn conjuncts(&self) -> Vec<&BoolExpr> {
        match self {
            BoolExpr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            e => vec![e],
        }
    }

    pub fn display<'a>(&'a self, table: &'a SymbolTable) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, table }
    }
}

/// Pretty-printer in the DSL's concrete syntax with minimal parentheses.
pub struct ExprDisplay<'a> {
    expr: &'a BoolExpr,
    table: &'a SymbolTable,
}

impl ExprDisplay<'_> {
    // 0 = or, 1 = and, 2 = unary/atom
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &BoolExpr, ctx: u8) -> fmt::Result {
        match e {
            BoolExpr::Const(true) => f.write_str("1"),
            BoolExpr::Const(false) => f.write_str("0"),
            BoolExpr::Atom(s) => f.write_str(self.table.name(*s)),
            BoolExpr::Not(inner) => {
                f.write_str("~")?;
                self.write(f, inner, 2)
            }
            BoolExpr::And(a, b) => {
                if ctx > 1 {
                    f.write_str("(")?;
                }
                self.write(f, a, 1)?;
                f.write_str(" * ")?;
                // left-associative parse: a right-nested `*` needs parentheses
                self.write(f, b, 2)?;
                if ctx > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            BoolExpr::Or(a, b) => {
                if ctx > 0 {
                    f.write_str("(")?;
                }
                self.write(f, a, 0)?;
                f.write_str(" + ")?;
                self.write(f, b, 1)?;
                if ctx > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr, 0)
    }
}

/// True iff some valuation over `alphabet` satisfies `expr`.
pub fn satisfiable(expr: &BoolExpr, alphabet: &BTreeSet<Symbol>) -> Result<bool, FormulaError> {
    if let Some(s) = expr.atoms().into_iter().find(|s| !alphabet.contains(s)) {
        return Err(FormulaError::OutsideAlphabet(s.index()));
    }
    let mut mgr = BddManager::new();
    let vars: HashMap<Symbol, _> = alphabet
        .iter()
        .map(|&s| (s, mgr.mk_var(&format!("s{}", s.index()))))
        .collect();
    let f = mgr.from_expr(expr, &|s| vars.get(&s).copied())?;
    Ok(!f.is_false())
}

/// True iff `expr` holds under every valuation over `alphabet`.
pub fn tautology(expr: &BoolExpr, alphabet: &BTreeSet<Symbol>) -> Result<bool, FormulaError> {
    satisfiable(&expr.clone().negate(), alphabet).map(|s| !s)
}
