//! Reduced ordered binary decision diagrams.
//!
//! A [`BddManager`] owns a hash-consed node store, so two [`BddRef`]s from
//! the same manager are equal iff they denote the same Boolean function.
//! Variables are ordered by creation; there is no reordering and no garbage
//! collection, the store only grows.

use std::collections::{BTreeSet, HashMap};

use crate::error::FormulaError;
use crate::formula::{BoolExpr, Symbol};

/// Variable index; also its position in the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// Handle to a node. Only valid for the manager that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BddRef(u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    pub fn is_false(self) -> bool {
        self == Self::FALSE
    }

    pub fn is_true(self) -> bool {
        self == Self::TRUE
    }

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: VarId,
    lo: BddRef,
    hi: BddRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    Ite,
    And,
    Or,
    Xor,
}

#[derive(Debug, Default)]
pub struct BddManager {
    // slots 0 and 1 are the terminals; their `var` is never read
    nodes: Vec<Node>,
    unique: HashMap<Node, BddRef>,
    cache: HashMap<(Op, BddRef, BddRef, BddRef), BddRef>,
    names: Vec<String>,
    by_name: HashMap<String, VarId>,
}

const TERMINAL_VAR: VarId = VarId(u32::MAX);

impl BddManager {
    pub fn new() -> Self {
        let term = Node { var: TERMINAL_VAR, lo: BddRef::FALSE, hi: BddRef::FALSE };
        BddManager {
            nodes: vec![term, Node { hi: BddRef::TRUE, lo: BddRef::TRUE, ..term }],
            ..Default::default()
        }
    }

    /// Creates a manager with variables declared in the given order.
    pub fn with_vars<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut m = Self::new();
        for n in names {
            m.declare(n.as_ref());
        }
        m
    }

    /// Returns the variable called `name`, appending it to the order on
    /// first use.
    pub fn declare(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.by_name.get(name) {
            return v;
        }
        let v = VarId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.by_name.insert(name.to_owned(), v);
        v
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn mk_var(&mut self, name: &str) -> BddRef {
        let v = self.declare(name);
        self.var(v)
    }

    /// BDD of a declared variable.
    pub fn var(&mut self, v: VarId) -> BddRef {
        assert!((v.0 as usize) < self.names.len(), "undeclared variable {v:?}");
        self.mk(v, BddRef::FALSE, BddRef::TRUE)
    }

    pub fn nvar(&mut self, v: VarId) -> BddRef {
        let x = self.var(v);
        self.not(x)
    }

    pub fn constant(&self, b: bool) -> BddRef {
        if b {
            BddRef::TRUE
        } else {
            BddRef::FALSE
        }
    }

    fn mk(&mut self, var: VarId, lo: BddRef, hi: BddRef) -> BddRef {
        if lo == hi {
            return lo;
        }
        let n = Node { var, lo, hi };
        if let Some(&r) = self.unique.get(&n) {
            return r;
        }
        let r = BddRef(self.nodes.len() as u32);
        self.nodes.push(n);
        self.unique.insert(n, r);
        r
    }

    fn node(&self, f: BddRef) -> Node {
        self.nodes[f.0 as usize]
    }

    /// Top variable, `None` for terminals.
    pub fn top_var(&self, f: BddRef) -> Option<VarId> {
        (!f.is_terminal()).then(|| self.node(f).var)
    }

    fn level(&self, f: BddRef) -> u32 {
        if f.is_terminal() {
            u32::MAX
        } else {
            self.node(f).var.0
        }
    }

    fn cofactors(&self, f: BddRef, v: VarId) -> (BddRef, BddRef) {
        if f.is_terminal() {
            return (f, f);
        }
        let n = self.node(f);
        if n.var == v {
            (n.lo, n.hi)
        } else {
            (f, f)
        }
    }

    pub fn ite(&mut self, f: BddRef, g: BddRef, h: BddRef) -> BddRef {
        if f.is_true() {
            return g;
        }
        if f.is_false() {
            return h;
        }
        if g == h {
            return g;
        }
        if g.is_true() && h.is_false() {
            return f;
        }
        let key = (Op::Ite, f, g, h);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let top = self.level(f).min(self.level(g)).min(self.level(h));
        let v = VarId(top);
        let (f0, f1) = self.cofactors(f, v);
        let (g0, g1) = self.cofactors(g, v);
        let (h0, h1) = self.cofactors(h, v);
        let lo = self.ite(f0, g0, h0);
        let hi = self.ite(f1, g1, h1);
        let r = self.mk(v, lo, hi);
        self.cache.insert(key, r);
        r
    }

    pub fn not(&mut self, f: BddRef) -> BddRef {
        self.ite(f, BddRef::FALSE, BddRef::TRUE)
    }

    pub fn and(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.apply(BinOp::And, f, g)
    }

    pub fn or(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.apply(BinOp::Or, f, g)
    }

    pub fn xor(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.apply(BinOp::Xor, f, g)
    }

    pub fn implies(&mut self, f: BddRef, g: BddRef) -> BddRef {
        self.ite(f, g, BddRef::TRUE)
    }

    pub fn apply(&mut self, op: BinOp, f: BddRef, g: BddRef) -> BddRef {
        match op {
            BinOp::And => {
                if f.is_false() || g.is_false() {
                    return BddRef::FALSE;
                }
                if f.is_true() {
                    return g;
                }
                if g.is_true() || f == g {
                    return f;
                }
            }
            BinOp::Or => {
                if f.is_true() || g.is_true() {
                    return BddRef::TRUE;
                }
                if f.is_false() {
                    return g;
                }
                if g.is_false() || f == g {
                    return f;
                }
            }
            BinOp::Xor => {
                if f == g {
                    return BddRef::FALSE;
                }
                if f.is_false() {
                    return g;
                }
                if g.is_false() {
                    return f;
                }
            }
        }
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        let key = (op.into(), f, g, BddRef::FALSE);
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let v = VarId(self.level(f).min(self.level(g)));
        let (f0, f1) = self.cofactors(f, v);
        let (g0, g1) = self.cofactors(g, v);
        let lo = self.apply(op, f0, g0);
        let hi = self.apply(op, f1, g1);
        let r = self.mk(v, lo, hi);
        self.cache.insert(key, r);
        r
    }

    pub fn and_all(&mut self, fs: impl IntoIterator<Item = BddRef>) -> BddRef {
        fs.into_iter().fold(BddRef::TRUE, |acc, f| self.and(acc, f))
    }

    pub fn or_all(&mut self, fs: impl IntoIterator<Item = BddRef>) -> BddRef {
        fs.into_iter().fold(BddRef::FALSE, |acc, f| self.or(acc, f))
    }

    /// Fixes `v` to `value`.
    pub fn restrict(&mut self, f: BddRef, v: VarId, value: bool) -> BddRef {
        let mut memo = HashMap::new();
        self.restrict_rec(f, v, value, &mut memo)
    }

    fn restrict_rec(&mut self, f: BddRef, v: VarId, value: bool, memo: &mut HashMap<BddRef, BddRef>) -> BddRef {
        if f.is_terminal() || self.level(f) > v.0 {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let r = if n.var == v {
            if value {
                n.hi
            } else {
                n.lo
            }
        } else {
            let lo = self.restrict_rec(n.lo, v, value, memo);
            let hi = self.restrict_rec(n.hi, v, value, memo);
            self.mk(n.var, lo, hi)
        };
        memo.insert(f, r);
        r
    }

    /// Existential quantification over `vars`.
    pub fn exists(&mut self, vars: &BTreeSet<VarId>, f: BddRef) -> BddRef {
        let mut memo = HashMap::new();
        self.exists_rec(vars, f, &mut memo)
    }

    fn exists_rec(&mut self, vars: &BTreeSet<VarId>, f: BddRef, memo: &mut HashMap<BddRef, BddRef>) -> BddRef {
        if f.is_terminal() {
            return f;
        }
        match vars.iter().next_back() {
            Some(last) if self.level(f) <= last.0 => {}
            _ => return f,
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let lo = self.exists_rec(vars, n.lo, memo);
        let hi = self.exists_rec(vars, n.hi, memo);
        let r = if vars.contains(&n.var) { self.or(lo, hi) } else { self.mk(n.var, lo, hi) };
        memo.insert(f, r);
        r
    }

    /// Universal quantification over `vars`.
    pub fn forall(&mut self, vars: &BTreeSet<VarId>, f: BddRef) -> BddRef {
        let nf = self.not(f);
        let e = self.exists(vars, nf);
        self.not(e)
    }

    /// Simultaneous variable substitution `v -> map[v]`. Variables not in
    /// the map are kept.
    pub fn rename(&mut self, f: BddRef, map: &HashMap<VarId, VarId>) -> BddRef {
        let mut memo = HashMap::new();
        self.rename_rec(f, map, &mut memo)
    }

    fn rename_rec(&mut self, f: BddRef, map: &HashMap<VarId, VarId>, memo: &mut HashMap<BddRef, BddRef>) -> BddRef {
        if f.is_terminal() {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let lo = self.rename_rec(n.lo, map, memo);
        let hi = self.rename_rec(n.hi, map, memo);
        let target = map.get(&n.var).copied().unwrap_or(n.var);
        let x = self.var(target);
        let r = self.ite(x, hi, lo);
        memo.insert(f, r);
        r
    }

    /// Number of satisfying assignments over variables `0..nvars`.
    pub fn sat_count(&self, f: BddRef, nvars: usize) -> u128 {
        let vars: Vec<VarId> = (0..nvars as u32).map(VarId).collect();
        self.sat_count_over(f, &vars)
    }

    /// Number of satisfying assignments over the given variables, which must
    /// include the support of `f`. At most 127 variables.
    pub fn sat_count_over(&self, f: BddRef, vars: &[VarId]) -> u128 {
        assert!(vars.len() < 128, "sat_count supports at most 127 variables");
        let mut sorted = vars.to_vec();
        sorted.sort();
        sorted.dedup();
        let pos: HashMap<VarId, usize> = sorted.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let n = sorted.len();
        let mut memo = HashMap::new();
        // paths counted from position `at` in `sorted`
        fn go(
            m: &BddManager,
            f: BddRef,
            pos: &HashMap<VarId, usize>,
            n: usize,
            memo: &mut HashMap<BddRef, u128>,
        ) -> (u128, usize) {
            if f.is_false() {
                return (0, n);
            }
            if f.is_true() {
                return (1, n);
            }
            let node = m.node(f);
            let p = *pos.get(&node.var).expect("sat_count: support variable outside counted set");
            if let Some(&c) = memo.get(&f) {
                return (c, p);
            }
            let (lo, plo) = go(m, node.lo, pos, n, memo);
            let (hi, phi) = go(m, node.hi, pos, n, memo);
            let c = (lo << (plo - p - 1)) + (hi << (phi - p - 1));
            memo.insert(f, c);
            (c, p)
        }
        let (c, p) = go(self, f, &pos, n, &mut memo);
        c << p
    }

    pub fn eval(&self, f: BddRef, assignment: impl Fn(VarId) -> bool) -> bool {
        let mut cur = f;
        while !cur.is_terminal() {
            let n = self.node(cur);
            cur = if assignment(n.var) { n.hi } else { n.lo };
        }
        cur.is_true()
    }

    /// One satisfying path; variables off the path are left out (callers
    /// treat them as false).
    pub fn pick_cube(&self, f: BddRef) -> Option<Vec<(VarId, bool)>> {
        if f.is_false() {
            return None;
        }
        let mut cube = Vec::new();
        let mut cur = f;
        while !cur.is_terminal() {
            let n = self.node(cur);
            // prefer the low branch so unconstrained signals stay absent
            if !n.lo.is_false() {
                cube.push((n.var, false));
                cur = n.lo;
            } else {
                cube.push((n.var, true));
                cur = n.hi;
            }
        }
        Some(cube)
    }

    pub fn support(&self, f: BddRef) -> BTreeSet<VarId> {
        let mut seen = BTreeSet::new();
        let mut out = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if g.is_terminal() || !seen.insert(g) {
                continue;
            }
            let n = self.node(g);
            out.insert(n.var);
            stack.push(n.lo);
            stack.push(n.hi);
        }
        out
    }

    /// Translates a guard formula; `var_of` maps each atom to a variable BDD.
    pub fn from_expr(
        &mut self,
        expr: &BoolExpr,
        var_of: &impl Fn(Symbol) -> Option<BddRef>,
    ) -> Result<BddRef, FormulaError> {
        Ok(match expr {
            BoolExpr::Const(b) => self.constant(*b),
            BoolExpr::Atom(s) => var_of(*s).ok_or(FormulaError::UnmappedAtom(s.index()))?,
            BoolExpr::Not(e) => {
                let x = self.from_expr(e, var_of)?;
                self.not(x)
            }
            BoolExpr::And(a, b) => {
                let x = self.from_expr(a, var_of)?;
                if x.is_false() {
                    return Ok(x);
                }
                let y = self.from_expr(b, var_of)?;
                self.and(x, y)
            }
            BoolExpr::Or(a, b) => {
                let x = self.from_expr(a, var_of)?;
                if x.is_true() {
                    return Ok(x);
                }
                let y = self.from_expr(b, var_of)?;
                self.or(x, y)
            }
        })
    }

    /// Structural check of the reduction and ordering rules over the whole
    /// store. Returns a description of the first violation.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate().skip(2) {
            if n.lo == n.hi {
                return Err(format!("node {i} has identical children"));
            }
            for child in [n.lo, n.hi] {
                if !child.is_terminal() && self.node(child).var <= n.var {
                    return Err(format!("node {i} violates the variable order"));
                }
            }
            if let Some(j) = seen.insert(*n, i) {
                return Err(format!("nodes {j} and {i} are duplicates"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Xor,
}

impl From<BinOp> for Op {
    fn from(op: BinOp) -> Op {
        match op {
            BinOp::And => Op::And,
            BinOp::Or => Op::Or,
            BinOp::Xor => Op::Xor,
        }
    }
}
