//! Parsers for the system DSL and the query language.
//!
//! System files look like
//!
//! ```text
//! system TLC {
//!   machine TIMER_TS {
//!     init TSidle;
//!     state TSidle { -> TSrun when StartTS; -> TSidle when ~StartTS; }
//!     state TSrun  { -> TSelap when tauTS; -> TSrun when ~tauTS; }
//!     state TSelap { out TimTS; -> TSidle when 1; }
//!   }
//! }
//! ```
//!
//! Guards use `~`/`!` for not, `*` for and, `+` for or, `1`/`0` for the
//! constants. `!` binds tighter than `*`, which binds tighter than `+`.

mod lexer;
mod query;

use std::collections::{BTreeSet, HashMap};

pub use lexer::{lex, DiagSeverity, ParseDiagnostic, SourceSpan};
pub use query::{parse_queries, QueryFile, QueryItem};

use crate::formula::{BoolExpr, Symbol, SymbolTable};
use crate::lint::{self, Location, LintReport, Severity};
use crate::model::{Arc, Machine, State, System};
use lexer::{Cursor, Tok};

/// Where each model element came from in the source text.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    spans: HashMap<Location, SourceSpan>,
    fallback: Option<SourceSpan>,
}

impl SourceMap {
    pub fn span(&self, loc: Location) -> SourceSpan {
        self.spans
            .get(&loc)
            .or(self.fallback.as_ref())
            .cloned()
            .unwrap_or(SourceSpan { file: String::new(), line: 1, column: 1, length: 0 })
    }

    fn record(&mut self, loc: Location, span: SourceSpan) {
        self.spans.entry(loc).or_insert(span);
    }
}

#[derive(Debug, Clone)]
pub struct ParsedSystem {
    pub system: System,
    pub lint: LintReport,
    pub source_map: SourceMap,
    /// Lint warnings with source positions.
    pub warnings: Vec<ParseDiagnostic>,
}

/// Parses a formula. `not_keyword` additionally accepts `not` as negation
/// (query files only).
pub(crate) fn parse_formula(
    cur: &mut Cursor,
    symbols: &mut SymbolTable,
    not_keyword: bool,
    on_atom: &mut dyn FnMut(Symbol, &SourceSpan),
) -> Result<BoolExpr, ParseDiagnostic> {
    let mut lhs = parse_and(cur, symbols, not_keyword, on_atom)?;
    while cur.eat(&Tok::Plus) {
        let rhs = parse_and(cur, symbols, not_keyword, on_atom)?;
        lhs = BoolExpr::or(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and(
    cur: &mut Cursor,
    symbols: &mut SymbolTable,
    not_keyword: bool,
    on_atom: &mut dyn FnMut(Symbol, &SourceSpan),
) -> Result<BoolExpr, ParseDiagnostic> {
    let mut lhs = parse_unary(cur, symbols, not_keyword, on_atom)?;
    while cur.eat(&Tok::Star) {
        let rhs = parse_unary(cur, symbols, not_keyword, on_atom)?;
        lhs = BoolExpr::and(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_unary(
    cur: &mut Cursor,
    symbols: &mut SymbolTable,
    not_keyword: bool,
    on_atom: &mut dyn FnMut(Symbol, &SourceSpan),
) -> Result<BoolExpr, ParseDiagnostic> {
    match cur.peek().clone() {
        Tok::Bang | Tok::Tilde => {
            cur.bump();
            Ok(BoolExpr::not(parse_unary(cur, symbols, not_keyword, on_atom)?))
        }
        Tok::Ident(ref w) if not_keyword && w == "not" => {
            cur.bump();
            Ok(BoolExpr::not(parse_unary(cur, symbols, not_keyword, on_atom)?))
        }
        Tok::LParen => {
            cur.bump();
            let e = parse_formula(cur, symbols, not_keyword, on_atom)?;
            cur.expect(&Tok::RParen)?;
            Ok(e)
        }
        Tok::Ident(name) => {
            let span = cur.bump().span;
            let sym = symbols.intern(&name);
            on_atom(sym, &span);
            Ok(BoolExpr::atom(sym))
        }
        Tok::Num(n) if n == "1" => {
            cur.bump();
            Ok(BoolExpr::TRUE)
        }
        Tok::Num(n) if n == "0" => {
            cur.bump();
            Ok(BoolExpr::FALSE)
        }
        Tok::Num(n) => Err(ParseDiagnostic::error(format!("only `0` and `1` are constants, found `{n}`"), cur.span())),
        _ => Err(cur.unexpected("a formula")),
    }
}

/// Parses and validates a system. Validation errors come back as positioned
/// diagnostics; warnings ride along with the result.
pub fn parse_system(text: &str, file: &str) -> Result<ParsedSystem, Vec<ParseDiagnostic>> {
    let toks = lex(text, file).map_err(|d| vec![d])?;
    let mut cur = Cursor::new(toks);
    let mut map = SourceMap::default();
    let mut symbols = SymbolTable::new();
    let system = parse_system_body(&mut cur, &mut symbols, &mut map).map_err(|d| vec![d])?;

    let lint = lint::validate(&system);
    let to_diag = |l: &lint::Lint| {
        let span = map.span(l.location);
        match l.severity {
            Severity::Error => ParseDiagnostic::error(l.message.clone(), span),
            Severity::Warning => ParseDiagnostic::warning(l.message.clone(), span),
        }
    };
    if lint.has_errors() {
        return Err(lint.lints.iter().map(to_diag).collect());
    }
    let warnings = lint.lints.iter().map(to_diag).collect();
    Ok(ParsedSystem { system, lint, source_map: map, warnings })
}

fn parse_system_body(cur: &mut Cursor, symbols: &mut SymbolTable, map: &mut SourceMap) -> Result<System, ParseDiagnostic> {
    let kw = cur.expect_keyword("system")?;
    map.fallback = Some(kw.clone());
    map.record(Location::System, kw);
    let (name, _) = cur.expect_ident("a system name")?;
    cur.expect(&Tok::LBrace)?;
    let mut machines = Vec::new();
    loop {
        if cur.is_keyword("machine") {
            let mi = machines.len();
            machines.push(parse_machine(cur, symbols, map, mi)?);
        } else if cur.eat(&Tok::RBrace) {
            break;
        } else {
            return Err(cur.unexpected("'machine' or `}`"));
        }
    }
    if machines.is_empty() {
        return Err(ParseDiagnostic::error("a system needs at least one machine", map.span(Location::System)));
    }
    if *cur.peek() != Tok::Eof {
        return Err(cur.unexpected("end of input"));
    }
    Ok(System::new(name, machines, symbols.clone()))
}

fn parse_machine(cur: &mut Cursor, symbols: &mut SymbolTable, map: &mut SourceMap, mi: usize) -> Result<Machine, ParseDiagnostic> {
    cur.expect_keyword("machine")?;
    let (name, name_span) = cur.expect_ident("a machine name")?;
    map.record(Location::Machine(mi), name_span);
    cur.expect(&Tok::LBrace)?;
    cur.expect_keyword("init")?;
    let (initial, init_span) = cur.expect_ident("the initial state name")?;
    map.record(Location::Initial(mi), init_span);
    cur.expect(&Tok::Semi)?;

    let mut states = Vec::new();
    let mut arcs = Vec::new();
    while cur.is_keyword("state") {
        cur.bump();
        let si = states.len();
        let (sname, sspan) = cur.expect_ident("a state name")?;
        map.record(Location::State(mi, si), sspan);
        cur.expect(&Tok::LBrace)?;
        let mut outputs = BTreeSet::new();
        if cur.eat_keyword("out") {
            loop {
                let (o, ospan) = cur.expect_ident("an output symbol")?;
                let sym = symbols.intern(&o);
                map.record(Location::Symbol(sym), ospan);
                outputs.insert(sym);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&Tok::Semi)?;
        }
        while *cur.peek() == Tok::Arrow {
            let arrow = cur.bump().span;
            let (dst, dst_span) = cur.expect_ident("a target state")?;
            cur.expect_keyword("when")?;
            let guard = parse_formula(cur, symbols, false, &mut |sym, span| {
                map.record(Location::Symbol(sym), span.clone());
            })?;
            cur.expect(&Tok::Semi)?;
            let length = if arrow.line == dst_span.line { dst_span.column + dst_span.length - arrow.column } else { 2 };
            map.record(Location::Arc(mi, arcs.len()), SourceSpan { length, ..arrow });
            arcs.push(Arc::new(sname.clone(), dst, guard));
        }
        cur.expect(&Tok::RBrace)?;
        states.push(State { name: sname, outputs });
    }
    if states.is_empty() {
        return Err(cur.unexpected("'state'"));
    }
    cur.expect(&Tok::RBrace)?;
    Ok(Machine::new(name, states, initial, arcs))
}
