//! Query files.
//!
//! ```text
//! q1: always (HG * Car * TimTL => next HY);
//! q6: always (HY * TimTS => eventually (HR * FG));
//! ctl safe: AG (HG + HY + HR);
//! ```
//!
//! `○`, `◇` and `⇒` are accepted for `next`, `eventually` and `=>`.
//! `exists eventually` asks for some path instead of all paths. The name
//! before `:` is optional for implication queries; unnamed ones are called
//! `q<position>`.

use std::collections::BTreeSet;

use super::lexer::{lex, Cursor, ParseDiagnostic, SourceSpan, Tok};
use super::parse_formula;
use crate::formula::{Symbol, SymbolTable};
use crate::mc::{Ctl, Query, QueryMode};

#[derive(Debug, Clone, PartialEq)]
pub enum QueryItem {
    Implication(Query),
    Ctl { name: String, formula: Ctl },
}

impl QueryItem {
    pub fn name(&self) -> &str {
        match self {
            QueryItem::Implication(q) => &q.name,
            QueryItem::Ctl { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QueryFile {
    pub items: Vec<QueryItem>,
    /// The base table extended with any symbol the queries introduced.
    pub symbols: SymbolTable,
    pub warnings: Vec<ParseDiagnostic>,
}

/// Parses a query file. With `known` given, atoms it does not contain are
/// reported as warnings (they may still be environment signals).
pub fn parse_queries(text: &str, file: &str, known: Option<&SymbolTable>) -> Result<QueryFile, Vec<ParseDiagnostic>> {
    let toks = lex(text, file).map_err(|d| vec![d])?;
    let mut cur = Cursor::new(toks);
    let mut symbols = known.cloned().unwrap_or_default();
    let base_len = known.map_or(0, SymbolTable::len);
    let mut unknown: Vec<(Symbol, SourceSpan)> = Vec::new();
    let mut items = Vec::new();
    {
        let mut note = |sym: Symbol, span: &SourceSpan| {
            if known.is_some() && sym.index() >= base_len && !unknown.iter().any(|(s, _)| *s == sym) {
                unknown.push((sym, span.clone()));
            }
        };
        while *cur.peek() != Tok::Eof {
            let item = parse_item(&mut cur, &mut symbols, items.len() + 1, &mut note).map_err(|d| vec![d])?;
            items.push(item);
        }
    }
    let mut seen = BTreeSet::new();
    for it in &items {
        if !seen.insert(it.name().to_owned()) {
            return Err(vec![ParseDiagnostic::error(
                format!("duplicate query name `{}`", it.name()),
                SourceSpan { file: file.to_owned(), line: 1, column: 1, length: 0 },
            )]);
        }
    }
    let warnings = unknown
        .into_iter()
        .map(|(s, span)| {
            ParseDiagnostic::warning(
                format!("symbol `{}` does not occur in the system; treating it as an environment signal", symbols.name(s)),
                span,
            )
        })
        .collect();
    Ok(QueryFile { items, symbols, warnings })
}

fn parse_item(
    cur: &mut Cursor,
    symbols: &mut SymbolTable,
    position: usize,
    note: &mut dyn FnMut(Symbol, &SourceSpan),
) -> Result<QueryItem, ParseDiagnostic> {
    if cur.is_keyword("ctl") && matches!(cur.peek_at(1), Tok::Ident(_)) && *cur.peek_at(2) == Tok::Colon {
        cur.bump();
        let (name, _) = cur.expect_ident("a query name")?;
        cur.expect(&Tok::Colon)?;
        let formula = parse_ctl(cur, symbols, note)?;
        cur.expect(&Tok::Semi)?;
        return Ok(QueryItem::Ctl { name, formula });
    }
    let name = if matches!(cur.peek(), Tok::Ident(_)) && *cur.peek_at(1) == Tok::Colon {
        let (n, _) = cur.expect_ident("a query name")?;
        cur.bump();
        n
    } else {
        format!("q{position}")
    };
    cur.expect_keyword("always")?;
    cur.expect(&Tok::LParen)?;
    let antecedent = parse_formula(cur, symbols, true, note)?;
    cur.expect(&Tok::Implies)?;
    // the consequent may be wrapped together with its mode: `(○ HY)`
    let wrapped = *cur.peek() == Tok::LParen
        && matches!(cur.peek_at(1), Tok::NextGlyph | Tok::EventuallyGlyph)
        || matches!(cur.peek_at(1), Tok::Ident(w) if *cur.peek() == Tok::LParen && ["next", "eventually", "exists"].contains(&w.as_str()));
    if wrapped {
        cur.bump();
    }
    let mode = if cur.eat_keyword("next") || cur.eat(&Tok::NextGlyph) {
        QueryMode::Next
    } else if cur.eat_keyword("eventually") || cur.eat(&Tok::EventuallyGlyph) {
        QueryMode::Eventually
    } else if cur.eat_keyword("exists") {
        if !(cur.eat_keyword("eventually") || cur.eat(&Tok::EventuallyGlyph)) {
            return Err(cur.unexpected("'eventually' after 'exists'"));
        }
        QueryMode::ExistsEventually
    } else {
        return Err(cur.unexpected("'next' or 'eventually'"));
    };
    let consequent = parse_formula(cur, symbols, true, note)?;
    if wrapped {
        cur.expect(&Tok::RParen)?;
    }
    cur.expect(&Tok::RParen)?;
    cur.expect(&Tok::Semi)?;
    Ok(QueryItem::Implication(Query { name, antecedent, mode, consequent }))
}

fn parse_ctl(cur: &mut Cursor, symbols: &mut SymbolTable, note: &mut dyn FnMut(Symbol, &SourceSpan)) -> Result<Ctl, ParseDiagnostic> {
    let lhs = parse_ctl_or(cur, symbols, note)?;
    if cur.eat(&Tok::Implies) {
        let rhs = parse_ctl(cur, symbols, note)?;
        return Ok(Ctl::Implies(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_ctl_or(cur: &mut Cursor, symbols: &mut SymbolTable, note: &mut dyn FnMut(Symbol, &SourceSpan)) -> Result<Ctl, ParseDiagnostic> {
    let mut lhs = parse_ctl_and(cur, symbols, note)?;
    while cur.eat(&Tok::Plus) {
        lhs = Ctl::Or(Box::new(lhs), Box::new(parse_ctl_and(cur, symbols, note)?));
    }
    Ok(lhs)
}

fn parse_ctl_and(cur: &mut Cursor, symbols: &mut SymbolTable, note: &mut dyn FnMut(Symbol, &SourceSpan)) -> Result<Ctl, ParseDiagnostic> {
    let mut lhs = parse_ctl_unary(cur, symbols, note)?;
    while cur.eat(&Tok::Star) {
        lhs = Ctl::And(Box::new(lhs), Box::new(parse_ctl_unary(cur, symbols, note)?));
    }
    Ok(lhs)
}

fn parse_until(
    cur: &mut Cursor,
    symbols: &mut SymbolTable,
    note: &mut dyn FnMut(Symbol, &SourceSpan),
) -> Result<(Ctl, Ctl), ParseDiagnostic> {
    if cur.eat(&Tok::LBracket) {
        let a = parse_ctl(cur, symbols, note)?;
        cur.expect_keyword("U")?;
        let b = parse_ctl(cur, symbols, note)?;
        cur.expect(&Tok::RBracket)?;
        Ok((a, b))
    } else {
        cur.expect(&Tok::LParen)?;
        let a = parse_ctl(cur, symbols, note)?;
        cur.expect(&Tok::Comma)?;
        let b = parse_ctl(cur, symbols, note)?;
        cur.expect(&Tok::RParen)?;
        Ok((a, b))
    }
}

fn parse_ctl_unary(cur: &mut Cursor, symbols: &mut SymbolTable, note: &mut dyn FnMut(Symbol, &SourceSpan)) -> Result<Ctl, ParseDiagnostic> {
    let b = Box::new;
    match cur.peek().clone() {
        Tok::Bang | Tok::Tilde => {
            cur.bump();
            Ok(Ctl::Not(b(parse_ctl_unary(cur, symbols, note)?)))
        }
        Tok::LParen => {
            cur.bump();
            let e = parse_ctl(cur, symbols, note)?;
            cur.expect(&Tok::RParen)?;
            Ok(e)
        }
        Tok::Num(n) if n == "1" || n == "0" => {
            cur.bump();
            Ok(Ctl::Const(n == "1"))
        }
        Tok::Ident(w) => {
            let next = cur.peek_at(1).clone();
            match w.as_str() {
                "not" => {
                    cur.bump();
                    Ok(Ctl::Not(b(parse_ctl_unary(cur, symbols, note)?)))
                }
                "AX" | "EX" | "AF" | "EF" | "AG" | "EG" => {
                    cur.bump();
                    let inner = b(parse_ctl_unary(cur, symbols, note)?);
                    Ok(match w.as_str() {
                        "AX" => Ctl::AX(inner),
                        "EX" => Ctl::EX(inner),
                        "AF" => Ctl::AF(inner),
                        "EF" => Ctl::EF(inner),
                        "AG" => Ctl::AG(inner),
                        _ => Ctl::EG(inner),
                    })
                }
                "A" | "E" if next == Tok::LBracket => {
                    cur.bump();
                    let (x, y) = parse_until(cur, symbols, note)?;
                    Ok(if w == "A" { Ctl::AU(b(x), b(y)) } else { Ctl::EU(b(x), b(y)) })
                }
                "AU" | "EU" if next == Tok::LParen => {
                    cur.bump();
                    let (x, y) = parse_until(cur, symbols, note)?;
                    Ok(if w == "AU" { Ctl::AU(b(x), b(y)) } else { Ctl::EU(b(x), b(y)) })
                }
                _ => {
                    let span = cur.bump().span;
                    let sym = symbols.intern(&w);
                    note(sym, &span);
                    Ok(Ctl::Atom(sym))
                }
            }
        }
        _ => Err(cur.unexpected("a CTL formula")),
    }
}
