use std::fmt;

use serde::Serialize;

/// Position of a token or construct in a source file. Lines and columns are
/// 1-based; columns and lengths count characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagSeverity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: DiagSeverity,
    pub message: String,
    pub span: SourceSpan,
}

impl ParseDiagnostic {
    pub fn error(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseDiagnostic { severity: DiagSeverity::Error, message: message.into(), span }
    }

    pub fn warning(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseDiagnostic { severity: DiagSeverity::Warning, message: message.into(), span }
    }

    pub fn is_error(&self) -> bool {
        self.severity == DiagSeverity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            DiagSeverity::Error => "error",
            DiagSeverity::Warning => "warning",
        };
        write!(f, "{}: {}: {}", self.span, sev, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Arrow,
    Implies,
    Star,
    Plus,
    Bang,
    Tilde,
    NextGlyph,
    EventuallyGlyph,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Arrow => "->",
            Tok::Implies => "=>",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Bang => "!",
            Tok::Tilde => "~",
            Tok::NextGlyph => "○",
            Tok::EventuallyGlyph => "◇",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn lex(text: &str, file: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, column, length| SourceSpan { file: file.to_owned(), line, column, length };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), span: span(line, start_col, i - start) });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Num(word), span: span(line, start_col, i - start) });
            continue;
        }
        let two = chars.get(i + 1).copied();
        let (tok, len) = match (c, two) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::Implies, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            ('*', _) => (Tok::Star, 1),
            ('+', _) => (Tok::Plus, 1),
            ('!', _) => (Tok::Bang, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('⇒', _) => (Tok::Implies, 1),
            ('○', _) => (Tok::NextGlyph, 1),
            ('◇', _) => (Tok::EventuallyGlyph, 1),
            _ => return Err(ParseDiagnostic::error(format!("unexpected character `{c}`"), span(line, start_col, 1))),
        };
        i += len;
        col += len;
        out.push(Token { tok, span: span(line, start_col, len) });
    }
    out.push(Token { tok: Tok::Eof, span: span(line, col, 0) });
    Ok(out)
}

/// Token cursor shared by the system and query parsers.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn unexpected(&self, expected: &str) -> ParseDiagnostic {
        ParseDiagnostic::error(format!("expected {expected}, found {}", self.peek().describe()), self.span())
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<SourceSpan, ParseDiagnostic> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{}`", tok.text())))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<SourceSpan, ParseDiagnostic> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseDiagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected(what)),
        }
    }
}
