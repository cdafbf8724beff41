//! Concrete-syntax front end for policies and requests.
//!
//! Lexical conventions: identifiers are `[A-Za-z_][A-Za-z0-9_.-]*`,
//! strings are double-quoted with `\"` and `\\` escapes, doubles accept
//! integer, decimal and exponent forms with optional sign, dates are
//! ISO-8601 `YYYY-MM-DD` optionally followed by `THH:MM:SS`, and line
//! comments start with `//`.

use std::fmt;

use crate::ast::{
    Alg, AlgId, AttributeName, BinOp, Effect, EnfAlg, Expr, ObType, Obligation, Pas, Pdp, Policy,
    PolicySet, Rule, Strategy, SyntacticRequest, Value,
};

/// Position range in the source text, 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

/// Diagnostic severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A parse diagnostic with its source span.
#[derive(Clone, Debug)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}: {}",
            self.span.file,
            self.span.start_line,
            self.span.start_col,
            match self.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            },
            self.message
        )
    }
}

/// A successfully parsed top-level term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedTopLevel {
    Pas(Pas),
    Policy(Policy),
}

pub type ParseResult<T> = Result<T, Vec<ParseDiagnostic>>;

// ---------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Date(crate::value::Date),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Slash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Num(_) => "number".into(),
            Tok::Date(_) => "date literal".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    start: usize,
    end: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_continue(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b'_' | b'.' | b'-')
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'/') if self.peek_at(1) == Some(b'/') => {
                    while let Some(c) = self.peek() {
                        self.pos += 1;
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    /// Recognises `YYYY-MM-DD` and `YYYY-MM-DDTHH:MM:SS` at the cursor.
    fn try_date(&mut self) -> Option<(crate::value::Date, usize)> {
        let d = |off: usize| self.peek_at(off).map(|c| c.is_ascii_digit()).unwrap_or(false);
        let lit = |off: usize, ch: u8| self.peek_at(off) == Some(ch);
        if !(d(0) && d(1) && d(2) && d(3) && lit(4, b'-') && d(5) && d(6) && lit(7, b'-') && d(8) && d(9)) {
            return None;
        }
        let mut len = 10;
        let with_time = lit(10, b'T')
            && d(11) && d(12) && lit(13, b':') && d(14) && d(15) && lit(16, b':') && d(17) && d(18);
        if with_time {
            len = 19;
        }
        let text = std::str::from_utf8(&self.src[self.pos..self.pos + len]).ok()?;
        let parsed = if with_time {
            chrono::NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S").ok()?
        } else {
            chrono::NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()?.and_hms_opt(0, 0, 0)?
        };
        Some((parsed, len))
    }

    fn next_token(&mut self) -> Result<Spanned, (usize, String)> {
        self.skip_trivia();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(Spanned { tok: Tok::Eof, start, end: start });
        };
        let simple = |lexer: &mut Self, tok: Tok| {
            lexer.pos += 1;
            Ok(Spanned { tok, start, end: start + 1 })
        };
        match c {
            b'{' => simple(self, Tok::LBrace),
            b'}' => simple(self, Tok::RBrace),
            b'(' => simple(self, Tok::LParen),
            b')' => simple(self, Tok::RParen),
            b'[' => simple(self, Tok::LBracket),
            b']' => simple(self, Tok::RBracket),
            b',' => simple(self, Tok::Comma),
            b':' => simple(self, Tok::Colon),
            b'/' => simple(self, Tok::Slash),
            b'"' => {
                self.pos += 1;
                let mut out = String::new();
                loop {
                    match self.peek() {
                        None => return Err((start, "unterminated string literal".into())),
                        Some(b'"') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b'\\') => {
                            self.pos += 1;
                            match self.peek() {
                                Some(b'"') => out.push('"'),
                                Some(b'\\') => out.push('\\'),
                                other => {
                                    return Err((
                                        self.pos,
                                        format!(
                                            "unsupported escape sequence `\\{}`",
                                            other.map(|c| c as char).unwrap_or(' ')
                                        ),
                                    ))
                                }
                            }
                            self.pos += 1;
                        }
                        Some(_) => {
                            // consume one UTF-8 scalar
                            let rest = std::str::from_utf8(&self.src[self.pos..])
                                .map_err(|_| (self.pos, "invalid UTF-8".to_string()))?;
                            let ch = rest.chars().next().unwrap();
                            out.push(ch);
                            self.pos += ch.len_utf8();
                        }
                    }
                }
                Ok(Spanned { tok: Tok::Str(out), start, end: self.pos })
            }
            c if c.is_ascii_digit() || ((c == b'+' || c == b'-') && self.peek_at(1).map(|d| d.is_ascii_digit()).unwrap_or(false)) => {
                if c.is_ascii_digit() {
                    if let Some((date, len)) = self.try_date() {
                        self.pos += len;
                        return Ok(Spanned { tok: Tok::Date(date), start, end: self.pos });
                    }
                }
                let mut end = self.pos + 1;
                let digits = |s: &Self, mut i: usize| {
                    while s.src.get(i).map(|c| c.is_ascii_digit()).unwrap_or(false) {
                        i += 1;
                    }
                    i
                };
                end = digits(self, end);
                if self.src.get(end) == Some(&b'.')
                    && self.src.get(end + 1).map(|c| c.is_ascii_digit()).unwrap_or(false)
                {
                    end = digits(self, end + 2);
                }
                if matches!(self.src.get(end), Some(b'e' | b'E')) {
                    let mut j = end + 1;
                    if matches!(self.src.get(j), Some(b'+' | b'-')) {
                        j += 1;
                    }
                    if self.src.get(j).map(|c| c.is_ascii_digit()).unwrap_or(false) {
                        end = digits(self, j);
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let value: f64 = text
                    .parse()
                    .map_err(|_| (start, format!("invalid number literal `{text}`")))?;
                self.pos = end;
                Ok(Spanned { tok: Tok::Num(value), start, end })
            }
            c if is_ident_start(c) => {
                let mut end = self.pos + 1;
                while self.src.get(end).map(|c| is_ident_continue(*c)).unwrap_or(false) {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_owned();
                self.pos = end;
                Ok(Spanned { tok: Tok::Ident(text), start, end })
            }
            other => Err((start, format!("unexpected character `{}`", other as char))),
        }
    }
}

// ---------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------

struct Parser<'a> {
    src: &'a str,
    file: String,
    tokens: Vec<Spanned>,
    idx: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl<'a> Parser<'a> {
    fn new(src: &'a str, file: &str) -> Result<Self, ParseDiagnostic> {
        let mut lexer = Lexer::new(src);
        let mut tokens = Vec::new();
        loop {
            match lexer.next_token() {
                Ok(t) => {
                    let eof = t.tok == Tok::Eof;
                    tokens.push(t);
                    if eof {
                        break;
                    }
                }
                Err((pos, message)) => {
                    return Err(ParseDiagnostic {
                        severity: Severity::Error,
                        span: span_at(src, file, pos, (pos + 1).min(src.len())),
                        message,
                    })
                }
            }
        }
        Ok(Parser { src, file: file.to_owned(), tokens, idx: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.idx].tok
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.idx + 1).min(self.tokens.len() - 1)].tok
    }

    fn advance(&mut self) -> Spanned {
        let t = self.tokens[self.idx].clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn here(&self) -> SourceSpan {
        let t = &self.tokens[self.idx];
        span_at(self.src, &self.file, t.start, t.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseDiagnostic { severity: Severity::Error, span: self.here(), message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", self.peek().describe()))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(_) => {
                let Spanned { tok: Tok::Ident(s), .. } = self.advance() else { unreachable!() };
                Ok(s)
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    /// Consumes `ident ':'` when the next tokens match the given keyword.
    fn eat_keyword_colon(&mut self, kw: &str) -> bool {
        if let Tok::Ident(s) = self.peek() {
            if s == kw && *self.peek2() == Tok::Colon {
                self.advance();
                self.advance();
                return true;
            }
        }
        false
    }


    // --- terms ---

    fn parse_alg(&mut self) -> PResult<Alg> {
        let span = self.here();
        let ident = self.expect_ident("a combining algorithm")?;
        match split_alg(&ident) {
            Ok(alg) => Ok(alg),
            Err(AlgError::Duplicate) => Err(ParseDiagnostic {
                severity: Severity::Error,
                span,
                message: format!("duplicate algorithm annotation in `{ident}`"),
            }),
            Err(AlgError::Unknown) => Err(ParseDiagnostic {
                severity: Severity::Error,
                span,
                message: format!(
                    "unknown combining algorithm `{ident}` (expected e.g. `p-over_all`, `first-app_greedy`)"
                ),
            }),
        }
    }

    fn try_alg(&self) -> Option<Alg> {
        if let Tok::Ident(s) = self.peek() {
            split_alg(s).ok()
        } else {
            None
        }
    }

    fn parse_name(&mut self) -> PResult<AttributeName> {
        let category = self.expect_ident("an attribute category")?;
        self.expect(Tok::Slash, "`/`")?;
        let attribute = self.expect_ident("an attribute identifier")?;
        Ok(AttributeName { category, attribute })
    }

    fn parse_value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(Value::double(n))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Value::Str(s))
            }
            Tok::Date(d) => {
                self.advance();
                Ok(Value::Date(d))
            }
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Ok(Value::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Ok(Value::Bool(false))
            }
            other => self.error(format!("expected a literal value, found {}", other.describe())),
        }
    }

    fn parse_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_and_expr()?;
        while matches!(self.peek(), Tok::Ident(s) if s == "or") {
            self.advance();
            let rhs = self.parse_and_expr()?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_primary_expr()?;
        while matches!(self.peek(), Tok::Ident(s) if s == "and") {
            self.advance();
            let rhs = self.parse_primary_expr()?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_primary_expr(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(id) => {
                // a structured name always wins over keyword readings
                if *self.peek2() == Tok::Slash {
                    return Ok(Expr::Name(self.parse_name()?));
                }
                if *self.peek2() == Tok::LParen {
                    if id == "not" {
                        self.advance();
                        self.advance();
                        let e = self.parse_expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        return Ok(Expr::not(e));
                    }
                    if let Some(op) = prefix_op(&id) {
                        self.advance();
                        self.advance();
                        let a = self.parse_expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let b = self.parse_expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        return Ok(Expr::bin(op, a, b));
                    }
                }
                if id == "true" || id == "false" {
                    self.advance();
                    return Ok(Expr::Lit(Value::Bool(id == "true")));
                }
                self.error(format!("expected an expression, found identifier `{id}`"))
            }
            Tok::Num(_) | Tok::Str(_) | Tok::Date(_) => Ok(Expr::Lit(self.parse_value()?)),
            other => self.error(format!("expected an expression, found {}", other.describe())),
        }
    }

    fn parse_obligation(&mut self) -> PResult<Obligation> {
        self.expect(Tok::LBracket, "`[`")?;
        let ob_type = match self.expect_ident("an obligation type (`m` or `o`)")?.as_str() {
            "m" => ObType::Mandatory,
            "o" => ObType::Optional,
            other => return self.error(format!("expected obligation type `m` or `o`, found `{other}`")),
        };
        let action = self.expect_ident("a PEP action identifier")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.parse_expr()?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(Obligation { ob_type, action, args })
    }

    fn parse_obligations(&mut self) -> PResult<Vec<Obligation>> {
        let mut out = Vec::new();
        while *self.peek() == Tok::LBracket {
            out.push(self.parse_obligation()?);
        }
        Ok(out)
    }

    fn parse_rule(&mut self) -> PResult<Rule> {
        self.expect(Tok::LParen, "`(`")?;
        let effect = match self.expect_ident("a rule effect (`permit` or `deny`)")?.as_str() {
            "permit" => Effect::Permit,
            "deny" => Effect::Deny,
            other => return self.error(format!("expected `permit` or `deny`, found `{other}`")),
        };
        let target = if self.eat_keyword_colon("target") { self.parse_expr()? } else { Expr::TRUE };
        let obligations = if self.eat_keyword_colon("obl") { self.parse_obligations()? } else { Vec::new() };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Rule { effect, target, obligations })
    }

    fn parse_policy_list(&mut self) -> PResult<Vec<Policy>> {
        let mut out = Vec::new();
        while matches!(self.peek(), Tok::LParen | Tok::LBrace) {
            out.push(self.parse_policy()?);
        }
        Ok(out)
    }

    fn parse_policy_set(&mut self) -> PResult<PolicySet> {
        self.expect(Tok::LBrace, "`{`")?;
        let alg = self.parse_alg()?;
        let target = if self.eat_keyword_colon("target") { self.parse_expr()? } else { Expr::TRUE };
        let policies_span = self.here();
        if !self.eat_keyword_colon("policies") {
            return self.error(format!("expected `policies:`, found {}", self.peek().describe()));
        }
        let policies = self.parse_policy_list()?;
        if policies.is_empty() {
            return Err(ParseDiagnostic {
                severity: Severity::Error,
                span: policies_span,
                message: "a policy set must enclose at least one policy".into(),
            });
        }
        let obl_permit = if self.eat_keyword_colon("obl-p") { self.parse_obligations()? } else { Vec::new() };
        let obl_deny = if self.eat_keyword_colon("obl-d") { self.parse_obligations()? } else { Vec::new() };
        self.expect(Tok::RBrace, "`}`")?;
        PolicySet::new(alg, target, policies, obl_permit, obl_deny)
            .map_err(|_| unreachable!("emptiness already checked"))
    }

    fn parse_policy(&mut self) -> PResult<Policy> {
        match self.peek() {
            Tok::LParen => Ok(Policy::Rule(self.parse_rule()?)),
            Tok::LBrace => Ok(Policy::Set(Box::new(self.parse_policy_set()?))),
            other => self.error(format!("expected a policy, found {}", other.describe())),
        }
    }

    fn parse_pdp(&mut self) -> PResult<Pdp> {
        if let Some(alg) = self.try_alg() {
            self.advance();
            let span = self.here();
            if !self.eat_keyword_colon("policies") {
                return self.error(format!("expected `policies:`, found {}", self.peek().describe()));
            }
            let policies = self.parse_policy_list()?;
            if policies.is_empty() {
                return Err(ParseDiagnostic {
                    severity: Severity::Error,
                    span,
                    message: "a PDP must enclose at least one policy".into(),
                });
            }
            Ok(Pdp::Combined { alg, policies })
        } else {
            Ok(Pdp::Policy(Box::new(self.parse_policy()?)))
        }
    }

    fn parse_pas(&mut self) -> PResult<Pas> {
        self.expect(Tok::LBrace, "`{`")?;
        if !self.eat_keyword_colon("pep") {
            return self.error(format!("expected `pep:`, found {}", self.peek().describe()));
        }
        let enf_alg = match self.expect_ident("an enforcement algorithm")?.as_str() {
            "base" => EnfAlg::Base,
            "deny-biased" => EnfAlg::DenyBiased,
            "permit-biased" => EnfAlg::PermitBiased,
            other => {
                return self.error(format!(
                    "expected `base`, `deny-biased` or `permit-biased`, found `{other}`"
                ))
            }
        };
        if !self.eat_keyword_colon("pdp") {
            return self.error(format!("expected `pdp:`, found {}", self.peek().describe()));
        }
        let pdp = self.parse_pdp()?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(Pas { enf_alg, pdp })
    }

    fn parse_top(&mut self) -> PResult<ParsedTopLevel> {
        // `{ pep: ... }` is a PAS, everything else is a policy
        let top = if *self.peek() == Tok::LBrace && self.tokens.len() > self.idx + 1 {
            match &self.peek2() {
                Tok::Ident(s) if s == "pep" => ParsedTopLevel::Pas(self.parse_pas()?),
                _ => ParsedTopLevel::Policy(self.parse_policy()?),
            }
        } else {
            ParsedTopLevel::Policy(self.parse_policy()?)
        };
        self.expect(Tok::Eof, "end of input")?;
        Ok(top)
    }

    fn parse_request(&mut self) -> PResult<SyntacticRequest> {
        let mut pairs = Vec::new();
        while *self.peek() == Tok::LParen {
            self.advance();
            let name = self.parse_name()?;
            self.expect(Tok::Comma, "`,`")?;
            let value = self.parse_value()?;
            self.expect(Tok::RParen, "`)`")?;
            pairs.push((name, value));
        }
        self.expect(Tok::Eof, "end of input")?;
        match SyntacticRequest::new(pairs) {
            Ok(r) => Ok(r),
            Err(_) => self.error("empty request: a request must contain at least one attribute"),
        }
    }
}

fn prefix_op(id: &str) -> Option<BinOp> {
    Some(match id {
        "and" => BinOp::And,
        "or" => BinOp::Or,
        "equal" => BinOp::Equal,
        "in" => BinOp::In,
        "greater-than" => BinOp::GreaterThan,
        "add" => BinOp::Add,
        "subtract" => BinOp::Subtract,
        "divide" => BinOp::Divide,
        "multiply" => BinOp::Multiply,
        _ => return None,
    })
}

enum AlgError {
    Unknown,
    Duplicate,
}

/// Splits `p-over_all` into algorithm id and strategy. An identifier with
/// a second strategy suffix (e.g. `p-over_all_greedy`) is reported as a
/// duplicate annotation.
fn split_alg(ident: &str) -> Result<Alg, AlgError> {
    let Some((id_part, strat_part)) = ident.rsplit_once('_') else {
        return Err(AlgError::Unknown);
    };
    let strategy = match strat_part {
        "all" => Strategy::All,
        "greedy" => Strategy::Greedy,
        _ => return Err(AlgError::Unknown),
    };
    if id_part.ends_with("_all") || id_part.ends_with("_greedy") {
        return Err(AlgError::Duplicate);
    }
    match AlgId::from_keyword(id_part) {
        Some(id) => Ok(Alg { id, strategy }),
        None => Err(AlgError::Unknown),
    }
}

fn span_at(src: &str, file: &str, start: usize, end: usize) -> SourceSpan {
    let to_line_col = |pos: usize| {
        let clamped = pos.min(src.len());
        let mut line = 1u32;
        let mut col = 1u32;
        for c in src[..clamped].chars() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    };
    let (start_line, start_col) = to_line_col(start);
    let (end_line, end_col) = to_line_col(end.max(start));
    SourceSpan { file: file.to_owned(), start_line, start_col, end_line, end_col }
}

fn run<T>(text: &str, file: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> ParseResult<T> {
    let mut parser = Parser::new(text, file).map_err(|d| vec![d])?;
    f(&mut parser).map_err(|d| vec![d])
}

/// Parses a top-level policy file: a policy authorisation system or a
/// bare policy.
pub fn parse_policy(text: &str, file: &str) -> ParseResult<ParsedTopLevel> {
    run(text, file, |p| p.parse_top())
}

/// Parses a policy where no PAS is admissible.
pub fn parse_policy_only(text: &str, file: &str) -> ParseResult<Policy> {
    run(text, file, |p| {
        let pol = p.parse_policy()?;
        p.expect(Tok::Eof, "end of input")?;
        Ok(pol)
    })
}

/// Parses a request file: a non-empty sequence of `(name, value)` pairs.
pub fn parse_request(text: &str, file: &str) -> ParseResult<SyntacticRequest> {
    run(text, file, |p| p.parse_request())
}

/// Parses a single expression; used by property specifications and tests.
pub fn parse_expr(text: &str, file: &str) -> ParseResult<Expr> {
    run(text, file, |p| {
        let e = p.parse_expr()?;
        p.expect(Tok::Eof, "end of input")?;
        Ok(e)
    })
}
