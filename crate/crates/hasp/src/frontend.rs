//! The textual frontend: the rule language, initial-condition files, fact
//! files, and the canonical serializers.
//!
//! Program syntax, one rule per statement:
//!
//! ```text
//! #delta_t 1/2.                                % optional header
//! a :- : cs time_eq(0), bool true.             % stationary, empty block
//! b :- a : cs any1, adv tick.                  % advancing
//! c :- b, not a : cs any1, bool true.
//! h :- a ; b, not -c : cs consecutive2, bool true.
//! ```
//!
//! `adv` marks an advancing rule and `bool` a stationary one; the number of
//! `;`-separated blocks must match the constraint set's arity. `%` starts a
//! comment. Identifiers are `[a-z][A-Za-z0-9_]*`; `not`, `cs`, `adv`, and
//! `bool` are reserved. Numbers are exact integers or `p/q` rationals —
//! there are no floating-point literals.
//!
//! Initial conditions are line oriented: `gp step=0 level=7/2`. Fact files
//! mirror the interpretation serializer: `fact -a @ step=1 level=2`.

use std::fmt;

use crate::model::{
    is_valid_atom_name, Atom, Block, Fact, GeneralizedPosition, InitialCondition, Interpretation,
    Literal, ParamValue,
};
use crate::rational::Rational;
use crate::registry::{AdvancingRef, AlgArg, BooleanRef, ConstraintRef, Env};
use crate::rules::{
    Advancer, AdvancingRule, BoolGuard, ConstraintSet, Program, Rule, StationaryRule,
};

/// A half-open source location, 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: Option<String>,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    fn at(line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            file: None,
            line,
            column,
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    /// What the parser would have accepted at the error position.
    pub expected: Option<String>,
}

impl ParseError {
    fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
            expected: None,
        }
    }

    fn expecting(
        span: SourceSpan,
        message: impl Into<String>,
        expected: impl Into<String>,
    ) -> Self {
        ParseError {
            span,
            message: message.into(),
            expected: Some(expected.into()),
        }
    }

    /// Attributes the error to a file for reporting.
    pub fn with_file(mut self, file: &str) -> Self {
        self.span.file = Some(file.to_string());
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if let Some(expected) = &self.expected {
            write!(f, " (expected {expected})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Hash(String),
    ColonDash,
    Colon,
    Semicolon,
    Comma,
    Dot,
    Minus,
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Hash(s) => write!(f, "`#{s}`"),
            Tok::ColonDash => f.write_str("`:-`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semicolon => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut column = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let start_col = column;
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            chars.next();
            column += 1;
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => bump(&mut chars),
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    out.push(Spanned {
                        tok: Tok::ColonDash,
                        span: SourceSpan::at(line, start_col, 2),
                    });
                } else {
                    out.push(Spanned {
                        tok: Tok::Colon,
                        span: SourceSpan::at(line, start_col, 1),
                    });
                }
            }
            ';' | ',' | '.' | '-' | '/' | '(' | ')' | '{' | '}' => {
                bump(&mut chars);
                let tok = match c {
                    ';' => Tok::Semicolon,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '-' => Tok::Minus,
                    '/' => Tok::Slash,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    _ => Tok::RBrace,
                };
                out.push(Spanned {
                    tok,
                    span: SourceSpan::at(line, start_col, 1),
                });
            }
            '#' => {
                bump(&mut chars);
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(ParseError::new(
                        SourceSpan::at(line, start_col, 1),
                        "dangling `#`",
                    ));
                }
                let len = name.len() as u32 + 1;
                out.push(Spanned {
                    tok: Tok::Hash(name),
                    span: SourceSpan::at(line, start_col, len),
                });
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let span = SourceSpan::at(line, start_col, digits.len() as u32);
                let value: i64 = digits
                    .parse()
                    .map_err(|_| ParseError::new(span.clone(), "integer literal out of range"))?;
                out.push(Spanned {
                    tok: Tok::Int(value),
                    span,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let len = name.len() as u32;
                out.push(Spanned {
                    tok: Tok::Ident(name),
                    span: SourceSpan::at(line, start_col, len),
                });
            }
            other => {
                return Err(ParseError::new(
                    SourceSpan::at(line, start_col, 1),
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["not", "cs", "adv", "bool"];

struct Parser<'e, 't> {
    env: &'e Env<'e>,
    tokens: &'t [Spanned],
    pos: usize,
    end: SourceSpan,
}

impl<'e, 't> Parser<'e, 't> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .map(|s| s.span.clone())
            .unwrap_or_else(|| self.end.clone())
    }

    fn advance(&mut self) -> Option<&Spanned> {
        let s = self.tokens.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == tok => {
                self.advance();
                Ok(())
            }
            Some(t) => Err(ParseError::expecting(
                self.span(),
                format!("unexpected {t} in {what}"),
                tok.to_string(),
            )),
            None => Err(ParseError::expecting(
                self.span(),
                format!("unexpected end of input in {what}"),
                tok.to_string(),
            )),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    /// Skips past the next `.` so statement parsing can resume.
    fn recover(&mut self) {
        while let Some(s) = self.advance() {
            if s.tok == Tok::Dot {
                break;
            }
        }
    }

    fn parse_ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        let span = self.span();
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.advance();
                Ok((name, span))
            }
            Some(t) => Err(ParseError::expecting(
                span,
                format!("unexpected {t} in {what}"),
                "an identifier",
            )),
            None => Err(ParseError::expecting(
                span,
                format!("unexpected end of input in {what}"),
                "an identifier",
            )),
        }
    }

    fn parse_literal(&mut self) -> Result<Literal, ParseError> {
        let negated = if self.peek() == Some(&Tok::Minus) {
            self.advance();
            true
        } else {
            false
        };
        let (name, span) = self.parse_ident("literal")?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::new(
                span,
                format!("`{name}` is reserved and cannot name an atom"),
            ));
        }
        if !is_valid_atom_name(&name) {
            return Err(ParseError::new(span, format!("invalid atom name `{name}`")));
        }
        let atom = Atom::new(name);
        Ok(if negated {
            Literal::negative(atom)
        } else {
            Literal::positive(atom)
        })
    }

    fn parse_block(&mut self) -> Result<Block, ParseError> {
        let mut block = Block::empty();
        // An empty block is closed immediately by `;` or `:`.
        if matches!(self.peek(), Some(Tok::Semicolon) | Some(Tok::Colon)) {
            return Ok(block);
        }
        loop {
            if let Some(Tok::Ident(name)) = self.peek() {
                if name == "not" {
                    self.advance();
                    block.push_negative(self.parse_literal()?);
                } else {
                    block.push_positive(self.parse_literal()?);
                }
            } else {
                block.push_positive(self.parse_literal()?);
            }
            if self.peek() == Some(&Tok::Comma) {
                self.advance();
            } else {
                return Ok(block);
            }
        }
    }

    /// A signed number: integer or `p/q` rational.
    fn parse_number(&mut self) -> Result<Rational, ParseError> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.advance();
            true
        } else {
            false
        };
        let span = self.span();
        let Some(Tok::Int(numer)) = self.peek().cloned() else {
            return Err(ParseError::expecting(
                span,
                "malformed number",
                "an integer or `p/q` rational",
            ));
        };
        self.advance();
        let mut value = Rational::from_integer(numer);
        if self.peek() == Some(&Tok::Slash) {
            self.advance();
            let span = self.span();
            let Some(Tok::Int(denom)) = self.peek().cloned() else {
                return Err(ParseError::expecting(
                    span,
                    "malformed rational",
                    "a denominator",
                ));
            };
            self.advance();
            if denom == 0 {
                return Err(ParseError::new(span, "zero denominator"));
            }
            value = Rational::new(numer, denom);
        }
        Ok(if negative { -value } else { value })
    }

    fn parse_arg(&mut self, depth: usize) -> Result<AlgArg, ParseError> {
        match self.peek() {
            Some(Tok::LBrace) => {
                if depth > 0 {
                    return Err(ParseError::new(self.span(), "nested set arguments"));
                }
                self.advance();
                let mut values = Vec::new();
                loop {
                    match self.parse_arg(depth + 1)? {
                        AlgArg::Value(v) => values.push(v),
                        AlgArg::Set(_) => unreachable!("depth check rejects nested sets"),
                    }
                    match self.peek() {
                        Some(Tok::Comma) => {
                            self.advance();
                        }
                        _ => break,
                    }
                }
                self.expect(&Tok::RBrace, "set argument")?;
                Ok(AlgArg::Set(values))
            }
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.advance();
                Ok(AlgArg::Value(ParamValue::Symbol(name)))
            }
            _ => Ok(AlgArg::Value(ParamValue::Number(self.parse_number()?))),
        }
    }

    fn parse_call(&mut self, what: &str) -> Result<(String, Vec<AlgArg>, SourceSpan), ParseError> {
        let (name, span) = self.parse_ident(what)?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.advance();
            loop {
                args.push(self.parse_arg(0)?);
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.advance();
                    }
                    _ => break,
                }
            }
            self.expect(&Tok::RParen, what)?;
        }
        Ok((name, args, span))
    }

    fn parse_rule(&mut self) -> Result<Rule, ParseError> {
        let head = self.parse_literal()?;
        self.expect(&Tok::ColonDash, "rule")?;
        let mut blocks = vec![self.parse_block()?];
        while self.peek() == Some(&Tok::Semicolon) {
            self.advance();
            blocks.push(self.parse_block()?);
        }
        self.expect(&Tok::Colon, "rule")?;

        let (kw, kw_span) = self.parse_ident("rule annotations")?;
        if kw != "cs" {
            return Err(ParseError::expecting(
                kw_span,
                format!("unexpected `{kw}` in rule annotations"),
                "`cs`",
            ));
        }
        let (cs_name, cs_args, cs_span) = self.parse_call("constraint set")?;
        let cs_ref = ConstraintRef::new(cs_name, cs_args);
        let arity = self
            .env
            .registry
            .constraint_arity(&cs_ref)
            .map_err(|e| ParseError::new(cs_span.clone(), e.to_string()))?;
        if arity != blocks.len() {
            return Err(ParseError::new(
                cs_span,
                format!(
                    "constraint arity {arity} does not match {} body blocks",
                    blocks.len()
                ),
            ));
        }
        self.expect(&Tok::Comma, "rule annotations")?;
        let (kind, kind_span) = self.parse_ident("rule annotations")?;
        let rule = match kind.as_str() {
            "adv" => {
                let (name, args, span) = self.parse_call("advancing algorithm")?;
                let adv_ref = AdvancingRef::new(name, args);
                self.env
                    .registry
                    .validate_advancing(&adv_ref)
                    .map_err(|e| ParseError::new(span, e.to_string()))?;
                Rule::Advancing(AdvancingRule {
                    head,
                    blocks,
                    cs: ConstraintSet::Named(cs_ref),
                    adv: Advancer::Named(adv_ref),
                })
            }
            "bool" => {
                let (name, args, span) = self.parse_call("boolean algorithm")?;
                let bool_ref = BooleanRef::new(name, args);
                self.env
                    .registry
                    .validate_boolean(&bool_ref)
                    .map_err(|e| ParseError::new(span, e.to_string()))?;
                Rule::Stationary(StationaryRule {
                    head,
                    blocks,
                    cs: ConstraintSet::Named(cs_ref),
                    guard: BoolGuard::Named(bool_ref),
                })
            }
            other => {
                return Err(ParseError::expecting(
                    kind_span,
                    format!("unexpected `{other}` in rule annotations"),
                    "`adv` or `bool`",
                ));
            }
        };
        self.expect(&Tok::Dot, "rule")?;
        Ok(rule)
    }
}

/// Parses a program, resolving every algorithm reference against the
/// registry in `env`. All statement-level errors are collected.
pub fn parse_program(text: &str, env: &Env) -> Result<Program, Vec<ParseError>> {
    let tokens = lex(text).map_err(|e| vec![e])?;
    let lines = text.lines().count().max(1) as u32;
    let end = SourceSpan::at(
        lines,
        text.lines().last().map_or(1, |l| l.len() as u32 + 1),
        0,
    );
    let mut parser = Parser {
        env,
        tokens: &tokens,
        pos: 0,
        end,
    };
    let mut errors = Vec::new();
    let mut rules = Vec::new();
    let mut delta_t = None;

    while !parser.at_end() {
        if let Some(Tok::Hash(name)) = parser.peek() {
            let name = name.clone();
            let span = parser.span();
            parser.advance();
            if name != "delta_t" {
                errors.push(ParseError::new(
                    span,
                    format!("unknown directive `#{name}`"),
                ));
                parser.recover();
                continue;
            }
            if delta_t.is_some() {
                errors.push(ParseError::new(span, "duplicate `#delta_t` header"));
                parser.recover();
                continue;
            }
            if !rules.is_empty() {
                errors.push(ParseError::new(span, "`#delta_t` must precede all rules"));
                parser.recover();
                continue;
            }
            match parser.parse_number().and_then(|value| {
                parser.expect(&Tok::Dot, "header")?;
                Ok(value)
            }) {
                Ok(value) if value.is_positive() => delta_t = Some(value),
                Ok(_) => {
                    errors.push(ParseError::new(span, "`#delta_t` must be positive"));
                }
                Err(e) => {
                    errors.push(e);
                    parser.recover();
                }
            }
            continue;
        }
        match parser.parse_rule() {
            Ok(rule) => rules.push(rule),
            Err(e) => {
                errors.push(e);
                parser.recover();
            }
        }
    }

    if errors.is_empty() {
        Ok(Program::new(rules, delta_t.unwrap_or(Rational::ONE)))
    } else {
        Err(errors)
    }
}

fn parse_param_value(text: &str, span: SourceSpan) -> Result<ParamValue, ParseError> {
    if text
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || c == '-')
    {
        Rational::parse(text)
            .map(ParamValue::Number)
            .ok_or_else(|| ParseError::new(span, format!("malformed number `{text}`")))
    } else if is_valid_atom_name(text) {
        Ok(ParamValue::Symbol(text.to_string()))
    } else {
        Err(ParseError::new(span, format!("malformed value `{text}`")))
    }
}

/// Parses a `name=value` sequence into a generalized position; `step` must
/// come first.
fn parse_position_fields<'a>(
    mut fields: impl Iterator<Item = (&'a str, SourceSpan)>,
) -> Result<GeneralizedPosition, ParseError> {
    let (first, first_span) = fields.next().ok_or_else(|| {
        ParseError::expecting(SourceSpan::at(1, 1, 0), "missing position", "`step=<k>`")
    })?;
    let step = match first.split_once('=') {
        Some(("step", value)) => {
            let n: i64 = value.parse().map_err(|_| {
                ParseError::new(first_span.clone(), format!("malformed step `{value}`"))
            })?;
            if n < 0 {
                return Err(ParseError::new(first_span, "negative step"));
            }
            u32::try_from(n)
                .map_err(|_| ParseError::new(first_span.clone(), "step out of range"))?
        }
        _ => {
            return Err(ParseError::expecting(
                first_span,
                format!("unexpected field `{first}`"),
                "`step=<k>`",
            ))
        }
    };
    let mut params = Vec::new();
    for (field, span) in fields {
        let Some((name, value)) = field.split_once('=') else {
            return Err(ParseError::expecting(
                span,
                format!("unexpected field `{field}`"),
                "`name=value`",
            ));
        };
        if !is_valid_atom_name(name) {
            return Err(ParseError::new(
                span,
                format!("invalid parameter name `{name}`"),
            ));
        }
        params.push((name.to_string(), parse_param_value(value, span)?));
    }
    Ok(GeneralizedPosition::new(step, params))
}

fn line_fields(line: &str, line_no: u32) -> impl Iterator<Item = (&str, SourceSpan)> {
    line.split_whitespace().map(move |word| {
        let column = word.as_ptr() as usize - line.as_ptr() as usize + 1;
        (
            word,
            SourceSpan::at(line_no, column as u32, word.len() as u32),
        )
    })
}

/// Parses an initial-condition file: one `gp step=<k> name=value ...` line
/// per position, duplicates deduplicated.
pub fn parse_init(text: &str) -> Result<InitialCondition, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut positions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u32 + 1;
        let line = raw.split('%').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line_fields(line, line_no);
        match fields.next() {
            Some(("gp", _)) => match parse_position_fields(fields) {
                Ok(p) => positions.push(p),
                Err(e) => errors.push(e),
            },
            Some((other, span)) => {
                errors.push(ParseError::expecting(
                    span,
                    format!("unexpected `{other}`"),
                    "`gp`",
                ));
            }
            None => {}
        }
    }
    if errors.is_empty() {
        Ok(InitialCondition::new(positions))
    } else {
        Err(errors)
    }
}

/// Parses a fact file in the interpretation serializer's format.
pub fn parse_interpretation(text: &str) -> Result<Interpretation, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut facts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u32 + 1;
        let line = raw.split('%').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line_fields(line, line_no);
        match fields.next() {
            Some(("fact", _)) => {}
            Some((other, span)) => {
                errors.push(ParseError::expecting(
                    span,
                    format!("unexpected `{other}`"),
                    "`fact`",
                ));
                continue;
            }
            None => continue,
        }
        let Some((lit_text, lit_span)) = fields.next() else {
            errors.push(ParseError::new(
                SourceSpan::at(line_no, 1, 4),
                "missing literal",
            ));
            continue;
        };
        let (negated, name) = match lit_text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, lit_text),
        };
        if !is_valid_atom_name(name) || KEYWORDS.contains(&name) {
            errors.push(ParseError::new(
                lit_span,
                format!("invalid literal `{lit_text}`"),
            ));
            continue;
        }
        let literal = if negated {
            Literal::negative(Atom::new(name))
        } else {
            Literal::positive(Atom::new(name))
        };
        match fields.next() {
            Some(("@", _)) => {}
            Some((other, span)) => {
                errors.push(ParseError::expecting(
                    span,
                    format!("unexpected `{other}`"),
                    "`@`",
                ));
                continue;
            }
            None => {
                errors.push(ParseError::new(lit_span, "missing `@ step=<k>`"));
                continue;
            }
        }
        match parse_position_fields(fields) {
            Ok(p) => facts.push(Fact::new(literal, p)),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(Interpretation::new(facts))
    } else {
        Err(errors)
    }
}

fn write_position(out: &mut String, p: &GeneralizedPosition) {
    out.push_str(&format!("step={}", p.step()));
    for (name, value) in p.params() {
        out.push_str(&format!(" {name}={value}"));
    }
}

/// Serializes an interpretation in canonical order: step, then parameters,
/// then literal. The output round-trips through [`parse_interpretation`].
pub fn serialize_interpretation(m: &Interpretation) -> String {
    let mut out = String::new();
    for fact in m.facts() {
        out.push_str(&format!("fact {} @ ", fact.literal));
        write_position(&mut out, &fact.position);
        out.push('\n');
    }
    out
}

/// Serializes an initial condition; round-trips through [`parse_init`].
pub fn serialize_init(init: &InitialCondition) -> String {
    let mut out = String::new();
    for p in init.positions() {
        out.push_str("gp ");
        write_position(&mut out, p);
        out.push('\n');
    }
    out
}

fn write_block(out: &mut String, block: &Block) {
    let mut first = true;
    for l in block.positive() {
        if !first {
            out.push_str(", ");
        }
        out.push_str(&l.to_string());
        first = false;
    }
    for l in block.negative() {
        if !first {
            out.push_str(", ");
        }
        out.push_str(&format!("not {l}"));
        first = false;
    }
}

/// Serializes a program in the rule-language grammar; parsing the output
/// reproduces the program exactly. Only rules whose constraint sets and
/// algorithms are named registry references are serializable —rules
/// produced by splitting or reduction carry materialized values with no
/// source form.
pub fn serialize_program(program: &Program) -> Result<String, String> {
    let mut out = format!("#delta_t {}.\n", program.delta_t());
    for rule in program.rules() {
        let head = rule.head().to_string();
        let mut body = String::new();
        for (i, block) in rule.blocks().iter().enumerate() {
            if i > 0 {
                body.push_str(" ; ");
            }
            write_block(&mut body, block);
        }
        let ConstraintSet::Named(cs) = rule.constraint_set() else {
            return Err(format!("rule `{rule}` has a materialized constraint set"));
        };
        let annos = match rule {
            Rule::Advancing(r) => match &r.adv {
                Advancer::Named(a) => format!("cs {cs}, adv {a}"),
                Advancer::Mapped(_) => {
                    return Err(format!(
                        "rule `{rule}` has a materialized advancing algorithm"
                    ))
                }
            },
            Rule::Stationary(r) => match &r.guard {
                BoolGuard::Named(b) => format!("cs {cs}, bool {b}"),
                BoolGuard::Explicit(_) => {
                    return Err(format!("rule `{rule}` has a materialized boolean guard"))
                }
            },
        };
        if body.is_empty() {
            out.push_str(&format!("{head} :- : {annos}.\n"));
        } else {
            out.push_str(&format!("{head} :- {body} : {annos}.\n"));
        }
    }
    Ok(out)
}
