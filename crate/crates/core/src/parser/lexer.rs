use std::fmt;

use crate::span::{Pos, Span};

use super::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    ExtensionName,
    Integer,
    Punctuation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.text)
    }
}

pub const KEYWORDS: &[&str] = &[
    "language", "core", "extend", "with", "fn", "return", "generic", "type", "exception",
    "variant", "if", "then", "else", "let", "letrec", "in", "match", "true", "false", "unit",
    "succ", "inl", "inr", "cons", "new", "fix", "fold", "unfold", "throw", "try", "catch",
    "panic!", "as", "cast", "forall", "auto", "Nat", "Bool", "Unit", "Top", "Bot", "Nat::rec",
    "Nat::pred", "Nat::iszero", "List::head", "List::tail", "List::isempty",
];

// Longest first, so that `:=` wins over `:` and `<|` over anything shorter.
const PUNCTUATION: &[&str] = &[
    ":=", "=>", "->", "<|", "|>", "(", ")", "{", "}", "[", "]", ",", ";", ":", "=", ".", "|",
    "*", "+", "&", "µ",
];

pub fn is_keyword(text: &str) -> bool {
    KEYWORDS.contains(&text)
}

struct Cursor<'a> {
    src: &'a str,
    pos: Pos,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos.offset += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn bump_str(&mut self, s: &str) {
        for _ in s.chars() {
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source text into tokens. Whitespace and `//` line comments are
/// skipped; token spans cover exactly the token text.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { src: source, pos: Pos::START };
    let mut tokens = Vec::new();
    loop {
        // trivia
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') if cur.rest().starts_with("//") => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }
        let start = cur.pos;
        let Some(c) = cur.peek() else { break };
        let kind = if is_ident_start(c) {
            lex_word(&mut cur);
            if cur.rest().starts_with('!') && &source[start.offset..cur.pos.offset] == "panic" {
                cur.bump();
            }
            if is_keyword(&source[start.offset..cur.pos.offset]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
            TokenKind::Integer
        } else if c == '#' {
            cur.bump();
            while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                cur.bump();
            }
            if cur.pos.offset - start.offset == 1 {
                return Err(ParseError::new("expected extension name after `#`", Span::new(start, cur.pos)));
            }
            TokenKind::ExtensionName
        } else if let Some(p) = PUNCTUATION.iter().find(|p| cur.rest().starts_with(**p)) {
            cur.bump_str(p);
            TokenKind::Punctuation
        } else {
            cur.bump();
            return Err(ParseError::new(format!("illegal character `{c}`"), Span::new(start, cur.pos)));
        };
        tokens.push(Token {
            kind,
            text: source[start.offset..cur.pos.offset].to_string(),
            span: Span::new(start, cur.pos),
        });
    }
    Ok(tokens)
}

fn lex_word(cur: &mut Cursor<'_>) {
    loop {
        while cur.peek().is_some_and(is_ident_continue) {
            cur.bump();
        }
        // qualified names such as `Nat::rec`
        let rest = cur.rest();
        if rest.starts_with("::") && rest[2..].chars().next().is_some_and(is_ident_start) {
            cur.bump_str("::");
            continue;
        }
        break;
    }
}
