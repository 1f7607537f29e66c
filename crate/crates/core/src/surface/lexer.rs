//! Tokenizer for the surface language. `#` starts a line comment.

use super::ast::Span;
use super::SurfaceError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    LIdent(String),
    UIdent(String),
    Int(u64),
    // keywords
    Effect,
    Exception,
    Fun,
    Main,
    Let,
    In,
    Tick,
    Do,
    Handle,
    Return,
    Forward,
    Raise,
    Try,
    Catch,
    Match,
    Absurd,
    Fn,
    Inl,
    Inr,
    TUnit,
    TVoid,
    TInt,
    TList,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Eq,
    EqEq,
    FatArrow,
    Arrow,
    LinArrow,
    Bar,
    Plus,
    Minus,
    Star,
    Lt,
    Slash,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::LIdent(s) | Tok::UIdent(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Effect => "effect",
            Tok::Exception => "exception",
            Tok::Fun => "fun",
            Tok::Main => "main",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::Tick => "tick",
            Tok::Do => "do",
            Tok::Handle => "handle",
            Tok::Return => "return",
            Tok::Forward => "forward",
            Tok::Raise => "raise",
            Tok::Try => "try",
            Tok::Catch => "catch",
            Tok::Match => "match",
            Tok::Absurd => "absurd",
            Tok::Fn => "fn",
            Tok::Inl => "inl",
            Tok::Inr => "inr",
            Tok::TUnit => "unit",
            Tok::TVoid => "void",
            Tok::TInt => "int",
            Tok::TList => "list",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Eq => "=",
            Tok::EqEq => "==",
            Tok::FatArrow => "=>",
            Tok::Arrow => "->",
            Tok::LinArrow => "-o",
            Tok::Bar => "|",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Lt => "<",
            Tok::Slash => "/",
            Tok::LIdent(_) | Tok::UIdent(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "effect" => Tok::Effect,
        "exception" => Tok::Exception,
        "fun" => Tok::Fun,
        "main" => Tok::Main,
        "let" => Tok::Let,
        "in" => Tok::In,
        "tick" => Tok::Tick,
        "do" => Tok::Do,
        "handle" => Tok::Handle,
        "return" => Tok::Return,
        "forward" => Tok::Forward,
        "raise" => Tok::Raise,
        "try" => Tok::Try,
        "catch" => Tok::Catch,
        "match" => Tok::Match,
        "absurd" => Tok::Absurd,
        "fn" => Tok::Fn,
        "inl" => Tok::Inl,
        "inr" => Tok::Inr,
        "unit" => Tok::TUnit,
        "void" => Tok::TVoid,
        "int" => Tok::TInt,
        "list" => Tok::TList,
        _ => return None,
    })
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, SurfaceError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match keyword(&word) {
                Some(k) => k,
                None if c.is_ascii_uppercase() => Tok::UIdent(word),
                None => Tok::LIdent(word),
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse::<u64>().map_err(|_| SurfaceError::Syntax {
                line,
                col,
                msg: format!("integer literal `{digits}` is too large"),
            })?;
            Tok::Int(n)
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                (':', Some(':')) => (Tok::ColonColon, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('=', Some('>')) => (Tok::FatArrow, 2),
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('-', Some('o')) if !chars.get(i + 2).is_some_and(|&c| is_ident_char(c)) => {
                    (Tok::LinArrow, 2)
                }
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                (',', _) => (Tok::Comma, 1),
                (';', _) => (Tok::Semi, 1),
                (':', _) => (Tok::Colon, 1),
                ('=', _) => (Tok::Eq, 1),
                ('|', _) => (Tok::Bar, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('<', _) => (Tok::Lt, 1),
                ('/', _) => (Tok::Slash, 1),
                _ => {
                    return Err(SurfaceError::Syntax {
                        line,
                        col,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            };
            i += len;
            tok
        };
        col += (i - start) as u32;
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}
