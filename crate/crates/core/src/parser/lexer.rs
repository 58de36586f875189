use std::fmt;

use crate::diagnostic::{Code, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Class,
    Enum,
    New,
    If,
    Else,
    Switch,
    Continue,
    True,
    False,
    Null,
    Unit,
    Void,
    Bool,
    End,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Semi,
    Colon,
    Eq,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Class => "class",
            Tok::Enum => "enum",
            Tok::New => "new",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::Switch => "switch",
            Tok::Continue => "continue",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Null => "null",
            Tok::Unit => "unit",
            Tok::Void => "void",
            Tok::Bool => "bool",
            Tok::End => "end",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Dot => ".",
            Tok::Eof => return write!(f, "end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "class" => Tok::Class,
        "enum" => Tok::Enum,
        "new" => Tok::New,
        "if" => Tok::If,
        "else" => Tok::Else,
        "switch" => Tok::Switch,
        "continue" => Tok::Continue,
        "true" => Tok::True,
        "false" => Tok::False,
        "null" => Tok::Null,
        "unit" => Tok::Unit,
        "void" => Tok::Void,
        "bool" => Tok::Bool,
        "end" => Tok::End,
        _ => return None,
    })
}

pub fn is_keyword(s: &str) -> bool {
    keyword(s).is_some()
}

pub fn tokenize(file: &str, text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    while let Some(&c) = chars.peek() {
        let start = (line, col);
        let mut advance = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            advance(&mut chars);
            continue;
        }
        if c == '/' {
            advance(&mut chars);
            if chars.peek() == Some(&'/') {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    advance(&mut chars);
                }
                continue;
            }
            return Err(Diagnostic::error(
                Code::SyntaxError,
                Span::new(file, start, start),
                "unexpected character `/`",
            ));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_') {
                s.push(advance(&mut chars));
            }
            let tok = keyword(&s).unwrap_or(Tok::Ident(s));
            out.push(Token { tok, span: Span::new(file, start, (line, col - 1)) });
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '<' | '⟨' => Tok::Lt,
            '>' | '⟩' => Tok::Gt,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '.' => Tok::Dot,
            other => {
                return Err(Diagnostic::error(
                    Code::SyntaxError,
                    Span::new(file, start, start),
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        advance(&mut chars);
        out.push(Token { tok, span: Span::new(file, start, start) });
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(file, (line, col), (line, col)) });
    Ok(out)
}
