use std::fmt;
use std::sync::Arc;

use super::{Span, SyntaxError};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(f64),
    True,
    False,
    Infinity,
    Def,
    Val,
    Fun,
    If,
    Else,
    Return,
    Send,
    Retsend,
    And,
    Or,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Assign,
    FatArrow,
    ThinArrow,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    Le,
    Ge,
    Lt,
    Gt,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Num(n) => return write!(f, "number `{n}`"),
            Tok::True => "`True`",
            Tok::False => "`False`",
            Tok::Infinity => "`Infinity`",
            Tok::Def => "`def`",
            Tok::Val => "`val`",
            Tok::Fun => "`fun`",
            Tok::If => "`if`",
            Tok::Else => "`else`",
            Tok::Return => "`return`",
            Tok::Send => "`send`",
            Tok::Retsend => "`retsend`",
            Tok::And => "`and`",
            Tok::Or => "`or`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Assign => "`=`",
            Tok::FatArrow => "`=>`",
            Tok::ThinArrow => "`->`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::EqEq => "`==`",
            Tok::Le => "`<=`",
            Tok::Ge => "`>=`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "True" => Tok::True,
        "False" => Tok::False,
        "Infinity" => Tok::Infinity,
        "def" => Tok::Def,
        "val" => Tok::Val,
        "fun" => Tok::Fun,
        "if" => Tok::If,
        "else" => Tok::Else,
        "return" => Tok::Return,
        "send" => Tok::Send,
        "retsend" => Tok::Retsend,
        "and" => Tok::And,
        "or" => Tok::Or,
        _ => return None,
    })
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits `src` into tokens. Identifiers may contain interior hyphens when the
/// hyphen is directly followed by a letter (`ping-pong`, `uniconn-count`), so
/// subtraction between two names needs surrounding whitespace.
pub fn tokenize(file: &Arc<str>, src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(file.clone(), line, col);
        let start = i;
        let single = |t: Tok| Some((t, 1usize));

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

        let next = chars.get(i + 1).copied();
        let punct = match c {
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '{' => single(Tok::LBrace),
            '}' => single(Tok::RBrace),
            '[' => single(Tok::LBracket),
            ']' => single(Tok::RBracket),
            ',' => single(Tok::Comma),
            ';' => single(Tok::Semi),
            '+' => single(Tok::Plus),
            '*' => single(Tok::Star),
            '/' => single(Tok::Slash),
            '-' if next == Some('>') => Some((Tok::ThinArrow, 2)),
            '-' => single(Tok::Minus),
            '=' if next == Some('>') => Some((Tok::FatArrow, 2)),
            '=' if next == Some('=') => Some((Tok::EqEq, 2)),
            '=' => single(Tok::Assign),
            '<' if next == Some('=') => Some((Tok::Le, 2)),
            '<' => single(Tok::Lt),
            '>' if next == Some('=') => Some((Tok::Ge, 2)),
            '>' => single(Tok::Gt),
            _ => None,
        };
        if let Some((tok, len)) = punct {
            out.push(Token { tok, span });
            i += len;
            col += len as u32;
            continue;
        }

        if c.is_ascii_digit() || (c == '.' && next.is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| SyntaxError::lex(span.clone(), format!("malformed number `{text}`")))?;
            out.push(Token { tok: Tok::Num(value), span });
            col += (i - start) as u32;
            continue;
        }

        if ident_start(c) {
            i += 1;
            loop {
                match chars.get(i) {
                    Some(&d) if ident_continue(d) => i += 1,
                    Some('-') if chars.get(i + 1).is_some_and(|d| d.is_alphabetic()) => i += 2,
                    _ => break,
                }
            }
            let word: String = chars[start..i].iter().collect();
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push(Token { tok, span });
            col += (i - start) as u32;
            continue;
        }

        return Err(SyntaxError::lex(span, format!("unexpected character `{c}`")));
    }

    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(file.clone(), line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(&Arc::from("t"), src)
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn hyphenated_names_and_subtraction() {
        assert_eq!(
            toks("ping-pong() n - 1 n-1"),
            vec![
                Tok::Ident("ping-pong".into()),
                Tok::LParen,
                Tok::RParen,
                Tok::Ident("n".into()),
                Tok::Minus,
                Tok::Num(1.0),
                Tok::Ident("n".into()),
                Tok::Minus,
                Tok::Num(1.0),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn operators_and_comments() {
        assert_eq!(
            toks("a <= b // trailing\n=> -> == >= < >"),
            vec![
                Tok::Ident("a".into()),
                Tok::Le,
                Tok::Ident("b".into()),
                Tok::FatArrow,
                Tok::ThinArrow,
                Tok::EqEq,
                Tok::Ge,
                Tok::Lt,
                Tok::Gt,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("0.25 1e3 7"), vec![Tok::Num(0.25), Tok::Num(1000.0), Tok::Num(7.0), Tok::Eof]);
    }

    #[test]
    fn spans_track_lines() {
        let t = tokenize(&Arc::from("f.xc"), "x\n  y").unwrap();
        assert_eq!((t[1].span.line, t[1].span.col), (2, 3));
    }

    #[test]
    fn rejects_reserved_prefix() {
        let err = tokenize(&Arc::from("t"), "%f0").unwrap_err();
        assert!(err.to_string().contains("unexpected character"));
    }
}
