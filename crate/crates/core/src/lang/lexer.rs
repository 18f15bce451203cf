use std::fmt;

use super::LangError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    /// Decimal literal, kept verbatim.
    Float(String),
    /// `.N` directly attached to the preceding token.
    Proj(usize),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Float(s) => write!(f, "`{s}`"),
            Tok::Proj(n) => write!(f, "`.{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

/// Longest match first.
const SYMBOLS: &[&str] = &[
    "\\/+", "==>", "<=>", "(*)", "<-", "<$", "->", "=>", "==", "!=", "<=", ">=", ">>", "&&", "||",
    "/\\", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "=", "<", ">", "!", "+", "-", "*",
    "/", "@", "~", "|",
];

const UNICODE: &[(char, &str)] = &[
    ('⊗', "⊗"),
    ('∩', "/\\"),
    ('¬', "!"),
    ('∧', "&&"),
    ('∨', "||"),
    ('≤', "<="),
    ('≥', ">="),
    ('≠', "!="),
    ('⊕', "xor"),
];

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '′'
}

pub fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let mut out: Vec<Token> = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k].1 == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if src[pos..].starts_with("//") {
            while i < chars.len() && chars[i].1 != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let attached = out.last().is_some_and(|t| t.end == pos);
        if ident_start(ch) {
            let mut j = i;
            while j < chars.len() && ident_char(chars[j].1) {
                j += 1;
            }
            let end = chars.get(j).map_or(src.len(), |c| c.0);
            let word = src[pos..end].replace('′', "'");
            let tok = if word == "xor" {
                Tok::Sym("xor")
            } else {
                Tok::Ident(word)
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
                start: pos,
                end,
            });
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if ch == '.' && attached && i + 1 < chars.len() && chars[i + 1].1.is_ascii_digit() {
            let prev_ok = matches!(
                out.last().map(|t| &t.tok),
                Some(Tok::Ident(_))
                    | Some(Tok::Sym(")"))
                    | Some(Tok::Sym("]"))
                    | Some(Tok::Proj(_))
            );
            if prev_ok {
                let mut j = i + 1;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                let end = chars.get(j).map_or(src.len(), |c| c.0);
                let n: usize = src[pos + 1..end].parse().map_err(|_| LangError::Syntax {
                    line: tl,
                    col: tc,
                    msg: "projection index too large".into(),
                })?;
                out.push(Token {
                    tok: Tok::Proj(n),
                    line: tl,
                    col: tc,
                    start: pos,
                    end,
                });
                let n = j - i;
                advance(&mut i, &mut line, &mut col, n);
                continue;
            }
        }
        if ch.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            let mut is_float = false;
            if j + 1 < chars.len() && chars[j].1 == '.' && chars[j + 1].1.is_ascii_digit() {
                is_float = true;
                j += 1;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
            }
            let end = chars.get(j).map_or(src.len(), |c| c.0);
            let text = &src[pos..end];
            let tok = if is_float {
                Tok::Float(text.to_string())
            } else {
                Tok::Int(text.parse().map_err(|_| LangError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("integer literal {text} is too large"),
                })?)
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
                start: pos,
                end,
            });
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if let Some(&(_, s)) = UNICODE.iter().find(|(c, _)| *c == ch) {
            let end = pos + ch.len_utf8();
            out.push(Token {
                tok: Tok::Sym(s),
                line: tl,
                col: tc,
                start: pos,
                end,
            });
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        match SYMBOLS.iter().find(|s| src[pos..].starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    line: tl,
                    col: tc,
                    start: pos,
                    end: pos + s.len(),
                });
                advance(&mut i, &mut line, &mut col, s.chars().count());
            }
            None => {
                return Err(LangError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{ch}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn projection_needs_attachment() {
        assert_eq!(
            toks("p.1"),
            vec![Tok::Ident("p".into()), Tok::Proj(1), Tok::Eof]
        );
        assert_eq!(
            toks("p. 1"),
            vec![Tok::Ident("p".into()), Tok::Sym("."), Tok::Int(1), Tok::Eof]
        );
        assert_eq!(toks("0.5"), vec![Tok::Float("0.5".into()), Tok::Eof]);
        assert_eq!(
            toks("x = 0."),
            vec![
                Tok::Ident("x".into()),
                Tok::Sym("="),
                Tok::Int(0),
                Tok::Sym("."),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn symbols_and_comments() {
        assert_eq!(
            toks("a <$ b // c\n /\\ \\/+ (*)"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("<$"),
                Tok::Ident("b".into()),
                Tok::Sym("/\\"),
                Tok::Sym("\\/+"),
                Tok::Sym("(*)"),
                Tok::Eof
            ]
        );
    }
}
