use std::fmt;

use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

// Longest first, so that prefixes never shadow longer symbols.
const SYMBOLS: &[&str] = &[
    ":$=", ":=", "..", "=>", "<-", "==", "!=", "<=", ">=", "&&", "||", "++", "->", "-*", "/\\", "\\/", ";", ",", "(", ")", "[", "]", "{",
    "}", "=", "<", ">", "!", "+", "-", "*", "/", "%", "^", ":",
];

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = text.parse::<i64>().map_err(|_| SyntaxError::at(tl, tc, format!("integer literal `{text}` is too large")))?;
            out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            advance(&mut i, &mut line, &mut col, 1);
            loop {
                match chars.get(i) {
                    None => return Err(SyntaxError::at(tl, tc, "unterminated string literal")),
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col, 1);
                        break;
                    }
                    Some('\\') => {
                        let esc = chars.get(i + 1).ok_or_else(|| SyntaxError::at(tl, tc, "unterminated string literal"))?;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => *other,
                        });
                        advance(&mut i, &mut line, &mut col, 2);
                    }
                    Some(ch) => {
                        s.push(*ch);
                        advance(&mut i, &mut line, &mut col, 1);
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                advance(&mut i, &mut line, &mut col, sym.chars().count());
                out.push(Token { tok: Tok::Sym(sym), line: tl, col: tc });
            }
            None => return Err(SyntaxError::at(tl, tc, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_and_positions() {
        let toks = lex("t :$= {1 .. m};\n  x := \"read\"").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("t".into()),
                Tok::Sym(":$="),
                Tok::Sym("{"),
                Tok::Int(1),
                Tok::Sym(".."),
                Tok::Ident("m".into()),
                Tok::Sym("}"),
                Tok::Sym(";"),
                Tok::Ident("x".into()),
                Tok::Sym(":="),
                Tok::Str("read".into()),
                Tok::Eof,
            ]
        );
        assert_eq!((toks[8].line, toks[8].col), (2, 3));
    }

    #[test]
    fn comments_are_skipped() {
        let toks = lex("skip // trailing\nskip").unwrap();
        assert_eq!(toks.len(), 3);
    }
}
