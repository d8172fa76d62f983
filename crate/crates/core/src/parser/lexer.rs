use crate::ast::SourcePos;

use super::{ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// Identifier starting with a lowercase letter or `_`.
    Ident(String),
    /// Identifier starting with an uppercase letter.
    Upper(String),
    /// `'Label`.
    Quoted(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: SourcePos,
}

impl Token {
    /// Tokens in the first column start a new top-level item.
    pub fn at_line_start(&self) -> bool {
        self.pos.column == 1
    }
}

const SYMBOLS: &[&str] = &[
    "->", "-o", "(", ")", "{", "}", "[", "]", "<", ">", ",", ":", ".", "=", "!", "?", "&", "+", "-",
    "~", "^", ";", "*", "|",
];

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    let pos = |off: usize, line: u32, col: u32| SourcePos { line, column: col, offset: off as u32 };
    let at = |i: usize| bytes.get(i).map(|&(_, c)| c);

    while i < bytes.len() {
        let (off, c) = bytes[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '/' && at(i + 1) == Some('/') {
            while i < bytes.len() && bytes[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let start = pos(off, line, col);
        let begin = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while at(i).is_some_and(ident_char) {
                i += 1;
            }
            let text: String = bytes[begin..i].iter().map(|&(_, c)| c).collect();
            if c.is_ascii_uppercase() {
                Tok::Upper(text)
            } else {
                Tok::Ident(text)
            }
        } else if c == '\'' && at(i + 1).is_some_and(|d| d.is_ascii_alphabetic() || d == '_') {
            i += 1;
            while at(i).is_some_and(|d| d.is_ascii_alphanumeric() || d == '_') {
                i += 1;
            }
            Tok::Quoted(bytes[begin + 1..i].iter().map(|&(_, c)| c).collect())
        } else if c.is_ascii_digit() {
            while at(i).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
            }
            let text: String = bytes[begin..i].iter().map(|&(_, c)| c).collect();
            match text.parse::<i64>() {
                Ok(n) => Tok::Int(n),
                Err(_) => {
                    return Err(ParseError::new(ParseErrorKind::Syntax, start, "integer literal out of range"))
                }
            }
        } else {
            let rest: String = bytes[i..bytes.len().min(i + 2)].iter().map(|&(_, c)| c).collect();
            let sym = SYMBOLS.iter().find(|s| {
                rest.starts_with(**s) && !(**s == "-o" && at(i + 2).is_some_and(ident_char))
            });
            match sym {
                Some(s) => {
                    i += s.chars().count();
                    Tok::Sym(s)
                }
                None => {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        start,
                        format!("unexpected character `{c}`"),
                    ))
                }
            }
        };
        col += (i - begin) as u32;
        out.push(Token { tok, pos: start });
    }
    let end_off = src.len();
    out.push(Token { tok: Tok::Eof, pos: pos(end_off, line, col.max(2)) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_listing_fragments() {
        assert_eq!(
            toks("!{EOS}. End"),
            vec![
                Tok::Sym("!"),
                Tok::Sym("{"),
                Tok::Upper("EOS".into()),
                Tok::Sym("}"),
                Tok::Sym("."),
                Tok::Upper("End".into()),
                Tok::Eof
            ]
        );
        assert_eq!(
            toks("send d 'Neg // comment"),
            vec![Tok::Ident("send".into()), Tok::Ident("d".into()), Tok::Quoted("Neg".into()), Tok::Eof]
        );
        assert_eq!(toks("Int -o Int"), vec![Tok::Upper("Int".into()), Tok::Sym("-o"), Tok::Upper("Int".into()), Tok::Eof]);
        assert_eq!(toks("-out"), vec![Tok::Sym("-"), Tok::Ident("out".into()), Tok::Eof]);
        assert_eq!(toks("x'3"), vec![Tok::Ident("x'3".into()), Tok::Eof]);
    }

    #[test]
    fn positions_are_tracked() {
        let t = lex("a\n  b").unwrap();
        assert_eq!(t[0].pos.line, 1);
        assert!(t[0].at_line_start());
        assert_eq!(t[1].pos.line, 2);
        assert_eq!(t[1].pos.column, 3);
        assert_eq!(t[1].pos.offset, 4);
    }

    #[test]
    fn bad_character_reports_position() {
        let e = lex("x $").unwrap_err();
        assert_eq!(e.pos.column, 3);
    }
}
