//! Line-oriented lexer with Python-style INDENT/DEDENT tokens.
//!
//! Indentation is exactly four spaces per level. Blank lines and lines
//! holding only a `#` comment produce no tokens.

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Str(String),
    Def,
    If,
    Else,
    For,
    In,
    While,
    Return,
    And,
    Or,
    Print,
    LParen,
    RParen,
    Comma,
    Colon,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Gt,
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Str(_) => "string literal".into(),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indent".into(),
            Tok::Dedent => "dedent".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Def => "def",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::For => "for",
            Tok::In => "in",
            Tok::While => "while",
            Tok::Return => "return",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Print => "print",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub const INDENT_WIDTH: usize = 4;

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut levels: Vec<usize> = vec![0];
    let mut line_start = 0;
    while line_start < bytes.len() {
        let line_end = bytes[line_start..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(bytes.len(), |p| line_start + p);
        lex_line(src, line_start, line_end, &mut levels, &mut out)?;
        line_start = line_end + 1;
    }
    let end = Span::new(src.len(), src.len());
    while levels.len() > 1 {
        levels.pop();
        out.push(Token {
            tok: Tok::Dedent,
            span: end,
        });
    }
    out.push(Token { tok: Tok::Eof, span: end });
    Ok(out)
}

fn lex_line(
    src: &str,
    start: usize,
    end: usize,
    levels: &mut Vec<usize>,
    out: &mut Vec<Token>,
) -> Result<(), ParseError> {
    let bytes = src.as_bytes();
    let mut i = start;
    while i < end && (bytes[i] == b' ' || bytes[i] == b'\t' || bytes[i] == b'\r') {
        if bytes[i] == b'\t' {
            // tabs are fine on blank lines, never as indentation
            let rest = &bytes[i..end];
            if rest.iter().all(|b| b.is_ascii_whitespace()) {
                return Ok(());
            }
            return Err(ParseError::syntax(i, "indentation with spaces, found a tab"));
        }
        i += 1;
    }
    if i == end || bytes[i] == b'#' {
        return Ok(());
    }
    let indent = i - start;
    if indent % INDENT_WIDTH != 0 {
        return Err(ParseError::syntax(
            i,
            "indentation in multiples of 4 spaces",
        ));
    }
    let current = *levels.last().expect("indent stack is never empty");
    if indent > current {
        if indent != current + INDENT_WIDTH {
            return Err(ParseError::syntax(i, "one indentation level"));
        }
        levels.push(indent);
        out.push(Token {
            tok: Tok::Indent,
            span: Span::new(start, i),
        });
    } else {
        while indent < *levels.last().unwrap() {
            levels.pop();
            out.push(Token {
                tok: Tok::Dedent,
                span: Span::new(i, i),
            });
        }
        if indent != *levels.last().unwrap() {
            return Err(ParseError::syntax(i, "indentation matching an outer block"));
        }
    }

    let mut last_end = i;
    while i < end {
        let b = bytes[i];
        if b == b' ' || b == b'\t' || b == b'\r' {
            i += 1;
            continue;
        }
        if b == b'#' {
            break;
        }
        let tok_start = i;
        let tok = if b.is_ascii_alphabetic() || b == b'_' {
            while i < end && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            keyword_or_name(&src[tok_start..i])
        } else if b.is_ascii_digit() {
            while i < end && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < end && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_' || bytes[i] == b'.') {
                return Err(ParseError::syntax(i, "an integer literal"));
            }
            let value = src[tok_start..i]
                .parse::<i64>()
                .map_err(|_| ParseError::syntax(tok_start, "an integer that fits in 64 bits"))?;
            Tok::Int(value)
        } else if b == b'"' || b == b'\'' {
            let (s, next) = lex_string(src, i, end)?;
            i = next;
            Tok::Str(s)
        } else {
            let two: &[u8] = if i + 1 < end { &bytes[i..i + 2] } else { b"" };
            let (tok, width) = match (two, b) {
                (b"==", _) => (Tok::EqEq, 2),
                (b"!=", _) => (Tok::NotEq, 2),
                (_, b'(') => (Tok::LParen, 1),
                (_, b')') => (Tok::RParen, 1),
                (_, b',') => (Tok::Comma, 1),
                (_, b':') => (Tok::Colon, 1),
                (_, b'=') => (Tok::Assign, 1),
                (_, b'+') => (Tok::Plus, 1),
                (_, b'-') => (Tok::Minus, 1),
                (_, b'*') => (Tok::Star, 1),
                (_, b'/') => (Tok::Slash, 1),
                (_, b'%') => (Tok::Percent, 1),
                (_, b'<') => (Tok::Lt, 1),
                (_, b'>') => (Tok::Gt, 1),
                _ => {
                    return Err(ParseError::syntax(i, "a token of the mini-language"));
                }
            };
            i += width;
            tok
        };
        last_end = i;
        out.push(Token {
            tok,
            span: Span::new(tok_start, i),
        });
    }
    out.push(Token {
        tok: Tok::Newline,
        span: Span::new(last_end, last_end),
    });
    Ok(())
}

fn keyword_or_name(word: &str) -> Tok {
    match word {
        "def" => Tok::Def,
        "if" => Tok::If,
        "else" => Tok::Else,
        "for" => Tok::For,
        "in" => Tok::In,
        "while" => Tok::While,
        "return" => Tok::Return,
        "and" => Tok::And,
        "or" => Tok::Or,
        "print" => Tok::Print,
        _ => Tok::Name(word.to_string()),
    }
}

/// Returns the unescaped contents and the offset just past the closing quote.
fn lex_string(src: &str, open: usize, end: usize) -> Result<(String, usize), ParseError> {
    let bytes = src.as_bytes();
    let quote = bytes[open];
    let mut out = String::new();
    let mut i = open + 1;
    while i < end {
        let b = bytes[i];
        if b == quote {
            return Ok((out, i + 1));
        }
        if b == b'\\' {
            let Some(&esc) = bytes.get(i + 1).filter(|_| i + 1 < end) else {
                break;
            };
            let c = match esc {
                b'n' => '\n',
                b't' => '\t',
                b'\\' => '\\',
                b'"' => '"',
                b'\'' => '\'',
                _ => return Err(ParseError::syntax(i, "a known escape sequence")),
            };
            out.push(c);
            i += 2;
            continue;
        }
        // copy one UTF-8 scalar
        let ch = src[i..].chars().next().expect("in bounds");
        out.push(ch);
        i += ch.len_utf8();
    }
    Err(ParseError::syntax(open, "a closing quote on the same line"))
}
