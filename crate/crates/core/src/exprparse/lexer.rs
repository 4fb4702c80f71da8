use super::{ExprError, SourceSpan};

pub const MAX_SOURCE_LEN: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    if source.len() > MAX_SOURCE_LEN {
        return Err(ExprError::lex(
            format!("expression longer than {MAX_SOURCE_LEN} bytes"),
            SourceSpan::new(MAX_SOURCE_LEN, source.len()),
        ));
    }
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let single = match c {
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            b',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token {
                kind,
                span: SourceSpan::new(i, i + 1),
            });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let (value, end) = lex_number(source, i)?;
            tokens.push(Token {
                kind: TokenKind::Number(value),
                span: SourceSpan::new(i, end),
            });
            i = end;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(source[start..i].to_string()),
                span: SourceSpan::new(start, i),
            });
        } else {
            let width = source[i..].chars().next().map_or(1, char::len_utf8);
            let shown = &source[i..i + width];
            return Err(ExprError::lex(
                format!("unexpected character '{shown}'"),
                SourceSpan::new(i, i + width),
            ));
        }
    }
    Ok(tokens)
}

/// `digits [. digits] [(e|E) [+|-] digits]`, or `. digits [...]`.
fn lex_number(source: &str, start: usize) -> Result<(f64, usize), ExprError> {
    let bytes = source.as_bytes();
    let digits = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let mut i = digits(start);
    if i < bytes.len() && bytes[i] == b'.' {
        i = digits(i + 1);
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let end = digits(j);
        if end == j {
            let stop = end.max(i + 1);
            return Err(ExprError::lex(
                format!("malformed number '{}': exponent has no digits", &source[start..stop]),
                SourceSpan::new(start, stop),
            ));
        }
        i = end;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        return Err(ExprError::lex("unexpected '.' after number", SourceSpan::new(i, i + 1)));
    }
    let text = &source[start..i];
    let value: f64 = text
        .parse()
        .map_err(|_| ExprError::lex(format!("malformed number '{text}'"), SourceSpan::new(start, i)))?;
    if !value.is_finite() {
        return Err(ExprError::lex(
            format!("number '{text}' is out of range"),
            SourceSpan::new(start, i),
        ));
    }
    Ok((value, i))
}
