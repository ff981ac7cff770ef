use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    Paren,
    Comma,
}

/// A lexeme with its character offset in the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.lexeme == op
    }

    pub fn is_paren(&self, p: char) -> bool {
        self.kind == TokenKind::Paren && self.lexeme.starts_with(p)
    }
}

/// Split `text` into tokens. Whitespace separates tokens and is dropped.
///
/// `−` (U+2212) is accepted as a minus sign and kept verbatim in the lexeme.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i = scan_number(&chars, i);
            tokens.push(token(TokenKind::Number, &chars[start..i], start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(token(TokenKind::Identifier, &chars[start..i], start));
            continue;
        }
        let kind = match c {
            '(' | ')' => TokenKind::Paren,
            ',' => TokenKind::Comma,
            '+' | '-' | '\u{2212}' | '*' | '/' | '^' => TokenKind::Operator,
            '<' | '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    i += 1;
                }
                TokenKind::Operator
            }
            '=' if chars.get(i + 1) == Some(&'=') => {
                i += 1;
                TokenKind::Operator
            }
            _ => return Err(ExprError::Lex { position: start, character: c }),
        };
        i += 1;
        tokens.push(token(kind, &chars[start..i], start));
    }
    Ok(tokens)
}

fn token(kind: TokenKind, chars: &[char], position: usize) -> Token {
    Token { kind, lexeme: chars.iter().collect(), position }
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    let digits = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
    };
    digits(&mut i);
    if chars.get(i) == Some(&'.') {
        i += 1;
        digits(&mut i);
    }
    if matches!(chars.get(i), Some('e' | 'E')) {
        let mut j = i + 1;
        if matches!(chars.get(j), Some('+' | '-')) {
            j += 1;
        }
        if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
            i = j;
            digits(&mut i);
        }
    }
    i
}
