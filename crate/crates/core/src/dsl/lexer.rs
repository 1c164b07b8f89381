use super::{Diagnostic, Severity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Keyword {
    System,
    States,
    Inputs,
    Params,
    Deriv,
    Output,
    Depends,
    Sin,
    Cos,
    Exp,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        Some(match s {
            "system" => Keyword::System,
            "states" => Keyword::States,
            "inputs" => Keyword::Inputs,
            "params" => Keyword::Params,
            "deriv" => Keyword::Deriv,
            "output" => Keyword::Output,
            "depends" => Keyword::Depends,
            "sin" => Keyword::Sin,
            "cos" => Keyword::Cos,
            "exp" => Keyword::Exp,
            _ => return None,
        })
    }

    pub(crate) fn starts_declaration(self) -> bool {
        matches!(
            self,
            Keyword::States | Keyword::Inputs | Keyword::Params | Keyword::Deriv | Keyword::Output
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Keyword(Keyword),
    /// Numeric literal; `integer` is set when the text is all digits.
    Number {
        value: f64,
        integer: Option<u64>,
    },
    Eq,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Keyword(k) => format!("keyword '{}'", format!("{k:?}").to_lowercase()),
            Tok::Number { .. } => "number".into(),
            Tok::Eq => "'='".into(),
            Tok::Comma => "','".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

/// 1-based position of the first character of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
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
        let tok = if c.is_alphabetic() {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match Keyword::from_ident(&word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut integer = true;
            if i < chars.len() && chars[i] == '.' {
                integer = false;
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
                    integer = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| {
                Diagnostic::new(
                    Severity::Error,
                    span,
                    format!("invalid number '{text}'"),
                    src,
                )
            })?;
            if !value.is_finite() {
                return Err(Diagnostic::new(
                    Severity::Error,
                    span,
                    format!("number '{text}' is out of range"),
                    src,
                ));
            }
            Tok::Number {
                value,
                integer: if integer { text.parse().ok() } else { None },
            }
        } else {
            i += 1;
            match c {
                '=' => Tok::Eq,
                ',' => Tok::Comma,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(Diagnostic::new(
                        Severity::Error,
                        span,
                        format!("unexpected character '{}'", c.escape_debug()),
                        src,
                    ))
                }
            }
        };
        col += i - start;
        out.push(Token { tok, span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}
