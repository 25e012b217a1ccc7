use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    // keywords
    Subnet,
    Vars,
    Init,
    Node,
    Finish,
    Control,
    Arrow,
    Call,
    Eval,
    None_,
    True,
    False,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Eq,
    Minus,
    ArrowHead, // ->
    DotDot,    // ..
    // literals
    Ident(String),
    Int(i128),
    Float(f64),
    Str(String),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Subnet => write!(f, "SUBNET"),
            Tok::Vars => write!(f, "VARS"),
            Tok::Init => write!(f, "INIT"),
            Tok::Node => write!(f, "NODE"),
            Tok::Finish => write!(f, "FINISH"),
            Tok::Control => write!(f, "CONTROL"),
            Tok::Arrow => write!(f, "ARROW"),
            Tok::Call => write!(f, "call"),
            Tok::Eval => write!(f, "eval"),
            Tok::None_ => write!(f, "none"),
            Tok::True => write!(f, "true"),
            Tok::False => write!(f, "false"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Comma => write!(f, ","),
            Tok::Colon => write!(f, ":"),
            Tok::Semi => write!(f, ";"),
            Tok::Eq => write!(f, "="),
            Tok::Minus => write!(f, "-"),
            Tok::ArrowHead => write!(f, "->"),
            Tok::DotDot => write!(f, ".."),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Float(x) => write!(f, "{x}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            out.push(Token { tok: $tok, line: $line, col: $col })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' | ')' | '{' | '}' | '[' | ']' | ',' | ':' | ';' | '=' => {
                chars.next();
                col += 1;
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    _ => Tok::Eq,
                };
                push!(tok, tl, tc);
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push!(Tok::ArrowHead, tl, tc);
                } else {
                    push!(Tok::Minus, tl, tc);
                }
            }
            '.' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'.') {
                    chars.next();
                    col += 1;
                    push!(Tok::DotDot, tl, tc);
                } else {
                    return Err(ParseError::new(tl, tc, "unexpected character `.`"));
                }
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None | Some('\n') => {
                            return Err(ParseError::new(tl, tc, "unterminated string literal"))
                        }
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\\') => {
                            col += 1;
                            match chars.next() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                other => {
                                    return Err(ParseError::new(
                                        line,
                                        col,
                                        format!("invalid escape `\\{}`", other.unwrap_or(' ')),
                                    ))
                                }
                            }
                            col += 1;
                        }
                        Some(c) => {
                            s.push(c);
                            col += 1;
                        }
                    }
                }
                push!(Tok::Str(s), tl, tc);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // a `.` not followed by another `.` starts a fractional part
                let mut is_float = false;
                if chars.peek() == Some(&'.') {
                    let mut ahead = chars.clone();
                    ahead.next();
                    if ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                        is_float = true;
                        s.push('.');
                        chars.next();
                        col += 1;
                        while let Some(&c) = chars.peek() {
                            if c.is_ascii_digit() {
                                s.push(c);
                                chars.next();
                                col += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                if is_float {
                    let v: f64 = s
                        .parse()
                        .map_err(|_| ParseError::new(tl, tc, format!("invalid number `{s}`")))?;
                    push!(Tok::Float(v), tl, tc);
                } else {
                    let v: i128 = s
                        .parse()
                        .map_err(|_| ParseError::new(tl, tc, format!("integer literal `{s}` too large")))?;
                    push!(Tok::Int(v), tl, tc);
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "SUBNET" => Tok::Subnet,
                    "VARS" => Tok::Vars,
                    "INIT" => Tok::Init,
                    "NODE" => Tok::Node,
                    "FINISH" => Tok::Finish,
                    "CONTROL" => Tok::Control,
                    "ARROW" => Tok::Arrow,
                    "call" => Tok::Call,
                    "eval" => Tok::Eval,
                    "none" => Tok::None_,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(s),
                };
                push!(tok, tl, tc);
            }
            other => {
                return Err(ParseError::new(tl, tc, format!("unexpected character `{other}`")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
