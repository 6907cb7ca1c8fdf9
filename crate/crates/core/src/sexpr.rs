//! Minimal reader for solver responses.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses a sequence of top-level expressions.
pub fn parse_all(input: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut chars = input.chars().peekable();
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => {
                chars.next();
                stack.push(Vec::new());
            }
            ')' => {
                chars.next();
                if stack.len() == 1 {
                    return Err(ParseError("unbalanced ')'".into()));
                }
                let done = stack.pop().expect("non-empty");
                stack.last_mut().expect("root").push(Sexp::List(done));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            s.push('"');
                        }
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => return Err(ParseError("unterminated string".into())),
                    }
                }
                stack.last_mut().expect("root").push(Sexp::Str(s));
            }
            '|' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(c) => s.push(c),
                        None => return Err(ParseError("unterminated quoted symbol".into())),
                    }
                }
                stack.last_mut().expect("root").push(Sexp::Atom(s));
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';') {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                stack.last_mut().expect("root").push(Sexp::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err(ParseError("unbalanced '('".into()));
    }
    Ok(stack.pop().expect("root"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_values_and_errors() {
        let out = parse_all("sat\n((obj (- 5)))\n(error \"line 3: \"\"x\"\" bad\")").unwrap();
        assert_eq!(out[0], Sexp::Atom("sat".into()));
        assert_eq!(out[1].to_string(), "((obj (- 5)))");
        assert_eq!(
            out[2],
            Sexp::List(vec![Sexp::Atom("error".into()), Sexp::Str("line 3: \"x\" bad".into())])
        );
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(parse_all("((a)").is_err());
        assert!(parse_all("a)").is_err());
    }
}
