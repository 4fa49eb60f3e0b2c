use serde::{Deserialize, Serialize};

use super::{Program, Stmt, Var};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("line {line}: {reason} (at `{token}`)")]
pub struct ParseError {
    pub line: usize,
    pub token: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Punct(char),
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s) => s.clone(),
            Tok::Punct(c) => c.to_string(),
        }
    }
}

fn lex(line: &str) -> Vec<Tok> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push(Tok::Number(chars[start..i].iter().collect()));
        } else {
            out.push(Tok::Punct(c));
            i += 1;
        }
    }
    out
}

const CALLS: &[&str] = &[
    "scoop_from_bowlno",
    "scrape_then_scoop_bowlno",
    "move_to_mouth",
    "start",
    "stop",
    "pause_indefinitely",
];

struct LineParser {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn err(&self, token: impl Into<String>, reason: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            token: token.into(),
            reason: reason.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, want: char) -> Result<(), ParseError> {
        match self.next() {
            Some(Tok::Punct(c)) if c == want => Ok(()),
            Some(t) => Err(self.err(t.text(), format!("expected `{want}`"))),
            None => Err(self.err("<end of line>", format!("expected `{want}`"))),
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => Err(self.err(t.text(), "expected a name")),
            None => Err(self.err("<end of line>", "expected a name")),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.next() {
            None => Ok(()),
            Some(t) => Err(self.err(t.text(), "unexpected trailing input")),
        }
    }

    /// Optional sign followed by a numeric literal. Returns the literal text.
    fn signed_literal(&mut self) -> Result<String, ParseError> {
        let mut text = String::new();
        if let Some(Tok::Punct(c @ ('-' | '+'))) = self.peek() {
            if *c == '-' {
                text.push('-');
            }
            self.pos += 1;
        }
        match self.next() {
            Some(Tok::Number(n)) => {
                text.push_str(&n);
                Ok(text)
            }
            Some(t) => Err(self.err(t.text(), "argument must be a numeric literal")),
            None => Err(self.err("<end of line>", "expected a numeric literal")),
        }
    }

    fn real(&mut self) -> Result<f64, ParseError> {
        let text = self.signed_literal()?;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(text, "numeric literal out of range")),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let text = self.signed_literal()?;
        if text.contains('.') {
            return Err(self.err(text, "bowl index must be an integer literal"));
        }
        text.parse::<i64>()
            .map_err(|_| self.err(text, "integer literal out of range"))
    }

    fn sleep_call(&mut self) -> Result<Stmt, ParseError> {
        self.expect_punct('(')?;
        let seconds = self.real()?;
        self.expect_punct(')')?;
        self.finish()?;
        Ok(Stmt::Sleep { seconds })
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let head = match self.next() {
            Some(Tok::Ident(s)) => s,
            Some(t) => return Err(self.err(t.text(), "statement must be a robot call, assignment or sleep")),
            None => return Err(self.err("<end of line>", "empty statement")),
        };
        match head.as_str() {
            "sleep" => self.sleep_call(),
            "time" => {
                self.expect_punct('.')?;
                let name = self.expect_ident()?;
                if name != "sleep" {
                    return Err(self.err(name, "only `time.sleep` is allowed"));
                }
                self.sleep_call()
            }
            "obi" => {
                self.expect_punct('.')?;
                let name = self.expect_ident()?;
                if let Some(var) = Var::from_name(&name) {
                    self.expect_punct('=')?;
                    let value = self.real()?;
                    self.finish()?;
                    return Ok(Stmt::SetVar { var, value });
                }
                if !CALLS.contains(&name.as_str()) {
                    return Err(self.err(name, "unknown robot function"));
                }
                self.expect_punct('(')?;
                let stmt = match name.as_str() {
                    "scoop_from_bowlno" => Stmt::Scoop {
                        bowl: self.integer()?,
                    },
                    "scrape_then_scoop_bowlno" => Stmt::ScrapeThenScoop {
                        bowl: self.integer()?,
                    },
                    "move_to_mouth" => Stmt::MoveToMouth,
                    "start" => Stmt::Start,
                    "stop" => Stmt::Stop,
                    _ => Stmt::PauseIndefinitely,
                };
                self.expect_punct(')')?;
                self.finish()?;
                Ok(stmt)
            }
            other => Err(self.err(
                other,
                "statement must be a robot call, assignment or sleep",
            )),
        }
    }
}

/// Parse code text into a straight-line [`Program`].
///
/// Every non-blank, non-comment line must be exactly one whitelisted
/// statement. The first offending token aborts the parse.
pub fn parse(code: &str) -> Result<Program, ParseError> {
    let mut stmts = Vec::new();
    for (idx, raw) in code.lines().enumerate() {
        let toks = lex(raw);
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks,
            pos: 0,
            line: idx + 1,
        };
        stmts.push(p.statement()?);
    }
    if stmts.is_empty() && code.trim().is_empty() {
        return Err(ParseError {
            line: 1,
            token: "<empty>".into(),
            reason: "no code".into(),
        });
    }
    Ok(Program::new(stmts))
}
