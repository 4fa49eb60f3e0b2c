//! The robot command language: a straight-line sequence of whitelisted calls.
//!
//! Model output is untrusted text. It only reaches the robot after
//! [`parse`] turns it into a [`Program`] and [`validate`] bounds every value.

mod parser;
mod printer;
mod safety;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse, ParseError};
pub use printer::{format_number, pretty_print};
pub use safety::{
    enforce_inter_bite_pause, scale_variable, validate, Clip, ClipTarget, Insertion,
    PauseConfig, Rejection, SafetyReport, ValidatedProgram, ValidationError, VariableSpec,
};

pub const BOWL_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Var {
    Speed,
    Acceleration,
    ScoopDepth,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::Speed, Var::Acceleration, Var::ScoopDepth];

    pub fn name(self) -> &'static str {
        match self {
            Var::Speed => "speed",
            Var::Acceleration => "acceleration",
            Var::ScoopDepth => "scoop_depth",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One statement. Bowl indices are kept as parsed so out-of-range values
/// can be reported by the validator instead of disappearing in the parser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Stmt {
    Scoop { bowl: i64 },
    ScrapeThenScoop { bowl: i64 },
    MoveToMouth,
    Start,
    Stop,
    PauseIndefinitely,
    SetVar { var: Var, value: f64 },
    Sleep { seconds: f64 },
}

impl Stmt {
    pub fn is_bite(&self) -> bool {
        matches!(self, Stmt::Scoop { .. } | Stmt::ScrapeThenScoop { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

impl Program {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Self { stmts }
    }

    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }
}

impl From<Vec<Stmt>> for Program {
    fn from(stmts: Vec<Stmt>) -> Self {
        Self { stmts }
    }
}
