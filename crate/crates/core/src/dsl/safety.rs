//! Safety pass over parsed programs: bowl bounds, variable clipping, sleep
//! bounds and the mandatory pause between bites.

use serde::{Deserialize, Serialize};

use super::{pretty_print, ParseError, Program, Stmt, Var, BOWL_COUNT};
use crate::numeric::{clip, Scalar, VariableRange};

/// Grounded/native ranges for the three adjustable robot variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec<T = f64> {
    pub speed: VariableRange<T>,
    pub acceleration: VariableRange<T>,
    pub scoop_depth: VariableRange<T>,
}

impl<T: Scalar> VariableSpec<T> {
    pub fn get(&self, var: Var) -> &VariableRange<T> {
        match var {
            Var::Speed => &self.speed,
            Var::Acceleration => &self.acceleration,
            Var::ScoopDepth => &self.scoop_depth,
        }
    }
}

impl Default for VariableSpec<f64> {
    fn default() -> Self {
        Self {
            speed: VariableRange {
                grounded_lo: 0.0,
                grounded_hi: 5.0,
                native_lo: 0.2,
                native_hi: 1.0,
                default_grounded: 2.5,
            },
            acceleration: VariableRange {
                grounded_lo: 0.0,
                grounded_hi: 5.0,
                native_lo: 0.2,
                native_hi: 1.0,
                default_grounded: 2.5,
            },
            scoop_depth: VariableRange {
                grounded_lo: 0.0,
                grounded_hi: 5.0,
                native_lo: 10.0,
                native_hi: 50.0,
                default_grounded: 2.5,
            },
        }
    }
}

/// Map a grounded value to native units for `var`.
pub fn scale_variable<T: Scalar>(var: Var, grounded: T, spec: &VariableSpec<T>) -> T {
    spec.get(var).scale(grounded)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PauseConfig {
    /// Minimum cumulative sleep between a mouth visit and the next bite.
    pub min_delay_s: f64,
    pub max_sleep_s: f64,
}

impl Default for PauseConfig {
    fn default() -> Self {
        Self {
            min_delay_s: 4.0,
            max_sleep_s: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipTarget {
    Speed,
    Acceleration,
    ScoopDepth,
    Sleep,
}

impl From<Var> for ClipTarget {
    fn from(v: Var) -> Self {
        match v {
            Var::Speed => ClipTarget::Speed,
            Var::Acceleration => ClipTarget::Acceleration,
            Var::ScoopDepth => ClipTarget::ScoopDepth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clip {
    pub stmt_index: usize,
    pub var: ClipTarget,
    pub raw_value: f64,
    pub clipped_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Insertion {
    /// Index of the inserted statement in the output program.
    pub position: usize,
    pub inserted: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: usize,
    pub token: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SafetyReport {
    pub clips: Vec<Clip>,
    pub insertions: Vec<Insertion>,
    pub rejections: Vec<Rejection>,
}

impl SafetyReport {
    pub fn is_clean(&self) -> bool {
        self.clips.is_empty() && self.insertions.is_empty() && self.rejections.is_empty()
    }

    pub fn is_rejected(&self) -> bool {
        !self.rejections.is_empty()
    }

    pub fn rejected(rejection: Rejection) -> Self {
        Self {
            rejections: vec![rejection],
            ..Self::default()
        }
    }
}

impl From<&ParseError> for Rejection {
    fn from(e: &ParseError) -> Self {
        Rejection {
            line: e.line,
            token: e.token.clone(),
            reason: e.reason.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("statement {stmt_index}: {reason}")]
pub struct ValidationError {
    pub stmt_index: usize,
    pub token: String,
    pub reason: String,
}

impl From<&ValidationError> for Rejection {
    /// Line numbers refer to the canonical one-statement-per-line form.
    fn from(e: &ValidationError) -> Self {
        Rejection {
            line: e.stmt_index + 1,
            token: e.token.clone(),
            reason: e.reason.clone(),
        }
    }
}

/// A program that passed [`validate`]. Only constructible through it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedProgram(Program);

impl ValidatedProgram {
    pub fn program(&self) -> &Program {
        &self.0
    }

    pub fn stmts(&self) -> &[Stmt] {
        &self.0.stmts
    }

    pub fn into_inner(self) -> Program {
        self.0
    }

    pub fn pretty(&self) -> String {
        pretty_print(&self.0)
    }
}

/// Clip, bound and pad `program` so every statement is safe to execute.
///
/// Variable and sleep values are clipped; a bowl index outside `0..4` is a
/// hard error because it changes what the user gets fed.
pub fn validate(
    program: &Program,
    spec: &VariableSpec,
    pause: &PauseConfig,
) -> Result<(ValidatedProgram, SafetyReport), ValidationError> {
    let mut report = SafetyReport::default();
    let mut stmts = Vec::with_capacity(program.len());
    for (stmt_index, stmt) in program.stmts.iter().enumerate() {
        let checked = match *stmt {
            Stmt::Scoop { bowl } | Stmt::ScrapeThenScoop { bowl } => {
                if bowl < 0 || bowl >= BOWL_COUNT as i64 {
                    return Err(ValidationError {
                        stmt_index,
                        token: bowl.to_string(),
                        reason: format!("bowl index {bowl} is outside 0..={}", BOWL_COUNT - 1),
                    });
                }
                stmt.clone()
            }
            Stmt::SetVar { var, value } => {
                let range = spec.get(var);
                match range.clip_grounded(value) {
                    Some(clipped) => {
                        report.clips.push(Clip {
                            stmt_index,
                            var: var.into(),
                            raw_value: value,
                            clipped_value: clipped,
                        });
                        Stmt::SetVar {
                            var,
                            value: clipped,
                        }
                    }
                    None => stmt.clone(),
                }
            }
            Stmt::Sleep { seconds } => match clip(seconds, 0.0, pause.max_sleep_s) {
                Some(clipped) => {
                    report.clips.push(Clip {
                        stmt_index,
                        var: ClipTarget::Sleep,
                        raw_value: seconds,
                        clipped_value: clipped,
                    });
                    Stmt::Sleep { seconds: clipped }
                }
                None => stmt.clone(),
            },
            _ => stmt.clone(),
        };
        stmts.push(checked);
    }
    let (padded, insertions) = enforce_inter_bite_pause(&Program::new(stmts), pause.min_delay_s);
    report.insertions = insertions;
    Ok((ValidatedProgram(padded), report))
}

fn gap_sleep(stmts: &[Stmt]) -> f64 {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::Sleep { seconds } => *seconds,
            _ => 0.0,
        })
        .sum()
}

/// Make sure the user gets at least `min_delay_s` of sleep after every trip
/// to the mouth before the next bite starts. Deficient gaps get a sleep
/// inserted directly after the last mouth visit.
pub fn enforce_inter_bite_pause(program: &Program, min_delay_s: f64) -> (Program, Vec<Insertion>) {
    let mut out: Vec<Stmt> = Vec::with_capacity(program.len());
    let mut insertions = Vec::new();
    let mut last_mouth: Option<usize> = None;
    for stmt in &program.stmts {
        if stmt.is_bite() {
            if let Some(m) = last_mouth.take() {
                let existing = gap_sleep(&out[m + 1..]);
                if existing < min_delay_s {
                    let mut pad = min_delay_s - existing;
                    out.insert(m + 1, Stmt::Sleep { seconds: pad });
                    // Rounding can leave the in-order sum a hair short.
                    while gap_sleep(&out[m + 1..]) < min_delay_s {
                        pad = pad.next_up();
                        out[m + 1] = Stmt::Sleep { seconds: pad };
                    }
                    insertions.push(Insertion {
                        position: m + 1,
                        inserted: Stmt::Sleep { seconds: pad },
                    });
                }
            }
        } else if matches!(stmt, Stmt::MoveToMouth) {
            last_mouth = Some(out.len());
        }
        out.push(stmt.clone());
    }
    (Program::new(out), insertions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn scoop(b: i64) -> Stmt {
        Stmt::Scoop { bowl: b }
    }

    fn sleep(s: f64) -> Stmt {
        Stmt::Sleep { seconds: s }
    }

    #[test]
    fn speed_is_clipped_to_five() {
        let p = Program::new(vec![Stmt::SetVar {
            var: Var::Speed,
            value: 7.0,
        }]);
        let (v, report) = validate(&p, &VariableSpec::default(), &PauseConfig::default()).unwrap();
        assert_eq!(
            v.stmts(),
            &[Stmt::SetVar {
                var: Var::Speed,
                value: 5.0
            }]
        );
        assert_eq!(
            report.clips,
            vec![Clip {
                stmt_index: 0,
                var: ClipTarget::Speed,
                raw_value: 7.0,
                clipped_value: 5.0
            }]
        );
    }

    #[test]
    fn bowl_four_is_refused() {
        let p = Program::new(vec![scoop(4)]);
        let e = validate(&p, &VariableSpec::default(), &PauseConfig::default()).unwrap_err();
        assert_eq!(e.stmt_index, 0);
        assert_eq!(e.token, "4");
        let negative = Program::new(vec![Stmt::MoveToMouth, Stmt::ScrapeThenScoop { bowl: -1 }]);
        assert_eq!(
            validate(&negative, &VariableSpec::default(), &PauseConfig::default())
                .unwrap_err()
                .stmt_index,
            1
        );
    }

    #[test]
    fn valid_program_passes_untouched() {
        let p = parse(
            "obi.speed = 3\nobi.scoop_from_bowlno(1)\nobi.move_to_mouth()\ntime.sleep(4)\nobi.scoop_from_bowlno(2)",
        )
        .unwrap();
        let (v, report) = validate(&p, &VariableSpec::default(), &PauseConfig::default()).unwrap();
        assert_eq!(v.program(), &p);
        assert!(report.is_clean());
    }

    #[test]
    fn sleeps_are_bounded() {
        let p = Program::new(vec![sleep(-1.0), sleep(600.0)]);
        let (v, report) = validate(&p, &VariableSpec::default(), &PauseConfig::default()).unwrap();
        assert_eq!(v.stmts(), &[sleep(0.0), sleep(60.0)]);
        assert_eq!(report.clips.len(), 2);
        assert!(report.clips.iter().all(|c| c.var == ClipTarget::Sleep));
    }

    #[test]
    fn validation_is_idempotent() {
        let p = parse(
            "obi.speed = 9\nobi.scoop_depth = -3\nobi.scoop_from_bowlno(0)\nobi.move_to_mouth()\nsleep(1.3333)\nobi.scoop_from_bowlno(0)\nobi.move_to_mouth()",
        )
        .unwrap();
        let spec = VariableSpec::default();
        let pause = PauseConfig::default();
        let (once, first) = validate(&p, &spec, &pause).unwrap();
        assert_eq!(first.clips.len(), 2);
        assert_eq!(first.insertions.len(), 1);
        let (twice, second) = validate(once.program(), &spec, &pause).unwrap();
        assert_eq!(once, twice);
        assert!(second.is_clean());
    }

    #[test]
    fn pause_inserted_between_bites() {
        let p = Program::new(vec![scoop(1), Stmt::MoveToMouth, scoop(1), Stmt::MoveToMouth]);
        let (out, ins) = enforce_inter_bite_pause(&p, 4.0);
        assert_eq!(
            out.stmts,
            vec![scoop(1), Stmt::MoveToMouth, sleep(4.0), scoop(1), Stmt::MoveToMouth]
        );
        assert_eq!(
            ins,
            vec![Insertion {
                position: 2,
                inserted: sleep(4.0)
            }]
        );
    }

    #[test]
    fn single_bite_untouched() {
        let p = Program::new(vec![scoop(1), Stmt::MoveToMouth]);
        let (out, ins) = enforce_inter_bite_pause(&p, 4.0);
        assert_eq!(out, p);
        assert!(ins.is_empty());
    }

    #[test]
    fn sufficient_pause_untouched() {
        let p = Program::new(vec![scoop(0), Stmt::MoveToMouth, sleep(6.0), scoop(2)]);
        let (out, ins) = enforce_inter_bite_pause(&p, 4.0);
        assert_eq!(out, p);
        assert!(ins.is_empty());
    }

    #[test]
    fn partial_pause_topped_up() {
        let p = Program::new(vec![
            scoop(0),
            Stmt::MoveToMouth,
            sleep(1.5),
            Stmt::SetVar {
                var: Var::Speed,
                value: 1.0,
            },
            sleep(1.0),
            scoop(2),
        ]);
        let (out, ins) = enforce_inter_bite_pause(&p, 4.0);
        assert_eq!(ins.len(), 1);
        assert_eq!(ins[0].position, 2);
        assert_eq!(out.stmts[2], sleep(1.5));
        assert_eq!(gap_sleep(&out.stmts[2..6]), 4.0);
    }

    #[test]
    fn custom_delay() {
        let p = Program::new(vec![scoop(0), Stmt::MoveToMouth, scoop(0)]);
        let (out, _) = enforce_inter_bite_pause(&p, 7.5);
        assert_eq!(out.stmts[2], sleep(7.5));
        let (out, ins) = enforce_inter_bite_pause(&p, 0.0);
        assert_eq!(out, p);
        assert!(ins.is_empty());
    }

    #[test]
    fn scaling_examples() {
        let spec = VariableSpec::default();
        assert_eq!(scale_variable(Var::Speed, 0.0, &spec), 0.2);
        assert_eq!(scale_variable(Var::Speed, 5.0, &spec), 1.0);
        assert!((scale_variable(Var::ScoopDepth, 2.5, &spec) - 30.0).abs() < 1e-12);
        assert!((scale_variable(Var::ScoopDepth, 3.2, &spec) - 35.6).abs() < 1e-9);
    }
}
