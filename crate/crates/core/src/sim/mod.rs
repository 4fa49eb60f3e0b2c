//! Simulated four-bowl feeding robot.
//!
//! Motions are symbolic: each robot call expands into a fixed list of
//! trajectory segments whose durations come from a trapezoidal velocity
//! profile driven by the current native speed and acceleration.

mod executor;

use serde::{Deserialize, Serialize};

pub use executor::{
    Control, EventKind, ExecError, ExecutionEvent, ExecutionHandle, Executor, Fault,
    InterruptKind, ANNOUNCE_READY, ANNOUNCE_SCOOPING, ANNOUNCE_SCRAPING,
};

use crate::dsl::{Var, VariableSpec, BOWL_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Travel,
    ScoopDip,
    ScrapePass,
    PresentAtMouth,
}

impl SegmentKind {
    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::Travel => "travel",
            SegmentKind::ScoopDip => "scoop_dip",
            SegmentKind::ScrapePass => "scrape_pass",
            SegmentKind::PresentAtMouth => "present_at_mouth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "at", content = "bowl", rename_all = "snake_case")]
pub enum Target {
    Bowl(usize),
    Mouth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub kind: SegmentKind,
    pub nominal_length: f64,
    pub target: Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum ArmPhase {
    Home,
    AtBowl { bowl: usize },
    Scooping { bowl: usize },
    Scraping { bowl: usize },
    AtMouth,
    Moving { segment: SegmentKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    Idle,
    Running,
    Paused,
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variables {
    pub speed: f64,
    pub acceleration: f64,
    pub scoop_depth: f64,
}

impl Variables {
    pub fn get(&self, var: Var) -> f64 {
        match var {
            Var::Speed => self.speed,
            Var::Acceleration => self.acceleration,
            Var::ScoopDepth => self.scoop_depth,
        }
    }

    pub fn set(&mut self, var: Var, value: f64) {
        match var {
            Var::Speed => self.speed = value,
            Var::Acceleration => self.acceleration = value,
            Var::ScoopDepth => self.scoop_depth = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub arm_phase: ArmPhase,
    pub variables_native: Variables,
    pub variables_grounded: Variables,
    pub bowl_contents: Vec<String>,
    pub spoon_attached: bool,
    pub exec_status: ExecStatus,
}

/// Path lengths of the predefined motions, in normalized path units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub travel_to_bowl: f64,
    pub travel_to_mouth: f64,
    pub scrape_pass: f64,
    pub present_at_mouth: f64,
    /// Scoop dip length is `scoop_dip_base + scoop_dip_per_mm * depth_mm`.
    pub scoop_dip_base: f64,
    pub scoop_dip_per_mm: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            travel_to_bowl: 1.0,
            travel_to_mouth: 1.2,
            scrape_pass: 0.8,
            present_at_mouth: 0.3,
            scoop_dip_base: 0.2,
            scoop_dip_per_mm: 0.005,
        }
    }
}

impl TrajectoryConfig {
    pub fn check(&self) -> Result<(), SimConfigError> {
        let lengths = [
            self.travel_to_bowl,
            self.travel_to_mouth,
            self.scrape_pass,
            self.present_at_mouth,
            self.scoop_dip_base,
        ];
        if lengths.iter().all(|l| l.is_finite() && *l > 0.0) && self.scoop_dip_per_mm >= 0.0 {
            Ok(())
        } else {
            Err(SimConfigError::Trajectory)
        }
    }
}

/// Optional starting values on the grounded scale; missing ones use the
/// variable's default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialVariables {
    pub speed: Option<f64>,
    pub acceleration: Option<f64>,
    pub scoop_depth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimConfigError {
    #[error("expected {BOWL_COUNT} bowls, got {0}")]
    BowlCount(usize),
    #[error("initial {0} is outside its grounded range")]
    InitialOutOfRange(Var),
    #[error("trajectory lengths must be positive")]
    Trajectory,
    #[error("tick must be at least 1 ms")]
    Tick,
}

/// Build the starting robot state: arm at home, idle, spoon attached.
pub fn load_environment(
    bowls: &[String],
    spec: &VariableSpec,
    initial: &InitialVariables,
) -> Result<RobotState, SimConfigError> {
    if bowls.len() != BOWL_COUNT {
        return Err(SimConfigError::BowlCount(bowls.len()));
    }
    let mut grounded = Variables {
        speed: spec.speed.default_grounded,
        acceleration: spec.acceleration.default_grounded,
        scoop_depth: spec.scoop_depth.default_grounded,
    };
    let overrides = [
        (Var::Speed, initial.speed),
        (Var::Acceleration, initial.acceleration),
        (Var::ScoopDepth, initial.scoop_depth),
    ];
    for (var, value) in overrides {
        if let Some(v) = value {
            if !spec.get(var).contains_grounded(v) {
                return Err(SimConfigError::InitialOutOfRange(var));
            }
            grounded.set(var, v);
        }
    }
    let mut native = grounded;
    for var in Var::ALL {
        native.set(var, spec.get(var).scale(grounded.get(var)));
    }
    Ok(RobotState {
        arm_phase: ArmPhase::Home,
        variables_native: native,
        variables_grounded: grounded,
        bowl_contents: bowls.to_vec(),
        spoon_attached: true,
        exec_status: ExecStatus::Idle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_bowls() -> Vec<String> {
        ["blueberries", "granola", "yogurt", "empty"]
            .map(String::from)
            .to_vec()
    }

    #[test]
    fn loads_bowls_at_home() {
        let s = load_environment(&fig1_bowls(), &VariableSpec::default(), &Default::default())
            .unwrap();
        assert_eq!(s.bowl_contents[2], "yogurt");
        assert_eq!(s.arm_phase, ArmPhase::Home);
        assert_eq!(s.exec_status, ExecStatus::Idle);
        assert!(s.spoon_attached);
    }

    #[test]
    fn wrong_bowl_count() {
        let three = fig1_bowls()[..3].to_vec();
        assert_eq!(
            load_environment(&three, &VariableSpec::default(), &Default::default()),
            Err(SimConfigError::BowlCount(3))
        );
    }

    #[test]
    fn defaults_are_scaled() {
        let spec = VariableSpec::default();
        let s = load_environment(&fig1_bowls(), &spec, &Default::default()).unwrap();
        // default grounded 2.5 on 0..5 maps to the native midpoint
        assert!((s.variables_native.speed - 0.6).abs() < 1e-12);
        assert!((s.variables_native.acceleration - 0.6).abs() < 1e-12);
        assert!((s.variables_native.scoop_depth - 30.0).abs() < 1e-12);
        let s = load_environment(
            &fig1_bowls(),
            &spec,
            &InitialVariables {
                speed: Some(5.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.variables_native.speed, 1.0);
        assert_eq!(s.variables_grounded.speed, 5.0);
        assert!(load_environment(
            &fig1_bowls(),
            &spec,
            &InitialVariables {
                scoop_depth: Some(6.0),
                ..Default::default()
            },
        )
        .is_err());
    }
}
