use std::collections::VecDeque;
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    ArmPhase, ExecStatus, RobotState, SegmentKind, SimConfigError, Target, TrajectoryConfig,
    TrajectorySegment,
};
use crate::clock::Clock;
use crate::dsl::{Stmt, ValidatedProgram, Var, VariableSpec};
use crate::numeric::trapezoid_duration;

pub const ANNOUNCE_SCOOPING: &str = "Scooping now";
pub const ANNOUNCE_SCRAPING: &str = "Scraping now";
pub const ANNOUNCE_READY: &str = "Ready for another command";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Announce,
    SegmentStart,
    SegmentEnd,
    SleepStart,
    SleepEnd,
    Paused,
    Resumed,
    Stopped,
    ProgramDone,
    Warning,
}

impl EventKind {
    /// Kinds that mean the arm moves or is about to.
    pub fn is_motion(self) -> bool {
        matches!(self, EventKind::SegmentStart | EventKind::SegmentEnd)
    }
}

/// One entry in the executor's event stream. `seq` gives a total order;
/// several events can share a `t_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionEvent {
    pub run_id: u64,
    pub seq: u64,
    pub t_ms: u64,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterruptKind {
    Stop,
    Pause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    SpoonDetached,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Interrupt(InterruptKind),
    Resume,
    Fault(Fault),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("a program is already running")]
    AlreadyRunning,
    #[error("internal assertion failed: {0}")]
    InternalAssert(String),
    #[error("no program is running")]
    NotRunning,
    #[error("program is not paused")]
    NotPaused,
}

const ST_IDLE: u8 = 0;
const ST_RUNNING: u8 = 1;
const ST_PAUSED: u8 = 2;
const ST_STOPPED: u8 = 3;

fn decode(status: u8) -> ExecStatus {
    match status {
        ST_RUNNING => ExecStatus::Running,
        ST_PAUSED => ExecStatus::Paused,
        ST_STOPPED => ExecStatus::Stopped,
        _ => ExecStatus::Idle,
    }
}

#[derive(Debug)]
struct ControlMsg {
    run_id: u64,
    control: Control,
    requested_at: u64,
}

/// Control side of one program run. Cheap to clone and safe to use from
/// any thread; requests take effect at the executor's next tick boundary.
#[derive(Debug, Clone)]
pub struct ExecutionHandle {
    run_id: u64,
    started_at: u64,
    status: Arc<AtomicU8>,
    tx: Sender<ControlMsg>,
    clock: Arc<dyn Clock>,
}

impl ExecutionHandle {
    pub fn run_id(&self) -> u64 {
        self.run_id
    }

    pub fn started_at(&self) -> u64 {
        self.started_at
    }

    /// Logical status: reflects accepted requests even before the executor
    /// has acted on them.
    pub fn status(&self) -> ExecStatus {
        decode(self.status.load(Ordering::Acquire))
    }

    fn send(&self, control: Control) {
        // The executor may already be gone; there is nothing left to control then.
        let _ = self.tx.send(ControlMsg {
            run_id: self.run_id,
            control,
            requested_at: self.clock.now_ms(),
        });
    }

    fn transition(&self, from: &[u8], to: u8) -> bool {
        from.iter().any(|f| {
            self.status
                .compare_exchange(*f, to, Ordering::AcqRel, Ordering::Acquire)
                .is_ok()
        })
    }

    pub fn interrupt(&self, kind: InterruptKind) -> Result<(), ExecError> {
        let ok = match kind {
            InterruptKind::Pause => self.transition(&[ST_RUNNING], ST_PAUSED),
            InterruptKind::Stop => self.transition(&[ST_RUNNING, ST_PAUSED], ST_STOPPED),
        };
        if !ok {
            return Err(ExecError::NotRunning);
        }
        self.send(Control::Interrupt(kind));
        Ok(())
    }

    pub fn resume(&self) -> Result<(), ExecError> {
        if !self.transition(&[ST_PAUSED], ST_RUNNING) {
            return Err(ExecError::NotPaused);
        }
        self.send(Control::Resume);
        Ok(())
    }

    pub fn inject_fault(&self, fault: Fault) -> Result<(), ExecError> {
        if !self.transition(&[ST_RUNNING, ST_PAUSED], ST_STOPPED) {
            return Err(ExecError::NotRunning);
        }
        self.send(Control::Fault(fault));
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Op {
    Announce(&'static str),
    Warn(String),
    Move {
        kind: SegmentKind,
        target: Target,
        during: ArmPhase,
        after: ArmPhase,
    },
    Sleep(u64),
    Set(Var, f64),
    Start,
    Stop,
    Pause,
}

#[derive(Debug, Clone)]
enum Activity {
    Segment { segment: TrajectorySegment, after: ArmPhase },
    Sleep,
}

#[derive(Debug, Clone)]
struct Active {
    activity: Activity,
    remaining_ms: u64,
}

#[derive(Debug)]
struct Run {
    id: u64,
    ops: VecDeque<Op>,
    active: Option<Active>,
    paused: bool,
    status: Arc<AtomicU8>,
}

/// Tick-driven program executor. Owns the robot state; all mutation
/// happens inside [`Executor::step`].
#[derive(Debug)]
pub struct Executor {
    state: RobotState,
    spec: VariableSpec,
    trajectory: TrajectoryConfig,
    tick_ms: u64,
    clock: Arc<dyn Clock>,
    t: u64,
    seq: u64,
    next_run_id: u64,
    tx: Sender<ControlMsg>,
    rx: Receiver<ControlMsg>,
    pending: Vec<ControlMsg>,
    run: Option<Run>,
    outbox: Vec<ExecutionEvent>,
}

impl Executor {
    pub fn new(
        state: RobotState,
        spec: VariableSpec,
        trajectory: TrajectoryConfig,
        tick_ms: u64,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, SimConfigError> {
        if tick_ms == 0 {
            return Err(SimConfigError::Tick);
        }
        trajectory.check()?;
        let (tx, rx) = channel();
        let t = clock.now_ms();
        Ok(Self {
            state,
            spec,
            trajectory,
            tick_ms,
            clock,
            t,
            seq: 0,
            next_run_id: 1,
            tx,
            rx,
            pending: Vec::new(),
            run: None,
            outbox: Vec::new(),
        })
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn now_ms(&self) -> u64 {
        self.t
    }

    pub fn tick_ms(&self) -> u64 {
        self.tick_ms
    }

    pub fn is_busy(&self) -> bool {
        self.run.is_some()
    }

    pub fn drain_events(&mut self) -> Vec<ExecutionEvent> {
        std::mem::take(&mut self.outbox)
    }

    /// Start a validated program. Native values are re-checked here even
    /// though the validator already bounded them.
    pub fn execute(&mut self, program: &ValidatedProgram) -> Result<ExecutionHandle, ExecError> {
        if self.run.is_some() {
            return Err(ExecError::AlreadyRunning);
        }
        for var in Var::ALL {
            let v = self.state.variables_native.get(var);
            if !self.spec.get(var).contains_native(v) {
                return Err(ExecError::InternalAssert(format!(
                    "{var} = {v} outside native range"
                )));
            }
        }
        let mut ops = VecDeque::new();
        for stmt in program.stmts() {
            self.expand(stmt, &mut ops)?;
        }
        let now = self.clock.now_ms();
        if now > self.t {
            self.t = now;
        }
        let status = Arc::new(AtomicU8::new(ST_RUNNING));
        let id = self.next_run_id;
        self.next_run_id += 1;
        self.run = Some(Run {
            id,
            ops,
            active: None,
            paused: false,
            status: status.clone(),
        });
        self.state.exec_status = ExecStatus::Running;
        Ok(ExecutionHandle {
            run_id: id,
            started_at: self.t,
            status,
            tx: self.tx.clone(),
            clock: self.clock.clone(),
        })
    }

    fn expand(&self, stmt: &Stmt, ops: &mut VecDeque<Op>) -> Result<(), ExecError> {
        let bowl_index = |b: i64| -> Result<usize, ExecError> {
            usize::try_from(b)
                .ok()
                .filter(|b| *b < self.state.bowl_contents.len())
                .ok_or_else(|| ExecError::InternalAssert(format!("bowl {b} out of range")))
        };
        let empty_warning = |b: usize, ops: &mut VecDeque<Op>| {
            if self.state.bowl_contents[b].eq_ignore_ascii_case("empty") {
                ops.push_back(Op::Warn(format!("bowl {b} is empty")));
            }
        };
        let travel = |bowl: usize| Op::Move {
            kind: SegmentKind::Travel,
            target: Target::Bowl(bowl),
            during: ArmPhase::Moving {
                segment: SegmentKind::Travel,
            },
            after: ArmPhase::AtBowl { bowl },
        };
        let dip = |bowl: usize| Op::Move {
            kind: SegmentKind::ScoopDip,
            target: Target::Bowl(bowl),
            during: ArmPhase::Scooping { bowl },
            after: ArmPhase::AtBowl { bowl },
        };
        match *stmt {
            Stmt::Scoop { bowl } => {
                let b = bowl_index(bowl)?;
                empty_warning(b, ops);
                ops.push_back(Op::Announce(ANNOUNCE_SCOOPING));
                ops.push_back(travel(b));
                ops.push_back(dip(b));
            }
            Stmt::ScrapeThenScoop { bowl } => {
                let b = bowl_index(bowl)?;
                empty_warning(b, ops);
                ops.push_back(Op::Announce(ANNOUNCE_SCRAPING));
                ops.push_back(travel(b));
                ops.push_back(Op::Move {
                    kind: SegmentKind::ScrapePass,
                    target: Target::Bowl(b),
                    during: ArmPhase::Scraping { bowl: b },
                    after: ArmPhase::AtBowl { bowl: b },
                });
                ops.push_back(dip(b));
            }
            Stmt::MoveToMouth => {
                let moving = ArmPhase::Moving {
                    segment: SegmentKind::Travel,
                };
                ops.push_back(Op::Move {
                    kind: SegmentKind::Travel,
                    target: Target::Mouth,
                    during: moving,
                    after: moving,
                });
                ops.push_back(Op::Move {
                    kind: SegmentKind::PresentAtMouth,
                    target: Target::Mouth,
                    during: ArmPhase::Moving {
                        segment: SegmentKind::PresentAtMouth,
                    },
                    after: ArmPhase::AtMouth,
                });
            }
            Stmt::SetVar { var, value } => {
                let native = self.spec.get(var).scale(value);
                if !self.spec.get(var).contains_native(native) {
                    return Err(ExecError::InternalAssert(format!(
                        "{var} = {native} outside native range"
                    )));
                }
                ops.push_back(Op::Set(var, value));
            }
            Stmt::Sleep { seconds } => {
                if !(seconds >= 0.0 && seconds.is_finite()) {
                    return Err(ExecError::InternalAssert(format!("sleep {seconds}")));
                }
                ops.push_back(Op::Sleep((seconds * 1000.0).round() as u64));
            }
            Stmt::Start => ops.push_back(Op::Start),
            Stmt::Stop => ops.push_back(Op::Stop),
            Stmt::PauseIndefinitely => ops.push_back(Op::Pause),
        }
        Ok(())
    }

    /// Duration of a segment at the current native speed and acceleration.
    pub fn segment_duration_ms(&self, segment: &TrajectorySegment) -> u64 {
        let vars = &self.state.variables_native;
        let secs = trapezoid_duration(segment.nominal_length, vars.speed, vars.acceleration);
        ((secs * 1000.0).ceil() as u64).max(1)
    }

    fn segment_for(&self, kind: SegmentKind, target: Target) -> TrajectorySegment {
        let tr = &self.trajectory;
        let nominal_length = match (kind, target) {
            (SegmentKind::Travel, Target::Mouth) => tr.travel_to_mouth,
            (SegmentKind::Travel, Target::Bowl(_)) => tr.travel_to_bowl,
            (SegmentKind::ScoopDip, _) => {
                tr.scoop_dip_base + tr.scoop_dip_per_mm * self.state.variables_native.scoop_depth
            }
            (SegmentKind::ScrapePass, _) => tr.scrape_pass,
            (SegmentKind::PresentAtMouth, _) => tr.present_at_mouth,
        };
        TrajectorySegment {
            kind,
            nominal_length,
            target,
        }
    }

    fn emit(&mut self, run_id: u64, t_ms: u64, kind: EventKind, detail: impl Into<String>) {
        self.seq += 1;
        self.outbox.push(ExecutionEvent {
            run_id,
            seq: self.seq,
            t_ms,
            kind,
            detail: detail.into(),
        });
    }

    /// Advance one tick: apply due control requests, run up to `tick_ms` of
    /// work, apply requests that arrived during the tick, then wait.
    pub fn step(&mut self) {
        let now = self.clock.now_ms();
        if self.run.is_none() && now > self.t {
            self.t = now;
        }
        let start = self.t;
        let end = start + self.tick_ms;
        self.pending.extend(self.rx.try_iter());
        self.apply_due(start);
        self.advance(start, end);
        self.pending.extend(self.rx.try_iter());
        self.apply_due(end);
        self.t = end;
        self.clock.wait_until(end);
    }

    /// Step until the current run finishes or `max_ticks` elapse.
    pub fn run_until_idle(&mut self, max_ticks: usize) -> bool {
        for _ in 0..max_ticks {
            if self.run.is_none() {
                return true;
            }
            self.step();
        }
        self.run.is_none()
    }

    fn apply_due(&mut self, at: u64) {
        let (due, later): (Vec<_>, Vec<_>) = std::mem::take(&mut self.pending)
            .into_iter()
            .partition(|m| m.requested_at <= at);
        self.pending = later;
        for msg in due {
            self.apply(msg, at);
        }
    }

    fn apply(&mut self, msg: ControlMsg, at: u64) {
        let Some(run) = self.run.as_mut() else {
            return;
        };
        if run.id != msg.run_id {
            return;
        }
        let id = run.id;
        match msg.control {
            Control::Interrupt(InterruptKind::Pause) => {
                if !run.paused {
                    run.paused = true;
                    self.state.exec_status = ExecStatus::Paused;
                    self.emit(id, at, EventKind::Paused, "interrupt");
                }
            }
            Control::Resume => {
                if run.paused {
                    run.paused = false;
                    self.state.exec_status = ExecStatus::Running;
                    self.emit(id, at, EventKind::Resumed, "");
                }
            }
            Control::Interrupt(InterruptKind::Stop) => self.halt(at, "interrupt"),
            Control::Fault(Fault::SpoonDetached) => {
                self.state.spoon_attached = false;
                self.emit(id, at, EventKind::Warning, "spoon detached");
                self.halt(at, "spoon detached");
            }
        }
    }

    /// Permanently end the current run, holding the arm where it is.
    fn halt(&mut self, at: u64, detail: &str) {
        if let Some(run) = self.run.take() {
            run.status.store(ST_STOPPED, Ordering::Release);
            self.state.exec_status = ExecStatus::Stopped;
            self.emit(run.id, at, EventKind::Stopped, detail);
        }
    }

    fn advance(&mut self, start: u64, end: u64) {
        let Some(mut run) = self.run.take() else {
            return;
        };
        let id = run.id;
        let mut now = start;
        loop {
            if run.paused {
                break;
            }
            if let Some(active) = run.active.as_mut() {
                let available = end - now;
                if active.remaining_ms > available {
                    active.remaining_ms -= available;
                    break;
                }
                now += active.remaining_ms;
                match run.active.take().map(|a| a.activity) {
                    Some(Activity::Segment { segment, after }) => {
                        self.state.arm_phase = after;
                        self.emit(id, now, EventKind::SegmentEnd, segment.kind.name());
                    }
                    Some(Activity::Sleep) => self.emit(id, now, EventKind::SleepEnd, ""),
                    None => {}
                }
                continue;
            }
            if now >= end {
                break;
            }
            let Some(op) = run.ops.pop_front() else {
                self.emit(id, now, EventKind::Announce, ANNOUNCE_READY);
                self.emit(id, now, EventKind::ProgramDone, "");
                run.status.store(ST_IDLE, Ordering::Release);
                self.state.exec_status = ExecStatus::Idle;
                return;
            };
            match op {
                Op::Announce(text) => self.emit(id, now, EventKind::Announce, text),
                Op::Warn(text) => self.emit(id, now, EventKind::Warning, text),
                Op::Set(var, grounded) => {
                    self.state.variables_grounded.set(var, grounded);
                    let native = self.spec.get(var).scale(grounded);
                    self.state.variables_native.set(var, native);
                }
                Op::Move {
                    kind,
                    target,
                    during,
                    after,
                } => {
                    let segment = self.segment_for(kind, target);
                    let remaining_ms = self.segment_duration_ms(&segment);
                    self.state.arm_phase = during;
                    self.emit(id, now, EventKind::SegmentStart, kind.name());
                    run.active = Some(Active {
                        activity: Activity::Segment { segment, after },
                        remaining_ms,
                    });
                }
                Op::Sleep(ms) => {
                    self.emit(id, now, EventKind::SleepStart, format!("{ms}"));
                    run.active = Some(Active {
                        activity: Activity::Sleep,
                        remaining_ms: ms,
                    });
                }
                Op::Start => {}
                Op::Pause => {
                    run.paused = true;
                    run.status.store(ST_PAUSED, Ordering::Release);
                    self.state.exec_status = ExecStatus::Paused;
                    self.emit(id, now, EventKind::Paused, "program");
                }
                Op::Stop => {
                    self.run = Some(run);
                    self.halt(now, "program");
                    return;
                }
            }
        }
        self.run = Some(run);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::VirtualClock;
    use crate::dsl::{parse, validate, PauseConfig};
    use crate::sim::load_environment;

    fn bowls() -> Vec<String> {
        ["blueberries", "granola", "yogurt", "empty"]
            .map(String::from)
            .to_vec()
    }

    fn executor(clock: &VirtualClock) -> Executor {
        let spec = VariableSpec::default();
        let state = load_environment(&bowls(), &spec, &Default::default()).unwrap();
        Executor::new(
            state,
            spec,
            TrajectoryConfig::default(),
            50,
            Arc::new(clock.clone()),
        )
        .unwrap()
    }

    fn program(code: &str) -> ValidatedProgram {
        validate(
            &parse(code).unwrap(),
            &VariableSpec::default(),
            &PauseConfig::default(),
        )
        .unwrap()
        .0
    }

    fn announcements(events: &[ExecutionEvent]) -> Vec<&str> {
        events
            .iter()
            .filter(|e| e.kind == EventKind::Announce)
            .map(|e| e.detail.as_str())
            .collect()
    }

    #[test]
    fn scoop_then_mouth_announces() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        ex.execute(&program("obi.scoop_from_bowlno(1)\nobi.move_to_mouth()"))
            .unwrap();
        assert!(ex.run_until_idle(10_000));
        let events = ex.drain_events();
        assert_eq!(announcements(&events), vec![ANNOUNCE_SCOOPING, ANNOUNCE_READY]);
        let kinds: Vec<_> = events.iter().map(|e| (e.kind, e.detail.as_str())).collect();
        assert_eq!(
            kinds,
            vec![
                (EventKind::Announce, ANNOUNCE_SCOOPING),
                (EventKind::SegmentStart, "travel"),
                (EventKind::SegmentEnd, "travel"),
                (EventKind::SegmentStart, "scoop_dip"),
                (EventKind::SegmentEnd, "scoop_dip"),
                (EventKind::SegmentStart, "travel"),
                (EventKind::SegmentEnd, "travel"),
                (EventKind::SegmentStart, "present_at_mouth"),
                (EventKind::SegmentEnd, "present_at_mouth"),
                (EventKind::Announce, ANNOUNCE_READY),
                (EventKind::ProgramDone, ""),
            ]
        );
        assert_eq!(ex.state().arm_phase, ArmPhase::AtMouth);
        assert_eq!(ex.state().exec_status, ExecStatus::Idle);
        assert!(events.windows(2).all(|w| w[0].t_ms <= w[1].t_ms && w[0].seq < w[1].seq));
    }

    #[test]
    fn empty_program_just_finishes() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        ex.execute(&program("# nothing")).unwrap();
        ex.step();
        let events = ex.drain_events();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].detail, ANNOUNCE_READY);
        assert_eq!(events[1].kind, EventKind::ProgramDone);
    }

    #[test]
    fn segment_timing_follows_trapezoid() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        ex.execute(&program("obi.scoop_from_bowlno(0)")).unwrap();
        ex.run_until_idle(10_000);
        let events = ex.drain_events();
        // travel 1.0 at v=0.6, a=0.6: 1/0.6 + 0.6/0.6 = 2.6667 s -> 2667 ms
        assert_eq!(events[1].t_ms, 0);
        assert_eq!(events[2].t_ms, 2667);
        // dip 0.2 + 0.005*30 = 0.35 < ramp 0.6: 2*sqrt(0.35/0.6) = 1.5275 s
        assert_eq!(events[4].t_ms - events[3].t_ms, 1528);
    }

    #[test]
    fn sleep_and_set_var() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        ex.execute(&program("obi.speed = 5\nobi.scoop_depth = 0\ntime.sleep(1.25)"))
            .unwrap();
        ex.run_until_idle(1000);
        let events = ex.drain_events();
        assert_eq!(events[0].kind, EventKind::SleepStart);
        assert_eq!(events[1].kind, EventKind::SleepEnd);
        assert_eq!(events[1].t_ms - events[0].t_ms, 1250);
        assert_eq!(ex.state().variables_native.speed, 1.0);
        assert_eq!(ex.state().variables_native.scoop_depth, 10.0);
        assert_eq!(ex.state().variables_grounded.speed, 5.0);
    }

    #[test]
    fn empty_bowl_warns_but_scoops() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        ex.execute(&program("obi.scrape_then_scoop_bowlno(3)")).unwrap();
        ex.run_until_idle(10_000);
        let events = ex.drain_events();
        assert_eq!(events[0].kind, EventKind::Warning);
        assert_eq!(events[1].detail, ANNOUNCE_SCRAPING);
        assert_eq!(events.last().unwrap().kind, EventKind::ProgramDone);
    }

    #[test]
    fn already_running() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        ex.execute(&program("obi.move_to_mouth()")).unwrap();
        assert_eq!(
            ex.execute(&program("obi.move_to_mouth()")).unwrap_err(),
            ExecError::AlreadyRunning
        );
    }

    #[test]
    fn pause_mid_travel_then_resume() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex.execute(&program("obi.scoop_from_bowlno(0)")).unwrap();
        for _ in 0..20 {
            ex.step();
        }
        // 1000 ms into a 2667 ms travel segment
        h.interrupt(InterruptKind::Pause).unwrap();
        assert_eq!(h.status(), ExecStatus::Paused);
        for _ in 0..10 {
            ex.step();
        }
        h.resume().unwrap();
        ex.run_until_idle(10_000);
        let events = ex.drain_events();
        let at = |k: EventKind| events.iter().find(|e| e.kind == k).unwrap().t_ms;
        assert_eq!(at(EventKind::Paused), 1000);
        assert_eq!(at(EventKind::Resumed), 1500);
        let travel_end = events
            .iter()
            .find(|e| e.kind == EventKind::SegmentEnd)
            .unwrap()
            .t_ms;
        // remaining 1667 ms after resuming at 1500
        assert_eq!(travel_end, 1500 + 1667);
    }

    #[test]
    fn pause_then_immediate_resume() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex.execute(&program("obi.move_to_mouth()")).unwrap();
        ex.step();
        ex.drain_events();
        h.interrupt(InterruptKind::Pause).unwrap();
        h.resume().unwrap();
        ex.step();
        let events = ex.drain_events();
        assert_eq!(events[0].kind, EventKind::Paused);
        assert_eq!(events[1].kind, EventKind::Resumed);
    }

    #[test]
    fn stop_is_permanent() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex
            .execute(&program("obi.scoop_from_bowlno(0)\nobi.move_to_mouth()"))
            .unwrap();
        ex.step();
        h.interrupt(InterruptKind::Stop).unwrap();
        assert_eq!(h.resume().unwrap_err(), ExecError::NotPaused);
        assert_eq!(
            h.interrupt(InterruptKind::Stop).unwrap_err(),
            ExecError::NotRunning
        );
        for _ in 0..200 {
            ex.step();
        }
        let events = ex.drain_events();
        let stop = events
            .iter()
            .position(|e| e.kind == EventKind::Stopped)
            .unwrap();
        assert_eq!(stop, events.len() - 1);
        assert_eq!(events[stop].t_ms, 50);
        assert_eq!(ex.state().exec_status, ExecStatus::Stopped);
        assert!(!ex.is_busy());
        // A fresh program runs normally afterwards.
        let h2 = ex.execute(&program("obi.move_to_mouth()")).unwrap();
        assert_ne!(h2.run_id(), h.run_id());
        assert!(ex.run_until_idle(10_000));
    }

    #[test]
    fn pause_when_idle() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex.execute(&program("# nothing")).unwrap();
        ex.step();
        assert_eq!(
            h.interrupt(InterruptKind::Pause).unwrap_err(),
            ExecError::NotRunning
        );
    }

    #[test]
    fn mid_tick_request_waits_for_boundary() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex.execute(&program("obi.move_to_mouth()")).unwrap();
        ex.step();
        ex.step();
        // executor sits at t=100; request arrives at t=130
        clock.set(130);
        h.interrupt(InterruptKind::Stop).unwrap();
        ex.step();
        let stopped = ex
            .drain_events()
            .into_iter()
            .find(|e| e.kind == EventKind::Stopped)
            .unwrap();
        assert_eq!(stopped.t_ms, 150);
    }

    #[test]
    fn program_level_pause_and_stop() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex
            .execute(&program("obi.pause_indefinitely()\nobi.start()\nobi.stop()\nobi.move_to_mouth()"))
            .unwrap();
        ex.step();
        assert_eq!(h.status(), ExecStatus::Paused);
        assert_eq!(ex.state().exec_status, ExecStatus::Paused);
        for _ in 0..5 {
            ex.step();
        }
        h.resume().unwrap();
        ex.step();
        let kinds: Vec<_> = ex.drain_events().iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![EventKind::Paused, EventKind::Resumed, EventKind::Stopped]
        );
        assert_eq!(h.status(), ExecStatus::Stopped);
    }

    #[test]
    fn spoon_fault_forces_stop() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex.execute(&program("obi.scoop_from_bowlno(1)")).unwrap();
        ex.step();
        h.inject_fault(Fault::SpoonDetached).unwrap();
        ex.step();
        let events = ex.drain_events();
        let n = events.len();
        assert_eq!(events[n - 2].detail, "spoon detached");
        assert_eq!(events[n - 1].kind, EventKind::Stopped);
        assert!(!ex.state().spoon_attached);
    }

    #[test]
    fn handles_work_across_threads() {
        let clock = VirtualClock::new(0);
        let mut ex = executor(&clock);
        let h = ex.execute(&program("obi.move_to_mouth()")).unwrap();
        let remote = h.clone();
        std::thread::spawn(move || remote.interrupt(InterruptKind::Stop).unwrap())
            .join()
            .unwrap();
        ex.step();
        assert!(ex
            .drain_events()
            .iter()
            .any(|e| e.kind == EventKind::Stopped));
    }
}
