use std::sync::Arc;

use super::{
    match_interrupt_keyword, ConfigOverride, CueKind, CueSink, FeedbackCue, Input, InterruptIntent,
    NullSink, Outbound, OutboundBody, Phase, ReportView, SessionEvent, Snapshot, UserInterrupt,
};
use crate::clock::Clock;
use crate::config::{BackendKind, Config, ConfigError, WakeBackendKind};
use crate::dsl::{parse, validate, PauseConfig, Rejection, SafetyReport, VariableSpec};
use crate::llm::{
    build_prompt, extract_code, CallCounter, CompletionBackend, EnvironmentDescription,
    ExchangeHistory, LlmError, MockLlm, PromptTemplate, RemoteLlm,
};
use crate::sim::{
    load_environment, EventKind, ExecutionEvent, ExecutionHandle, Executor, Fault,
    InterruptKind, RobotState, SimConfigError, TrajectoryConfig, ANNOUNCE_READY, ANNOUNCE_SCOOPING,
    ANNOUNCE_SCRAPING,
};
use crate::speech::{
    transcribe, AlwaysOnWake, EndpointConfig, InputItem, KeywordWake, MockTranscriber,
    PushToTalkWake, RemoteTranscriber, SpeechError, TimedInput, Transcriber, Transcript,
    Utterance, UtteranceCollector, WakeDetector, WakeListener, WakeSource,
};

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("speech: {0}")]
    Speech(#[from] SpeechError),
    #[error("llm: {0}")]
    Llm(#[from] LlmError),
    #[error("simulator: {0}")]
    Sim(#[from] SimConfigError),
}

/// Which backends to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    FromConfig,
    /// Mock STT and LLM regardless of what the config selects.
    ForceMock,
}

/// Everything a session is assembled from.
pub struct SessionParts {
    pub template: PromptTemplate,
    pub environment: EnvironmentDescription,
    pub variables: VariableSpec,
    pub pause: PauseConfig,
    pub endpoint: EndpointConfig,
    pub history_cap: usize,
    pub wake: Box<dyn WakeDetector>,
    pub wake_phrase: KeywordWake,
    pub stt: Box<dyn Transcriber>,
    pub llm: Box<dyn CompletionBackend>,
    pub robot: RobotState,
    pub trajectory: TrajectoryConfig,
    pub tick_ms: u64,
    pub cheat_sheet: Vec<String>,
    pub sink: Box<dyn CueSink>,
}

/// Build session parts from a loaded config.
pub fn build_session(cfg: &Config, choice: BackendChoice) -> Result<SessionParts, SessionError> {
    let mock = |k: BackendKind| choice == BackendChoice::ForceMock || k == BackendKind::Mock;
    let missing = |what: &str| ConfigError::Invalid(format!("{what} is required for mock mode"));

    let wake_phrase = KeywordWake::new(&cfg.speech.wake_phrase)?;
    let wake: Box<dyn WakeDetector> = match cfg.speech.wake_backend {
        WakeBackendKind::Keyword => Box::new(wake_phrase.clone()),
        WakeBackendKind::PushToTalk => Box::new(PushToTalkWake),
        WakeBackendKind::AlwaysOn => Box::new(AlwaysOnWake),
    };
    let stt: Box<dyn Transcriber> = if mock(cfg.speech.stt_backend) {
        let path = cfg.speech.mock_corpus.as_ref().ok_or_else(|| missing("speech.mock_corpus"))?;
        Box::new(MockTranscriber::load(&cfg.resolve(path))?)
    } else {
        Box::new(RemoteTranscriber::from_env()?)
    };
    let llm: Box<dyn CompletionBackend> = if mock(cfg.llm.backend) {
        let path = cfg.llm.mock_rules.as_ref().ok_or_else(|| missing("llm.mock_rules"))?;
        Box::new(MockLlm::load(&cfg.resolve(path))?)
    } else {
        Box::new(RemoteLlm::from_env()?)
    };
    let template = PromptTemplate::load(&cfg.resolve(&cfg.llm.prompt_template))?;
    let robot = load_environment(&cfg.environment.bowls, &cfg.variables, &cfg.initial)?;
    Ok(SessionParts {
        template,
        environment: cfg.environment_description(),
        variables: cfg.variables,
        pause: cfg.pause,
        endpoint: cfg.speech.endpoint,
        history_cap: cfg.llm.history_cap,
        wake,
        wake_phrase,
        stt,
        llm,
        robot,
        trajectory: cfg.trajectory,
        tick_ms: cfg.executor.tick_ms,
        cheat_sheet: cfg.environment.cheat_sheet.clone(),
        sink: Box::new(NullSink),
    })
}

/// The session state machine. Single-threaded and steppable: feed it
/// inputs with [`Session::handle_input`], advance the robot with
/// [`Session::tick`], and collect what happened with [`Session::drain`].
pub struct Session {
    phase: Phase,
    template: PromptTemplate,
    environment: EnvironmentDescription,
    variables: VariableSpec,
    pause: PauseConfig,
    endpoint: EndpointConfig,
    listener: WakeListener,
    wake_phrase: KeywordWake,
    stt: Box<dyn Transcriber>,
    llm: Box<dyn CompletionBackend>,
    llm_calls: CallCounter,
    executor: Executor,
    handle: Option<ExecutionHandle>,
    collector: Option<UtteranceCollector>,
    history: ExchangeHistory,
    last_report: Option<SafetyReport>,
    cheat_sheet: Vec<String>,
    sink: Box<dyn CueSink>,
    clock: Arc<dyn Clock>,
    /// While reacting to an executor event, stamp with its time.
    stamp: Option<u64>,
    seq: u64,
    outbox: Vec<Outbound>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("phase", &self.phase)
            .field("history", &self.history.len())
            .finish_non_exhaustive()
    }
}

impl Session {
    pub fn new(parts: SessionParts, clock: Arc<dyn Clock>) -> Result<Self, SessionError> {
        let executor = Executor::new(
            parts.robot,
            parts.variables,
            parts.trajectory,
            parts.tick_ms,
            clock.clone(),
        )?;
        let mut s = Self {
            phase: Phase::AwaitingWake,
            template: parts.template,
            environment: parts.environment,
            variables: parts.variables,
            pause: parts.pause,
            endpoint: parts.endpoint,
            listener: WakeListener::new(parts.wake),
            wake_phrase: parts.wake_phrase,
            stt: parts.stt,
            llm_calls: parts.llm.call_counter(),
            llm: parts.llm,
            executor,
            handle: None,
            collector: None,
            history: ExchangeHistory::new(parts.history_cap),
            last_report: None,
            cheat_sheet: parts.cheat_sheet,
            sink: parts.sink,
            clock,
            stamp: None,
            seq: 0,
            outbox: Vec::new(),
        };
        s.push_snapshot();
        Ok(s)
    }

    pub fn from_config(
        cfg: &Config,
        choice: BackendChoice,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, SessionError> {
        Self::new(build_session(cfg, choice)?, clock)
    }

    pub fn set_sink(&mut self, sink: Box<dyn CueSink>) {
        self.sink = sink;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn history(&self) -> &ExchangeHistory {
        &self.history
    }

    pub fn robot(&self) -> &RobotState {
        self.executor.state()
    }

    pub fn llm_calls(&self) -> u64 {
        self.llm_calls.get()
    }

    pub fn tick_ms(&self) -> u64 {
        self.executor.tick_ms()
    }

    /// Executor time; ahead of the clock only transiently inside a tick.
    pub fn now_ms(&self) -> u64 {
        if let Some(t) = self.stamp {
            return t;
        }
        self.clock.now_ms().max(self.executor.now_ms())
    }

    pub fn is_busy(&self) -> bool {
        self.executor.is_busy()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            phase: self.phase,
            robot: self.executor.state().clone(),
            history: self.history.snapshot(),
            last_report: self.last_report.clone(),
            pause_delay_s: self.pause.min_delay_s,
            llm_calls: self.llm_calls.get(),
            cheat_sheet: self.cheat_sheet.clone(),
        }
    }

    pub fn drain(&mut self) -> Vec<Outbound> {
        std::mem::take(&mut self.outbox)
    }

    fn push(&mut self, t_ms: u64, body: OutboundBody) {
        self.seq += 1;
        self.outbox.push(Outbound {
            seq: self.seq,
            t_ms,
            body,
        });
    }

    /// Emit a snapshot now, e.g. for a client that just connected.
    pub fn request_snapshot(&mut self) {
        self.push_snapshot();
    }

    fn push_snapshot(&mut self) {
        let snapshot = Box::new(self.snapshot());
        self.push(self.now_ms(), OutboundBody::Snapshot(snapshot));
    }

    fn event(&mut self, event: SessionEvent) {
        self.push(self.now_ms(), OutboundBody::Event(event));
    }

    fn cue(&mut self, kind: CueKind) {
        self.sink.play(&FeedbackCue::from(kind));
        self.event(SessionEvent::Cue {
            cue: kind,
            text: kind.text().into(),
        });
    }

    fn error(&mut self, stage: &str, message: impl ToString) {
        self.event(SessionEvent::Error {
            stage: stage.into(),
            message: message.to_string(),
        });
    }

    fn set_phase(&mut self, phase: Phase) {
        if self.phase == phase {
            return;
        }
        self.phase = phase;
        self.event(SessionEvent::Phase { phase });
        self.push_snapshot();
    }

    /// Back to listening after a failure in the command cycle.
    fn fail(&mut self, stage: &str, message: impl ToString) {
        self.error(stage, message);
        self.cue(CueKind::Error);
        self.collector = None;
        self.set_phase(Phase::AwaitingWake);
    }

    pub fn handle_input(&mut self, input: Input) {
        match input {
            Input::Speech(timed) => self.on_speech(timed),
            Input::Command(text) => self.on_command(text),
            Input::Interrupt(kind) => self.on_interrupt(kind),
            Input::ConfigSet(over) => self.on_config(over),
            Input::Fault(fault) => self.on_fault(fault),
        }
    }

    fn running(&self) -> bool {
        self.handle.is_some()
    }

    fn on_speech(&mut self, timed: TimedInput) {
        if self.running() {
            self.speech_while_running(timed);
            return;
        }
        match self.phase {
            Phase::Capturing => {
                let collector = self.collector.as_mut().expect("capturing without collector");
                match collector.offer(&timed) {
                    None => {}
                    Some(Ok(utterance)) => self.process(utterance),
                    Some(Err(e)) => self.fail("capture", e),
                }
            }
            _ => {
                let Some(m) = self.listener.offer(&timed) else {
                    return;
                };
                self.woke(m.event.source, m.event.timestamp);
                if let Some(rest) = m.remainder {
                    self.process(Utterance::text(rest));
                }
            }
        }
    }

    fn woke(&mut self, source: WakeSource, timestamp: u64) {
        self.event(SessionEvent::Wake { source, timestamp });
        self.cue(CueKind::Beep);
        self.collector = Some(UtteranceCollector::new(self.endpoint, self.now_ms()));
        self.set_phase(Phase::Capturing);
    }

    fn on_command(&mut self, text: String) {
        let text = self.wake_phrase.strip(&text).unwrap_or(&text).trim().to_string();
        if self.running() {
            self.route_running(&text);
            return;
        }
        if text.is_empty() {
            self.error("command", "empty command");
            return;
        }
        self.woke(WakeSource::TextInjection, self.now_ms());
        self.process(Utterance::text(text));
    }

    /// During execution only interrupt keywords are acted on; audio is
    /// transcribed chunk by chunk since there is no wake step.
    fn speech_while_running(&mut self, timed: TimedInput) {
        let text = match timed.item {
            InputItem::Text(text) => text,
            InputItem::Audio { bytes, duration_ms } => {
                match transcribe(&Utterance::audio(bytes, duration_ms), self.stt.as_ref()) {
                    Ok(t) => {
                        self.transcript_event(&t);
                        t.text
                    }
                    Err(e) => {
                        self.error("transcribe", e);
                        return;
                    }
                }
            }
            InputItem::PushToTalk | InputItem::Silence { .. } => return,
        };
        let text = self.wake_phrase.strip(&text).unwrap_or(&text).trim().to_string();
        if !text.is_empty() {
            self.route_running(&text);
        }
    }

    fn transcript_event(&mut self, t: &Transcript) {
        self.event(SessionEvent::Transcript {
            text: t.text.clone(),
            confidence: t.confidence,
            backend_id: t.backend_id.clone(),
        });
    }

    fn route_running(&mut self, text: &str) {
        match match_interrupt_keyword(text, &self.wake_phrase) {
            Some(intent) => self.apply_intent(intent),
            None => {
                self.event(SessionEvent::FastPath {
                    action: "busy".into(),
                });
                self.cue(CueKind::Busy);
            }
        }
    }

    fn apply_intent(&mut self, intent: InterruptIntent) {
        let Some(handle) = self.handle.clone() else {
            self.event(SessionEvent::FastPath {
                action: "noop".into(),
            });
            self.cue(CueKind::NoOp);
            return;
        };
        let (action, result) = match intent {
            InterruptIntent::Stop => ("stop", handle.interrupt(InterruptKind::Stop)),
            InterruptIntent::Pause => ("pause", handle.interrupt(InterruptKind::Pause)),
            InterruptIntent::Resume => ("resume", handle.resume()),
        };
        match result {
            Ok(()) => self.event(SessionEvent::FastPath {
                action: action.into(),
            }),
            Err(_) => {
                self.event(SessionEvent::FastPath {
                    action: "noop".into(),
                });
                self.cue(CueKind::NoOp);
            }
        }
    }

    fn on_interrupt(&mut self, kind: UserInterrupt) {
        self.apply_intent(match kind {
            UserInterrupt::Stop => InterruptIntent::Stop,
            UserInterrupt::Pause => InterruptIntent::Pause,
            UserInterrupt::Resume => InterruptIntent::Resume,
        });
    }

    fn on_config(&mut self, over: ConfigOverride) {
        if let Some(d) = over.pause_delay_s {
            if !(d.is_finite() && (0.0..=self.pause.max_sleep_s).contains(&d)) {
                self.error(
                    "config",
                    format!("pause_delay_s must lie in [0, {}]", self.pause.max_sleep_s),
                );
                return;
            }
            self.pause.min_delay_s = d;
            self.event(SessionEvent::ConfigChanged { pause_delay_s: d });
            self.push_snapshot();
        }
    }

    fn on_fault(&mut self, fault: Fault) {
        match &self.handle {
            Some(h) if h.inject_fault(fault).is_ok() => {}
            _ => self.error("fault", "no program is running"),
        }
    }

    /// One command cycle after capture: transcribe, generate, validate,
    /// and start execution.
    fn process(&mut self, utterance: Utterance) {
        self.collector = None;
        self.event(SessionEvent::Captured {
            duration_ms: utterance.duration_ms,
            injected_text: utterance.text_hint().is_some(),
        });
        self.cue(CueKind::GotIt);
        self.set_phase(Phase::Processing);
        let transcript = match transcribe(&utterance, self.stt.as_ref()) {
            Ok(t) => t,
            Err(e) => return self.fail("transcribe", e),
        };
        self.transcript_event(&transcript);
        if match_interrupt_keyword(&transcript.text, &self.wake_phrase).is_some() {
            // Nothing is running, so an interrupt keyword has nothing to act on.
            self.event(SessionEvent::FastPath {
                action: "noop".into(),
            });
            self.cue(CueKind::NoOp);
            self.set_phase(Phase::AwaitingWake);
            return;
        }
        let prompt = build_prompt(
            &self.template,
            &self.environment,
            &self.variables,
            &self.pause,
            &self.history,
            &transcript,
        );
        self.event(SessionEvent::Prompt {
            text: prompt.clone(),
        });
        let code = match self.llm.complete(&prompt).and_then(|c| extract_code(&c)) {
            Ok(code) => code,
            Err(e) => return self.fail("generate", e),
        };
        self.set_phase(Phase::Validating);
        let checked = parse(&code)
            .map_err(|e| Rejection::from(&e))
            .and_then(|p| {
                validate(&p, &self.variables, &self.pause).map_err(|e| Rejection::from(&e))
            });
        let (program, report) = match checked {
            Ok(ok) => ok,
            Err(rejection) => {
                let report = SafetyReport::rejected(rejection);
                self.report(report, code, None);
                return self.fail("validate", "program rejected");
            }
        };
        let pretty = program.pretty();
        self.report(report, code, Some(pretty.clone()));
        self.history.append(transcript.text.clone(), pretty);
        match self.executor.execute(&program) {
            Ok(handle) => {
                self.handle = Some(handle);
                self.set_phase(Phase::Executing);
            }
            Err(e) => self.fail("execute", e),
        }
    }

    fn report(&mut self, report: SafetyReport, raw_code: String, code: Option<String>) {
        self.last_report = Some(report.clone());
        self.push(
            self.now_ms(),
            OutboundBody::Report(ReportView {
                report,
                raw_code,
                code,
            }),
        );
    }

    /// Advance one executor tick (if a program is running) and check the
    /// capture deadline.
    pub fn tick(&mut self) {
        if self.executor.is_busy() {
            self.executor.step();
            for ev in self.executor.drain_events() {
                self.on_exec_event(ev);
            }
        } else {
            self.poll_capture();
        }
    }

    /// Fire the capture timeout if its deadline has passed.
    pub fn poll_capture(&mut self) {
        let now = self.now_ms();
        if let Some(c) = self.collector.as_mut() {
            if let Some(r) = c.poll(now) {
                match r {
                    Ok(u) => self.process(u),
                    Err(e) => self.fail("capture", e),
                }
            }
        }
    }

    fn on_exec_event(&mut self, ev: ExecutionEvent) {
        let t = ev.t_ms;
        let kind = ev.kind;
        let detail = ev.detail.clone();
        self.stamp = Some(t);
        self.push(t, OutboundBody::Event(SessionEvent::Exec { event: ev }));
        match kind {
            EventKind::Announce => {
                let cue = match detail.as_str() {
                    ANNOUNCE_SCOOPING => Some(CueKind::Scooping),
                    ANNOUNCE_SCRAPING => Some(CueKind::Scraping),
                    ANNOUNCE_READY => Some(CueKind::Ready),
                    _ => None,
                };
                if let Some(c) = cue {
                    self.cue(c);
                }
            }
            EventKind::Paused => self.set_phase(Phase::Paused),
            EventKind::Resumed => self.set_phase(Phase::Executing),
            EventKind::Stopped => {
                self.handle = None;
                self.cue(CueKind::Ready);
                self.set_phase(Phase::AwaitingWake);
            }
            EventKind::ProgramDone => {
                self.handle = None;
                self.set_phase(Phase::AwaitingWake);
            }
            _ => {}
        }
        self.stamp = None;
    }
}
