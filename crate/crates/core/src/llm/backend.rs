use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{LlmError, RawCompletion};

pub const LLM_URL_ENV: &str = "VP_LLM_URL";
pub const LLM_TOKEN_ENV: &str = "VP_LLM_TOKEN";
pub const LLM_MODEL_ENV: &str = "VP_LLM_MODEL";

/// Shared count of completion requests, readable from tests and the UI.
#[derive(Debug, Clone, Default)]
pub struct CallCounter(Arc<AtomicU64>);

impl CallCounter {
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Acquire)
    }

    fn bump(&self) {
        self.0.fetch_add(1, Ordering::AcqRel);
    }
}

pub trait CompletionBackend: Send + std::fmt::Debug {
    fn id(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<RawCompletion, LlmError>;
    fn call_counter(&self) -> CallCounter;
}

#[derive(Debug, Clone)]
pub struct MockRule {
    pattern: Regex,
    template: String,
    repeat: Option<String>,
    separator: Option<String>,
    fence: bool,
}

impl MockRule {
    pub fn new(pattern: &str, template: impl Into<String>) -> Result<Self, LlmError> {
        let pattern = Regex::new(pattern)
            .map_err(|e| LlmError::Config(format!("mock rule pattern: {e}")))?;
        Ok(Self {
            pattern,
            template: template.into(),
            repeat: None,
            separator: None,
            fence: false,
        })
    }

    /// Repeat the template as many times as the named capture says,
    /// joining copies with `separator`.
    pub fn repeated(mut self, capture: &str, separator: Option<&str>) -> Self {
        self.repeat = Some(capture.into());
        self.separator = separator.map(String::from);
        self
    }

    pub fn fenced(mut self) -> Self {
        self.fence = true;
        self
    }

    fn render(&self, command: &str) -> Option<String> {
        let caps = self.pattern.captures(command)?;
        let mut body = self.template.clone();
        for name in self.pattern.capture_names().flatten() {
            if let Some(m) = caps.name(name) {
                body = body.replace(&format!("{{{name}}}"), m.as_str());
            }
        }
        let count = self
            .repeat
            .as_ref()
            .map_or(1, |name| caps.name(name).map_or(1, |m| count_word(m.as_str())));
        let mut pieces = Vec::with_capacity(count * 2);
        for i in 0..count {
            if i > 0 {
                if let Some(sep) = &self.separator {
                    pieces.push(sep.clone());
                }
            }
            pieces.push(body.clone());
        }
        let code = pieces.join("\n");
        Some(if self.fence {
            format!("Here is the code:\n```python\n{code}\n```")
        } else {
            code
        })
    }
}

fn count_word(word: &str) -> usize {
    const WORDS: [&str; 11] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    let w = word.trim().to_ascii_lowercase();
    if w == "a" || w == "an" {
        return 1;
    }
    if let Ok(n) = w.parse::<usize>() {
        return n.clamp(1, 10);
    }
    WORDS.iter().position(|x| *x == w).unwrap_or(1).max(1)
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    pattern: String,
    template: String,
    repeat: Option<String>,
    separator: Option<String>,
    #[serde(default)]
    fence: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    fallback: Option<String>,
    #[serde(default)]
    rule: Vec<RuleEntry>,
}

/// Deterministic stand-in for a language model: the first rule whose
/// pattern matches the prompt's last line produces the completion.
#[derive(Debug, Clone)]
pub struct MockLlm {
    rules: Vec<MockRule>,
    fallback: String,
    calls: CallCounter,
}

impl MockLlm {
    pub fn new(rules: Vec<MockRule>, fallback: impl Into<String>) -> Self {
        Self {
            rules,
            fallback: fallback.into(),
            calls: CallCounter::default(),
        }
    }

    pub fn from_toml(src: &str) -> Result<Self, LlmError> {
        let file: RuleFile =
            toml::from_str(src).map_err(|e| LlmError::Config(format!("mock rules: {e}")))?;
        let rules = file
            .rule
            .into_iter()
            .map(|r| {
                let mut rule = MockRule::new(&r.pattern, r.template)?;
                if let Some(cap) = &r.repeat {
                    if rule.pattern.capture_names().flatten().all(|n| n != cap) {
                        return Err(LlmError::Config(format!(
                            "mock rule repeats unknown capture `{cap}`"
                        )));
                    }
                    rule = rule.repeated(cap, r.separator.as_deref());
                }
                if r.fence {
                    rule = rule.fenced();
                }
                Ok(rule)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(
            rules,
            file.fallback
                .unwrap_or_else(|| "Sorry, I can't help with that.".into()),
        ))
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }
}

impl CompletionBackend for MockLlm {
    fn id(&self) -> &str {
        "mock"
    }

    fn complete(&self, prompt: &str) -> Result<RawCompletion, LlmError> {
        self.calls.bump();
        let command = prompt
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .unwrap_or("");
        let text = self
            .rules
            .iter()
            .find_map(|r| r.render(command))
            .unwrap_or_else(|| self.fallback.clone());
        if text.trim().is_empty() {
            return Err(LlmError::EmptyCompletion);
        }
        Ok(RawCompletion {
            text,
            backend_id: self.id().into(),
            latency_ms: 0,
        })
    }

    fn call_counter(&self) -> CallCounter {
        self.calls.clone()
    }
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
}

#[derive(Debug, Deserialize)]
struct ChatChoiceMessage {
    content: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

/// Chat-completion style HTTP endpoint.
#[derive(Debug)]
pub struct RemoteLlm {
    url: String,
    token: Option<String>,
    model: String,
    agent: ureq::Agent,
    calls: CallCounter,
}

impl RemoteLlm {
    pub fn new(
        url: impl Into<String>,
        token: Option<String>,
        model: impl Into<String>,
        timeout: Duration,
    ) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            url: url.into(),
            token,
            model: model.into(),
            agent,
            calls: CallCounter::default(),
        }
    }

    pub fn from_env() -> Result<Self, LlmError> {
        let url = std::env::var(LLM_URL_ENV)
            .map_err(|_| LlmError::Config(format!("{LLM_URL_ENV} is not set")))?;
        let model = std::env::var(LLM_MODEL_ENV)
            .map_err(|_| LlmError::Config(format!("{LLM_MODEL_ENV} is not set")))?;
        Ok(Self::new(
            url,
            std::env::var(LLM_TOKEN_ENV).ok(),
            model,
            Duration::from_secs(60),
        ))
    }
}

impl CompletionBackend for RemoteLlm {
    fn id(&self) -> &str {
        "remote"
    }

    fn complete(&self, prompt: &str) -> Result<RawCompletion, LlmError> {
        self.calls.bump();
        let started = Instant::now();
        let body = ChatRequest {
            model: &self.model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: 0.0,
        };
        let mut req = self.agent.post(&self.url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| LlmError::BackendUnavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(LlmError::BackendUnavailable(format!(
                "HTTP {}",
                resp.status()
            )));
        }
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| LlmError::BackendUnavailable(format!("bad response: {e}")))?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if text.trim().is_empty() {
            return Err(LlmError::EmptyCompletion);
        }
        Ok(RawCompletion {
            text,
            backend_id: self.id().into(),
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn call_counter(&self) -> CallCounter {
        self.calls.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RULES: &str = r#"
fallback = "I did not understand."

[[rule]]
pattern = '(?i)\bstop\b'
template = "obi.stop()"

[[rule]]
pattern = '(?i)feed me (?P<count>\w+) bites? (?:of|from) bowl (?P<bowl>\d+)'
template = "obi.scoop_from_bowlno({bowl})\nobi.move_to_mouth()"
repeat = "count"
separator = "time.sleep(4)"

[[rule]]
pattern = '(?i)scoop from bowl (?P<bowl>\d+)'
template = "obi.scoop_from_bowlno({bowl})"
fence = true
"#;

    fn expected_bites(n: usize, bowl: u32) -> String {
        let one = format!("obi.scoop_from_bowlno({bowl})\nobi.move_to_mouth()");
        vec![one; n].join("\ntime.sleep(4)\n")
    }

    #[test]
    fn feed_me_n_bites() {
        let llm = MockLlm::from_toml(RULES).unwrap();
        let out = llm
            .complete("preamble\nUser command: feed me three bites of bowl 2")
            .unwrap();
        assert_eq!(out.text, expected_bites(3, 2));
        assert_eq!(out.backend_id, "mock");
        let one = llm.complete("feed me a bite from bowl 0").unwrap();
        assert_eq!(one.text, expected_bites(1, 0));
        assert_eq!(llm.call_counter().get(), 2);
    }

    #[test]
    fn stop_maps_to_stop_call() {
        let llm = MockLlm::from_toml(RULES).unwrap();
        assert_eq!(llm.complete("x\nstop").unwrap().text, "obi.stop()");
    }

    #[test]
    fn only_last_line_is_matched() {
        let llm = MockLlm::from_toml(RULES).unwrap();
        let out = llm.complete("User: stop\nCode:\nobi.stop()\n\nUser command: hello").unwrap();
        assert_eq!(out.text, "I did not understand.");
    }

    #[test]
    fn fenced_output() {
        let llm = MockLlm::from_toml(RULES).unwrap();
        let out = llm.complete("scoop from bowl 1").unwrap();
        assert_eq!(out.text, "Here is the code:\n```python\nobi.scoop_from_bowlno(1)\n```");
    }

    #[test]
    fn empty_completion() {
        let llm = MockLlm::new(vec![MockRule::new("x", "").unwrap()], "");
        assert_eq!(llm.complete("x").unwrap_err(), LlmError::EmptyCompletion);
    }

    #[test]
    fn bad_rule_files() {
        assert!(MockLlm::from_toml("[[rule]]\npattern = '('\ntemplate = ''").is_err());
        assert!(MockLlm::from_toml(
            "[[rule]]\npattern = 'a'\ntemplate = ''\nrepeat = 'n'"
        )
        .is_err());
    }

    #[test]
    fn count_words() {
        assert_eq!(count_word("a"), 1);
        assert_eq!(count_word("Two"), 2);
        assert_eq!(count_word("4"), 4);
        assert_eq!(count_word("0"), 1);
        assert_eq!(count_word("many"), 1);
    }
}
