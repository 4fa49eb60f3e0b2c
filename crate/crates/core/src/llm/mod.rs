//! Prompt assembly, completion backends and code extraction.
//!
//! Nothing in here interprets completion text beyond string slicing; the
//! robot only ever sees code after it has been through [`crate::dsl`].

mod backend;
mod history;
mod prompt;

use serde::{Deserialize, Serialize};

pub use backend::{
    CallCounter, CompletionBackend, MockLlm, MockRule, RemoteLlm, LLM_MODEL_ENV, LLM_TOKEN_ENV,
    LLM_URL_ENV,
};
pub use history::{Exchange, ExchangeHistory, DEFAULT_HISTORY_CAP};
pub use prompt::{build_prompt, EnvironmentDescription, PromptTemplate, REQUIRED_BLOCKS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCompletion {
    pub text: String,
    pub backend_id: String,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("completion backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend returned an empty completion")]
    EmptyCompletion,
    #[error("completion contains no code")]
    NoCode,
    #[error("llm configuration: {0}")]
    Config(String),
}

/// Pull candidate code out of a completion: the first fenced block if there
/// is one, otherwise the whole text when it looks like robot code at all.
pub fn extract_code(completion: &RawCompletion) -> Result<String, LlmError> {
    let text = completion.text.as_str();
    let code = match text.find("```") {
        Some(open) => {
            let after = &text[open + 3..];
            // Skip the info string (e.g. ```python).
            let body = after.find('\n').map_or("", |nl| &after[nl + 1..]);
            let end = body.find("```").unwrap_or(body.len());
            body[..end].trim()
        }
        None => {
            let trimmed = text.trim();
            let looks_like_code = trimmed.lines().any(|l| {
                let l = l.trim_start();
                l.starts_with("obi.") || l.starts_with("sleep(") || l.starts_with("time.")
            });
            if looks_like_code {
                trimmed
            } else {
                ""
            }
        }
    };
    if code.trim().is_empty() {
        return Err(LlmError::NoCode);
    }
    Ok(code.to_string())
}
