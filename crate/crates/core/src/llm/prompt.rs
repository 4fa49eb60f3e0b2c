use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExchangeHistory, LlmError};
use crate::dsl::{format_number, PauseConfig, Var, VariableSpec, BOWL_COUNT};
use crate::speech::Transcript;

/// What the model is told about the workspace; the robot has no perception.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentDescription {
    pub bowl_contents: [String; BOWL_COUNT],
    pub task_summary: String,
    pub robot_physical_summary: String,
}

/// Block names in rendering order.
pub const REQUIRED_BLOCKS: [&str; 7] = [
    "environment",
    "functions",
    "variables",
    "user_control",
    "history",
    "history_entry",
    "command",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateBlock {
    name: String,
    text: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    version: u32,
    block: Vec<TemplateBlock>,
}

/// Prompt wording, loaded from a template file of named blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    blocks: [String; REQUIRED_BLOCKS.len()],
}

impl PromptTemplate {
    pub fn from_toml(src: &str) -> Result<Self, LlmError> {
        let file: TemplateFile =
            toml::from_str(src).map_err(|e| LlmError::Config(format!("prompt template: {e}")))?;
        if file.version != 1 {
            return Err(LlmError::Config(format!(
                "unsupported prompt template version {}",
                file.version
            )));
        }
        let mut blocks: [Option<String>; REQUIRED_BLOCKS.len()] = Default::default();
        for b in file.block {
            let idx = REQUIRED_BLOCKS
                .iter()
                .position(|n| *n == b.name)
                .ok_or_else(|| LlmError::Config(format!("unknown prompt block `{}`", b.name)))?;
            if blocks[idx].replace(b.text).is_some() {
                return Err(LlmError::Config(format!("duplicate prompt block `{}`", b.name)));
            }
        }
        let mut out: [String; REQUIRED_BLOCKS.len()] = Default::default();
        for (i, slot) in blocks.into_iter().enumerate() {
            out[i] = slot.ok_or_else(|| {
                LlmError::Config(format!("missing prompt block `{}`", REQUIRED_BLOCKS[i]))
            })?;
        }
        if !out[6].trim_end().ends_with("{command}") {
            return Err(LlmError::Config(
                "the `command` block must end with {command}".into(),
            ));
        }
        Ok(Self { blocks: out })
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    fn block(&self, name: &str) -> &str {
        let idx = REQUIRED_BLOCKS.iter().position(|n| *n == name).unwrap();
        &self.blocks[idx]
    }
}

fn fill(text: &str, vars: &[(&str, &str)]) -> String {
    let mut out = text.to_string();
    for (key, value) in vars {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    out.trim().to_string()
}

fn variable_table(spec: &VariableSpec) -> String {
    Var::ALL
        .iter()
        .map(|var| {
            let r = spec.get(*var);
            format!(
                "- obi.{var}: {} to {}, default {}",
                format_number(r.grounded_lo),
                format_number(r.grounded_hi),
                format_number(r.default_grounded)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Assemble the full prompt. Pure: identical inputs give identical bytes.
/// The new command is always the last line.
pub fn build_prompt(
    template: &PromptTemplate,
    env: &EnvironmentDescription,
    spec: &VariableSpec,
    pause: &PauseConfig,
    history: &ExchangeHistory,
    command: &Transcript,
) -> String {
    let bowl_list = env
        .bowl_contents
        .iter()
        .enumerate()
        .map(|(i, food)| format!("Bowl {i}: {food}"))
        .collect::<Vec<_>>()
        .join("\n");
    let pause_delay = format_number(pause.min_delay_s);
    let table = variable_table(spec);
    let globals = [
        ("robot_summary", env.robot_physical_summary.as_str()),
        ("task_summary", env.task_summary.as_str()),
        ("bowl_list", bowl_list.as_str()),
        ("pause_delay_s", pause_delay.as_str()),
        ("variable_table", table.as_str()),
    ];
    let mut parts: Vec<String> = ["environment", "functions", "variables", "user_control"]
        .iter()
        .map(|name| fill(template.block(name), &globals))
        .collect();
    if !history.is_empty() {
        let entries = history
            .entries()
            .map(|e| {
                fill(
                    template.block("history_entry"),
                    &[
                        ("user_command", e.user_command.as_str()),
                        ("generated_code", e.generated_code.as_str()),
                    ],
                )
            })
            .collect::<Vec<_>>()
            .join("\n\n");
        parts.push(format!(
            "{}\n\n{entries}",
            fill(template.block("history"), &globals)
        ));
    }
    let one_line = command.text.split_whitespace().collect::<Vec<_>>().join(" ");
    parts.push(fill(template.block("command"), &[("command", one_line.as_str())]));
    parts.join("\n\n")
}
