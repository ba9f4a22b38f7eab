use std::fmt::Display;

use serde::Serialize;

/// Error printed as one JSON object on stderr.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip)]
    pub exit_code: u8,
}

impl Failure {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Failure {
            code: code.to_string(),
            message: message.into(),
            parameter: None,
            value: None,
            exit_code: 1,
        }
    }

    pub fn at(mut self, parameter: &str, value: impl Display) -> Self {
        self.parameter = Some(parameter.to_string());
        self.value = Some(value.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }

    pub fn from_usage(e: &clap::Error) -> Self {
        use clap::error::{ContextKind, ContextValue};
        let text = |kind| match e.get(kind) {
            Some(ContextValue::String(s)) => Some(s.clone()),
            Some(ContextValue::Strings(v)) => v.first().cloned(),
            _ => None,
        };
        let parameter = text(ContextKind::InvalidArg)
            .map(|s| s.split([' ', '=']).next().unwrap_or_default().to_string())
            .or_else(|| text(ContextKind::InvalidSubcommand).map(|_| "subcommand".to_string()));
        let value =
            text(ContextKind::InvalidValue).or_else(|| text(ContextKind::InvalidSubcommand));
        let rendered = e.to_string();
        let message = rendered
            .lines()
            .next()
            .unwrap_or_default()
            .trim_start_matches("error: ")
            .to_string();
        Failure {
            code: "usage".to_string(),
            message,
            parameter,
            value,
            exit_code: 2,
        }
    }
}

/// Attaches a parameter and its value to a library error.
pub fn core_at(
    parameter: &str,
    value: impl Display,
) -> impl FnOnce(confmeasures::Error) -> Failure {
    let value = value.to_string();
    let parameter = parameter.to_string();
    move |e| Failure::new(e.code(), e.to_string()).at(&parameter, value)
}

pub fn io_at(parameter: &str, path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Failure {
    let parameter = parameter.to_string();
    let path = path.display().to_string();
    move |e| Failure::new("io", format!("{path}: {e}")).at(&parameter, path.clone())
}
