//! Optional client for external chat models: the prompt library, a
//! chat-completions transport with retry, strict parsers for the helper-task
//! outputs, and LLM-backed classifiers. Nothing else in the crate depends on
//! this module at runtime.

mod classify;
mod client;
mod extract;
mod prompts;

use thiserror::Error;

pub use classify::{llm_classify, ClassifyTask, LlmLabel};
pub use client::{ChatClient, ChatExchange, ChatMessage, ChatOutcome, Endpoint, RetryPolicy, Role};
pub use extract::{extract_recs_and_questions, map_questions, parse_extraction, parse_string_list, ExtractionResult};
pub use prompts::{PromptLibrary, PROMPT_KEYS};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("endpoint not configured: {0}")]
    Config(String),

    #[error("network failure: {0}")]
    Network(String),

    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),

    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },

    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },

    #[error("unparsable helper output ({message}): {text:?}")]
    Parse { message: String, text: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("label {label:?} is not one of {allowed:?}")]
    InvalidLabel { label: String, allowed: Vec<String> },
}

impl BridgeError {
    pub fn is_transient(&self) -> bool {
        match self {
            BridgeError::Network(_) => true,
            BridgeError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}
