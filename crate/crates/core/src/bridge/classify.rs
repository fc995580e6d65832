use crate::corpus::UnderspecLabel;
use crate::strategies::ResponseStrategy;

use super::{BridgeError, ChatClient, ChatMessage, PromptLibrary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyTask {
    Underspec,
    Tau,
}

/// A label from either task's closed set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlmLabel {
    Underspec(UnderspecLabel),
    Tau(ResponseStrategy),
}

impl ClassifyTask {
    fn prompt_key(self) -> (&'static str, &'static str) {
        match self {
            ClassifyTask::Underspec => ("classify_underspec", "question"),
            ClassifyTask::Tau => ("classify_tau", "pair"),
        }
    }

    fn allowed(self) -> Vec<String> {
        match self {
            ClassifyTask::Underspec => UnderspecLabel::ALL.iter().map(|l| l.as_str().to_owned()).collect(),
            ClassifyTask::Tau => {
                let mut v: Vec<String> = ResponseStrategy::ALL.iter().map(|t| t.as_str().to_owned()).collect();
                v.push("hedging".into());
                v
            }
        }
    }

    /// Reads a model answer, tolerating surrounding whitespace and one layer
    /// of quotes.
    pub fn parse_label(self, raw: &str) -> Result<LlmLabel, BridgeError> {
        let t = raw.trim();
        let t = t
            .strip_prefix(['\'', '"'])
            .and_then(|s| s.strip_suffix(['\'', '"']))
            .unwrap_or(t)
            .trim()
            .to_ascii_lowercase();
        let invalid = || BridgeError::InvalidLabel {
            label: raw.to_owned(),
            allowed: self.allowed(),
        };
        match self {
            ClassifyTask::Underspec => t.parse().map(LlmLabel::Underspec).map_err(|_| invalid()),
            ClassifyTask::Tau if t == "direct" => Err(invalid()),
            ClassifyTask::Tau => t.parse().map(LlmLabel::Tau).map_err(|_| invalid()),
        }
    }
}

/// One helper call per input. An out-of-vocabulary answer is retried once;
/// a second bad answer is an error. For the tau task each input is the
/// `(query, response)` pair serialized as a two-element list.
pub fn llm_classify(
    client: &ChatClient,
    prompts: &PromptLibrary,
    task: ClassifyTask,
    inputs: &[String],
) -> Result<Vec<LlmLabel>, BridgeError> {
    let (key, field) = task.prompt_key();
    let requests = inputs
        .iter()
        .map(|input| {
            let list = serde_json::to_string(&[input]).expect("strings serialize");
            let prompt = prompts.render(key, field, &list)?;
            Ok((String::new(), vec![ChatMessage::user(prompt)]))
        })
        .collect::<Result<Vec<_>, BridgeError>>()?;

    let first = client.chat_batch(&requests);
    first
        .into_iter()
        .zip(&requests)
        .map(|(res, (system, history))| {
            let answer = res?.response;
            match task.parse_label(&answer) {
                Ok(l) => Ok(l),
                Err(_) => {
                    log::warn!("out-of-vocabulary label {answer:?}; retrying once");
                    task.parse_label(&client.chat(system, history)?.response)
                }
            }
        })
        .collect()
}
