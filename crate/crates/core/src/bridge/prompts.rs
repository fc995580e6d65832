use std::collections::BTreeMap;

use super::BridgeError;

const PROMPTS_JSON: &str = include_str!("../../assets/prompts.json");

pub const PROMPT_KEYS: [&str; 10] = [
    "baseline",
    "interrogate",
    "clarify",
    "hedge",
    "cot",
    "clarify_flex",
    "classify_underspec",
    "classify_tau",
    "extract_recs_and_questions",
    "map_questions_to_thetas",
];

/// Named system messages. `baseline` is empty: the model's default behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptLibrary {
    prompts: BTreeMap<String, String>,
}

impl PromptLibrary {
    pub fn builtin() -> Self {
        PromptLibrary::from_json(PROMPTS_JSON).expect("shipped prompt library is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, BridgeError> {
        let prompts: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| BridgeError::Config(format!("prompt library: {e}")))?;
        if let Some(missing) = PROMPT_KEYS.iter().find(|k| !prompts.contains_key(**k)) {
            return Err(BridgeError::Config(format!("prompt library lacks {missing:?}")));
        }
        if let Some(extra) = prompts.keys().find(|k| !PROMPT_KEYS.contains(&k.as_str())) {
            return Err(BridgeError::Config(format!("unexpected prompt {extra:?}")));
        }
        Ok(PromptLibrary { prompts })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.prompts.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.prompts.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Substitutes `{{input.<field>}}` with `value`.
    pub fn render(&self, key: &str, field: &str, value: &str) -> Result<String, BridgeError> {
        let template = self
            .get(key)
            .ok_or_else(|| BridgeError::Config(format!("no prompt {key:?}")))?;
        let placeholder = format!("{{{{input.{field}}}}}");
        if !template.contains(&placeholder) {
            return Err(BridgeError::Config(format!("prompt {key:?} has no {placeholder} slot")));
        }
        Ok(template.replace(&placeholder, value))
    }
}
