use serde::{Deserialize, Serialize};

use super::{BridgeError, ChatClient, ChatMessage, PromptLibrary};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionResult {
    pub recs: Vec<String>,
    pub questions: Vec<String>,
}

fn parse_err(message: impl Into<String>, text: &str) -> BridgeError {
    BridgeError::Parse {
        message: message.into(),
        text: text.to_owned(),
    }
}

/// Strict JSON parse of `{"recs": [...], "questions": [...]}`. Anything
/// around the object, missing or extra keys, and empty strings are rejected.
pub fn parse_extraction(text: &str) -> Result<ExtractionResult, BridgeError> {
    let parsed: ExtractionResult = serde_json::from_str(text.trim()).map_err(|e| parse_err(e.to_string(), text))?;
    if parsed.recs.iter().chain(&parsed.questions).any(|s| s.trim().is_empty()) {
        return Err(parse_err("empty string entry", text));
    }
    Ok(parsed)
}

/// Parses a list of strings written either as JSON or as a Python literal
/// (single or double quotes; bare `None` reads as "None").
pub fn parse_string_list(text: &str) -> Result<Vec<String>, BridgeError> {
    let err = |m: &str| parse_err(m, text);
    let mut chars = text.trim().chars().peekable();
    if chars.next() != Some('[') {
        return Err(err("expected '['"));
    }
    let mut out = Vec::new();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.peek().copied() {
            Some(']') if out.is_empty() => {
                chars.next();
                break;
            }
            Some(q @ ('\'' | '"')) => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(err("unterminated string")),
                        Some('\\') => match chars.next() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(c) => s.push(c),
                            None => return Err(err("dangling escape")),
                        },
                        Some(c) if c == q => break,
                        Some(c) => s.push(c),
                    }
                }
                out.push(s);
            }
            Some('N') => {
                let word: String = chars.by_ref().take(4).collect();
                if word != "None" {
                    return Err(err("expected a string"));
                }
                out.push("None".into());
            }
            _ => return Err(err("expected a string")),
        }
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.next() {
            Some(',') => continue,
            Some(']') => break,
            _ => return Err(err("expected ',' or ']'")),
        }
    }
    if chars.any(|c| !c.is_whitespace()) {
        return Err(err("trailing text after list"));
    }
    Ok(out)
}

/// Asks the helper model to pull recommendation titles and questions out of
/// a chatbot response.
pub fn extract_recs_and_questions(
    client: &ChatClient,
    prompts: &PromptLibrary,
    response: &str,
) -> Result<ExtractionResult, BridgeError> {
    let list = serde_json::to_string(&[response]).expect("strings serialize");
    let prompt = prompts.render("extract_recs_and_questions", "response", &list)?;
    let exchange = client.chat("", &[ChatMessage::user(prompt)])?;
    parse_extraction(&exchange.response)
}

/// Maps each question to one of `categories`, or to `None` when no single
/// attribute answers it.
pub fn map_questions(
    client: &ChatClient,
    prompts: &PromptLibrary,
    questions: &[String],
    categories: &[String],
) -> Result<Vec<Option<String>>, BridgeError> {
    if questions.is_empty() {
        return Err(BridgeError::Protocol("no questions to map".into()));
    }
    let list = serde_json::to_string(&[questions]).expect("strings serialize");
    let prompt = prompts.render("map_questions_to_thetas", "questions", &list)?;
    let exchange = client.chat("", &[ChatMessage::user(prompt)])?;
    let mapped = parse_string_list(&exchange.response)?;
    if mapped.len() != questions.len() {
        return Err(BridgeError::Protocol(format!(
            "{} questions but {} mappings",
            questions.len(),
            mapped.len()
        )));
    }
    mapped
        .into_iter()
        .map(|m| {
            let m = m.trim();
            if m.eq_ignore_ascii_case("none") {
                return Ok(None);
            }
            categories
                .iter()
                .find(|c| c.eq_ignore_ascii_case(m))
                .cloned()
                .map(Some)
                .ok_or_else(|| BridgeError::Protocol(format!("mapping {m:?} is not an attribute")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extraction_examples() {
        let r = parse_extraction(r#"{"recs": ["Alien"], "questions": []}"#).unwrap();
        assert_eq!(r.recs, vec!["Alien"]);
        assert!(r.questions.is_empty());
        assert_eq!(parse_extraction(r#"{"recs": [], "questions": []}"#).unwrap(), ExtractionResult::default());
        for bad in [
            r#"{"recs": "Alien", "questions": []}"#,
            r#"{"recs": ["Alien"]}"#,
            r#"{"recs": [], "questions": [], "notes": 1}"#,
            r#"{"recs": [""], "questions": []}"#,
            r#"{"recs": [], "questions": []} Hope this helps!"#,
            r#"Sure! {"recs": [], "questions": []}"#,
            "",
        ] {
            match parse_extraction(bad) {
                Err(BridgeError::Parse { text, .. }) => assert_eq!(text, bad),
                other => panic!("{bad:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn string_lists() {
        assert_eq!(parse_string_list("['genre', 'release date', 'None']").unwrap(), ["genre", "release date", "None"]);
        assert_eq!(parse_string_list(r#"["genre"]"#).unwrap(), ["genre"]);
        assert_eq!(parse_string_list("[None, 'runtime']").unwrap(), ["None", "runtime"]);
        assert_eq!(parse_string_list(" [ ] ").unwrap(), Vec::<String>::new());
        assert_eq!(parse_string_list(r"['it\'s']").unwrap(), ["it's"]);
        for bad in ["genre", "['genre'", "['genre',]", "['a'] extra", "[1]", "[Nonesuch]"] {
            assert!(parse_string_list(bad).is_err(), "{bad}");
        }
    }
}
