//! System and user prompt templates, stored byte-exact.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const EXTEND_SYSTEM: &str = "You are a helpful assistant that can extend one sentence of a given input at a time.
You will get a Paragraph and you should write one sentence to extend it.
You should only answer with that generated sentence, NOTHING ELSE!";

pub const SYNONYM_SYSTEM: &str = "You are a helpful assistant in a react application that can find synonyms for a given word.
You will get a word and you should find a synonym for it.
Find at least one synonym, but the more the better.
If the given word doesn't have any synonyms, you should return 'NO SYNONYM'
Your answer will be parsed into an array of words, so make sure to return your answer in this style: 'Synonym1, Synonym2, Synonym3' and so on!
You should only answer with the formated synonyms, NOTHING ELSE!";

pub const CUSTOM_SENTENCE_SYSTEM: &str = "You are an AI tasked with transforming user-provided sentences according to their specific instructions. Please follow the guidelines below for each request:
 1. Input Format:
    - You will find the string '*sentence:*', this is the original sentence provided by the user!
    - You will find the string '*prompt:*', this describes how the user wants the sentence to be modified or altered!
 2. Transformation Instructions:
    - Analyze the provided Sentence and apply the modifications described in the '*prompt*' section to the best of your ability.
    - If the requested transformation cannot be accurately performed, respond with the original sentence in section '*sentence:*' without any modifications.
    - Ensure that your response contains only the transformed sentence or the original sentence if transformation is not feasible. Do not include any additional text or information!
 3. Answer Format:
    - Return only the modified sentence or the original sentence if the modification is not possible. Do not include any extra comments, explanations, or additional content.
 4. Example:
    - User Request: '*sentence:* I will call you tomorrow. *prompt:* Make it sound more polite.'
    - Your Response could be: 'I would be happy to call you tomorrow.'

If you have any difficulty performing the requested transformation, simply return the original sentence in section '*sentence*:' as it is.";

pub const REWRITE_SENTENCE_SYSTEM: &str = "You are a helpful assistant in a react application that should rewrite a given sentence.
You will get a sentence and you should rewrite it.
You should rewrite the sentence to be of this style '{type}'!
You should only answer with the your generated sentence, NOTHING ELSE!";

/// User prompt for extend, synonym and rewrite requests.
pub const USER_PLAIN: &str = "{Sentence}";

pub const USER_CUSTOM: &str = "*sentence*: {sentence}\n*prompt*: {prompt}";

/// All six templates with their golden-file names.
pub const ALL: [(&str, &str); 6] = [
    ("extend_system", EXTEND_SYSTEM),
    ("synonym_system", SYNONYM_SYSTEM),
    ("custom_sentence_system", CUSTOM_SENTENCE_SYSTEM),
    ("rewrite_sentence_system", REWRITE_SENTENCE_SYSTEM),
    ("user_plain", USER_PLAIN),
    ("user_custom", USER_CUSTOM),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Extend,
    Synonym,
    RewriteSentence,
    CustomSentence,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("template {template:?} needs variable {name:?}")]
    MissingVariable { template: TemplateId, name: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GenerationRequest {
    pub request_id: u64,
    pub template: TemplateId,
    /// `paragraph` (extend), `word` (synonym), `sentence` + `type`
    /// (rewrite), `sentence` + `prompt` (custom).
    #[serde(default)]
    pub variables: BTreeMap<String, String>,
    #[serde(default)]
    pub max_sentences: Option<u32>,
}

impl GenerationRequest {
    pub fn new(request_id: u64, template: TemplateId, vars: &[(&str, &str)]) -> Self {
        Self {
            request_id,
            template,
            variables: vars.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            max_sentences: None,
        }
    }

    pub fn extend(request_id: u64, paragraph: &str) -> Self {
        Self::new(request_id, TemplateId::Extend, &[("paragraph", paragraph)])
    }
}

/// Replaces each `{name}` from `vars` in a single pass, so substituted
/// text is never scanned again.
fn substitute(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'scan: while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        for (name, value) in vars {
            let key = format!("{{{name}}}");
            if tail.starts_with(&key) {
                out.push_str(value);
                rest = &tail[key.len()..];
                continue 'scan;
            }
        }
        out.push('{');
        rest = &tail[1..];
    }
    out.push_str(rest);
    out
}

/// Renders `(system, user)` for a request. Values are inserted verbatim.
pub fn render_prompt(req: &GenerationRequest) -> Result<(String, String), PromptError> {
    let get = |name: &'static str| {
        req.variables
            .get(name)
            .map(String::as_str)
            .ok_or(PromptError::MissingVariable { template: req.template, name })
    };
    Ok(match req.template {
        TemplateId::Extend => (EXTEND_SYSTEM.to_string(), substitute(USER_PLAIN, &[("Sentence", get("paragraph")?)])),
        TemplateId::Synonym => (SYNONYM_SYSTEM.to_string(), substitute(USER_PLAIN, &[("Sentence", get("word")?)])),
        TemplateId::RewriteSentence => (
            substitute(REWRITE_SENTENCE_SYSTEM, &[("type", get("type")?)]),
            substitute(USER_PLAIN, &[("Sentence", get("sentence")?)]),
        ),
        TemplateId::CustomSentence => (
            CUSTOM_SENTENCE_SYSTEM.to_string(),
            substitute(USER_CUSTOM, &[("sentence", get("sentence")?), ("prompt", get("prompt")?)]),
        ),
    })
}
