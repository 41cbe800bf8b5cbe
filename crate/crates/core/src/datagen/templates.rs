//! Prompt template variations for passage/question corpora.

use crate::error::{Error, Result};

/// (instruction line, passage field label, question field label)
const TEMPLATES: [(&str, &str, &str); 6] = [
    (
        "Given the following passage and question, answer the question:",
        "Passage",
        "Question",
    ),
    (
        "Please read this passage and respond to the query that follows:",
        "Passage",
        "Question",
    ),
    (
        "Based on the text below, please address the following question:",
        "Text",
        "Question",
    ),
    (
        "Consider the following excerpt and respond to the inquiry:",
        "Excerpt",
        "Inquiry",
    ),
    (
        "Review this content and answer the question below:",
        "Content",
        "Question",
    ),
    (
        "Using the information provided, respond to the following:",
        "Information",
        "Query",
    ),
];

pub const PROMPT_TEMPLATE_COUNT: usize = TEMPLATES.len();

/// Instantiate prompt template `template_id` (0 is the default phrasing,
/// 1..=5 are the variations) with a passage and question.
pub fn apply_prompt_variation(
    template_id: usize,
    passage: &str,
    question: &str,
) -> Result<String> {
    let (intro, passage_label, question_label) = TEMPLATES
        .get(template_id)
        .ok_or_else(|| Error::Config(format!("unknown template id {template_id}")))?;
    Ok(format!(
        "{intro}\n{passage_label}: {passage}\n{question_label}: {question}"
    ))
}
