//! Synthetic contrastive corpora and planted-truth activation worlds.
//!
//! Prompt corpora are emitted as JSONL, one record per line, for
//! consumption by an external activation exporter. Every generator is
//! exactly balanced and deterministic per seed.

mod equations;
mod names;
mod planted;
mod templates;

pub use equations::{gen_equations, EQUATION_OPERATORS, VARIABLE_ALPHABET};
pub use names::{gen_celebrity, gen_fake_names, read_name_list, CELEBRITY_QUESTION};
pub use planted::{gen_planted_world, PlantedWorld, PlantedWorldConfig};
pub use templates::{apply_prompt_variation, PROMPT_TEMPLATE_COUNT};

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One generated prompt with its answerability label (1 = answerable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub prompt: String,
    pub label: u8,
    pub dataset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<u32>,
}

impl PromptRecord {
    pub fn validate(&self) -> Result<()> {
        if self.prompt.is_empty() {
            return Err(Error::Validation("empty prompt".to_string()));
        }
        if self.label > 1 {
            return Err(Error::Validation(format!(
                "label {} is not 0 or 1",
                self.label
            )));
        }
        Ok(())
    }
}

/// Write prompt records as JSONL.
pub fn write_prompts_jsonl(records: &[PromptRecord], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for record in records {
        record.validate()?;
        let line = serde_json::to_string(record).expect("prompt serialization cannot fail");
        out.write_all(line.as_bytes())
            .and_then(|()| out.write_all(b"\n"))
            .map_err(|e| Error::storage(path, e))?;
    }
    fs::write(path, out).map_err(|e| Error::storage(path, e))
}

/// Read prompt records written by [`write_prompts_jsonl`].
pub fn read_prompts_jsonl(path: &Path) -> Result<Vec<PromptRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::storage(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::storage(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PromptRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("bad JSONL record on line {}: {e}", i + 1)))?;
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let dir = std::env::temp_dir().join(format!("jsonl-rt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.jsonl");
        let records = vec![
            PromptRecord {
                prompt: "a = 1\nb = 2\na + b =".to_string(),
                label: 1,
                dataset: "equation".to_string(),
                template_id: None,
            },
            PromptRecord {
                prompt: "who?".to_string(),
                label: 0,
                dataset: "celebrity".to_string(),
                template_id: Some(3),
            },
        ];
        write_prompts_jsonl(&records, &path).unwrap();
        assert_eq!(read_prompts_jsonl(&path).unwrap(), records);
        std::fs::remove_dir_all(&dir).ok();
    }
}
