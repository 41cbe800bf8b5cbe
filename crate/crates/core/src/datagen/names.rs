//! Celebrity-recognition prompts: real actor names versus randomly
//! combined first/last names that match no real actor.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use super::PromptRecord;
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Question appended to every celebrity prompt.
pub const CELEBRITY_QUESTION: &str = "Do you know what their age is?";

fn celebrity_prompt(name: &str) -> String {
    format!(
        "Yesterday, I saw an article about {name}. They really are a great actor.\n{CELEBRITY_QUESTION}"
    )
}

/// Read a name list: UTF-8, one name per line, blank lines skipped.
pub fn read_name_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Sample `n` distinct "First Last" combinations, none of which appear in
/// `exclude`. Fails if the exclusion leaves fewer than `n` combinations.
pub fn gen_fake_names(
    first_names: &[String],
    last_names: &[String],
    exclude: &[String],
    n: usize,
    seed: u64,
) -> Result<Vec<String>> {
    if first_names.is_empty() || last_names.is_empty() {
        return Err(Error::Config("name lists must be non-empty".to_string()));
    }
    let mut allowed = Vec::with_capacity(first_names.len() * last_names.len());
    for first in first_names {
        for last in last_names {
            let name = format!("{first} {last}");
            if !exclude.contains(&name) {
                allowed.push(name);
            }
        }
    }
    if allowed.len() < n {
        return Err(Error::Capacity(format!(
            "{} allowed combinations cannot supply {n} fake names",
            allowed.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    allowed.shuffle(&mut rng);
    allowed.truncate(n);
    Ok(allowed)
}

/// Generate `n` celebrity prompts, half from real names (label 1) and
/// half from fake names (label 0). Names are sampled without replacement.
pub fn gen_celebrity(
    real_names: &[String],
    fake_names: &[String],
    n: usize,
    seed: u64,
) -> Result<Vec<PromptRecord>> {
    if n % 2 != 0 {
        return Err(Error::Config(format!(
            "celebrity corpus size must be even, got {n}"
        )));
    }
    let half = n / 2;
    if real_names.len() < half || fake_names.len() < half {
        return Err(Error::Capacity(format!(
            "need {half} real and {half} fake names, have {} and {}",
            real_names.len(),
            fake_names.len()
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut real = real_names.to_vec();
    real.shuffle(&mut rng);
    let mut fake = fake_names.to_vec();
    fake.shuffle(&mut rng);

    let mut records = Vec::with_capacity(n);
    for name in &real[..half] {
        records.push(PromptRecord {
            prompt: celebrity_prompt(name),
            label: 1,
            dataset: "celebrity".to_string(),
            template_id: None,
        });
    }
    for name in &fake[..half] {
        records.push(PromptRecord {
            prompt: celebrity_prompt(name),
            label: 0,
            dataset: "celebrity".to_string(),
            template_id: None,
        });
    }
    Ok(records)
}
