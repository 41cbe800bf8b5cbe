//! Contrastive equation prompts: solvable equations versus equations
//! referencing an undefined variable.
//!
//! Each prompt defines two variables and poses a final binary equation:
//!
//! ```text
//! n = 53
//! v = 90
//! n / v =
//! ```
//!
//! Answerable prompts use only defined variables in the final equation;
//! unanswerable prompts pair one defined variable with an undefined one.
//! Division results need not be integers; answerability depends only on
//! variable definedness.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::PromptRecord;
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Single-letter variable names; `x` is excluded as operator-confusable.
pub const VARIABLE_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwyz";

pub const EQUATION_OPERATORS: [char; 4] = ['+', '-', '*', '/'];

const VALUE_MIN: u32 = 1;
const VALUE_MAX: u32 = 99;

fn draw_letter(rng: &mut ChaCha8Rng, exclude: &[u8]) -> char {
    let remaining: Vec<u8> = VARIABLE_ALPHABET
        .iter()
        .copied()
        .filter(|c| !exclude.contains(c))
        .collect();
    remaining[rng.random_range(0..remaining.len())] as char
}

fn gen_record(rng: &mut ChaCha8Rng, answerable: bool) -> PromptRecord {
    let var1 = draw_letter(rng, &[]);
    let val1 = rng.random_range(VALUE_MIN..=VALUE_MAX);
    let var2 = draw_letter(rng, &[var1 as u8]);
    let val2 = rng.random_range(VALUE_MIN..=VALUE_MAX);
    let op = EQUATION_OPERATORS[rng.random_range(0..EQUATION_OPERATORS.len())];
    let (lhs, rhs) = if answerable {
        (var1, var2)
    } else {
        let defined = if rng.random_range(0..2u32) == 0 {
            var1
        } else {
            var2
        };
        let undefined = draw_letter(rng, &[var1 as u8, var2 as u8]);
        (defined, undefined)
    };
    PromptRecord {
        prompt: format!("{var1} = {val1}\n{var2} = {val2}\n{lhs} {op} {rhs} ="),
        label: u8::from(answerable),
        dataset: "equation".to_string(),
        template_id: None,
    }
}

/// Generate `n` equation prompts: the first half answerable, the second
/// half unanswerable. Deterministic per seed.
pub fn gen_equations(n: usize, seed: u64) -> Result<Vec<PromptRecord>> {
    if n % 2 != 0 {
        return Err(Error::Config(format!(
            "equation corpus size must be even, got {n}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut records = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        records.push(gen_record(&mut rng, true));
    }
    for _ in 0..n / 2 {
        records.push(gen_record(&mut rng, false));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_balanced_and_deterministic() {
        let a = gen_equations(40, 5).unwrap();
        let b = gen_equations(40, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|r| r.label == 1).count(), 20);
        assert_eq!(a.iter().filter(|r| r.label == 0).count(), 20);
    }

    #[test]
    fn odd_count_is_rejected() {
        assert!(matches!(gen_equations(3, 0), Err(Error::Config(_))));
    }

    #[test]
    fn alphabet_has_no_operator_lookalike() {
        assert!(!VARIABLE_ALPHABET.contains(&b'x'));
        assert_eq!(VARIABLE_ALPHABET.len(), 25);
    }

    #[test]
    fn prompts_have_three_lines() {
        for record in gen_equations(20, 11).unwrap() {
            assert_eq!(record.prompt.lines().count(), 3);
            assert!(record.prompt.ends_with('='));
        }
    }
}
