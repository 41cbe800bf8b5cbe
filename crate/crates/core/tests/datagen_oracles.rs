//! Generator oracles: an independent equation-label parser, celebrity
//! membership checks, and planted-world construction checks.

use std::collections::HashSet;
use std::path::PathBuf;

use rand::Rng;
use saeprobe::datagen::{
    gen_celebrity, gen_equations, gen_fake_names, gen_planted_world, read_name_list,
    PlantedWorldConfig, VARIABLE_ALPHABET,
};
use saeprobe::error::Error;
use saeprobe::eval::evaluate_probe;
use saeprobe::probes::fit_residual_probe;
use saeprobe::probes::SweepConfig;
use saeprobe::rng::seeded_rng;
use saeprobe::store::{balance_and_split, SplitSpec};

/// Seeds minted by `mint_exemplar_seeds` (run with --ignored) so the
/// canonical example prompts are producible verbatim.
const SEED_EQUATION_ANSWERABLE: u64 = 4156263;
const SEED_EQUATION_UNANSWERABLE: u64 = 1432372148;
const SEED_FAKE_NAMES: u64 = 35;
const SEED_CELEBRITY: u64 = 87;

const EXEMPLAR_ANSWERABLE: &str = "n = 53\nv = 90\nn / v =";
const EXEMPLAR_UNANSWERABLE: &str = "n = 17\nu = 38\nn * t =";

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/names")
}

/// Independent label oracle: parse the prompt and declare it answerable
/// iff every variable in the final equation was assigned a value.
fn parse_equation_label(prompt: &str) -> u8 {
    let lines: Vec<&str> = prompt.lines().collect();
    assert!(lines.len() >= 2, "prompt needs assignments and a final line");
    let mut defined = HashSet::new();
    for line in &lines[..lines.len() - 1] {
        let parts: Vec<&str> = line.split(" = ").collect();
        assert_eq!(parts.len(), 2, "assignment line {line:?}");
        assert_eq!(parts[0].len(), 1);
        let value: u32 = parts[1].parse().expect("integer value");
        assert!((1..=99).contains(&value));
        defined.insert(parts[0].chars().next().unwrap());
    }
    let tokens: Vec<&str> = lines.last().unwrap().split(' ').collect();
    assert_eq!(tokens.len(), 4, "final line {:?}", lines.last().unwrap());
    assert!(["+", "-", "*", "/"].contains(&tokens[1]));
    assert_eq!(tokens[3], "=");
    let lhs = tokens[0].chars().next().unwrap();
    let rhs = tokens[2].chars().next().unwrap();
    u8::from(defined.contains(&lhs) && defined.contains(&rhs))
}

#[test]
fn equation_labels_agree_with_parser_oracle() {
    let records = gen_equations(2000, 13).unwrap();
    assert_eq!(records.len(), 2000);
    let answerable = records.iter().filter(|r| r.label == 1).count();
    assert_eq!(answerable, 1000);
    for record in &records {
        assert_eq!(
            parse_equation_label(&record.prompt),
            record.label,
            "oracle disagrees on {:?}",
            record.prompt
        );
    }
}

#[test]
fn equation_exemplars_are_producible_verbatim() {
    let records = gen_equations(2, SEED_EQUATION_ANSWERABLE).unwrap();
    assert_eq!(records[0].prompt, EXEMPLAR_ANSWERABLE);
    assert_eq!(records[0].label, 1);

    let records = gen_equations(2, SEED_EQUATION_UNANSWERABLE).unwrap();
    assert_eq!(records[1].prompt, EXEMPLAR_UNANSWERABLE);
    assert_eq!(records[1].label, 0);
}

#[test]
fn celebrity_corpus_from_fixture_lists() {
    let actors = read_name_list(&fixtures_dir().join("actors.txt")).unwrap();
    let firsts = read_name_list(&fixtures_dir().join("first_names.txt")).unwrap();
    let lasts = read_name_list(&fixtures_dir().join("last_names.txt")).unwrap();
    assert!(actors.len() >= 20 && firsts.len() >= 20 && lasts.len() >= 20);

    let fake = gen_fake_names(&firsts, &lasts, &actors, 25, SEED_FAKE_NAMES).unwrap();
    for name in &fake {
        assert!(!actors.contains(name));
    }
    // 50 per class from 25 names would exceed capacity; use the full lists.
    let records = gen_celebrity(&actors, &fake, 50, 3).unwrap();
    assert_eq!(records.len(), 50);
    assert_eq!(records.iter().filter(|r| r.label == 1).count(), 25);
    for record in &records {
        let named_real = actors.iter().any(|n| record.prompt.contains(n.as_str()));
        assert_eq!(record.label == 1, named_real);
        assert!(record.prompt.ends_with("Do you know what their age is?"));
    }
}

#[test]
fn celebrity_exemplars_are_producible_verbatim() {
    let actors = read_name_list(&fixtures_dir().join("actors.txt")).unwrap();
    let firsts = read_name_list(&fixtures_dir().join("first_names.txt")).unwrap();
    let lasts = read_name_list(&fixtures_dir().join("last_names.txt")).unwrap();
    let fake = gen_fake_names(&firsts, &lasts, &actors, 25, SEED_FAKE_NAMES).unwrap();
    assert!(fake.contains(&"Tania Scott".to_string()));

    let records = gen_celebrity(&actors, &fake, 2, SEED_CELEBRITY).unwrap();
    assert_eq!(
        records[0].prompt,
        "Yesterday, I saw an article about Gerard Butler. They really are a great actor.\nDo you know what their age is?"
    );
    assert_eq!(records[0].label, 1);
    assert_eq!(
        records[1].prompt,
        "Yesterday, I saw an article about Tania Scott. They really are a great actor.\nDo you know what their age is?"
    );
    assert_eq!(records[1].label, 0);
}

fn probe_on_domain(
    world: &saeprobe::datagen::PlantedWorld,
    domain: usize,
    train_count: usize,
) -> (saeprobe::Probe, saeprobe::ActivationDataset) {
    let (train, test) = balance_and_split(
        &world.domains[domain],
        &SplitSpec {
            train_count,
            seed: 17,
            balanced: true,
        },
    )
    .unwrap();
    let fit = fit_residual_probe(train.data(), train.labels(), &SweepConfig::default()).unwrap();
    (fit.probe, test)
}

#[test]
fn general_only_world_transfers_everywhere() {
    let world = gen_planted_world(&PlantedWorldConfig {
        d_model: 16,
        n_domains: 3,
        n_per_domain: 400,
        general_strength: 2.0,
        domain_strength: 0.0,
        noise_sigma: 0.5,
        seed: 5,
    })
    .unwrap();
    let (probe, test) = probe_on_domain(&world, 0, 200);
    assert!(evaluate_probe(&probe, &test).unwrap() > 0.95);
    for domain in 1..3 {
        let acc = evaluate_probe(&probe, &world.domains[domain]).unwrap();
        assert!(acc > 0.95, "domain {domain} accuracy {acc}");
    }
}

#[test]
fn domain_only_world_does_not_transfer()  {
    let world = gen_planted_world(&PlantedWorldConfig {
        d_model: 16,
        n_domains: 2,
        n_per_domain: 2000,
        general_strength: 0.0,
        domain_strength: 2.0,
        noise_sigma: 1.0,
        seed: 8,
    })
    .unwrap();
    let (probe, test) = probe_on_domain(&world, 0, 1000);
    assert!(evaluate_probe(&probe, &test).unwrap() > 0.75);
    let cross = evaluate_probe(&probe, &world.domains[1]).unwrap();
    assert!(
        (cross - 0.5).abs() <= 0.05,
        "cross-domain accuracy {cross} not near chance"
    );
}

#[test]
fn noiseless_world_is_perfectly_separable() {
    let world = gen_planted_world(&PlantedWorldConfig {
        d_model: 12,
        n_domains: 2,
        n_per_domain: 200,
        general_strength: 2.0,
        domain_strength: 2.0,
        noise_sigma: 1e-6,
        seed: 3,
    })
    .unwrap();
    let (probe, test) = probe_on_domain(&world, 0, 100);
    assert_eq!(evaluate_probe(&probe, &test).unwrap(), 1.0);
}

#[test]
fn gen_equations_rejects_odd_sizes_via_cli_contract() {
    assert!(matches!(gen_equations(999, 0), Err(Error::Config(_))));
}

/// One-time helper that fixes the exemplar seeds above. Replays the
/// generator's draw sequence without string formatting so a billion seeds
/// are searchable, then verifies through the real generator.
#[test]
#[ignore = "seed-minting utility; run with --ignored to re-derive the fixture seeds"]
fn mint_exemplar_seeds() {
    use rayon::prelude::*;

    let position = |c: u8| VARIABLE_ALPHABET.iter().position(|&a| a == c).unwrap();
    let pos_after_removing = |c: u8, removed: &[u8]| {
        let base = position(c);
        base - removed
            .iter()
            .filter(|&&r| position(r) < base)
            .count()
    };

    // Record draws: var1 (0..25), val1 (1..=99 u32), var2 (0..24),
    // val2 (1..=99 u32), op (0..4); unanswerable adds defined-pick
    // (0..2 u32) and undefined letter (0..23).
    let n_ = position(b'n');
    let answerable_target = (n_, 53u32, pos_after_removing(b'v', &[b'n']), 90u32, 3usize);
    let find = |pred: &(dyn Fn(u64) -> bool + Sync)| -> u64 {
        let mut base = 0u64;
        loop {
            let found = (base..base + (1 << 24))
                .into_par_iter()
                .find_first(|&s| pred(s));
            if let Some(s) = found {
                return s;
            }
            base += 1 << 24;
        }
    };

    let answerable_pred = |seed: u64| {
        let mut rng = seeded_rng(seed);
        rng.random_range(0..VARIABLE_ALPHABET.len()) == answerable_target.0
            && rng.random_range(1..=99u32) == answerable_target.1
            && rng.random_range(0..VARIABLE_ALPHABET.len() - 1) == answerable_target.2
            && rng.random_range(1..=99u32) == answerable_target.3
            && rng.random_range(0..4usize) == answerable_target.4
    };
    let seed_a = find(&answerable_pred);
    println!("SEED_EQUATION_ANSWERABLE = {seed_a}");
    let records = gen_equations(2, seed_a).unwrap();
    assert_eq!(records[0].prompt, EXEMPLAR_ANSWERABLE);

    let unanswerable_target = (
        n_,
        17u32,
        pos_after_removing(b'u', &[b'n']),
        38u32,
        2usize,
        0u32,
        pos_after_removing(b't', &[b'n', b'u']),
    );
    let unanswerable_pred = |seed: u64| {
        let mut rng = seeded_rng(seed);
        // Burn the first (answerable) record's five draws.
        rng.random_range(0..VARIABLE_ALPHABET.len());
        rng.random_range(1..=99u32);
        rng.random_range(0..VARIABLE_ALPHABET.len() - 1);
        rng.random_range(1..=99u32);
        rng.random_range(0..4usize);
        rng.random_range(0..VARIABLE_ALPHABET.len()) == unanswerable_target.0
            && rng.random_range(1..=99u32) == unanswerable_target.1
            && rng.random_range(0..VARIABLE_ALPHABET.len() - 1) == unanswerable_target.2
            && rng.random_range(1..=99u32) == unanswerable_target.3
            && rng.random_range(0..4usize) == unanswerable_target.4
            && rng.random_range(0..2u32) == unanswerable_target.5
            && rng.random_range(0..VARIABLE_ALPHABET.len() - 2) == unanswerable_target.6
    };
    let seed_u = find(&unanswerable_pred);
    println!("SEED_EQUATION_UNANSWERABLE = {seed_u}");
    let records = gen_equations(2, seed_u).unwrap();
    assert_eq!(records[1].prompt, EXEMPLAR_UNANSWERABLE);

    let actors = read_name_list(&fixtures_dir().join("actors.txt")).unwrap();
    let firsts = read_name_list(&fixtures_dir().join("first_names.txt")).unwrap();
    let lasts = read_name_list(&fixtures_dir().join("last_names.txt")).unwrap();
    let fake_seed = (0u64..)
        .find(|&s| {
            gen_fake_names(&firsts, &lasts, &actors, 25, s)
                .unwrap()
                .contains(&"Tania Scott".to_string())
        })
        .unwrap();
    println!("SEED_FAKE_NAMES = {fake_seed}");
    let fake = gen_fake_names(&firsts, &lasts, &actors, 25, fake_seed).unwrap();
    let celeb_seed = (0u64..)
        .find(|&s| {
            let records = gen_celebrity(&actors, &fake, 2, s).unwrap();
            records[0].prompt.contains("Gerard Butler")
                && records[1].prompt.contains("Tania Scott")
        })
        .unwrap();
    println!("SEED_CELEBRITY = {celeb_seed}");
}
