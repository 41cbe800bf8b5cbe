//! Planted-truth activation worlds.
//!
//! A world consists of `n_domains` balanced datasets sharing one general
//! label direction `g` plus one direction `d_i` per domain, all
//! orthonormal. An answerable example in domain `i` has mean
//! `general_strength * g + domain_strength * d_i`; unanswerable examples
//! are pure noise. Gaussian noise with the configured sigma is added
//! everywhere. The known directions make the worlds usable as ground-truth
//! oracles for probe and transfer behavior.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::MatrixF32;
use crate::rng::{derive_seed, seeded_rng};
use crate::store::{ActivationDataset, DatasetMeta};

#[derive(Debug, Clone)]
pub struct PlantedWorldConfig {
    pub d_model: usize,
    pub n_domains: usize,
    /// Examples per domain (split evenly between the labels).
    pub n_per_domain: usize,
    pub general_strength: f64,
    pub domain_strength: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Generated datasets plus the planted ground truth.
#[derive(Debug, Clone)]
pub struct PlantedWorld {
    /// One dataset per domain, named `domain_0`, `domain_1`, ...
    pub domains: Vec<ActivationDataset>,
    pub general_direction: Vec<f64>,
    pub domain_directions: Vec<Vec<f64>>,
}

impl PlantedWorldConfig {
    fn validate(&self) -> Result<()> {
        if self.n_domains == 0 {
            return Err(Error::Config("need at least one domain".to_string()));
        }
        if self.d_model < self.n_domains + 1 {
            return Err(Error::Config(format!(
                "d_model {} too small for {} orthonormal directions",
                self.d_model,
                self.n_domains + 1
            )));
        }
        if self.n_per_domain == 0 || self.n_per_domain % 2 != 0 {
            return Err(Error::Config(format!(
                "n_per_domain must be positive and even, got {}",
                self.n_per_domain
            )));
        }
        if !(self.general_strength >= 0.0) || !(self.domain_strength >= 0.0) {
            return Err(Error::Config("strengths must be non-negative".to_string()));
        }
        if !(self.noise_sigma > 0.0) {
            return Err(Error::Config("noise_sigma must be positive".to_string()));
        }
        Ok(())
    }
}

/// Random orthonormal directions via Gram-Schmidt on Gaussian draws. Two
/// orthogonalization passes keep the pairwise dot products near machine
/// precision.
fn orthonormal_directions(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    let mut directions: Vec<Vec<f64>> = Vec::with_capacity(count);
    while directions.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for _ in 0..2 {
            for u in &directions {
                let proj: f64 = v.iter().zip(u).map(|(&a, &b)| a * b).sum();
                for (vi, &ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for vi in &mut v {
            *vi /= norm;
        }
        directions.push(v);
    }
    directions
}

/// Generate a planted world. Deterministic: directions and each domain's
/// noise derive from independently labeled sub-seeds of the config seed.
pub fn gen_planted_world(cfg: &PlantedWorldConfig) -> Result<PlantedWorld> {
    cfg.validate()?;
    let mut directions = orthonormal_directions(
        cfg.n_domains + 1,
        cfg.d_model,
        derive_seed(cfg.seed, "planted-directions"),
    );
    let general = directions.remove(0);

    let half = cfg.n_per_domain / 2;
    let mut domains = Vec::with_capacity(cfg.n_domains);
    for (i, domain_dir) in directions.iter().enumerate() {
        let mut rng = seeded_rng(derive_seed(cfg.seed, &format!("planted-domain-{i}")));
        let mut signal = vec![0.0f64; cfg.d_model];
        for j in 0..cfg.d_model {
            signal[j] = cfg.general_strength * general[j] + cfg.domain_strength * domain_dir[j];
        }
        let mut data = Vec::with_capacity(cfg.n_per_domain * cfg.d_model);
        let mut labels = Vec::with_capacity(cfg.n_per_domain);
        for k in 0..cfg.n_per_domain {
            let label = u8::from(k < half);
            for j in 0..cfg.d_model {
                let noise: f64 = rng.sample(StandardNormal);
                let mean = if label == 1 { signal[j] } else { 0.0 };
                data.push((mean + cfg.noise_sigma * noise) as f32);
            }
            labels.push(label);
        }
        domains.push(ActivationDataset::new(
            MatrixF32::from_vec(cfg.n_per_domain, cfg.d_model, data)?,
            labels,
            DatasetMeta::synthetic(&format!("domain_{i}")),
        )?);
    }

    Ok(PlantedWorld {
        domains,
        general_direction: general,
        domain_directions: directions,
    })
}
