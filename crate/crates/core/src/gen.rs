//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;

/// How `B` is derived from `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shuffle {
    /// Uniform random permutation of `A`'s letters.
    #[default]
    Uniform,
    /// Cut `A` into runs of two to five letters and reorder the runs, so
    /// common substrings survive.
    Segments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub k: usize,
    pub alphabet_size: usize,
    pub seed: u64,
    /// Probability, per step, of copying a short stretch of letters already
    /// placed in `A` instead of drawing a fresh letter.
    pub duplication_bias: f64,
    #[serde(default)]
    pub shuffle: Shuffle,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n: 12,
            k: 2,
            alphabet_size: 12,
            seed: 0,
            duplication_bias: 0.9,
            shuffle: Shuffle::Uniform,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("alphabet of {alphabet} letters with bound {k} cannot fill length {n}")]
    Infeasible { n: usize, k: usize, alphabet: usize },
    #[error("duplication bias {0} is not in [0, 1]")]
    Bias(f64),
}

fn letter_name(x: usize, alphabet: usize) -> String {
    if alphabet <= 26 {
        char::from(b'a' + x as u8).to_string()
    } else {
        format!("x{x}")
    }
}

pub fn gen_random_instance(cfg: &GeneratorConfig) -> Result<Instance, GenError> {
    if cfg.alphabet_size.saturating_mul(cfg.k) < cfg.n {
        return Err(GenError::Infeasible {
            n: cfg.n,
            k: cfg.k,
            alphabet: cfg.alphabet_size,
        });
    }
    if !(0.0..=1.0).contains(&cfg.duplication_bias) {
        return Err(GenError::Bias(cfg.duplication_bias));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = vec![0usize; cfg.alphabet_size];
    let mut fresh = 0;
    let mut a: Vec<usize> = Vec::with_capacity(cfg.n);
    while a.len() < cfg.n {
        // Reuse copies a short earlier stretch of `A`, as far as the bound
        // allows; repeated stretches are what produce squares.
        if !a.is_empty() && rng.gen_bool(cfg.duplication_bias) {
            let from = rng.gen_range(0..a.len());
            let len = rng.gen_range(2..=4).min(cfg.n - a.len());
            let before = a.len();
            for s in from..(from + len).min(before) {
                if counts[a[s]] == cfg.k {
                    break;
                }
                counts[a[s]] += 1;
                a.push(a[s]);
            }
            if a.len() > before {
                continue;
            }
        }
        let x = if fresh < cfg.alphabet_size {
            fresh += 1;
            fresh - 1
        } else {
            let reusable: Vec<usize> = (0..fresh).filter(|&x| counts[x] < cfg.k).collect();
            *reusable
                .choose(&mut rng)
                .expect("feasibility leaves a free letter")
        };
        counts[x] += 1;
        a.push(x);
    }

    let b = match cfg.shuffle {
        Shuffle::Uniform => {
            let mut b = a.clone();
            b.shuffle(&mut rng);
            b
        }
        Shuffle::Segments => {
            let mut runs: Vec<&[usize]> = Vec::new();
            let mut rest = &a[..];
            while !rest.is_empty() {
                let len = match rest.len() {
                    short @ 0..=2 => short,
                    long => rng.gen_range(2..=long.min(5)),
                };
                let (head, tail) = rest.split_at(len);
                runs.push(head);
                rest = tail;
            }
            runs.shuffle(&mut rng);
            runs.concat()
        }
    };

    let name = |s: &[usize]| -> Vec<String> {
        s.iter()
            .map(|&x| letter_name(x, cfg.alphabet_size))
            .collect()
    };
    Ok(Instance::from_token_lists(&name(&a), &name(&b)).expect("equal lengths by construction"))
}
