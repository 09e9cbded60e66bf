use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Round, SeedTriplet, SentenceTriplet, SyntheticExample};

/// Italian context frames, one `{SEED}` slot each.
pub const DEFAULT_FRAMES: &str = include_str!("../../data/frames_it.txt");
pub const SLOT: &str = "{SEED}";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OfflineError {
    #[error("template bank is empty")]
    EmptyBank,
    #[error("frame {line} must contain exactly one {SLOT} slot")]
    BadFrame { line: usize },
    #[error("n_per_seed must be at least 1")]
    ZeroPerSeed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateBank {
    frames: Vec<String>,
}

impl TemplateBank {
    /// One frame per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, OfflineError> {
        let mut frames = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.matches(SLOT).count() != 1 {
                return Err(OfflineError::BadFrame { line: idx + 1 });
            }
            frames.push(line.to_owned());
        }
        if frames.is_empty() {
            return Err(OfflineError::EmptyBank);
        }
        Ok(TemplateBank { frames })
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_FRAMES).expect("bundled frames parse")
    }

    pub fn frames(&self) -> &[String] {
        &self.frames
    }

    /// Fills `frame` with `form`, capitalizing it at sentence start.
    pub fn fill(frame: &str, form: &str) -> String {
        if frame.starts_with(SLOT) {
            let mut chars = form.chars();
            let capitalized: String = chars.next().map(|c| c.to_uppercase().chain(chars).collect()).unwrap_or_default();
            frame.replacen(SLOT, &capitalized, 1)
        } else {
            frame.replacen(SLOT, form, 1)
        }
    }
}

/// `n_per_seed` triplets per seed, each from one randomly drawn frame, so
/// the three sentences differ only at the slot. Output order is seed order,
/// then draw order, then N, M, F. Examples are valid by construction.
pub fn offline_generate(seeds: &[SeedTriplet], n_per_seed: usize, rng_seed: u64, bank: &TemplateBank) -> Result<Vec<SyntheticExample>, OfflineError> {
    if n_per_seed == 0 {
        return Err(OfflineError::ZeroPerSeed);
    }
    if bank.frames.is_empty() {
        return Err(OfflineError::EmptyBank);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(seeds.len() * n_per_seed * 3);
    for seed in seeds {
        for _ in 0..n_per_seed {
            let frame = &bank.frames[rng.gen_range(0..bank.frames.len())];
            let triplet = SentenceTriplet {
                seed_id: seed.id.clone(),
                neutral: TemplateBank::fill(frame, &seed.neutral),
                masculine: TemplateBank::fill(frame, &seed.masculine),
                feminine: TemplateBank::fill(frame, &seed.feminine),
                round: Round::Offline,
            };
            out.extend(triplet.examples().map(|e| SyntheticExample { valid: true, ..e }));
        }
    }
    Ok(out)
}
