//! Synthetic training data: seed-word triplets, two rounds of prompted
//! generation through a chat-completion client, verbatim-seed validation,
//! and a deterministic offline generator.

mod client;
mod generate;
mod offline;
mod prompts;
mod seeds;
mod tsv;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::GenderCategory;

pub use client::{ChatClient, ClientError, HttpChatClient, HttpConfig, RetryPolicy, RetryingClient, TOKEN_ENV};
pub use generate::{generate_round1, generate_round2, GenerationConfig, GenerationError, RoundOutput, RoundStats};
pub use offline::{offline_generate, OfflineError, TemplateBank, DEFAULT_FRAMES, SLOT};
pub use prompts::{build_round1_prompt, build_round2_prompt, default_few_shot, parse_completion, FewShot, ParsedCompletion, ParsedItem, PromptError};
pub use seeds::{load_seed_lexicon, SeedError, SeedLexicon, SeedTriplet, DEFAULT_SEEDS};
pub use tsv::{parse_synthetic, write_synthetic, SyntheticFormatError, SYNTHETIC_HEADER};
pub use validate::{contains_form, validate_all, validate_generation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Round {
    R1,
    R2,
    Offline,
}

impl Round {
    pub fn code(self) -> &'static str {
        match self {
            Round::R1 => "R1",
            Round::R2 => "R2",
            Round::Offline => "offline",
        }
    }
}

impl fmt::Display for Round {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Round {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R1" => Ok(Round::R1),
            "R2" => Ok(Round::R2),
            "offline" => Ok(Round::Offline),
            other => Err(other.to_owned()),
        }
    }
}

/// Three sentences that differ only in which seed form they use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceTriplet {
    pub seed_id: String,
    pub neutral: String,
    pub masculine: String,
    pub feminine: String,
    pub round: Round,
}

impl SentenceTriplet {
    pub fn get(&self, label: GenderCategory) -> &str {
        match label {
            GenderCategory::Neutral => &self.neutral,
            GenderCategory::Masculine => &self.masculine,
            GenderCategory::Feminine => &self.feminine,
        }
    }

    /// Unvalidated examples in N, M, F order.
    pub fn examples(&self) -> [SyntheticExample; 3] {
        [GenderCategory::Neutral, GenderCategory::Masculine, GenderCategory::Feminine].map(|label| SyntheticExample {
            text: self.get(label).to_owned(),
            label,
            seed_id: self.seed_id.clone(),
            round: self.round,
            valid: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticExample {
    pub text: String,
    pub label: GenderCategory,
    pub seed_id: String,
    pub round: Round,
    /// Set by `validate_generation`: the sentence holds its label's seed form
    /// and neither of the other two.
    pub valid: bool,
}
