//! Construction engines: coordinate extension of bent spaces and
//! input-dimension extension.

mod bent;
mod checkpoint;
mod fourier;
mod input;

use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bent::{
    all_coordinate_extensions, bent_pipeline, coordinate_extensions, enumerate_bent_spaces,
    standard_bent_form, BentPipelineOptions, BentPipelineReport, ExtensionTarget,
};
pub use checkpoint::Checkpoint;
pub use fourier::{fourier_apn_extensions, FourierTable, MAX_TABLE_BITS};
pub use input::{
    admissible_lifts, classify_lifts, extend_input_exhaustive, extend_input_random,
    input_extension_check, input_pipeline, lift, pad_outputs, InputPipelineReport,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub seed: u64,
    pub attempts: u64,
    pub max_results: Option<usize>,
    pub time_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            seed: 0,
            attempts: 256,
            max_results: None,
            time_limit: None,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(seed: u64) -> Self {
        SearchBudget {
            seed,
            ..Self::default()
        }
    }

    /// A seed for work item `index` at `level`, independent of scheduling.
    pub fn derive_seed(&self, level: u64, index: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((level << 40) | index);
        rng.next_u64()
    }
}

/// How intermediate spaces are reduced between extension levels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DedupKey {
    /// One space per J2 signature.
    #[default]
    J2,
    /// Exact classes under linear changes of variables.
    Exact,
    /// Only identical spaces are merged.
    None,
}

/// Which deduplicated spaces of the last coordinate level are finished.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPredicate {
    #[default]
    All,
    /// Every other space in sorted order.
    Half,
}

impl std::str::FromStr for SelectionPredicate {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "all" => Ok(SelectionPredicate::All),
            "half" => Ok(SelectionPredicate::Half),
            _ => Err(crate::Error::Invalid(format!(
                "unknown selection predicate {s:?}"
            ))),
        }
    }
}

impl std::str::FromStr for DedupKey {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "j2" => Ok(DedupKey::J2),
            "exact" => Ok(DedupKey::Exact),
            "none" => Ok(DedupKey::None),
            _ => Err(crate::Error::Invalid(format!("unknown dedup key {s:?}"))),
        }
    }
}

pub(crate) fn dedup_spaces(
    mut spaces: Vec<crate::vecfun::QuadSpace>,
    key: DedupKey,
) -> Vec<crate::vecfun::QuadSpace> {
    match key {
        DedupKey::J2 => crate::classify::dedup_by_j2(spaces),
        DedupKey::Exact => crate::classify::classify(spaces),
        DedupKey::None => {
            spaces.sort_unstable();
            spaces.dedup();
            spaces
        }
    }
}
