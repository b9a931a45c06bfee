//! Block-wise trial execution with optional resumable checkpoints.
//!
//! A stage of `total` trials runs in blocks of [`BLOCK`]. Block `b` draws
//! from stream `(stage_seed, b)`, so a stage's result depends only on the
//! seed and stage name, never on where an earlier run stopped. After every
//! block the merged aggregate is written to the checkpoint file; a rerun
//! with the same config skips the blocks already recorded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ipdp_core::rng::{hash_words, stream, StreamRng};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::report::SCHEMA_VERSION;

/// Trials per block.
pub const BLOCK: u64 = 10_000;

/// A per-block result that can be merged in block order.
pub trait Aggregate: Serialize + DeserializeOwned + Default {
    fn merge(&mut self, other: Self);
}

/// Integer tallies, summed entrywise.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts(pub Vec<u64>);

impl Aggregate for Counts {
    fn merge(&mut self, other: Self) {
        if self.0.is_empty() {
            self.0 = other.0;
        } else {
            for (a, b) in self.0.iter_mut().zip(other.0) {
                *a += b;
            }
        }
    }
}

/// Per-trial values, concatenated in trial order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Values<T>(pub Vec<T>);

impl<T> Default for Values<T> {
    fn default() -> Self {
        Self(Vec::new())
    }
}

impl<T: Serialize + DeserializeOwned> Aggregate for Values<T> {
    fn merge(&mut self, other: Self) {
        self.0.extend(other.0);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StageState {
    total: u64,
    blocks_done: u64,
    aggregate: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CheckpointFile {
    schema_version: u32,
    experiment: String,
    config: Value,
    stages: BTreeMap<String, StageState>,
}

pub struct Runner {
    seed: u64,
    path: Option<PathBuf>,
    state: CheckpointFile,
}

impl Runner {
    /// Opens `path` if it exists; its experiment and config must match.
    pub fn open(
        path: Option<&Path>,
        experiment: &str,
        config: &Value,
        seed: u64,
    ) -> CliResult<Self> {
        let fresh = CheckpointFile {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            config: config.clone(),
            stages: BTreeMap::new(),
        };
        let state = match path {
            Some(p) if p.exists() => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                let old: CheckpointFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("checkpoint {}: {e}", p.display())))?;
                if old.schema_version != fresh.schema_version
                    || old.experiment != fresh.experiment
                    || old.config != fresh.config
                {
                    return Err(CliError::Config(format!(
                        "checkpoint {} was written for a different configuration",
                        p.display()
                    )));
                }
                old
            }
            _ => fresh,
        };
        Ok(Self {
            seed,
            path: path.map(Path::to_path_buf),
            state,
        })
    }

    /// Seed of the streams used by `stage`.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        let words: Vec<u64> = stage.bytes().map(u64::from).collect();
        hash_words(self.seed, &words)
    }

    /// Runs `total` trials of `stage` in blocks. `f(rng, start, len)`
    /// handles trials `start..start + len`.
    pub fn run<A, F>(&mut self, stage: &str, total: u64, f: F) -> CliResult<A>
    where
        A: Aggregate,
        F: FnMut(&mut StreamRng, u64, u64) -> ipdp_core::Result<A>,
    {
        self.run_blocks(stage, total, BLOCK, f)
    }

    /// As [`run`](Self::run) with an explicit block size.
    pub fn run_blocks<A, F>(
        &mut self,
        stage: &str,
        total: u64,
        block: u64,
        mut f: F,
    ) -> CliResult<A>
    where
        A: Aggregate,
        F: FnMut(&mut StreamRng, u64, u64) -> ipdp_core::Result<A>,
    {
        if total == 0 {
            return Err(CliError::Config(format!(
                "{stage}: trial count must be at least 1"
            )));
        }
        let blocks = total.div_ceil(block);
        let (mut acc, start_block) = match self.state.stages.get(stage) {
            Some(s) if s.total == total => {
                let acc: A = serde_json::from_value(s.aggregate.clone())
                    .map_err(|e| CliError::Config(format!("checkpoint stage {stage}: {e}")))?;
                (acc, s.blocks_done)
            }
            Some(_) => {
                return Err(CliError::Config(format!(
                    "checkpoint stage {stage} has a different size"
                )))
            }
            None => (A::default(), 0),
        };
        let seed = self.stage_seed(stage);
        for b in start_block..blocks {
            let start = b * block;
            let len = block.min(total - start);
            acc.merge(f(&mut stream(seed, b), start, len)?);
            self.save(stage, total, b + 1, &acc)?;
        }
        Ok(acc)
    }

    fn save<A: Aggregate>(
        &mut self,
        stage: &str,
        total: u64,
        blocks_done: u64,
        acc: &A,
    ) -> CliResult<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let aggregate = serde_json::to_value(acc).map_err(|e| CliError::Output(e.to_string()))?;
        self.state.stages.insert(
            stage.to_string(),
            StageState {
                total,
                blocks_done,
                aggregate,
            },
        );
        let text = serde_json::to_string_pretty(&self.state)
            .map_err(|e| CliError::Output(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).map_err(|e| CliError::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
    }
}
