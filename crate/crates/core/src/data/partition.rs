use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schema::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Assignment of every sample of a dataset to one of `k` chunks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub source: String,
    pub k: usize,
    /// `assignment[i]` is the chunk holding sample `i`.
    pub assignment: Vec<usize>,
}

/// JSON export shape: chunk number → row indices.
#[derive(Debug, Serialize, Deserialize)]
struct PlanExport {
    source: String,
    k: usize,
    chunks: Vec<Vec<usize>>,
}

impl PartitionPlan {
    /// Row indices of each chunk, ascending.
    pub fn chunks(&self) -> Vec<Vec<usize>> {
        let mut chunks = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            chunks[c].push(i);
        }
        chunks
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.chunks().iter().map(Vec::len).collect()
    }

    pub fn materialize<S: Scalar>(&self, d: &Dataset<S>) -> Result<Vec<Dataset<S>>> {
        if d.len() != self.assignment.len() {
            return Err(Error::structural(format!(
                "plan covers {} rows but dataset has {}",
                self.assignment.len(),
                d.len()
            )));
        }
        Ok(self
            .chunks()
            .iter()
            .enumerate()
            .map(|(c, idx)| d.subset(format!("{}#{c}", d.name), idx))
            .collect())
    }

    pub fn to_json(&self) -> String {
        let export = PlanExport {
            source: self.source.clone(),
            k: self.k,
            chunks: self.chunks(),
        };
        serde_json::to_string_pretty(&export).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let export: PlanExport = serde_json::from_str(text)
            .map_err(|e| Error::structural(format!("partition plan: {e}")))?;
        let n: usize = export.chunks.iter().map(Vec::len).sum();
        let mut assignment = vec![usize::MAX; n];
        for (c, rows) in export.chunks.iter().enumerate() {
            for &r in rows {
                if r >= n || assignment[r] != usize::MAX {
                    return Err(Error::structural(format!(
                        "partition plan row {r} invalid or repeated"
                    )));
                }
                assignment[r] = c;
            }
        }
        Ok(PartitionPlan {
            source: export.source,
            k: export.k,
            assignment,
        })
    }
}

/// Shuffles sample indices with `seed` and deals them round-robin into `k`
/// chunks. Class ratios are left to chance.
pub fn partition_chunks<S: Scalar>(d: &Dataset<S>, k: usize, seed: u64) -> Result<PartitionPlan> {
    if k == 0 {
        return Err(Error::structural("chunk count must be at least 1"));
    }
    if k > d.len() {
        return Err(Error::structural(format!(
            "cannot split {} samples into {k} chunks",
            d.len()
        )));
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; d.len()];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % k;
    }
    Ok(PartitionPlan {
        source: d.name.clone(),
        k,
        assignment,
    })
}
