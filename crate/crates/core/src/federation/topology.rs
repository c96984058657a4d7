use std::collections::BTreeSet;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::train::Hyperparams;

/// A simulated company: its private training data and the combiner it reports to.
#[derive(Debug, Clone)]
pub struct ClientNode<S = f64> {
    pub id: usize,
    pub local_data: Dataset<S>,
    pub hyper: Hyperparams,
    pub combiner_id: usize,
}

/// One reducer (implicit), a set of combiners and the clients attached to them.
#[derive(Debug, Clone)]
pub struct FederationTopology<S = f64> {
    pub combiners: Vec<usize>,
    pub clients: Vec<ClientNode<S>>,
}

impl<S: Scalar> FederationTopology<S> {
    pub fn new(combiners: Vec<usize>, clients: Vec<ClientNode<S>>) -> Result<Self> {
        let topo = FederationTopology { combiners, clients };
        topo.validate()?;
        Ok(topo)
    }

    /// Assigns `datasets[i]` to client `i`, attached to `assignment[i]`.
    pub fn from_assignment(
        datasets: Vec<Dataset<S>>,
        assignment: &[usize],
        hyper: Hyperparams,
    ) -> Result<Self> {
        if datasets.len() != assignment.len() {
            return Err(Error::Config(format!(
                "{} client datasets but {} combiner assignments",
                datasets.len(),
                assignment.len()
            )));
        }
        let combiners: Vec<usize> = assignment
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let clients = datasets
            .into_iter()
            .zip(assignment)
            .enumerate()
            .map(|(id, (local_data, &combiner_id))| ClientNode {
                id,
                local_data,
                hyper,
                combiner_id,
            })
            .collect();
        Self::new(combiners, clients)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clients.is_empty() {
            return Err(Error::Config("topology has no clients".into()));
        }
        let mut ids = BTreeSet::new();
        let combiners: BTreeSet<usize> = self.combiners.iter().copied().collect();
        if combiners.len() != self.combiners.len() {
            return Err(Error::Config("duplicate combiner id".into()));
        }
        for c in &self.clients {
            if !ids.insert(c.id) {
                return Err(Error::Config(format!("duplicate client id {}", c.id)));
            }
            if !combiners.contains(&c.combiner_id) {
                return Err(Error::Config(format!(
                    "client {} references unknown combiner {}",
                    c.id, c.combiner_id
                )));
            }
            if c.local_data.is_empty() {
                return Err(Error::structural(format!(
                    "client {} has no local data",
                    c.id
                )));
            }
            c.hyper.validate()?;
        }
        Ok(())
    }

    /// Client ids, ascending.
    pub fn client_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.clients.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn client(&self, id: usize) -> Option<&ClientNode<S>> {
        self.clients.iter().find(|c| c.id == id)
    }
}

/// Clients `0..n/2` on combiner 0 and the rest on combiner 1 (for two combiners);
/// in general contiguous, near-equal blocks.
pub fn default_assignment(n_clients: usize, n_combiners: usize) -> Vec<usize> {
    let n_combiners = n_combiners.max(1);
    (0..n_clients)
        .map(|i| i * n_combiners / n_clients.max(1))
        .collect()
}
