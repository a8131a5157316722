//! Named sub-stream splitting of the scenario seed.
//!
//! One master seed fans out into independent ChaCha8 streams so that
//! changing one scenario element never perturbs another's draws. The split
//! scheme is stable and part of the output contract:
//!
//! * `link/{a}-{b}/{k}` — generation attempts for the k-th configured link
//!   joining modules `a` and `b` (k counts links with identical endpoints,
//!   in config order). One f64 draw per attempt, one more per success.
//! * `workload` — participant selection for arrivals, two f64-equivalent
//!   draws per uniformly selected pair.
//! * `jitter/{txn}` — per-stage duration jitter for one transaction, drawn
//!   in commit-stage order.
//! * `fault/{txn}` — per-stage heralded-failure Bernoulli draws for one
//!   transaction, drawn in commit-stage order.
//!
//! Stream seeds are `SHA-256(master_seed_le || 0x1f || label)`.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use sha2::{Digest, Sha256};

use crate::ledger::{LinkKey, TxnId};

#[derive(Debug, Clone, Copy)]
pub struct StreamSplitter {
    master_seed: u64,
}

impl StreamSplitter {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn stream(&self, label: &str) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update([0x1f]);
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }

    pub fn link_stream(&self, link: LinkKey, occurrence: usize) -> ChaCha8Rng {
        self.stream(&format!("link/{}-{}/{}", link.0, link.1, occurrence))
    }

    pub fn workload_stream(&self) -> ChaCha8Rng {
        self.stream("workload")
    }

    pub fn jitter_stream(&self, txn: TxnId) -> ChaCha8Rng {
        self.stream(&format!("jitter/{txn}"))
    }

    pub fn fault_stream(&self, txn: TxnId) -> ChaCha8Rng {
        self.stream(&format!("fault/{txn}"))
    }
}
