//! The coded QPIR protocol for `[n, k]` MDS storage with `t = n − k`
//! collusion resistance.
//!
//! A retrieval runs one *slice* per `(piece p, stripe b, level l)`: the `n`
//! working servers share a chain of Bell pairs, every server rotates its chain
//! qubit by its answer `H_s`, interior servers swap the chain through with a
//! Bell measurement and hand the outcome `G_s` to the user through two-sum
//! pairs, and the user's final Bell measurement on the outer chain pair
//! returns `Σ_s H_s = y_{b,p}^{K,(l)}`.

mod config;
mod queries;
mod resources;
mod run;
mod storage;
mod transcript;

pub use config::{DssConfig, OddMode};
pub use queries::{generate_queries, queries_from_randomness, QuerySet};
pub use resources::{expected_resources, rate, ResourceReport};
pub use run::{
    prepare_entanglement, run_pieces, run_retrieval, run_retrieval_on_storage, server_response,
    user_decode, PieceRun, SliceTopology, Topology, UserOutcome,
};
pub use storage::{random_files, File, Storage};
pub use transcript::{RetrievalTranscript, SliceRecord, TRANSCRIPT_VERSION};

use thiserror::Error;

use crate::codes::CodeError;
use crate::field::FieldError;
use crate::quantum::QuantumError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("file index {index} out of range for {m} files")]
    FileIndex { index: usize, m: usize },
    #[error("file shape: {0}")]
    FileShape(String),
    #[error("register must be empty before preparation ({live} live qubits)")]
    RegisterNotEmpty { live: usize },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl ProtocolError {
    /// True for failed run-time assertions (as opposed to bad input).
    pub fn is_internal(&self) -> bool {
        matches!(self, ProtocolError::Internal(_) | ProtocolError::Quantum(_))
    }
}
