//! Qudit hypergraph states.
//!
//! A multi-hypergraph on `n` vertices with edge multiplicities in `Z_d`
//! defines the state `Π_e C_e^{m_e} |+⟩_d^{⊗n}`. This crate builds those
//! states densely, constructs their stabilizer generators, applies local
//! Pauli and measurement rewrites, tests entanglement across bipartitions,
//! classifies states, and evaluates CHSH violations of fully connected
//! uniform hypergraph states.
//!
//! Conventions: vertices are labelled `1..=n`, vertex 1 is the most
//! significant digit of an amplitude index, `X|i⟩ = |i−1 mod d⟩` and
//! `Z|i⟩ = ω^i |i⟩` with `ω = e^{2πi/d}`.

pub mod classes;
pub mod entanglement;
pub mod error;
pub mod hypergraph;
pub mod nonlocality;
pub mod output;
pub mod rewrite;
pub mod stabilizer;
pub mod statevector;
pub mod verify;

pub use classes::{
    classify, count_grews, enumerate_states, is_grews, verify_generator_pauli, ClassReport,
};
pub use entanglement::{
    is_genuinely_entangled, schmidt, schmidt_coefficients, verify_theorem2, ConnectivityReport,
    SchmidtDecomposition,
};
pub use error::{Error, Result};
pub use hypergraph::{Bipartition, MultiHypergraph, VertexSet};
pub use nonlocality::{chsh_report, chsh_table, ChshMode, ChshReport, ChshTable};
pub use rewrite::{apply_chain, RewriteOp, RewriteOutcome};
pub use stabilizer::{check_stabilized, generator, GeneratorSpec, StabilizationReport};
pub use statevector::{build_state, QuditState};
pub use verify::{verify_suite, Suite, SuiteReport};
