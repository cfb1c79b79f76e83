//! Straggler-resilient coded distributed linear transforms.
//!
//! A data matrix `A` is split into `n` row blocks ([`block`]). A coding
//! matrix `M` ([`codes`]) tells each of `m` workers which integer
//! combination of blocks to store; the master recovers `y = Ax` from any
//! sufficient set of worker results ([`decoder`]). [`analysis`] holds the
//! exact and Monte Carlo checks on codes, and [`simulator`] runs jobs and
//! coded gradient descent in virtual time.

pub mod analysis;
pub mod block;
pub mod codes;
pub mod decoder;
pub mod exact;
pub mod rng;
pub mod simulator;

pub use block::{block_multiply, partition, BlockPartition, DataMatrix, Vector};
pub use codes::{
    computation_load, encode, make_cross, make_one_diagonal, make_p_bernoulli, make_s_diagonal,
    regenerate_until_valid, CodeSpec, CodingMatrix, EncodedAssignment, Family, FamilyParams,
};
pub use decoder::{diagonal_decode, hybrid_decode, inverse_decode, DecodeReport, ReceivedSet};
pub use simulator::{
    compare_schemes, run_coded_gd, run_transform, ExperimentConfig, ExperimentReport, GdTrace, JobTrace,
    StragglerModel,
};
