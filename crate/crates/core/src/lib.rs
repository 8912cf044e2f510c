//! Descents of Mallows permutations: exact small-n laws, scalable samplers,
//! the regenerative structure of the Mallows process, the size-bias coupling
//! for two-sided descents, and Monte Carlo checks of the limit theorems.

pub mod cli;
pub mod error;
pub mod exact;
pub mod fenwick;
pub mod limits;
pub mod par;
pub mod perm;
pub mod regen;
pub mod sample;
pub mod size_bias;
pub mod stats;

pub use error::{Error, Result};
pub use exact::{enumerate_law, ExactLaw, MallowsParams};
pub use perm::{IndexSet, Permutation};
pub use sample::{sample_finite, sample_process_prefix, RngStream, SeededRng};
