//! Exact Boltzmann enumeration of small Ising lattices and the Bell-type
//! quantities built on top of it: CHSH correlators, measurement, outcome and
//! parameter dependence, high-temperature series, free-will equivalence,
//! sampling, parameter search and reproduction of published values.

pub mod builtin;
pub mod chsh;
pub mod error;
pub mod freewill;
pub mod independence;
pub mod lattice;
pub mod model;
mod numeric;
#[cfg(test)]
mod properties;
pub mod random;
pub mod report;
pub mod reproduce;
pub mod sampling;
pub mod search;
pub mod series;

pub use chsh::{model_chsh, ChshReport, ConditionalTable, Setting};
pub use error::{Error, Result};
pub use independence::{HiddenSubset, IndependenceReport, LambdaTable, Witness};
pub use lattice::{Edge, LatticeSpec, Node, NodeRole, PartialAssignment, Spin, SpinConfiguration};
pub use model::{build_model, BoltzmannModel, BuildOptions, Hamiltonian};
pub use numeric::{compensated_sum, format_significant, CompensatedSum};
pub use report::{Format, Precision};
pub use sampling::{SampleRun, SamplerKind};
pub use search::{SearchResult, SearchSpace};
