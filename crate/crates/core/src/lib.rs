//! Weighted context-free grammars: exact counting, random generation, and
//! analytic prediction of the redundancy of sampled sets (first collision,
//! full collection, distinct words, coverage).

pub mod asymptotics;
pub mod counting;
pub mod grammar;
pub mod numeric;
pub mod rna;
pub mod sampler;
pub mod scalar;
pub mod urns;

pub use num_bigint::BigUint;
pub use num_rational::BigRational;

pub use counting::{CountTable, WeightSpectrum};
pub use grammar::{NormalizedGrammar, WeightedGrammar};
pub use rna::RnaModel;
pub use scalar::{Scalar, WideFloat};
pub use urns::{AnalyticsReport, UrnModel};

/// Exact rational scalar.
pub type Rational = BigRational;
/// Exact natural-number scalar, used once weights are scaled to integers.
pub type Natural = BigUint;

pub type ExactCountTable = CountTable<Rational>;
pub type FloatCountTable = CountTable<WideFloat>;

pub type ExactSampler = sampler::Sampler<Natural>;
pub type FloatSampler = sampler::Sampler<WideFloat>;
