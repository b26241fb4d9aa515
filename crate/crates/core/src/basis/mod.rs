//! Network inputs, polynomial features and linear-in-weight fitting.

mod lsq;
mod normalizer;
mod poly;
mod weights;

pub use lsq::{fit_least_squares, LeastSquaresFit, MAX_CONDITION};
pub use normalizer::Normalizer;
pub use poly::PolyBasis;
pub use weights::{TrainingProvenance, WeightSet};
