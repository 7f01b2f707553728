//! Three-way classification with shadowed granular-balls.
//!
//! Balls are grown by greedily minimizing a justifiable-granularity
//! measure, softened with a Gaussian membership and cut into core, band
//! and exterior regions by a per-ball shadow threshold. Queries that land
//! in conflicting or weak regions are deferred instead of guessed.

pub mod classifier;
pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod granular_ball;
pub mod granulation;
pub mod shadowing;
pub mod synth;

pub use classifier::{
    ClassifierConfig, GbKnnClassifier, Outcome, RegionKind, ShadowClassifier, ThreeWayPrediction,
};
pub use data::{load_csv, Dataset, MinMaxScaler};
pub use error::{Error, Result};
pub use evaluation::{run_experiment, CostMatrix, EvaluationReport, RunConfig};
pub use granular_ball::{BallSpace, GranularBall, SplitMethod};
pub use granulation::{generate_justifiable, GenerationConfig};
