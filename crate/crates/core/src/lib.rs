//! Biparental Moran model with strong selection at death.
//!
//! A single advantaged mutant sweeps through a population of `N` haploid
//! individuals. Advantaged individuals never die, and every birth has two
//! uniformly chosen parents. The crate tracks how much of the neutral
//! genome at an unlinked locus descends from the original mutant once the
//! sweep completes, and checks the result three ways:
//!
//! * [`simulator`]: Monte Carlo, both with expected weights and with gene dropping,
//! * [`recurrence`]: the exact 2×2 transfer-matrix recurrence for
//!   `(E B_{S_k}, E C_{S_k})`, in `f64` or exact rationals,
//! * [`asymptotics`]: the product closed form and the `(4/√π)·√N` law.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod model;
pub mod output;
pub mod recurrence;
pub mod rng;
pub mod scalar;
pub mod simulator;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
pub use model::{PopulationConfig, PopulationState, StepEvent};
pub use simulator::{Estimator, SimResult};
pub use stats::{AgreementTest, SampleStats};
