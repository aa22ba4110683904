//! Parameter-exploring policy gradients (PGPE) with symmetric and
//! super-symmetric sampling.
//!
//! The crate provides
//! - [`sampling`]: Gaussian perturbations and the median-deviation mirror,
//! - [`update`]: eligibilities, baselines and the update rules of the
//!   PGPE, SyS, SupSyS, PGPE4smp and SupIf variants,
//! - [`optimizer`]: a stateful driver for one variant,
//! - [`objectives`]: sphere and Rastrigin benchmarks,
//! - [`harness`]: seeded batches, aggregate curves and step-size grid search,
//! - [`config`], [`report`], [`cli`]: JSON experiment files, CSV output and
//!   the `pgpe` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod format;
pub mod harness;
pub mod objectives;
pub mod optimizer;
pub mod report;
pub mod sampling;
pub mod update;

pub use error::{PgpeError, Result};
pub use harness::{run_batch, run_single, RunConfig};
pub use objectives::{Objective, ObjectiveSpec};
pub use optimizer::Optimizer;
pub use sampling::{Hypothesis, Perturbation, SampleQuad};
pub use update::{BaselineKind, BaselineState, MetaParams, UpdateReport, Variant};
