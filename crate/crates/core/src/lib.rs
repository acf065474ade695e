//! Analog beamforming codebook design with a generalized Lloyd algorithm.
//!
//! Training channels are partitioned among codewords by best gain, then each
//! codeword is moved by phase-only gradient ascent on its cell objective
//! `mean f(|wᴴh|²)`. The metric `f` selects what the codebook optimizes:
//! average gain, average rate, or a sigmoid-smoothed coverage indicator.
//! Quantized phase shifters are handled by projecting onto the `B`-bit grid
//! with an improvement guard.
//!
//! Around the designer sit the pieces needed to judge a codebook: array
//! geometry and steering vectors, a Ricean channel generator, reference
//! codebooks, a noisy ping-pong beam sweep, and Monte Carlo experiments that
//! emit CDFs and outage figures.

pub mod array;
pub mod baselines;
pub mod channel;
pub mod cli;
pub mod error;
pub mod eval;
pub mod io;
pub mod lloyd;
pub mod metrics;
pub mod sweep;

pub use array::{ArrayGeometry, Codebook, Codeword, Direction};
pub use channel::{AngleRange, ChannelMatrix, ChannelParams};
pub use error::{Error, Result};
pub use lloyd::{DesignResult, LloydConfig};
pub use metrics::{Metric, MetricKind};
