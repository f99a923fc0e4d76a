//! Three mathematically equivalent views of an epidemic trajectory, and the
//! machinery to move between them.
//!
//! - [`idea`]: the two-parameter IDEA model
//!   `I(t) = (r0/(1+d)^t)^t`, its Brownlee Gaussian form
//!   `exp(−a·t² + b·t)`, least-squares fitting, and projection.
//! - [`farr`]: Farr's ratio law. The tetrad ratio
//!   `K = (I(t+3)/I(t+2))/(I(t+1)/I(t))` is constant on IDEA curves
//!   (`K = 1/(1+d)⁴`), carries an odds-ratio-style variance on the log
//!   scale, pools into a summary estimate of d, and flags epidemic waves
//!   when it surges above 1.
//! - [`sir`]: a damped SIR difference model whose small-outbreak limit is
//!   exactly the IDEA curve under `r0_idea = r0_sir/√ρ`, `d = 1/√ρ − 1`,
//!   with `K = ρ²` closing the triangle; plus a parameter-space sweep
//!   measuring where the equivalence breaks down.
//! - [`timeseries`]: ingestion of dated case counts, differencing of
//!   cumulative curves, and binning into generation time steps.
//!
//! All computations are pure and deterministic; the sweep parallelizes
//! across cells without changing a single output bit.

pub mod error;
pub mod farr;
pub mod format;
pub mod idea;
pub mod sir;
pub mod stats;
pub mod timeseries;

pub use error::{Error, Result};
