//! Joint transceiver design for a full-duplex integrated sensing and
//! communication (ISAC) base station.
//!
//! The base station transmits a dual-function signal (downlink data beams plus a
//! dedicated radar covariance) while simultaneously receiving uplink users and
//! the target echo. The library minimizes total transmit power (base station
//! plus uplink users) subject to radar, uplink, and downlink SINR thresholds:
//!
//! * [`receivers`] gives the closed-form optimal combiners and the reduced
//!   SINR expressions obtained by substituting them.
//! * [`sca`] solves the remaining transmit problem by successive convex
//!   approximation over semidefinite-relaxed subproblems and recovers
//!   rank-one downlink beams without loss.
//! * [`conic`] is the convex subproblem interface, backed by an
//!   interior-point solver.
//! * [`baselines`] provides the communication-only and half-duplex references.
//! * [`harness`] drives single solves, beampattern exports and sweeps.

// Links the system OpenBLAS used by the conic solver's PSD cone.
use openblas_src as _;

pub mod baselines;
pub mod conic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod receivers;
pub mod sca;
pub mod scenario;
pub mod validate;

pub use baselines::{BaselineResult, Scheme};
pub use error::{Error, Result};
pub use metrics::{RelaxedDesign, SinrReport, TransmitDesign};
pub use receivers::ReceiveDesign;
pub use sca::{JointSolution, ScaSettings, SolverTrace, Termination};
pub use scenario::{ChannelSet, SystemConfig};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
