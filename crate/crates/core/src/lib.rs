//! Secure network coding (SNC) and secure physical-layer network coding
//! (PLNC) on the butterfly and three-source networks.
//!
//! - [`galois`]: GF(p) and GF(4) arithmetic, 3×3 inverses.
//! - [`netmodel`]: the two networks, channel groups and time-slot schedules.
//! - [`protocols`]: exact runs of every coding construction.
//! - [`secrecy`]: exhaustive independence checks of adversary views.
//! - [`rates`]: BPSK mutual-information rates, quadrature and Monte-Carlo.
//! - [`compare`]: transmission times, curves and crossovers.
//! - [`cli`]: the `spnc` command.

pub mod cli;
pub mod compare;
pub mod error;
pub mod galois;
pub mod netmodel;
pub mod protocols;
pub mod rates;
pub mod secrecy;

pub use error::{Error, Result};
pub use galois::{FieldElement, FieldSpec};
pub use netmodel::{NetworkSpec, SchemeId};
pub use protocols::{run_protocol, ProtocolId};
pub use secrecy::{verify_claim, ClaimId, Verdict};
