//! Secure computation of the k-th ranked element (KRE) of `n` clients'
//! private integers in a star network.
//!
//! Clients hold private μ-bit integers and talk only to an oblivious routing
//! server; the server has no input and learns no output. Four protocols
//! compute the KRE (minimum, median, maximum, ...) end to end:
//!
//! * [`proto::ygc`] — seeded garbled comparison circuits plus additively
//!   homomorphic unblinding (4 rounds, no oblivious transfer),
//! * [`proto::ahel`] — threshold EC-ElGamal with a modified Lin-Tzeng
//!   comparison evaluated entirely at the server (4 rounds),
//! * [`proto::ahed`] — threshold EC-ElGamal with interactive DGK
//!   comparisons between client pairs (4 rounds),
//! * [`proto::she_run`] — a slotted somewhat-homomorphic circuit evaluated
//!   non-interactively at the server (2 rounds).
//!
//! All protocols are verified against the plaintext oracle in
//! [`domain::kre_oracle`].

pub mod aheg;
pub mod compare;
pub mod domain;
pub mod garble;
pub mod net;
pub mod proto;
pub mod rng;
pub mod she;
pub mod wire;

pub use domain::{BitVector, DistinctInput, PlainInput, ProtocolConfig};
