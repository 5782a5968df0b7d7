//! Star-network transport: framed envelopes, server-side routing (clients
//! never connect to each other), key distribution through the server, an
//! in-process loopback transport for deterministic tests and a TCP transport
//! for multi-process runs.

pub mod envelope;
pub mod router;
pub mod setup;
pub mod tcp;
pub mod transcript;

pub use envelope::{Envelope, NetError, MAX_FRAME_BYTES, SERVER_ID};
pub use router::{run_stage, ClientHandler, Outgoing, ServerHandler, SessionError};
pub use setup::{
    run_setup, DealerMaterial, PeerDirectory, PeerInfo, SetupClient, SetupOutcome, SetupServer,
};
pub use transcript::{Leg, Transcript, TranscriptEntry};
