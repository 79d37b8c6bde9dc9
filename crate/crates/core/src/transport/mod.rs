//! Message framing, channels, transcripts and session negotiation.

pub mod channel;
pub mod exchange;
pub mod frame;
pub mod session;
pub mod msg;
pub mod transcript;

pub use channel::{mem_pair, Channel, MemChannel, TcpChannel};
pub use exchange::{Exchange, Peer};
pub use frame::{frame_decode, frame_encode, Frame};
pub use transcript::{Party, Transcript};
pub use session::{run_in_process, run_in_process_with, run_session, ProtocolId, Role, SessionOutcome, SessionParams};
