//! Reliable transport: cumulative acks, one retransmission timer per
//! connection, adaptive or fixed RTO, and window- or rate-based send
//! admission.

mod bucket;
mod receiver;
mod rtt;
mod sender;

pub use bucket::{Admission, TokenBucket};
pub use receiver::{AckDirective, Acceptance, ReceiverMode, ReceiverState};
pub use rtt::RttEstimator;
pub use sender::{
    RetransmitPolicy, RtoPolicy, SendMode, SenderState, TimeoutAction, DEFAULT_BACKOFF_CAP,
};
