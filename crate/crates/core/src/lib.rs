//! Trusted humanitarian signalling network: a signed message protocol over a
//! replicated hash-chained ledger, fused into a common operational picture by a
//! trust-and-diversity engine and gated by a minimally-just protective layer.

pub mod codec;
pub mod crypto;
pub mod gate;
pub mod ledger;
pub mod picture;
pub mod scenario;
pub mod trust;
