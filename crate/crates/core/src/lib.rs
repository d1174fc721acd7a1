//! Power allocation and mode selection for hybrid semantic and bit-level
//! text transmission over multi-carrier channels.

pub mod association;
pub mod channel;
pub mod error;
pub mod harness;
pub mod instance;
pub mod lambert;
pub mod link;
pub mod minmax;
pub mod seed;
pub mod similarity;
pub mod sum_delay;
pub mod text;

pub use error::{Error, Result};
pub use instance::{Instance, Subcarrier};
pub use link::{Mode, SubcarrierAllocation};
