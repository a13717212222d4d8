//! The two-stage network: coarse magnitude estimation followed by complex residual
//! refinement.

mod config;
mod net;
mod tscn;

pub use config::{ModelConfig, NetKind};
pub use net::{Net, NetState, OutputActivation};
pub use tscn::{FrameOutput, TscnModel, TscnOutput, TscnStream};
