//! Training objectives and a small derivative-free training harness.

mod loss;
mod overfit;

pub use loss::{
    loss_cm, loss_cm_gradient, loss_gradients, loss_joint, loss_mag, loss_ri, LossConfig, LossGradients, LossReport,
    Reduction,
};
pub use overfit::{
    micro_overfit, synthetic_pair, write_trajectory_csv, OverfitConfig, OverfitResult, Phase, TrainingPair,
    TrajectoryPoint,
};
