//! Per-class hypersphere models with the centre fixed at the origin.

mod batches;
mod loss;
mod model;

pub use batches::{make_balanced_batches, BalancedSampler, Batch};
pub use loss::{
    anomaly_cap, anomaly_term, hypercore_loss, loss_and_grad_into, loss_grad_wrt_embedding, pseudo_huber,
    BinaryLabel, GRAD_NORM_FLOOR, H_FLOOR,
};
pub use model::{score_distances, train_class_model, HypersphereModel, TrainConfig};
