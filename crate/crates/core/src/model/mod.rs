//! The eleven-layer crack-level classifier.

mod arch;
mod checkpoint;
mod network;
mod train;

pub use arch::{Activation, ArchitectureSpec, InputShape, LayerKind, LayerSpec};
pub use checkpoint::{
    checkpoint_len, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint,
    CHECKPOINT_MAGIC,
};
pub use network::{
    build_network, forward, image_to_tensor, loss_and_grad, predict, predict_tensor, ModelParams,
    ParamLayer,
};
pub use train::{
    evaluate, load_examples, train, EpochStats, Example, StepDecay, TrainConfig,
};
