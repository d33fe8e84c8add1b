//! Synthetic planar scenes seen by calibrated virtual cameras, and the
//! descriptor experiments run on them.

mod config;
mod experiment;
mod scene;
mod texture;

pub use config::{LensPreset, SimConfig, TextureSource};
pub use experiment::{
    hamming_evolution, run_recognition_experiment, select_tracked_points, DescriptorSetup,
    EvolutionTable, RecognitionOptions, RecognitionResult,
};
pub use scene::{linear_trajectory, CameraPose, PlaneTexture, SimSequence};
pub use texture::procedural_texture;
