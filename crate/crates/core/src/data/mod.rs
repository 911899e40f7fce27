//! Labelled feature datasets: storage formats, synthetic mixtures and label poisoning.

mod csv_io;
mod dataset;
mod format;
mod noise;
mod synth;

pub use csv_io::{load_csv, read_csv, save_csv};
pub use dataset::FeatureDataset;
pub use format::{decode_dataset, encode_dataset, load_dataset, save_dataset, HEADER_LEN, MAGIC, VERSION};
pub use noise::{inject_label_noise, inject_targeted_label_noise, NoiseMask, NoiseSpec};
pub use synth::{mixture_centers, synth_gaussian_mixture, synth_test_split};
