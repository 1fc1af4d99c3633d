//! Dataset input: libsvm text files, a registry of downloadable datasets,
//! and seeded synthetic problems.

pub mod fetch;
pub mod libsvm;
pub mod synthetic;

pub use fetch::{fetch_dataset, load_dataset, lookup, registry, DatasetMeta};
pub use libsvm::{parse_libsvm, write_libsvm};
pub use synthetic::{generate_synthetic, SyntheticData, SyntheticSpec, Task};
