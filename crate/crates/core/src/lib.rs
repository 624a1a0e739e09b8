//! Skeletal action recognition with the Distribution of Action Movements
//! (DAM) descriptor.
//!
//! An action is a sequence of 3D joint positions. The pipeline smooths and
//! resamples every joint path, turns positions into per-frame movement
//! directions, concatenates consecutive direction frames into windowed
//! direction frames (WDFs), quantizes them with a self-organizing map and
//! describes the action as the normalized histogram of its WDFs over the map.
//! Classification weights each histogram bin by the class distribution the
//! training set produced in that cluster.
//!
//! ```no_run
//! use dam::classifier::{classify_action, train_model};
//! use dam::dataset::load_dir;
//! use dam::preprocess::PreprocessParams;
//! use dam::som::{SomTrainParams, SomTrainer};
//!
//! let data = load_dir("data/action3d".as_ref(), true).unwrap();
//! let params = PreprocessParams::new(25, 3);
//! let som = SomTrainer::new(25, 25, SomTrainParams::default());
//! let model = train_model(&data, params, &som).unwrap();
//! let posterior = classify_action(&model, &data.actions()[0]).unwrap();
//! println!("{}", model.classes()[posterior.predicted]);
//! ```

pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod descriptor;
mod error;
pub mod eval;
pub mod preprocess;
pub mod som;
pub mod synthetic;

pub use error::{Error, Result};

/// A point or displacement in sensor coordinates.
pub type Point3 = [f64; 3];
