use thiserror::Error;

use crate::classifier::ClassifierError;
use crate::dataset::DatasetError;
use crate::descriptor::DescriptorError;
use crate::eval::EvalError;
use crate::preprocess::PreprocessError;
use crate::som::SomError;

/// Any failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Som(#[from] SomError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
