//! PCA, extreme learning machine and LSTM learners, plus their file format.

pub mod elm;
pub mod lstm;
pub mod modelfile;
pub mod pca;

pub use elm::{elm_train, tribas, ElmConfig, ElmModel};
pub use lstm::{gradcheck, lstm_train, LstmModel, SgdmConfig, TrainReport};
pub use modelfile::{load_model, save_model, ModelFile, ToModelBlocks};
pub use pca::{pca_fit, PcaModel};
