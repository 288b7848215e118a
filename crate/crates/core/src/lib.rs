pub mod engine;
pub mod evolver;
pub mod format;
pub mod generate;
pub mod labeling;
pub mod oracle;
pub mod scenario;
pub mod script;
pub mod sweep;
pub mod tree;
pub mod verify;
