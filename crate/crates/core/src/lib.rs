pub mod botsched;
pub mod cli;
pub mod dagsched;
pub mod energy;
pub mod engine;
pub mod error;
pub mod gangsched;
pub mod ids;
pub mod platform;
pub mod time;
pub mod workload;
