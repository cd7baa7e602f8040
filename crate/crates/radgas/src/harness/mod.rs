pub mod config;
pub mod presets;
pub mod runner;
pub mod sweep;
pub mod verify;
