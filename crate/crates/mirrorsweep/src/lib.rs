//! File formats, scene documents and the command-line driver around
//! [`mirrorsweep_core`].
//!
//! - [`scene_spec`]: JSON scene and camera documents
//! - [`pfm`], [`image_io`]: depth maps as PFM, images and masks as PNG
//! - [`config`]: the run configuration shared by all subcommands
//! - [`record`]: result, metrics and curve outputs
//! - [`cli`]: argument parsing and subcommands

pub mod cli;
pub mod config;
pub mod error;
pub mod image_io;
pub mod pfm;
pub mod record;
pub mod scene_spec;
mod selfcheck;

pub use cli::run;
pub use config::RunConfig;
pub use error::CliError;
pub use mirrorsweep_core as core;
