//! Link-level simulation of RIS-assisted LEO satellite downlinks into urban
//! canyons.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: frame, panels, tilt, slant range, near/far-field boundary
//! * [`antenna`]: element pattern and gain, steering vectors, explicit channels
//! * [`ris`]: closed-form phase configuration and the coherent element sum
//! * [`link`]: RIS, tilted-RIS, and direct-link SNR
//! * [`constellation`]: blockage ratio, `Q_min`, `Q_th`, canyon shadowing
//! * [`engine`]: coverage maps, tilt search, double-RIS, pass sweeps
//! * [`config`], [`output`], [`commands`]: the `risleo` command line

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod commands;
pub mod config;
pub mod constellation;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod link;
pub mod output;
pub mod ris;
pub mod validate;

pub use error::{Error, Result};
