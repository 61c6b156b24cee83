//! Kinematics of football players from 2D tracking data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod kalman;
pub mod prediction;
pub mod rng;
pub mod state_space;
pub mod svg;
pub mod synthetic;
pub mod trajectory;
pub mod vae;

pub use error::{Error, Result};
