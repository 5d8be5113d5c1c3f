// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

pub mod error;
mod matrix_serde;
pub mod preprocess;
pub mod series;
pub mod tvgl;
pub mod mmd;
pub mod ensemble;
pub mod datagen;
pub mod eval;
pub mod detect;
pub mod bench;
pub mod tune;
pub mod presets;
