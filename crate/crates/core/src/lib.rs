// Copyright 2026 The expint-dae Authors
// SPDX-License-Identifier: Apache-2.0

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expm;
pub mod flow;
pub mod harness;
pub mod integrators;
pub mod linalg;
pub mod problems;

pub use error::{Error, Result};
