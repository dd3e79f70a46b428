//! Quantum graph attention networks over molecular graphs.
//!
//! This crate contains the full model stack, end to end:
//!
//! - [`qsim`] — exact statevector simulation with analytic gradients,
//! - [`circuits`] — feature maps, convolution cells, pooling plans, and the
//!   assembled QGCN ansatz,
//! - [`graph`] — the molecular graph data model, feature selection, scaling,
//!   and size-stratified sampling,
//! - [`models`] — quantum and classical node-update models with optional
//!   attention, under single- or multi-sub-model aggregation,
//! - [`train`] — Smooth L1 loss, R² score, Adam, and the training loop,
//! - [`oracle`] — slow, dense brute-force references used by the test suites.
//!
//! The crate is `no_std` (with `alloc`); everything that touches files,
//! clocks, or processes lives in the companion CLI crate.
//!
//! # Conventions
//!
//! Qubit 0 is the least significant bit of a statevector amplitude index.
//! All angles are radians. Nothing in this crate samples: expectation values
//! are exact and every function is a pure map from inputs to outputs, so
//! results are bit-reproducible and values can be shared freely across
//! threads.
#![no_std]

extern crate alloc;

pub mod circuits;
pub mod graph;
pub mod models;
pub mod oracle;
pub mod qsim;
pub mod train;
