//! Declarative parameter sweeps, scaling fits and plot scripts over
//! `qcrit-core`, plus the end-to-end acceptance suite.

pub mod acceptance;
pub mod cache;
pub mod config;
pub mod error;
pub mod fit;
pub mod manifest;
pub mod models;
pub mod plot;
pub mod sweep;
pub mod table;
