//! Pipeline runner and report emission for the `ipseries` binary.
//!
//! [`pipeline`] orchestrates the analysis stages and assembles the
//! self-describing report; [`tables`] renders the six summary tables to
//! Markdown, CSV, and JSON; [`svg`] draws the five figures. The binary in
//! `main.rs` is a thin argument-parsing wrapper over these modules.

pub mod pipeline;
pub mod svg;
pub mod tables;
