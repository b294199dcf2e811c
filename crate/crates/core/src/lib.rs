//! Place-level remoteness index.
//!
//! A place's raw remoteness combines the inverse log of its population with
//! weighted log distances to the nearest other place in each of five
//! population categories; raw values are then min-max scaled to [0, 1] per
//! census year (or across all years). Near 0 means a large place close to
//! other places, near 1 a small, isolated one.
//!
//! Modules follow the data flow: [`ingest`] reads place tables, [`spatial`]
//! answers per-category nearest-place queries through a registry of
//! interchangeable backends, [`index_core`] evaluates and scales the index,
//! and [`analysis`] measures how much of the index varies inside counties.

pub mod analysis;
pub mod cli;
pub mod index_core;
pub mod ingest;
pub mod spatial;
pub mod synth;

pub use index_core::{compute_multi_year, compute_year, RIResult, RunConfig, WeightScheme};
pub use ingest::{Coord, CoordinateMode, PlaceRecord, PlaceSet};
