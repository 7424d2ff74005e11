//! A tau-style decision procedure for type-like conjectures over a small
//! first-order term language, with the event database, normalization
//! passes and brute-force oracle around it.

pub mod book;
pub mod db;
pub mod engine;
pub mod event;
pub mod interval;
pub mod normalize;
pub mod oracle;
pub mod rule;
pub mod rune;
pub mod sexp;
pub mod sweep;
pub mod tau;
pub mod term;
pub mod world;
