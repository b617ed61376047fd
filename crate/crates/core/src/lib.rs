//! Controlled-English documentation of code: parsing, translation to logic,
//! code-model ingestion and a consistency-checking reasoning engine.

pub mod cnl;
pub mod logic;
pub mod engine;
pub mod code_model;
