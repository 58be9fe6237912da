//! Seeded generators for the benchmark problem families.

pub mod rng;
