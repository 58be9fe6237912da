//! Spectral matrix cone projections (in progress).
