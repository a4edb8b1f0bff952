//! Shared fixtures for the benchmark targets live in `benches/`.
