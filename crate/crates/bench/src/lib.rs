//! Benchmarks for the homonym core; see `benches/`.
