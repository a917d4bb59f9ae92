//! Benchmarks for specflow; see `benches/`.
