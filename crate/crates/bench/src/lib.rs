//! Criterion benchmarks for gue-expand; see `benches/`.
