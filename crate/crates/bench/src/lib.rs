//! Criterion benchmarks for cavity-core live in `benches/`.
