//! Criterion benchmarks for the estimation engines live in `benches/`.
