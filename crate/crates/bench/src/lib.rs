//! Criterion benchmarks for the hadamard toolkit live in `benches/`.
