//! Criterion benchmarks for the cosetlab kernels live under `benches/`.
