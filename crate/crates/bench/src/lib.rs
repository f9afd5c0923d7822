//! Criterion benchmarks for the sampling and solver kernels; see `benches/`.
