//! Criterion benchmarks for the `reebsphere` kernels; see `benches/kernels.rs`.
