//! Criterion benchmarks for the nipfrac kernels; see `benches/kernels.rs`.
