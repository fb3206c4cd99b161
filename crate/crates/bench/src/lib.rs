//! Criterion benchmarks for the `roelab` hot paths; see `benches/kernels.rs`.
