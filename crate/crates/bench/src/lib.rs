//! Criterion benchmarks for the affdim kernels live in `benches/`.
