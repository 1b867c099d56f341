//! Criterion benchmarks for `ouldp`; see `benches/`.
