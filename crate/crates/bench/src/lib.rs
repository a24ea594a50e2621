//! Criterion benchmarks for agethresh-core; see `benches/`.
