//! Criterion benchmarks for the corrlab solvers; see `benches/`.
