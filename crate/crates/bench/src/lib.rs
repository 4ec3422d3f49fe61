//! Criterion benchmarks for the channel solvers and traffic models live in `benches/`.
