//! Benchmarks for `flatness-core`; see `benches/`.
