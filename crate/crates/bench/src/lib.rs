//! Benchmarks for `aisfilter-core`; see `benches/`.

pub use aisfilter_core as core;
