//! Shared fixtures for the criterion benchmarks.

use framed_core::catalog::builtin;
use framed_core::surface::SurfaceSpec;
use std::collections::BTreeMap;

/// Surface of a built-in example at its default parameters.
pub fn example(name: &str) -> SurfaceSpec {
    builtin(name, &BTreeMap::new())
        .expect("built-in example")
        .surface
}
