pub mod curve;
pub mod decompose;
pub mod error;
pub mod float;
pub mod generators;
pub mod geometry;
pub mod harness;
pub mod incidence;
pub mod io;
pub mod rat;
pub mod rng;
mod scaled;
pub mod stats;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/incidence.md")]
    mod incidence {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
