pub mod benchmarks;
pub mod contour2d;
pub mod diffusion;
pub mod error;
pub mod harmonics;
pub mod mesh;
pub mod operators;
pub mod solver;
pub mod spheroidal;

pub use error::{Error, ErrorClass, Result};

// The guide's snippets run as doctests, one module per chapter so a failure
// points at its file.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/domains.md")]
    mod domains {}
    #[doc = include_str!("../../../book/src/harmonics.md")]
    mod harmonics {}
    #[doc = include_str!("../../../book/src/remeshing.md")]
    mod remeshing {}
    #[doc = include_str!("../../../book/src/anisotropy.md")]
    mod anisotropy {}
    #[doc = include_str!("../../../book/src/quality.md")]
    mod quality {}
    #[doc = include_str!("../../../book/src/contours.md")]
    mod contours {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
