//! Numerics for signed ("extraordinary") probability objects.

pub mod error;
pub mod grid;
pub mod measure;
pub mod mixtures;
pub mod quad;
pub mod quasibayes;
pub mod series;
pub mod tol;
pub mod transforms;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/duality.md")]
    mod duality {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/quasibayes.md")]
    mod quasibayes {}
    #[doc = include_str!("../../../book/src/wigner.md")]
    mod wigner {}
    #[doc = include_str!("../../../book/src/verify.md")]
    mod verify {}
}
