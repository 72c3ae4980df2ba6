//! Eigenvalue maps of Hermitian and normal matrix families.
//!
//! The crate samples matrix-valued functions on grids, computes their
//! ordered or unordered spectra node by node, and measures the result in
//! discrete Lebesgue, Sobolev and Hölder norms. The [`lab`] module builds
//! reproducible experiments on top, and [`cli`] exposes them as the
//! `eigenflow` binary. The guide in `book/` walks through the API.

pub mod assignment;
pub mod blockdiag;
pub mod charmap;
pub mod cli;
pub mod config;
pub mod eigen;
pub mod error;
pub mod io;
pub mod lab;
pub mod matrix;
pub mod random;
pub mod report;
pub mod sobolev;
pub mod unordered;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/block-diagonalization.md")]
    mod block_diagonalization {}
    #[doc = include_str!("../../../book/src/laboratory.md")]
    mod laboratory {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
