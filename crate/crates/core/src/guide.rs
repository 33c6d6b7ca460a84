//! Book chapters compiled as doctests so their snippets stay in sync.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
mod model {}
#[doc = include_str!("../../../book/src/spectra.md")]
mod spectra {}
#[doc = include_str!("../../../book/src/correlators.md")]
mod correlators {}
#[doc = include_str!("../../../book/src/transport.md")]
mod transport {}
#[doc = include_str!("../../../book/src/verification.md")]
mod verification {}
#[doc = include_str!("../../../book/src/free-fermions.md")]
mod free_fermions {}
#[doc = include_str!("../../../README.md")]
mod readme {}
