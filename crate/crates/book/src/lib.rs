//! The chapters of `book/` as documentation. `cargo test --doc -p wps-book`
//! runs every Rust snippet in the guide against the current library.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/systems.md")]
pub mod systems {}
#[doc = include_str!("../../../book/src/conjugacy.md")]
pub mod conjugacy {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/finite.md")]
pub mod finite {}
#[doc = include_str!("../../../book/src/correspondence.md")]
pub mod correspondence {}
#[doc = include_str!("../../../book/src/fock.md")]
pub mod fock {}
#[doc = include_str!("../../../book/src/characters.md")]
pub mod characters {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
