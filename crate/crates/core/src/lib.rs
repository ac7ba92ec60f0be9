//! Weighted partial systems on compact spaces: graphs, conjugacy, Fock
//! representations and character spaces.

pub mod characters;
pub mod cli;
pub mod conjugacy;
pub mod corpus;
pub mod correspondence;
pub mod cycles;
pub mod error;
pub mod fock;
pub mod io;
pub mod random;
pub mod rational;
pub mod spaces;
pub mod wps;

pub use error::{Error, Result};
pub use rational::Rational;
