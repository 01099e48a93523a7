//! Exact computations with minimal Sullivan algebras over the rationals.
//!
//! The crate is organised bottom-up: [`gca`] implements free graded-commutative
//! algebras, [`sullivan`] adds differentials, [`cohomology`] does the exact
//! linear algebra, [`endo`] analyses self-maps and their mapping degrees, and
//! [`flexcert`] builds scaling morphisms from lower gradings. The [`dsl`],
//! [`catalog`], [`report`] and [`cli`] modules form the command-line front end.

pub mod catalog;
pub mod cli;
pub mod cohomology;
pub mod dsl;
pub mod endo;
pub mod flexcert;
pub mod gca;
pub mod linalg;
pub mod poly;
pub mod rational;
pub mod report;
pub mod sullivan;

pub use gca::{Element, FreeGca, Generator, Monomial};
pub use rational::Q;
pub use sullivan::SullivanAlgebra;
