//! Kato graphs of finite groups and censuses of Mumford–Hurwitz chart classes.

pub mod bass_serre;
pub mod census;
pub mod cli;
pub mod group;
pub mod io;
pub mod kato;

pub type Rational = num_rational::BigRational;
