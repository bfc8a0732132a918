//! Motivic DT invariants of the (−2)-curve quiver with potential, computed symbolically
//! and checked against finite-field point counts.

pub mod dt;
pub mod dtcli;
pub mod error;
pub mod ff;
pub mod fqcount;
pub mod lambda;
pub mod mring;
pub mod quiver;
pub mod realize;
pub mod series;
