//! Arithmetic over F_q, F_q[t] and F_q((1/t)), plus a reduction of small-solution
//! problems for forms over F_q((1/t)) to Chevalley systems over F_q.

pub mod error;
pub mod field;
pub mod io;
pub mod laurent;
pub mod lower_bound;
pub mod multipoly;
pub mod normic;
pub mod planner;
pub mod poly;
pub mod solver;

pub use error::{Error, Result};
