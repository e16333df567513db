//! Validate temporal plans, compile planning problems into networks of timed
//! automata, and build checkable runs certifying that valid plans reach the
//! encoding's goal.
//!
//! The crate is organised as a pipeline:
//!
//! * [`planning`] — the grounded temporal-planning model and the complete
//!   plan-validity semantics (an independent validator in its own right),
//! * [`ta`] — networks of timed automata with shared bounded integer
//!   variables: expressions, delay and internal steps, run replay,
//! * [`encode`] — the compilation from a planning problem to a network whose
//!   accepting runs correspond to valid plans,
//! * [`witness`] — the constructive direction: turn a valid plan into an
//!   accepting run of the encoded network, step by step,
//! * [`explore`] — bounded brute-force reachability over encoded networks,
//!   usable as an independent check on tiny instances.
//!
//! All temporal quantities are exact rationals ([`rat::Rat`]); nothing in the
//! crate uses floating point.

pub mod book;
pub mod encode;
pub mod explore;
pub mod planning;
pub mod rat;
pub mod ta;
pub mod witness;
