//! Cost-guided best-first bottom-up program enumeration.

pub mod bench;
pub mod cli;
pub mod costs;
pub mod enumerate;
pub mod grammar;
pub mod oracle;
pub mod pbe;
pub mod queues;
pub mod terms;
