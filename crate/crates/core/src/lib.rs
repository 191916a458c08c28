//! Zero-sum invariants and extremal sequences over rank-two groups `C_n ⊕ C_mn`.

pub mod decomposition;
pub mod engine;
pub mod group;
pub mod lemmas;
pub mod search;
pub mod sequence;
pub mod structures;

pub use engine::{EngineConfig, EngineError, ReachTable};
pub use group::{Automorphism, Element, GroupError, GroupSpec};
pub use sequence::{Sequence, SequenceError};
