//! Toolkit for unary deterministic pushdown automata.
//!
//! All languages here live over the one-letter alphabet `{a}`, where a word
//! is just its length. The crate models pushdown machines in a normal form
//! (reads never touch the stack, pushes add one symbol, the bottom symbol is
//! immortal), simulates them with sound and complete loop detection, converts
//! them to minimal unary finite automata and to small context-free grammars,
//! and ships the benchmark families that exhibit the exponential gaps between
//! these representations in both directions.
//!
//! Everything is a pure function over immutable values; concurrent use is
//! safe and outputs are byte-stable.

pub mod analysis;
pub mod convert;
pub mod dpda;
pub mod families;
pub mod grammar;
pub mod immediate;
pub mod sim;
pub mod udfa;

pub use convert::to_dfa;
pub use dpda::{Action, Dpda, InputTag, Mode, Rule, Violation, ViolationKind};
pub use grammar::Cfg;
pub use immediate::immediate_accept;
pub use sim::{accepts, detect_pump, Budget, Configuration, RunShape};
pub use udfa::{udfa_equal, UnaryDfa};
