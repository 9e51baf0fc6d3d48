//! Grammar induction over small corpora.
//!
//! Words are assigned fixed-width binary category codes in a quasigroup with
//! identity; a sentence parses when adjacent codes contract, layer by layer,
//! down to the identity at the root of a parse tree. Finding codes and trees
//! for a whole corpus at once is posed as a feasibility problem over two
//! constraint sets and solved by the relaxed-reflect-reflect iteration.
//! Production rules read off the learned trees drive sentence generation and
//! perplexity reporting.

pub mod algebra;
pub mod corpus;
pub mod io;
pub mod rules;
pub mod solver;
pub mod synth;
pub mod train;

pub use algebra::{AlgebraConfig, CategoryCode, CategoryValue};
pub use corpus::{Corpus, Sentence};
pub use solver::{Solution, SolverConfig};
