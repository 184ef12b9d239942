//! Propositional team logics: formulas evaluated over sets of valuations.
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`] parses, prints and classifies formulas.
//! * [`teams`] holds domains, teams and team families.
//! * [`semantics`] decides `X ⊨ φ` (lax and strict) and enumerates `⟦φ⟧`.
//! * [`analysis`] checks closure properties and classical substitutions.
//! * [`synthesis`] builds defining formulas for team families.
//! * [`proofs`] checks and generates natural deduction derivations.
//! * [`cli`] is the command line surface.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod limits;
pub mod proofs;
pub mod semantics;
pub mod synthesis;
pub mod syntax;
pub mod teams;

pub use error::{Error, Result};
pub use limits::Limits;
pub use semantics::EvalMode;
pub use syntax::{parse, Formula, Fragment};
pub use teams::{Domain, Team, TeamFamily};

/// Runs `f` on a thread with a large stack. Derivation trees and formula
/// folds recurse deeply enough to exhaust the default test-thread stack.
pub fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, f)
            .expect("spawn worker thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}
