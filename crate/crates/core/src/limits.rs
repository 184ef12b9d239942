use crate::error::{Error, Result};

/// Enumeration and derivation-size guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest domain whose teams may be enumerated exhaustively.
    pub max_vars_eval: usize,
    /// Largest domain for which derivations are generated.
    pub max_vars_proof: usize,
    /// Largest derivation (in rule nodes) that is built or checked.
    pub max_nodes: usize,
}

/// No guard may be raised past this: five variables already give 2^32 teams.
pub const HARD_MAX_VARS: usize = 5;

/// Teams whose rows are enumerated as subsets during evaluation.
pub const MAX_UNIVERSE_ROWS: usize = 20;

impl Default for Limits {
    fn default() -> Self {
        Limits { max_vars_eval: 4, max_vars_proof: 2, max_nodes: 1_000_000 }
    }
}

impl Limits {
    /// Overrides both variable guards; `TEAMLOG_MAX_VARS` goes through here.
    pub fn with_max_vars(self, n: usize) -> Self {
        Limits { max_vars_eval: n.min(HARD_MAX_VARS), max_vars_proof: n.min(HARD_MAX_VARS), ..self }
    }

    pub fn from_env(self) -> Self {
        match std::env::var("TEAMLOG_MAX_VARS").ok().and_then(|v| v.trim().parse().ok()) {
            Some(n) => self.with_max_vars(n),
            None => self,
        }
    }

    pub fn check_eval(&self, vars: usize) -> Result<()> {
        if vars > self.max_vars_eval.min(HARD_MAX_VARS) {
            return Err(Error::Guard(format!(
                "{vars} variables exceeds the enumeration limit of {}",
                self.max_vars_eval.min(HARD_MAX_VARS)
            )));
        }
        Ok(())
    }

    pub fn check_proof(&self, vars: usize) -> Result<()> {
        if vars > self.max_vars_proof {
            return Err(Error::Guard(format!(
                "{vars} variables exceeds the derivation generation limit of {}",
                self.max_vars_proof
            )));
        }
        Ok(())
    }
}
