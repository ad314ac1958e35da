use std::fmt;

use cde_core::analysis::AnalysisError;
use cde_core::format::FormatError;
use cde_core::{CodecError, DecodeError, FieldError, SimError};

pub const INPUT: u8 = 1;
pub const INFEASIBLE: u8 = 2;
pub const EXHAUSTED: u8 = 3;
pub const VERIFY_FAILED: u8 = 4;
pub const BUDGET: u8 = 5;

/// A failure carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn budget(required: u128, budget: u64) -> CliError {
    CliError {
        code: BUDGET,
        message: format!("work estimate {required} exceeds the budget of {budget}; raise --budget to proceed"),
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Infeasible { client } => CliError {
                code: INFEASIBLE,
                message: format!(
                    "infeasible: client {} cannot recover its missing packets even from every broadcast",
                    client + 1
                ),
            },
            AnalysisError::BudgetExceeded { required, budget: b } => budget(required, b),
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Analysis(a) => a.into(),
            CodecError::BudgetExceeded { required, budget: b } => budget(required, b),
            CodecError::SearchExhausted { attempts } => CliError {
                code: EXHAUSTED,
                message: format!(
                    "no encoding reaching the capability was found after {attempts} attempts; \
                     try a larger field with --field"
                ),
            },
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Codec(c) => c.into(),
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<DecodeError> for CliError {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::BudgetExceeded { required, budget: b } => budget(required, b),
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Decode(d) => d.into(),
            SimError::Codec(c) => c.into(),
            SimError::Analysis(a) => a.into(),
            SimError::BudgetExceeded { required, budget: b } => budget(required, b),
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}
