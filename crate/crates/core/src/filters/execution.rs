use serde::{Deserialize, Serialize};

use crate::corpus::{CodeSnippet, Dataset, LanguageTag};
use crate::minilang::{interpret, ExecBudget, ExecStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtherKind {
    Empty,
    Timeout,
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionOutcome {
    Pass,
    EnvironmentError,
    CompileError,
    RuntimeError,
    LanguageMismatch,
    Other(OtherKind),
}

/// Maps an interpreter status onto the taxonomy.
pub fn classify_status(status: ExecStatus) -> ExecutionOutcome {
    use ExecStatus::*;
    match status {
        Ok => ExecutionOutcome::Pass,
        EmptySource => ExecutionOutcome::Other(OtherKind::Empty),
        ForeignSyntax => ExecutionOutcome::LanguageMismatch,
        ParseFailure => ExecutionOutcome::CompileError,
        MissingCapability => ExecutionOutcome::EnvironmentError,
        UndefinedName | TypeFault | DivisionByZero | RecursionLimit => ExecutionOutcome::RuntimeError,
        StepLimitExceeded => ExecutionOutcome::Other(OtherKind::Timeout),
        OutputLimitExceeded | MemoryLimitExceeded | HostFault => ExecutionOutcome::Other(OtherKind::Unspecified),
    }
}

/// Runs the snippet in the sandbox and classifies the result.
///
/// Precedence when several signals apply: empty, language mismatch,
/// compile error, environment error, then whichever of runtime error or
/// timeout the run hits first. A snippet tagged with a language other than
/// the mini-language is a mismatch without being run.
pub fn classify_execution(snippet: &CodeSnippet, budget: ExecBudget) -> ExecutionOutcome {
    if snippet.source.trim().is_empty() {
        return ExecutionOutcome::Other(OtherKind::Empty);
    }
    if let LanguageTag::Other(_) = snippet.language_tag {
        return ExecutionOutcome::LanguageMismatch;
    }
    classify_status(interpret(&snippet.source, budget).status)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationStats {
    pub total: usize,
    pub pass: usize,
    pub environment_error: usize,
    pub compile_error: usize,
    pub runtime_error: usize,
    pub language_mismatch: usize,
    pub other_empty: usize,
    pub other_timeout: usize,
    pub other_unspecified: usize,
    pub acceptance_rate: f64,
}

impl ValidationStats {
    pub fn from_outcomes<'a>(outcomes: impl IntoIterator<Item = &'a ExecutionOutcome>) -> Self {
        let mut s = Self::default();
        for o in outcomes {
            s.total += 1;
            match o {
                ExecutionOutcome::Pass => s.pass += 1,
                ExecutionOutcome::EnvironmentError => s.environment_error += 1,
                ExecutionOutcome::CompileError => s.compile_error += 1,
                ExecutionOutcome::RuntimeError => s.runtime_error += 1,
                ExecutionOutcome::LanguageMismatch => s.language_mismatch += 1,
                ExecutionOutcome::Other(OtherKind::Empty) => s.other_empty += 1,
                ExecutionOutcome::Other(OtherKind::Timeout) => s.other_timeout += 1,
                ExecutionOutcome::Other(OtherKind::Unspecified) => s.other_unspecified += 1,
            }
        }
        s.acceptance_rate = if s.total == 0 { 0.0 } else { s.pass as f64 / s.total as f64 };
        s
    }

    pub fn other(&self) -> usize {
        self.other_empty + self.other_timeout + self.other_unspecified
    }

    /// Counts in the order pass, environment, compile, runtime, language
    /// mismatch, other.
    pub fn category_counts(&self) -> [usize; 6] {
        [
            self.pass,
            self.environment_error,
            self.compile_error,
            self.runtime_error,
            self.language_mismatch,
            self.other(),
        ]
    }
}

/// Keeps exactly the pairs whose snippet classifies as `Pass`, in order and
/// byte-for-byte.
pub fn execution_validate(ds: &Dataset, budget: ExecBudget) -> (Dataset, ValidationStats) {
    let outcomes: Vec<ExecutionOutcome> = ds.pairs.iter().map(|p| classify_execution(&p.snippet, budget)).collect();
    let kept = ds
        .pairs
        .iter()
        .zip(&outcomes)
        .filter(|(_, o)| **o == ExecutionOutcome::Pass)
        .map(|(p, _)| p.clone())
        .collect();
    (Dataset::new(ds.id.clone(), kept), ValidationStats::from_outcomes(&outcomes))
}
