//! pass@1, compile pass rate and execution pass rate.
//!
//! A task fails to compile when its generated code is empty, foreign,
//! unparseable, or never defines the entry function; such a task is
//! recorded as `status = fail` with an empty `fail_tests` list. Otherwise
//! every test runs, and a module that crashes fails all of them. A task
//! passes only when every test prints the expected value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::DatasetError;
use crate::lm::{LmConfig, LmError, LmParams};
use crate::minilang::{
    foreign_marker, is_blank_source, parse_program, run_with_tests, ExecBudget, StmtKind,
};
use crate::synth::{complete, SamplingConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    /// A call expression, e.g. `add(2, 3)`.
    pub call: String,
    /// What `print(call)` writes, without the trailing newline.
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkTask {
    pub task_id: String,
    pub prompt: String,
    /// Function the tests call; it must be defined at top level.
    pub entry_point: String,
    /// Opening of the solution (usually the `def` line) that the model
    /// continues from; empty when the model writes everything.
    #[serde(default)]
    pub signature: String,
    pub tests: Vec<TestCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_id: String,
    pub status: TaskStatus,
    /// Indices of failed tests. Empty together with `Fail` means the code
    /// did not compile.
    pub fail_tests: Vec<usize>,
    pub code: String,
}

impl TaskOutcome {
    pub fn compiled(&self) -> bool {
        self.status == TaskStatus::Pass || !self.fail_tests.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.status == TaskStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_tasks: usize,
    pub pass_at_1: f64,
    pub compile_pass_rate: f64,
    /// Passed over compiled; 0 when nothing compiled.
    pub execution_pass_rate: f64,
    pub outcomes: Vec<TaskOutcome>,
}

impl EvalReport {
    pub fn from_outcomes(outcomes: Vec<TaskOutcome>) -> Self {
        let n = outcomes.len();
        let passed = outcomes.iter().filter(|o| o.passed()).count();
        let compiled = outcomes.iter().filter(|o| o.compiled()).count();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        Self {
            n_tasks: n,
            pass_at_1: ratio(passed, n),
            compile_pass_rate: ratio(compiled, n),
            execution_pass_rate: ratio(passed, compiled),
            outcomes,
        }
    }
}

fn defines_entry(code: &str, entry: &str) -> bool {
    match parse_program(code) {
        Ok(prog) => prog
            .body
            .iter()
            .any(|s| matches!(&s.kind, StmtKind::FunctionDef(f) if f.name.name == entry)),
        Err(_) => false,
    }
}

pub fn evaluate_snippet(task: &BenchmarkTask, code: &str, budget: ExecBudget) -> TaskOutcome {
    let outcome = |status, fail_tests| TaskOutcome {
        task_id: task.task_id.clone(),
        status,
        fail_tests,
        code: code.to_string(),
    };
    if is_blank_source(code) || foreign_marker(code).is_some() || !defines_entry(code, &task.entry_point) {
        return outcome(TaskStatus::Fail, Vec::new());
    }
    let calls: Vec<String> = task.tests.iter().map(|t| t.call.clone()).collect();
    let run = run_with_tests(code, &calls, budget);
    let failed: Vec<usize> = match &run.tests {
        None => (0..task.tests.len()).collect(),
        Some(results) => results
            .iter()
            .zip(&task.tests)
            .enumerate()
            .filter(|(_, (r, t))| !(r.is_ok() && r.stdout.strip_suffix('\n') == Some(t.expected.as_str())))
            .map(|(i, _)| i)
            .collect(),
    };
    if failed.is_empty() {
        outcome(TaskStatus::Pass, failed)
    } else {
        outcome(TaskStatus::Fail, failed)
    }
}

/// Greedy-decodes one snippet per task, continuing from its signature, and
/// scores it.
pub fn run_benchmark(
    params: &LmParams,
    cfg: &LmConfig,
    tasks: &[BenchmarkTask],
    max_tokens: usize,
    budget: ExecBudget,
) -> Result<EvalReport, LmError> {
    let sampling = SamplingConfig::greedy(max_tokens);
    let mut outcomes = Vec::with_capacity(tasks.len());
    for task in tasks {
        let record = complete(params, cfg, &task.prompt, &task.signature, &sampling)?;
        outcomes.push(evaluate_snippet(task, &record.snippet.source, budget));
    }
    Ok(EvalReport::from_outcomes(outcomes))
}

/// One task per JSON line.
pub fn load_tasks(path: impl AsRef<Path>) -> Result<Vec<BenchmarkTask>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut tasks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let task: BenchmarkTask = serde_json::from_str(line).map_err(|e| DatasetError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if task.tests.is_empty() {
            return Err(DatasetError::InvalidField {
                line: i + 1,
                field: "tests",
                expected: "a non-empty list",
            });
        }
        tasks.push(task);
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn task(id: &str) -> BenchmarkTask {
        BenchmarkTask {
            task_id: id.into(),
            prompt: "add two numbers".into(),
            entry_point: "add".into(),
            signature: String::new(),
            tests: vec![
                TestCase { call: "add(1, 2)".into(), expected: "3".into() },
                TestCase { call: "add(5, 0)".into(), expected: "5".into() },
            ],
        }
    }

    fn eval(code: &str) -> TaskOutcome {
        evaluate_snippet(&task("t"), code, ExecBudget::default())
    }

    #[test]
    fn status_rules() {
        let ok = eval("def add(a, b):\n    return a + b\n");
        assert!(ok.passed() && ok.compiled());

        for broken in ["", "def add(a, b:\n", "int add() { }", "def sub(a, b):\n    return a - b\n"] {
            let o = eval(broken);
            assert_eq!((o.status, o.fail_tests.len()), (TaskStatus::Fail, 0), "{broken:?}");
            assert!(!o.compiled());
        }

        let wrong = eval("def add(a, b):\n    return a - b\n");
        assert_eq!(wrong.fail_tests, vec![0]);
        assert!(wrong.compiled() && !wrong.passed());

        let crash = eval("def add(a, b):\n    return a + b\nprint(undefined)\n");
        assert_eq!(crash.fail_tests, vec![0, 1]);

        let env = eval("require(\"gpu\")\ndef add(a, b):\n    return a + b\n");
        assert_eq!(env.fail_tests, vec![0, 1]);
    }

    #[test]
    fn two_pass_one_compile_failure() {
        let outcomes = vec![
            eval("def add(a, b):\n    return a + b\n"),
            eval("def add(x, y):\n    return y + x\n"),
            eval("def add(:\n"),
        ];
        let r = EvalReport::from_outcomes(outcomes);
        assert!((r.pass_at_1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.compile_pass_rate - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.execution_pass_rate, 1.0);
    }

    #[test]
    fn identities_on_random_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let n = rng.random_range(1..40);
            let outcomes: Vec<TaskOutcome> = (0..n)
                .map(|i| {
                    let (status, fail_tests) = match rng.random_range(0..3) {
                        0 => (TaskStatus::Pass, vec![]),
                        1 => (TaskStatus::Fail, vec![]),
                        _ => (TaskStatus::Fail, vec![0]),
                    };
                    TaskOutcome { task_id: i.to_string(), status, fail_tests, code: String::new() }
                })
                .collect();
            let r = EvalReport::from_outcomes(outcomes.clone());
            assert!(r.pass_at_1 <= r.compile_pass_rate);
            if r.compile_pass_rate > 0.0 {
                assert!((r.execution_pass_rate - r.pass_at_1 / r.compile_pass_rate).abs() < 1e-12);
            }
            // recount straight from the status fields
            let pass = outcomes.iter().filter(|o| o.status == TaskStatus::Pass).count();
            let compile_fail = outcomes
                .iter()
                .filter(|o| o.status == TaskStatus::Fail && o.fail_tests.is_empty())
                .count();
            assert_eq!(r.pass_at_1, pass as f64 / n as f64);
            assert_eq!(r.compile_pass_rate, (n - compile_fail) as f64 / n as f64);
        }
    }
}
