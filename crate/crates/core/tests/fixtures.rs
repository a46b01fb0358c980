//! Checks on the bundled data files.

use std::path::PathBuf;

use privforge::corpus::load_dataset;
use privforge::evaluation::{evaluate_snippet, load_tasks};
use privforge::filters::{classify_execution, ExecutionOutcome, OtherKind};
use privforge::minilang::{summarize_ast, ExecBudget};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn benchmark_has_thirty_tasks_with_two_to_four_tests() {
    let tasks = load_tasks(data("tasks.jsonl")).unwrap();
    assert_eq!(tasks.len(), 30);
    for t in &tasks {
        assert!((2..=4).contains(&t.tests.len()), "{}", t.task_id);
    }
}

#[test]
fn canonical_solutions_pass_and_match_prompts() {
    let text = std::fs::read_to_string(data("tasks.jsonl")).unwrap();
    let tasks = load_tasks(data("tasks.jsonl")).unwrap();
    for (line, task) in text.lines().zip(&tasks) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let sol = v["canonical_solution"].as_str().unwrap();
        assert!(sol.starts_with(&task.signature), "{}", task.task_id);
        let out = evaluate_snippet(task, sol, ExecBudget::default());
        assert!(out.passed(), "{} failed tests {:?}", task.task_id, out.fail_tests);
        assert_eq!(summarize_ast(sol).unwrap(), task.prompt, "{}", task.task_id);
    }
}

fn label(outcome: ExecutionOutcome) -> &'static str {
    match outcome {
        ExecutionOutcome::Pass => "pass",
        ExecutionOutcome::EnvironmentError => "environment_error",
        ExecutionOutcome::CompileError => "compile_error",
        ExecutionOutcome::RuntimeError => "runtime_error",
        ExecutionOutcome::LanguageMismatch => "language_mismatch",
        ExecutionOutcome::Other(OtherKind::Empty) => "other_empty",
        ExecutionOutcome::Other(OtherKind::Timeout) => "other_timeout",
        ExecutionOutcome::Other(OtherKind::Unspecified) => "other_unspecified",
    }
}

#[test]
fn taxonomy_fixtures_classify_exactly() {
    let ds = load_dataset(data("taxonomy.jsonl")).unwrap();
    assert_eq!(ds.len(), 50);
    let mut wrong = Vec::new();
    for (i, p) in ds.iter().enumerate() {
        let expected = p.extra["expected"].as_str().unwrap();
        let got = label(classify_execution(&p.snippet, ExecBudget::default()));
        if got != expected {
            wrong.push(format!("#{i}: expected {expected}, got {got}"));
        }
    }
    assert!(wrong.is_empty(), "{wrong:#?}");
}
