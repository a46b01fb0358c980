//! Step-limited tree-walking interpreter.
//!
//! The language has no file, network or clock primitives; the only way out
//! of the sandbox is the simulated `print` buffer. Every statement and every
//! expression evaluation costs one step.

use std::collections::HashMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, FunctionDef, Program, Stmt, StmtKind};
use super::foreign::{foreign_marker, is_blank_source};
use super::{parse_program, ParseErrorKind};

/// Capabilities `require(name)` accepts; anything else is an environment
/// failure.
pub const ALLOWED_CAPABILITIES: &[&str] = &["math", "text", "lists"];

/// Strings can double in size every step, so they get their own cap.
pub const MAX_STRING_BYTES: usize = 1 << 20;

const MAX_CALL_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecBudget {
    pub max_steps: u64,
    pub max_output_bytes: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("execution budget fields must be strictly positive")]
pub struct InvalidBudget;

impl ExecBudget {
    pub fn new(max_steps: u64, max_output_bytes: usize) -> Result<Self, InvalidBudget> {
        if max_steps == 0 || max_output_bytes == 0 {
            return Err(InvalidBudget);
        }
        Ok(Self {
            max_steps,
            max_output_bytes,
        })
    }
}

impl Default for ExecBudget {
    fn default() -> Self {
        Self {
            max_steps: 100_000,
            max_output_bytes: 64 * 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExecStatus {
    Ok,
    ParseFailure,
    UndefinedName,
    TypeFault,
    DivisionByZero,
    StepLimitExceeded,
    EmptySource,
    ForeignSyntax,
    /// `require(name)` asked for a capability outside the allow-list.
    MissingCapability,
    RecursionLimit,
    OutputLimitExceeded,
    /// A string value grew past [`MAX_STRING_BYTES`].
    MemoryLimitExceeded,
    HostFault,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecResult {
    pub status: ExecStatus,
    pub stdout: String,
    pub steps_used: u64,
    pub detail: Option<String>,
}

impl ExecResult {
    fn early(status: ExecStatus, detail: Option<String>) -> Self {
        Self {
            status,
            stdout: String::new(),
            steps_used: 0,
            detail,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == ExecStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Str(Rc<str>),
    Bool(bool),
    None,
}

impl Value {
    fn truthy(&self) -> bool {
        match self {
            Value::Int(i) => *i != 0,
            Value::Str(s) => !s.is_empty(),
            Value::Bool(b) => *b,
            Value::None => false,
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Str(_) => "str",
            Value::Bool(_) => "bool",
            Value::None => "None",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => f.write_str(s),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::None => f.write_str("None"),
        }
    }
}

#[derive(Debug)]
enum Fault {
    UndefinedName(String),
    Type(String),
    DivisionByZero,
    StepLimit,
    Capability(String),
    Recursion,
    Output,
    Memory,
}

impl Fault {
    fn status(&self) -> ExecStatus {
        match self {
            Fault::UndefinedName(_) => ExecStatus::UndefinedName,
            Fault::Type(_) => ExecStatus::TypeFault,
            Fault::DivisionByZero => ExecStatus::DivisionByZero,
            Fault::StepLimit => ExecStatus::StepLimitExceeded,
            Fault::Capability(_) => ExecStatus::MissingCapability,
            Fault::Recursion => ExecStatus::RecursionLimit,
            Fault::Output => ExecStatus::OutputLimitExceeded,
            Fault::Memory => ExecStatus::MemoryLimitExceeded,
        }
    }

    fn detail(&self) -> Option<String> {
        match self {
            Fault::UndefinedName(n) => Some(format!("name `{n}` is not defined")),
            Fault::Type(m) => Some(m.clone()),
            Fault::Capability(c) => Some(format!("capability `{c}` is unavailable")),
            _ => None,
        }
    }
}

enum Flow {
    Normal,
    Return(Value),
}

struct Machine {
    budget: ExecBudget,
    globals: HashMap<String, Value>,
    functions: HashMap<String, Rc<FunctionDef>>,
    frames: Vec<HashMap<String, Value>>,
    stdout: String,
    steps: u64,
}

impl Machine {
    fn new(budget: ExecBudget) -> Self {
        Self {
            budget,
            globals: HashMap::new(),
            functions: HashMap::new(),
            frames: Vec::new(),
            stdout: String::new(),
            steps: 0,
        }
    }

    fn tick(&mut self) -> Result<(), Fault> {
        if self.steps >= self.budget.max_steps {
            return Err(Fault::StepLimit);
        }
        self.steps += 1;
        Ok(())
    }

    fn run_block(&mut self, body: &[Stmt]) -> Result<Flow, Fault> {
        for stmt in body {
            if let Flow::Return(v) = self.exec(stmt)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn assign(&mut self, name: &str, value: Value) {
        match self.frames.last_mut() {
            Some(frame) => frame.insert(name.to_string(), value),
            None => self.globals.insert(name.to_string(), value),
        };
    }

    fn lookup(&self, name: &str) -> Result<Value, Fault> {
        self.frames
            .last()
            .and_then(|f| f.get(name))
            .or_else(|| self.globals.get(name))
            .cloned()
            .ok_or_else(|| Fault::UndefinedName(name.to_string()))
    }

    fn exec(&mut self, stmt: &Stmt) -> Result<Flow, Fault> {
        self.tick()?;
        match &stmt.kind {
            StmtKind::FunctionDef(def) => {
                self.functions
                    .insert(def.name.name.clone(), Rc::new(def.clone()));
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                if self.eval(cond)?.truthy() {
                    return self.run_block(then_body);
                } else if let Some(body) = else_body {
                    return self.run_block(body);
                }
            }
            StmtKind::For {
                var,
                range_args,
                body,
            } => {
                let mut bounds = Vec::with_capacity(2);
                for a in range_args {
                    match self.eval(a)? {
                        Value::Int(i) => bounds.push(i),
                        other => {
                            return Err(Fault::Type(format!(
                                "range() needs int, got {}",
                                other.type_name()
                            )))
                        }
                    }
                }
                let (lo, hi) = match bounds[..] {
                    [hi] => (0, hi),
                    [lo, hi] => (lo, hi),
                    _ => unreachable!("parser admits one or two range arguments"),
                };
                let mut i = lo;
                while i < hi {
                    self.tick()?;
                    self.assign(&var.name, Value::Int(i));
                    if let Flow::Return(v) = self.run_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                    i += 1;
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(cond)?.truthy() {
                    if let Flow::Return(v) = self.run_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => self.eval(e)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval(value)?;
                self.assign(&target.name, v);
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
            StmtKind::Print(args) => {
                let mut parts = Vec::with_capacity(args.len());
                for a in args {
                    parts.push(self.eval(a)?.to_string());
                }
                let line = parts.join(" ");
                if self.stdout.len() + line.len() + 1 > self.budget.max_output_bytes {
                    return Err(Fault::Output);
                }
                self.stdout.push_str(&line);
                self.stdout.push('\n');
            }
        }
        Ok(Flow::Normal)
    }

    fn eval(&mut self, expr: &Expr) -> Result<Value, Fault> {
        self.tick()?;
        match &expr.kind {
            ExprKind::Int(i) => Ok(Value::Int(*i)),
            ExprKind::Str(s) => Ok(Value::Str(Rc::from(s.as_str()))),
            ExprKind::Name(n) => self.lookup(n),
            ExprKind::Call { callee, args } => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(a)?);
                }
                self.call(&callee.name, values)
            }
            ExprKind::BinOp { op, lhs, rhs } => match op {
                BinOp::And => {
                    let l = self.eval(lhs)?;
                    if l.truthy() {
                        self.eval(rhs)
                    } else {
                        Ok(l)
                    }
                }
                BinOp::Or => {
                    let l = self.eval(lhs)?;
                    if l.truthy() {
                        Ok(l)
                    } else {
                        self.eval(rhs)
                    }
                }
                _ => {
                    let l = self.eval(lhs)?;
                    let r = self.eval(rhs)?;
                    binary(*op, l, r)
                }
            },
        }
    }

    fn call(&mut self, name: &str, args: Vec<Value>) -> Result<Value, Fault> {
        if name == "require" && !self.functions.contains_key(name) {
            return match args.as_slice() {
                [Value::Str(cap)] if ALLOWED_CAPABILITIES.contains(&cap.as_ref()) => Ok(Value::None),
                [Value::Str(cap)] => Err(Fault::Capability(cap.to_string())),
                _ => Err(Fault::Type("require() takes one string".into())),
            };
        }
        let def = self
            .functions
            .get(name)
            .cloned()
            .ok_or_else(|| Fault::UndefinedName(name.to_string()))?;
        if def.params.len() != args.len() {
            return Err(Fault::Type(format!(
                "{}() takes {} arguments, got {}",
                name,
                def.params.len(),
                args.len()
            )));
        }
        if self.frames.len() >= MAX_CALL_DEPTH {
            return Err(Fault::Recursion);
        }
        let frame = def
            .params
            .iter()
            .map(|p| p.name.clone())
            .zip(args)
            .collect();
        self.frames.push(frame);
        let flow = self.run_block(&def.body);
        self.frames.pop();
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::None),
        }
    }
}

fn binary(op: BinOp, l: Value, r: Value) -> Result<Value, Fault> {
    use Value::*;
    let overflow = || Fault::Type(format!("integer overflow in `{}`", op.symbol()));
    Ok(match (op, l, r) {
        (BinOp::Eq, a, b) => Bool(a == b),
        (BinOp::Ne, a, b) => Bool(a != b),
        (BinOp::Add, Int(a), Int(b)) => Int(a.checked_add(b).ok_or_else(overflow)?),
        (BinOp::Add, Str(a), Str(b)) => {
            if a.len() + b.len() > MAX_STRING_BYTES {
                return Err(Fault::Memory);
            }
            Str(Rc::from(format!("{a}{b}")))
        }
        (BinOp::Sub, Int(a), Int(b)) => Int(a.checked_sub(b).ok_or_else(overflow)?),
        (BinOp::Mul, Int(a), Int(b)) => Int(a.checked_mul(b).ok_or_else(overflow)?),
        (BinOp::Div | BinOp::Mod, Int(_), Int(0)) => return Err(Fault::DivisionByZero),
        (BinOp::Div, Int(a), Int(b)) => Int(floor_div(a, b).ok_or_else(overflow)?),
        (BinOp::Mod, Int(a), Int(b)) => Int(floor_mod(a, b).ok_or_else(overflow)?),
        (BinOp::Lt, Int(a), Int(b)) => Bool(a < b),
        (BinOp::Gt, Int(a), Int(b)) => Bool(a > b),
        (BinOp::Lt, Str(a), Str(b)) => Bool(a < b),
        (BinOp::Gt, Str(a), Str(b)) => Bool(a > b),
        (op, a, b) => {
            return Err(Fault::Type(format!(
                "unsupported operand types for {}: {} and {}",
                op.symbol(),
                a.type_name(),
                b.type_name()
            )))
        }
    })
}

fn floor_div(a: i64, b: i64) -> Option<i64> {
    let q = a.checked_div(b)?;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q.checked_sub(1)
    } else {
        Some(q)
    }
}

fn floor_mod(a: i64, b: i64) -> Option<i64> {
    let r = a.checked_rem(b)?;
    if r != 0 && ((r < 0) != (b < 0)) {
        Some(r + b)
    } else {
        Some(r)
    }
}

/// A literal `require("...")` naming an unavailable capability anywhere in
/// the program. Probed before execution so environment failures win over
/// runtime faults.
fn missing_capability(program: &Program) -> Option<String> {
    fn in_expr(e: &Expr) -> Option<String> {
        match &e.kind {
            ExprKind::Call { callee, args } => {
                if callee.name == "require" {
                    if let [Expr {
                        kind: ExprKind::Str(cap),
                        ..
                    }] = args.as_slice()
                    {
                        if !ALLOWED_CAPABILITIES.contains(&cap.as_str()) {
                            return Some(cap.clone());
                        }
                    }
                }
                args.iter().find_map(in_expr)
            }
            ExprKind::BinOp { lhs, rhs, .. } => in_expr(lhs).or_else(|| in_expr(rhs)),
            _ => None,
        }
    }
    fn in_block(body: &[Stmt]) -> Option<String> {
        body.iter().find_map(|s| match &s.kind {
            StmtKind::FunctionDef(def) => in_block(&def.body),
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => in_expr(cond)
                .or_else(|| in_block(then_body))
                .or_else(|| else_body.as_deref().and_then(in_block)),
            StmtKind::For {
                range_args, body, ..
            } => range_args.iter().find_map(in_expr).or_else(|| in_block(body)),
            StmtKind::While { cond, body } => in_expr(cond).or_else(|| in_block(body)),
            StmtKind::Return(v) => v.as_ref().and_then(in_expr),
            StmtKind::Assign { value, .. } => in_expr(value),
            StmtKind::Expr(e) => in_expr(e),
            StmtKind::Print(args) => args.iter().find_map(in_expr),
        })
    }
    in_block(&program.body)
}

/// Pre-execution checks shared by [`interpret`] and [`run_with_tests`].
fn prepare(source: &str) -> Result<Program, ExecResult> {
    if is_blank_source(source) {
        return Err(ExecResult::early(ExecStatus::EmptySource, None));
    }
    if let Some(marker) = foreign_marker(source) {
        return Err(ExecResult::early(
            ExecStatus::ForeignSyntax,
            Some(format!("foreign marker `{marker}`")),
        ));
    }
    let program = parse_program(source).map_err(|e| {
        let status = match e.kind {
            ParseErrorKind::EmptySource => ExecStatus::EmptySource,
            ParseErrorKind::Syntax => ExecStatus::ParseFailure,
        };
        ExecResult::early(status, Some(e.to_string()))
    })?;
    if let Some(cap) = missing_capability(&program) {
        return Err(ExecResult::early(
            ExecStatus::MissingCapability,
            Fault::Capability(cap).detail(),
        ));
    }
    Ok(program)
}

fn guarded<T>(f: impl FnOnce() -> T) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).map_err(|payload| {
        payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "interpreter panic".into())
    })
}

fn finish(machine: &Machine, outcome: Result<Flow, Fault>) -> ExecResult {
    let (status, detail) = match outcome {
        Ok(_) => (ExecStatus::Ok, None),
        Err(f) => (f.status(), f.detail()),
    };
    ExecResult {
        status,
        stdout: machine.stdout.clone(),
        steps_used: machine.steps,
        detail,
    }
}

/// Run `source` inside the sandbox. Every failure is reported through
/// [`ExecResult::status`]; `HostFault` only appears if the interpreter
/// itself panics.
pub fn interpret(source: &str, budget: ExecBudget) -> ExecResult {
    let program = match prepare(source) {
        Ok(p) => p,
        Err(early) => return early,
    };
    guarded(|| {
        let mut m = Machine::new(budget);
        let outcome = m.run_block(&program.body);
        finish(&m, outcome)
    })
    .unwrap_or_else(|msg| ExecResult::early(ExecStatus::HostFault, Some(msg)))
}

/// Module execution followed by one `print(<call>)` per test, all in the
/// same environment. Each test gets a fresh step budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRun {
    pub module: ExecResult,
    /// `None` when the tests never ran because the module failed.
    pub tests: Option<Vec<ExecResult>>,
}

pub fn run_with_tests(source: &str, calls: &[String], budget: ExecBudget) -> TestRun {
    let program = match prepare(source) {
        Ok(p) => p,
        Err(early) => {
            return TestRun {
                module: early,
                tests: None,
            }
        }
    };
    guarded(|| {
        let mut m = Machine::new(budget);
        let outcome = m.run_block(&program.body);
        let module = finish(&m, outcome);
        if !module.is_ok() {
            return TestRun {
                module,
                tests: None,
            };
        }
        let tests = calls
            .iter()
            .map(|call| {
                m.stdout.clear();
                m.steps = 0;
                match parse_program(&format!("print({call})\n")) {
                    Ok(test) => {
                        let outcome = m.run_block(&test.body);
                        finish(&m, outcome)
                    }
                    Err(e) => ExecResult::early(ExecStatus::ParseFailure, Some(e.to_string())),
                }
            })
            .collect();
        TestRun {
            module,
            tests: Some(tests),
        }
    })
    .unwrap_or_else(|msg| TestRun {
        module: ExecResult::early(ExecStatus::HostFault, Some(msg)),
        tests: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> ExecResult {
        interpret(src, ExecBudget::default())
    }

    #[test]
    fn arithmetic_and_print() {
        let r = run("x = 2\nprint(x * 3)");
        assert_eq!(r.status, ExecStatus::Ok);
        assert_eq!(r.stdout, "6\n");
    }

    #[test]
    fn undefined_name() {
        assert_eq!(run("print(y)").status, ExecStatus::UndefinedName);
        assert_eq!(run("f(1)").status, ExecStatus::UndefinedName);
    }

    #[test]
    fn infinite_loop_hits_step_limit() {
        let budget = ExecBudget::new(1000, 1024).unwrap();
        let r = interpret("while 1:\n    x = 1", budget);
        assert_eq!(r.status, ExecStatus::StepLimitExceeded);
        assert_eq!(r.steps_used, 1000);
    }

    #[test]
    fn functions_and_recursion() {
        let src = "def fact(n):\n    if n < 2:\n        return 1\n    return n * fact(n - 1)\nprint(fact(10))";
        assert_eq!(run(src).stdout, "3628800\n");
        let deep = "def f(n):\n    return f(n + 1)\nf(0)";
        assert_eq!(run(deep).status, ExecStatus::RecursionLimit);
    }

    #[test]
    fn python_division_semantics() {
        assert_eq!(run("print(7 / 2, -7 / 2, 7 % 3, -7 % 3)").stdout, "3 -4 1 2\n");
        assert_eq!(run("print(1 / 0)").status, ExecStatus::DivisionByZero);
        assert_eq!(run("print(1 % 0)").status, ExecStatus::DivisionByZero);
    }

    #[test]
    fn type_faults() {
        assert_eq!(run("print(\"a\" + 1)").status, ExecStatus::TypeFault);
        assert_eq!(run("def f(a):\n    return a\nf()").status, ExecStatus::TypeFault);
        assert_eq!(
            run("print(9223372036854775807 + 1)").status,
            ExecStatus::TypeFault
        );
    }

    #[test]
    fn strings_booleans_and_logic() {
        let r = run("s = \"ab\" + 'c'\nprint(s, s == \"abc\", 0 or \"x\", 1 and 0)");
        assert_eq!(r.stdout, "abc True x 0\n");
    }

    #[test]
    fn globals_visible_in_functions_locals_are_not() {
        let r = run("k = 5\ndef g(a):\n    b = a + k\n    return b\nprint(g(1))\nprint(b)");
        assert_eq!(r.stdout, "6\n");
        assert_eq!(r.status, ExecStatus::UndefinedName);
    }

    #[test]
    fn require_capabilities() {
        assert_eq!(run("require(\"math\")\nprint(1)").status, ExecStatus::Ok);
        let r = run("print(1 / 0)\nrequire(\"numpy_like\")");
        assert_eq!(r.status, ExecStatus::MissingCapability);
        let dynamic = run("c = \"gpu\"\nrequire(c)");
        assert_eq!(dynamic.status, ExecStatus::MissingCapability);
    }

    #[test]
    fn output_limit() {
        let budget = ExecBudget::new(100_000, 16).unwrap();
        let r = interpret("for i in range(100):\n    print(i)", budget);
        assert_eq!(r.status, ExecStatus::OutputLimitExceeded);
        assert!(r.stdout.len() <= 16);
    }

    #[test]
    fn string_growth_is_capped() {
        let r = run("s = \"ab\"\nfor i in range(64):\n    s = s + s");
        assert_eq!(r.status, ExecStatus::MemoryLimitExceeded);
    }

    #[test]
    fn early_statuses() {
        assert_eq!(run("").status, ExecStatus::EmptySource);
        assert_eq!(run("int x = 1;").status, ExecStatus::ForeignSyntax);
        assert_eq!(run("x = = 1").status, ExecStatus::ParseFailure);
    }

    #[test]
    fn deterministic() {
        let src = "t = 0\nfor i in range(50):\n    t = t + i * i\nprint(t)";
        assert_eq!(run(src), run(src));
    }

    #[test]
    fn tests_share_the_module_environment() {
        let src = "def add(a, b):\n    return a + b\nprint(\"loaded\")";
        let calls = vec!["add(1, 2)".to_string(), "add(\"a\", \"b\")".to_string(), "nope(1)".to_string()];
        let run = run_with_tests(src, &calls, ExecBudget::default());
        assert_eq!(run.module.stdout, "loaded\n");
        let tests = run.tests.unwrap();
        assert_eq!(tests[0].stdout, "3\n");
        assert_eq!(tests[1].stdout, "ab\n");
        assert_eq!(tests[2].status, ExecStatus::UndefinedName);
    }
}
