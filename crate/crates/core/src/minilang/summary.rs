//! Deterministic English description of a program's shape.
//!
//! Clauses appear in a fixed order and are joined with `"; "`:
//! functions, assignments, loops, conditionals, returns, calls, prints and
//! free names read from the environment.

use std::collections::BTreeSet;

use super::ast::{Expr, ExprKind, Program, Stmt, StmtKind};
use super::{parse_program, ParseError};

#[derive(Default)]
struct Facts {
    functions: Vec<(String, usize)>,
    defined: BTreeSet<String>,
    assigned: Vec<String>,
    bound: BTreeSet<String>,
    loops: usize,
    conditionals: usize,
    /// Strongest return form seen: 0 none, 1 bare, 2 constant, 3 variable, 4 expression.
    returns: u8,
    calls: Vec<String>,
    prints: bool,
    reads: Vec<String>,
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

impl Facts {
    fn block(&mut self, body: &[Stmt]) {
        body.iter().for_each(|s| self.stmt(s));
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::FunctionDef(def) => {
                self.functions.push((def.name.name.clone(), def.params.len()));
                self.defined.insert(def.name.name.clone());
                for p in &def.params {
                    self.bound.insert(p.name.clone());
                }
                self.block(&def.body);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.conditionals += 1;
                self.expr(cond);
                self.block(then_body);
                if let Some(b) = else_body {
                    self.block(b);
                }
            }
            StmtKind::For {
                var,
                range_args,
                body,
            } => {
                self.loops += 1;
                self.bound.insert(var.name.clone());
                range_args.iter().for_each(|e| self.expr(e));
                self.block(body);
            }
            StmtKind::While { cond, body } => {
                self.loops += 1;
                self.expr(cond);
                self.block(body);
            }
            StmtKind::Return(value) => {
                let form = match value.as_ref().map(|e| &e.kind) {
                    None => 1,
                    Some(ExprKind::Int(_) | ExprKind::Str(_)) => 2,
                    Some(ExprKind::Name(_)) => 3,
                    Some(_) => 4,
                };
                self.returns = self.returns.max(form);
                if let Some(e) = value {
                    self.expr(e);
                }
            }
            StmtKind::Assign { target, value } => {
                push_unique(&mut self.assigned, &target.name);
                self.bound.insert(target.name.clone());
                self.expr(value);
            }
            StmtKind::Expr(e) => self.expr(e),
            StmtKind::Print(args) => {
                self.prints = true;
                args.iter().for_each(|e| self.expr(e));
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Name(n) => push_unique(&mut self.reads, n),
            ExprKind::Call { callee, args } => {
                push_unique(&mut self.calls, &callee.name);
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::BinOp { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
            ExprKind::Int(_) | ExprKind::Str(_) => {}
        }
    }

    fn render(&self) -> String {
        fn plural(n: usize, word: &str) -> String {
            if n == 1 {
                format!("1 {word}")
            } else {
                format!("{n} {word}s")
            }
        }
        let mut clauses = Vec::new();
        for (name, arity) in &self.functions {
            let params = match arity {
                0 => "no parameters".to_string(),
                n => plural(*n, "parameter"),
            };
            clauses.push(format!("defines function {name} with {params}"));
        }
        if !self.assigned.is_empty() {
            clauses.push(format!("assigns {}", plural(self.assigned.len(), "variable")));
        }
        if self.loops > 0 {
            clauses.push(format!("contains {}", plural(self.loops, "loop")));
        }
        if self.conditionals > 0 {
            clauses.push(format!("contains {}", plural(self.conditionals, "conditional")));
        }
        match self.returns {
            0 => {}
            1 => clauses.push("returns nothing".into()),
            2 => clauses.push("returns a constant".into()),
            3 => clauses.push("returns a variable".into()),
            _ => clauses.push("returns an expression".into()),
        }
        let calls: Vec<&str> = self
            .calls
            .iter()
            .filter(|c| self.defined.contains(*c))
            .map(String::as_str)
            .collect();
        if !calls.is_empty() {
            clauses.push(format!("calls {}", calls.join(", ")));
        }
        if self.prints {
            clauses.push("prints output".into());
        }
        let free: Vec<&str> = self
            .reads
            .iter()
            .filter(|r| !self.bound.contains(*r))
            .map(String::as_str)
            .collect();
        if !free.is_empty() {
            clauses.push(format!("reads {}", free.join(", ")));
        }
        if clauses.is_empty() {
            clauses.push("does nothing observable".into());
        }
        clauses.join("; ")
    }
}

fn summarize_program(program: &Program) -> String {
    let mut facts = Facts::default();
    facts.block(&program.body);
    facts.render()
}

pub fn summarize_ast(source: &str) -> Result<String, ParseError> {
    parse_program(source).map(|p| summarize_program(&p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_function() {
        assert_eq!(
            summarize_ast("def add(a, b):\n    return a + b").unwrap(),
            "defines function add with 2 parameters; returns an expression"
        );
    }

    #[test]
    fn printing_loop() {
        assert_eq!(
            summarize_ast("for i in range(3):\n    print(i)").unwrap(),
            "contains 1 loop; prints output"
        );
    }

    #[test]
    fn safe_to_move() {
        let src = "def is_safe_to_move(dest, loc, close_enemy):\n    move_in = 1\n    for enemy in range(dest):\n        if enemy == close_enemy:\n            if enemy != loc:\n                move_in = 0\n    return move_in == 1\n";
        let s = summarize_ast(src).unwrap();
        assert!(s.contains("defines function is_safe_to_move with 3 parameters"), "{s}");
        assert!(s.contains("1 loop"), "{s}");
        assert!(s.contains("2 conditionals"), "{s}");
        assert!(s.contains("returns"), "{s}");
    }

    #[test]
    fn free_names_and_calls() {
        let s = summarize_ast("def f():\n    return limit\nx = f()\nprint(x)").unwrap();
        assert_eq!(
            s,
            "defines function f with no parameters; assigns 1 variable; returns a variable; calls f; prints output; reads limit"
        );
    }

    #[test]
    fn deterministic_and_propagates_errors() {
        let src = "x = 1\ny = x";
        assert_eq!(summarize_ast(src).unwrap(), summarize_ast(src).unwrap());
        assert!(summarize_ast("def (").is_err());
    }
}
