//! Typed syntax tree and the generic [`SyntaxNode`] view over it.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Byte range `[start, end)` into the parsed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start, other.end)
    }

    pub fn range(self) -> Range<usize> {
        self.start..self.end
    }

    pub fn contains(self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Gt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Str(String),
    Name(String),
    Call { callee: Ident, args: Vec<Expr> },
    BinOp { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    FunctionDef(FunctionDef),
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    For {
        var: Ident,
        range_args: Vec<Expr>,
        body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Assign {
        target: Ident,
        value: Expr,
    },
    Expr(Expr),
    Print(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Module,
    FunctionDef,
    If,
    For,
    While,
    Return,
    Assign,
    ExprStmt,
    Call,
    BinOp,
    Name,
    Literal,
    Print,
}

impl NodeKind {
    /// Block-introducing and control-flow kinds.
    pub fn is_structural(self) -> bool {
        matches!(
            self,
            NodeKind::FunctionDef | NodeKind::If | NodeKind::For | NodeKind::While | NodeKind::Return
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Untyped tree: kind, span and ordered children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    pub span: Span,
    pub children: Vec<SyntaxNode>,
}

impl SyntaxNode {
    fn leaf(kind: NodeKind, span: Span) -> Self {
        Self {
            kind,
            span,
            children: Vec::new(),
        }
    }

    /// Pre-order traversal.
    pub fn walk(&self, visit: &mut impl FnMut(&SyntaxNode)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    /// Compact `Kind[child, child]` rendering used in fixtures.
    pub fn shape(&self) -> String {
        if self.children.is_empty() {
            return self.kind.to_string();
        }
        let inner: Vec<String> = self.children.iter().map(SyntaxNode::shape).collect();
        format!("{}[{}]", self.kind, inner.join(", "))
    }
}

impl Program {
    pub fn syntax_tree(&self) -> SyntaxNode {
        SyntaxNode {
            kind: NodeKind::Module,
            span: self.span,
            children: self.body.iter().map(stmt_node).collect(),
        }
    }
}

fn stmt_node(stmt: &Stmt) -> SyntaxNode {
    let (kind, children) = match &stmt.kind {
        StmtKind::FunctionDef(def) => {
            let mut ch: Vec<SyntaxNode> = def
                .params
                .iter()
                .map(|p| SyntaxNode::leaf(NodeKind::Name, p.span))
                .collect();
            ch.extend(def.body.iter().map(stmt_node));
            (NodeKind::FunctionDef, ch)
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            let mut ch = vec![expr_node(cond)];
            ch.extend(then_body.iter().map(stmt_node));
            if let Some(body) = else_body {
                ch.extend(body.iter().map(stmt_node));
            }
            (NodeKind::If, ch)
        }
        StmtKind::For {
            var,
            range_args,
            body,
        } => {
            let mut ch = vec![SyntaxNode::leaf(NodeKind::Name, var.span)];
            ch.extend(range_args.iter().map(expr_node));
            ch.extend(body.iter().map(stmt_node));
            (NodeKind::For, ch)
        }
        StmtKind::While { cond, body } => {
            let mut ch = vec![expr_node(cond)];
            ch.extend(body.iter().map(stmt_node));
            (NodeKind::While, ch)
        }
        StmtKind::Return(value) => (NodeKind::Return, value.iter().map(expr_node).collect()),
        StmtKind::Assign { target, value } => (
            NodeKind::Assign,
            vec![SyntaxNode::leaf(NodeKind::Name, target.span), expr_node(value)],
        ),
        StmtKind::Expr(e) => (NodeKind::ExprStmt, vec![expr_node(e)]),
        StmtKind::Print(args) => (NodeKind::Print, args.iter().map(expr_node).collect()),
    };
    SyntaxNode {
        kind,
        span: stmt.span,
        children,
    }
}

fn expr_node(expr: &Expr) -> SyntaxNode {
    match &expr.kind {
        ExprKind::Int(_) | ExprKind::Str(_) => SyntaxNode::leaf(NodeKind::Literal, expr.span),
        ExprKind::Name(_) => SyntaxNode::leaf(NodeKind::Name, expr.span),
        ExprKind::Call { callee, args } => {
            let mut ch = vec![SyntaxNode::leaf(NodeKind::Name, callee.span)];
            ch.extend(args.iter().map(expr_node));
            SyntaxNode {
                kind: NodeKind::Call,
                span: expr.span,
                children: ch,
            }
        }
        ExprKind::BinOp { lhs, rhs, .. } => SyntaxNode {
            kind: NodeKind::BinOp,
            span: expr.span,
            children: vec![expr_node(lhs), expr_node(rhs)],
        },
    }
}
