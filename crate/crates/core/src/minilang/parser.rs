//! Recursive-descent parser over the token stream from [`super::lexer`].
//!
//! ```text
//! module     := stmt* EOF
//! stmt       := funcdef | if | for | while | return | print | assign | exprstmt
//! funcdef    := "def" NAME "(" [NAME ("," NAME)*] ")" ":" block
//! if         := "if" expr ":" block ["else" ":" block]
//! for        := "for" NAME "in" "range" "(" expr ["," expr] ")" ":" block
//! while      := "while" expr ":" block
//! return     := "return" [expr] NEWLINE          (only inside a funcdef)
//! print      := "print" "(" [expr ("," expr)*] ")" NEWLINE
//! assign     := NAME "=" expr NEWLINE
//! exprstmt   := expr NEWLINE
//! block      := NEWLINE INDENT stmt+ DEDENT
//! expr       := and ("or" and)*
//! and        := cmp ("and" cmp)*
//! cmp        := sum (("==" | "!=" | "<" | ">") sum)*
//! sum        := term (("+" | "-") term)*
//! term       := atom (("*" | "/" | "%") atom)*
//! atom       := INT | "-" INT | STRING | NAME | NAME "(" [expr ("," expr)*] ")" | "(" expr ")"
//! ```

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src)?;
    if matches!(tokens[0].tok, Tok::Eof) {
        return Err(ParseError::empty());
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        fn_depth: 0,
    };
    let mut body = Vec::new();
    while !p.at(&Tok::Eof) {
        body.push(p.stmt()?);
    }
    Ok(Program {
        body,
        span: Span::new(0, src.len()),
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    fn_depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::syntax_found(t.span.start, expected, t.tok.describe())
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.at(&tok) {
            Ok(self.bump())
        } else {
            Err(self.error(tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match &self.peek().tok {
            Tok::Name(n) => {
                let name = n.clone();
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.error("a name")),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().tok {
            Tok::Def => self.funcdef(),
            Tok::If => self.if_stmt(),
            Tok::For => self.for_stmt(),
            Tok::While => self.while_stmt(),
            Tok::Return => self.return_stmt(),
            Tok::Print => self.print_stmt(),
            Tok::Name(_) if self.peek_at(1) == &Tok::Assign => {
                let target = self.ident()?;
                self.bump();
                let value = self.expr()?;
                let span = target.span.to(value.span);
                self.expect(Tok::Newline)?;
                Ok(Stmt {
                    kind: StmtKind::Assign { target, value },
                    span,
                })
            }
            _ => {
                let e = self.expr()?;
                let span = e.span;
                self.expect(Tok::Newline)?;
                Ok(Stmt {
                    kind: StmtKind::Expr(e),
                    span,
                })
            }
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::Colon)?;
        self.expect(Tok::Newline)?;
        if !self.at(&Tok::Indent) {
            return Err(self.error("an indented block"));
        }
        self.bump();
        let mut body = vec![self.stmt()?];
        while !self.at(&Tok::Dedent) && !self.at(&Tok::Eof) {
            body.push(self.stmt()?);
        }
        self.expect(Tok::Dedent)?;
        Ok(body)
    }

    fn funcdef(&mut self) -> Result<Stmt, ParseError> {
        let start = self.bump().span;
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params: Vec<Ident> = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let p = self.ident()?;
                if params.iter().any(|q| q.name == p.name) {
                    return Err(ParseError::syntax(p.span.start, "distinct parameter names"));
                }
                params.push(p);
                if self.at(&Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.fn_depth += 1;
        let body = self.block();
        self.fn_depth -= 1;
        let body = body?;
        let span = start.to(body.last().expect("blocks are non-empty").span);
        Ok(Stmt {
            kind: StmtKind::FunctionDef(FunctionDef { name, params, body }),
            span,
        })
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.bump().span;
        let cond = self.expr()?;
        let then_body = self.block()?;
        let mut end = then_body.last().unwrap().span;
        let else_body = if self.at(&Tok::Else) {
            self.bump();
            let body = self.block()?;
            end = body.last().unwrap().span;
            Some(body)
        } else {
            None
        };
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_body,
                else_body,
            },
            span: start.to(end),
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.bump().span;
        let var = self.ident()?;
        self.expect(Tok::In)?;
        match &self.peek().tok {
            Tok::Name(n) if n == "range" => {
                self.bump();
            }
            _ => return Err(self.error("`range`")),
        }
        self.expect(Tok::LParen)?;
        let mut range_args = vec![self.expr()?];
        if self.at(&Tok::Comma) {
            self.bump();
            range_args.push(self.expr()?);
        }
        self.expect(Tok::RParen)?;
        let body = self.block()?;
        let span = start.to(body.last().unwrap().span);
        Ok(Stmt {
            kind: StmtKind::For {
                var,
                range_args,
                body,
            },
            span,
        })
    }

    fn while_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.bump().span;
        let cond = self.expr()?;
        let body = self.block()?;
        let span = start.to(body.last().unwrap().span);
        Ok(Stmt {
            kind: StmtKind::While { cond, body },
            span,
        })
    }

    fn return_stmt(&mut self) -> Result<Stmt, ParseError> {
        let kw = self.peek().span;
        if self.fn_depth == 0 {
            return Err(ParseError::syntax_found(
                kw.start,
                "`return` inside a function",
                "`return`".to_string(),
            ));
        }
        self.bump();
        let (value, span) = if self.at(&Tok::Newline) {
            (None, kw)
        } else {
            let e = self.expr()?;
            let span = kw.to(e.span);
            (Some(e), span)
        };
        self.expect(Tok::Newline)?;
        Ok(Stmt {
            kind: StmtKind::Return(value),
            span,
        })
    }

    fn print_stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.bump().span;
        self.expect(Tok::LParen)?;
        let args = self.args()?;
        let close = self.expect(Tok::RParen)?.span;
        self.expect(Tok::Newline)?;
        Ok(Stmt {
            kind: StmtKind::Print(args),
            span: start.to(close),
        })
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.at(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.at(&Tok::Comma) {
                self.bump();
            } else {
                return Ok(args);
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, ParseError> {
        const LEVELS: [&[(Tok, BinOp)]; 5] = [
            &[(Tok::Or, BinOp::Or)],
            &[(Tok::And, BinOp::And)],
            &[
                (Tok::EqEq, BinOp::Eq),
                (Tok::NotEq, BinOp::Ne),
                (Tok::Lt, BinOp::Lt),
                (Tok::Gt, BinOp::Gt),
            ],
            &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)],
            &[
                (Tok::Star, BinOp::Mul),
                (Tok::Slash, BinOp::Div),
                (Tok::Percent, BinOp::Mod),
            ],
        ];
        if level == LEVELS.len() {
            return self.atom();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = LEVELS[level]
                .iter()
                .find(|(t, _)| self.at(t))
                .map(|(_, op)| *op);
            let Some(op) = op else { return Ok(lhs) };
            self.bump();
            let rhs = self.binary(level + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr {
                kind: ExprKind::BinOp {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            };
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Int(v),
                    span: t.span,
                })
            }
            Tok::Minus => match self.peek_at(1).clone() {
                Tok::Int(v) => {
                    self.bump();
                    let lit = self.bump().span;
                    Ok(Expr {
                        kind: ExprKind::Int(-v),
                        span: t.span.to(lit),
                    })
                }
                _ => Err(self.error("an expression")),
            },
            Tok::Str(s) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Str(s),
                    span: t.span,
                })
            }
            Tok::Name(_) => {
                let callee = self.ident()?;
                if self.at(&Tok::LParen) {
                    self.bump();
                    let args = self.args()?;
                    let close = self.expect(Tok::RParen)?.span;
                    let span = callee.span.to(close);
                    Ok(Expr {
                        kind: ExprKind::Call { callee, args },
                        span,
                    })
                } else {
                    Ok(Expr {
                        kind: ExprKind::Name(callee.name),
                        span: callee.span,
                    })
                }
            }
            Tok::LParen => {
                self.bump();
                let mut inner = self.expr()?;
                let close = self.expect(Tok::RParen)?.span;
                inner.span = t.span.to(close);
                Ok(inner)
            }
            _ => Err(self.error("an expression")),
        }
    }
}
