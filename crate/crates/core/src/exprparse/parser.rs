use super::ast::{BinOp, ExprAst, Func, Var};
use super::lexer::{tokenize, Token, TokenKind};
use super::{ExprError, SourceSpan};

/// Maximum tree depth, also the maximum parenthesis nesting.
pub const MAX_DEPTH: usize = 64;

/// Tokenizes and parses `source`.
pub fn parse(source: &str) -> Result<ExprAst, ExprError> {
    let tokens = tokenize(source)?;
    parse_tokens(&tokens, source.len())
}

/// Parses a token list; `source_len` anchors end-of-input errors.
pub fn parse_tokens(tokens: &[Token], source_len: usize) -> Result<ExprAst, ExprError> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        nesting: 0,
        end: SourceSpan::new(source_len, source_len),
    };
    let (ast, _) = parser.expr()?;
    if let Some(tok) = parser.peek() {
        let message = match tok.kind {
            TokenKind::RParen => "unbalanced ')'".to_string(),
            _ => format!("unexpected {}", describe(&tok.kind)),
        };
        return Err(ExprError::parse(message, tok.span));
    }
    Ok(ast)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    nesting: usize,
    end: SourceSpan,
}

type Parsed = Result<(ExprAst, usize), ExprError>;

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Number(v) => format!("number {v}"),
        TokenKind::Ident(name) => format!("identifier '{name}'"),
        TokenKind::Plus => "'+'".into(),
        TokenKind::Minus => "'-'".into(),
        TokenKind::Star => "'*'".into(),
        TokenKind::Slash => "'/'".into(),
        TokenKind::Caret => "'^'".into(),
        TokenKind::LParen => "'('".into(),
        TokenKind::RParen => "')'".into(),
        TokenKind::Comma => "','".into(),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn span_here(&self) -> SourceSpan {
        self.peek().map_or(self.end, |t| t.span)
    }

    fn node(&self, ast: ExprAst, depth: usize, span: SourceSpan) -> Parsed {
        if depth > MAX_DEPTH {
            return Err(ExprError::parse(
                format!("expression nested deeper than {MAX_DEPTH}"),
                span,
            ));
        }
        Ok((ast, depth))
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.nesting += 1;
        if self.nesting > MAX_DEPTH {
            return Err(ExprError::parse(
                format!("expression nested deeper than {MAX_DEPTH}"),
                self.span_here(),
            ));
        }
        Ok(())
    }

    fn expr(&mut self) -> Parsed {
        self.enter()?;
        let (mut lhs, mut depth) = self.term()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let (rhs, rd) = self.term()?;
            (lhs, depth) = self.node(
                ExprAst::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                1 + depth.max(rd),
                tok.span,
            )?;
        }
        self.nesting -= 1;
        Ok((lhs, depth))
    }

    fn term(&mut self) -> Parsed {
        let (mut lhs, mut depth) = self.unary()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let (rhs, rd) = self.unary()?;
            (lhs, depth) = self.node(
                ExprAst::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                1 + depth.max(rd),
                tok.span,
            )?;
        }
        Ok((lhs, depth))
    }

    fn unary(&mut self) -> Parsed {
        match self.peek() {
            Some(tok) if tok.kind == TokenKind::Minus => {
                self.pos += 1;
                self.enter()?;
                let (inner, d) = self.unary()?;
                self.nesting -= 1;
                self.node(ExprAst::Neg(Box::new(inner)), d + 1, tok.span)
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Parsed {
        let (base, bd) = self.atom()?;
        match self.peek() {
            Some(tok) if tok.kind == TokenKind::Caret => {
                self.pos += 1;
                self.enter()?;
                let (exp, ed) = self.unary()?;
                self.nesting -= 1;
                self.node(
                    ExprAst::Binary {
                        op: BinOp::Pow,
                        lhs: Box::new(base),
                        rhs: Box::new(exp),
                    },
                    1 + bd.max(ed),
                    tok.span,
                )
            }
            _ => Ok((base, bd)),
        }
    }

    fn expect_rparen(&mut self, open: SourceSpan) -> Result<(), ExprError> {
        match self.peek() {
            Some(tok) if tok.kind == TokenKind::RParen => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => Err(ExprError::parse(
                format!("expected ')' to close '(' at {open}, found {}", describe(&tok.kind)),
                tok.span,
            )),
            None => Err(ExprError::parse(format!("unbalanced '(' at {open}"), open)),
        }
    }

    fn atom(&mut self) -> Parsed {
        let Some(tok) = self.peek() else {
            return Err(ExprError::parse("unexpected end of expression", self.end));
        };
        self.pos += 1;
        match &tok.kind {
            TokenKind::Number(v) => Ok((ExprAst::Number(*v), 1)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(tok.span)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "x" => Ok((ExprAst::Var(Var::X), 1)),
                "t" => Ok((ExprAst::Var(Var::T), 1)),
                "pi" => Ok((ExprAst::Pi, 1)),
                _ => {
                    let Some(func) = Func::from_name(name) else {
                        return Err(ExprError::parse(format!("unknown identifier '{name}'"), tok.span));
                    };
                    let open = match self.peek() {
                        Some(p) if p.kind == TokenKind::LParen => p.span,
                        _ => {
                            return Err(ExprError::parse(
                                format!("function '{name}' must be followed by '('"),
                                self.span_here(),
                            ))
                        }
                    };
                    self.pos += 1;
                    let (arg, d) = self.expr()?;
                    self.expect_rparen(open)?;
                    self.node(
                        ExprAst::Call {
                            func,
                            arg: Box::new(arg),
                        },
                        d + 1,
                        tok.span,
                    )
                }
            },
            TokenKind::RParen => Err(ExprError::parse("unbalanced ')'", tok.span)),
            other => Err(ExprError::parse(format!("unexpected {}", describe(other)), tok.span)),
        }
    }
}
