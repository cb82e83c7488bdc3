//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (("+"|"-") term)*
//! term  := unary (("*"|"/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := NUMBER | VAR | FUNC "(" expr ")" | "(" expr ")"
//! ```

use super::{BinOp, Expression, Func, Node, ParseError};

/// Tallest tree the parser will build; keeps evaluation and drop recursion
/// bounded on hostile input.
pub const MAX_HEIGHT: usize = 2048;
/// Deepest parenthesis/unary/exponent nesting accepted.
pub const MAX_NESTING: usize = 128;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(token: &Token) -> String {
    match token {
        Token::Number(x) => format!("number {x}"),
        Token::Ident(name) => format!("`{name}`"),
        Token::Plus => "`+`".into(),
        Token::Minus => "`-`".into(),
        Token::Star => "`*`".into(),
        Token::Slash => "`/`".into(),
        Token::Caret => "`^`".into(),
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
        Token::End => "end of input".into(),
    }
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        position,
        message: message.into(),
    }
}

/// Splits `text` into tokens tagged with their character offset.
fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let simple = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            tokens.push((start, tok));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j < chars.len() && chars[j] == '.' {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            if j < chars.len() && matches!(chars[j], 'e' | 'E') {
                let mut k = j + 1;
                if k < chars.len() && matches!(chars[k], '+' | '-') {
                    k += 1;
                }
                let digits_start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                if k == digits_start {
                    return Err(syntax(j, "exponent has no digits"));
                }
                j = k;
            }
            let lexeme: String = chars[i..j].iter().collect();
            let value: f64 = lexeme
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{lexeme}`")))?;
            if !value.is_finite() {
                return Err(syntax(start, format!("number `{lexeme}` is out of range")));
            }
            tokens.push((start, Token::Number(value)));
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            tokens.push((start, Token::Ident(chars[i..j].iter().collect())));
            i = j;
        } else {
            return Err(syntax(start, format!("unexpected character `{c}`")));
        }
    }
    tokens.push((chars.len(), Token::End));
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    n_vars: usize,
}

/// A subtree together with its height.
type Built = (Node, usize);

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> (usize, Token) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {}, found {}", describe(&want), describe(self.peek())),
            ))
        }
    }

    fn guard(&self, height: usize) -> Result<usize, ParseError> {
        if height > MAX_HEIGHT {
            Err(syntax(self.offset(), "expression is too large"))
        } else {
            Ok(height)
        }
    }

    fn guard_nesting(&self, nesting: usize) -> Result<(), ParseError> {
        if nesting > MAX_NESTING {
            Err(syntax(self.offset(), "expression nesting is too deep"))
        } else {
            Ok(())
        }
    }

    fn binary(&self, op: BinOp, (lhs, dl): Built, (rhs, dr): Built) -> Result<Built, ParseError> {
        let depth = self.guard(1 + dl.max(dr))?;
        Ok((
            Node::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            depth,
        ))
    }

    fn expr(&mut self, nesting: usize) -> Result<Built, ParseError> {
        self.guard_nesting(nesting)?;
        let mut acc = self.term(nesting)?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.term(nesting)?;
            acc = self.binary(op, acc, rhs)?;
        }
    }

    fn term(&mut self, nesting: usize) -> Result<Built, ParseError> {
        let mut acc = self.unary(nesting)?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.unary(nesting)?;
            acc = self.binary(op, acc, rhs)?;
        }
    }

    fn unary(&mut self, nesting: usize) -> Result<Built, ParseError> {
        self.guard_nesting(nesting)?;
        if *self.peek() == Token::Minus {
            self.bump();
            let (child, d) = self.unary(nesting + 1)?;
            let depth = self.guard(d + 1)?;
            return Ok((Node::Neg(Box::new(child)), depth));
        }
        self.power(nesting)
    }

    fn power(&mut self, nesting: usize) -> Result<Built, ParseError> {
        let base = self.atom(nesting)?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.unary(nesting + 1)?;
            return self.binary(BinOp::Pow, base, exponent);
        }
        Ok(base)
    }

    fn atom(&mut self, nesting: usize) -> Result<Built, ParseError> {
        let (at, token) = self.bump();
        match token {
            Token::Number(x) => Ok((Node::Number(x), 1)),
            Token::LParen => {
                let inner = self.expr(nesting + 1)?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Token::LParen {
                        return Err(syntax(
                            self.offset(),
                            format!("expected `(` after function `{name}`"),
                        ));
                    }
                    self.bump();
                    let (arg, d) = self.expr(nesting + 1)?;
                    self.expect(Token::RParen)?;
                    let depth = self.guard(d + 1)?;
                    return Ok((
                        Node::Call {
                            func,
                            arg: Box::new(arg),
                        },
                        depth,
                    ));
                }
                self.variable(&name, at).map(|node| (node, 1))
            }
            other => Err(syntax(at, format!("expected an operand, found {}", describe(&other)))),
        }
    }

    fn variable(&self, name: &str, position: usize) -> Result<Node, ParseError> {
        let digits = name.strip_prefix('x').filter(|d| {
            !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) && !d.starts_with('0')
        });
        let Some(digits) = digits else {
            return Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                position,
            });
        };
        match digits.parse::<usize>() {
            Ok(index) if index <= self.n_vars => Ok(Node::Var(index - 1)),
            _ => Err(ParseError::VarIndexOutOfRange {
                name: name.to_string(),
                n_vars: self.n_vars,
                position,
            }),
        }
    }
}

pub fn parse(text: &str, n_vars: usize) -> Result<Expression, ParseError> {
    if n_vars == 0 {
        return Err(ParseError::NoVariables);
    }
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        n_vars,
    };
    if *parser.peek() == Token::End {
        return Err(syntax(0, "empty expression"));
    }
    let (root, _) = parser.expr(0)?;
    if *parser.peek() != Token::End {
        return Err(syntax(
            parser.offset(),
            format!("unexpected {}", describe(parser.peek())),
        ));
    }
    Ok(Expression { root, n_vars })
}
