//! Scalar functions `f: ℝⁿ → ℝ` parsed from text, with exact-to-roundoff
//! gradients and Hessians through forward-mode automatic differentiation.
//!
//! Variables are `x1 … xn`; the operator set is `+ - * / ^`, unary minus and
//! the functions `sin cos exp log sqrt`. `^` is right-associative and binds
//! tighter than unary minus, so `-x1^2` is `-(x1^2)`.

mod dual;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::linalg::RealMatrix;

pub use dual::{powi, Dual, HyperDual, Scalar};
pub use parser::{parse, MAX_HEIGHT, MAX_NESTING};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("variable `{name}` at {position} is out of range for {n_vars} variables")]
    VarIndexOutOfRange {
        name: String,
        n_vars: usize,
        position: usize,
    },
    #[error("an expression needs at least one variable")]
    NoVariables,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainError {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    ZeroToNegativePower,
    NonPositiveBase,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainError::LogNonPositive => "log of a non-positive number",
            DomainError::SqrtNegative => "sqrt of a negative number",
            DomainError::DivisionByZero => "division by zero",
            DomainError::ZeroToNegativePower => "zero raised to a negative power",
            DomainError::NonPositiveBase => "non-integer power of a non-positive base",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(DomainError),
    #[error("expected a point with {expected} coordinates, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply<S: Scalar>(self, x: S) -> Result<S, DomainError> {
        let v = x.value();
        Ok(match self {
            Func::Sin => x.chain(v.sin(), v.cos(), -v.sin()),
            Func::Cos => x.chain(v.cos(), -v.sin(), -v.cos()),
            Func::Exp => {
                let e = v.exp();
                x.chain(e, e, e)
            }
            Func::Log => {
                if v <= 0.0 {
                    return Err(DomainError::LogNonPositive);
                }
                x.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
            }
            Func::Sqrt => {
                if v < 0.0 {
                    return Err(DomainError::SqrtNegative);
                }
                let r = v.sqrt();
                x.chain(r, 0.5 / r, -0.25 / (r * v))
            }
        })
    }
}

/// Expression tree. Variable indices are 0-based (`Var(0)` is `x1`).
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Number(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary {
        op: BinOp,
        lhs: Box<Node>,
        rhs: Box<Node>,
    },
    Call {
        func: Func,
        arg: Box<Node>,
    },
}

// Binding strength used by the printer; mirrors the grammar levels.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Number(_) | Node::Var(_) | Node::Call { .. } => PREC_ATOM,
            Node::Neg(_) => PREC_UNARY,
            Node::Binary { op, .. } => match op {
                BinOp::Add | BinOp::Sub => PREC_SUM,
                BinOp::Mul | BinOp::Div => PREC_PRODUCT,
                BinOp::Pow => PREC_POWER,
            },
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }

    fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S, DomainError> {
        match self {
            Node::Number(x) => Ok(S::constant(*x)),
            Node::Var(i) => Ok(vars[*i]),
            Node::Neg(child) => Ok(-child.eval(vars)?),
            Node::Call { func, arg } => func.apply(arg.eval(vars)?),
            Node::Binary { op, lhs, rhs } => {
                let a = lhs.eval(vars)?;
                let b = rhs.eval(vars)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(DomainError::DivisionByZero);
                        }
                        Ok(a * b.recip())
                    }
                    BinOp::Pow => pow(a, b),
                }
            }
        }
    }
}

/// Integer exponents up to this magnitude use repeated squaring.
const MAX_INT_EXPONENT: f64 = 2147483647.0;

fn pow<S: Scalar>(base: S, exponent: S) -> Result<S, DomainError> {
    let p = exponent.value();
    let a = base.value();
    if exponent.is_constant() {
        if p.fract() == 0.0 && p.abs() <= MAX_INT_EXPONENT {
            let k = p.abs() as u64;
            if p < 0.0 {
                if a == 0.0 {
                    return Err(DomainError::ZeroToNegativePower);
                }
                return Ok(powi(base, k).recip());
            }
            return Ok(powi(base, k));
        }
        if a <= 0.0 {
            return Err(DomainError::NonPositiveBase);
        }
        return Ok(base.chain(
            a.powf(p),
            p * a.powf(p - 1.0),
            p * (p - 1.0) * a.powf(p - 2.0),
        ));
    }
    if a <= 0.0 {
        return Err(DomainError::NonPositiveBase);
    }
    // a^b = exp(b · ln a) when the exponent varies.
    let ln_a = base.chain(a.ln(), 1.0 / a, -1.0 / (a * a));
    let product = exponent * ln_a;
    let e = product.value().exp();
    Ok(product.chain(e, e, e))
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Number(x) => write!(f, "{x}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(child) => {
                f.write_str("-")?;
                child.write_child(f, child.precedence() < PREC_UNARY)
            }
            Node::Call { func, arg } => write!(f, "{}({arg})", func.name()),
            Node::Binary { op, lhs, rhs } => {
                let p = self.precedence();
                if *op == BinOp::Pow {
                    lhs.write_child(f, lhs.precedence() < PREC_ATOM)?;
                    f.write_str("^")?;
                    rhs.write_child(f, rhs.precedence() < PREC_UNARY)
                } else {
                    lhs.write_child(f, lhs.precedence() < p)?;
                    write!(f, " {} ", op.symbol())?;
                    rhs.write_child(f, rhs.precedence() <= p)
                }
            }
        }
    }
}

/// A parsed expression in `n_vars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Node,
    n_vars: usize,
}

impl Expression {
    /// Wraps a tree; fails if it references a variable beyond `n_vars`.
    pub fn from_node(root: Node, n_vars: usize) -> Result<Self, ParseError> {
        fn max_var(node: &Node) -> Option<usize> {
            match node {
                Node::Number(_) => None,
                Node::Var(i) => Some(*i),
                Node::Neg(c) | Node::Call { arg: c, .. } => max_var(c),
                Node::Binary { lhs, rhs, .. } => max_var(lhs).max(max_var(rhs)),
            }
        }
        if n_vars == 0 {
            return Err(ParseError::NoVariables);
        }
        if let Some(i) = max_var(&root).filter(|&i| i >= n_vars) {
            return Err(ParseError::VarIndexOutOfRange {
                name: format!("x{}", i + 1),
                n_vars,
                position: 0,
            });
        }
        Ok(Self { root, n_vars })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    fn check_point(&self, point: &[f64]) -> Result<(), EvalError> {
        if point.len() != self.n_vars {
            return Err(EvalError::DimensionMismatch {
                expected: self.n_vars,
                found: point.len(),
            });
        }
        Ok(())
    }

    /// Evaluates over any [`Scalar`] type.
    pub fn eval_with<S: Scalar>(&self, vars: &[S]) -> Result<S, EvalError> {
        if vars.len() != self.n_vars {
            return Err(EvalError::DimensionMismatch {
                expected: self.n_vars,
                found: vars.len(),
            });
        }
        self.root.eval(vars).map_err(EvalError::Domain)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// `f(point)` in IEEE double precision.
pub fn evaluate(e: &Expression, point: &[f64]) -> Result<f64, EvalError> {
    e.check_point(point)?;
    e.eval_with(point)
}

/// `∇f(point)` with one dual-number pass per coordinate.
pub fn gradient(e: &Expression, point: &[f64]) -> Result<Vec<f64>, EvalError> {
    e.check_point(point)?;
    let n = point.len();
    let mut vars: Vec<Dual> = point.iter().map(|&x| Dual::new(x, 0.0)).collect();
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        vars[i].eps = 1.0;
        let out = e.eval_with(&vars)?;
        vars[i].eps = 0.0;
        if !out.all_finite() {
            return Err(EvalError::NonFinite);
        }
        grad.push(out.eps);
    }
    Ok(grad)
}

/// Hessian of `f` at `point` with one hyper-dual pass per pair `i ≤ j`.
pub fn hessian(e: &Expression, point: &[f64]) -> Result<RealMatrix, EvalError> {
    e.check_point(point)?;
    let n = point.len();
    let mut h = vec![0.0; n * n];
    let mut vars: Vec<HyperDual> = point
        .iter()
        .map(|&x| HyperDual::new(x, 0.0, 0.0, 0.0))
        .collect();
    for i in 0..n {
        for j in i..n {
            vars[i].d1 = 1.0;
            vars[j].d2 = 1.0;
            let out = e.eval_with(&vars)?;
            vars[i].d1 = 0.0;
            vars[j].d2 = 0.0;
            if !out.all_finite() {
                return Err(EvalError::NonFinite);
            }
            h[i * n + j] = out.d12;
            h[j * n + i] = out.d12;
        }
    }
    RealMatrix::from_row_major(n, h).map_err(|_| EvalError::NonFinite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_symmetric;
    use proptest::prelude::*;

    const WORKED_F: &str = "x1*x2*x3^2 + x1^2 - 3*x2^2 + x2*sin(x1) - x2^2*x3^2";

    fn var(i: usize) -> Box<Node> {
        Box::new(Node::Var(i))
    }

    fn num(x: f64) -> Box<Node> {
        Box::new(Node::Number(x))
    }

    fn bin(op: BinOp, lhs: Box<Node>, rhs: Box<Node>) -> Box<Node> {
        Box::new(Node::Binary { op, lhs, rhs })
    }

    #[test]
    fn parses_worked_example() {
        let e = parse(WORKED_F, 3).unwrap();
        assert_eq!(
            e.to_string(),
            "x1 * x2 * x3^2 + x1^2 - 3 * x2^2 + x2 * sin(x1) - x2^2 * x3^2"
        );
        // (x1*x2)*(x3^2) is the leftmost product
        let first = bin(
            BinOp::Mul,
            bin(BinOp::Mul, var(0), var(1)),
            bin(BinOp::Pow, var(2), num(2.0)),
        );
        let mut node = e.root();
        while let Node::Binary { op: BinOp::Add | BinOp::Sub, lhs, .. } = node {
            node = lhs;
        }
        assert_eq!(node, first.as_ref());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-x1^2", 1).unwrap();
        assert_eq!(
            e.root(),
            &Node::Neg(bin(BinOp::Pow, var(0), num(2.0)))
        );
        assert_eq!(evaluate(&e, &[3.0]).unwrap(), -9.0);
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("2^3^2", 1).unwrap();
        assert_eq!(evaluate(&e, &[0.0]).unwrap(), 512.0);
        let e = parse("x1^-2", 1).unwrap();
        assert_eq!(evaluate(&e, &[2.0]).unwrap(), 0.25);
        let e = parse("8/2/2 - 1 - 1", 1).unwrap();
        assert_eq!(evaluate(&e, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse("x4", 3),
            Err(ParseError::VarIndexOutOfRange { .. })
        ));
        assert!(matches!(parse("y + 1", 3), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse("x0", 3), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse("tan(x1)", 3), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(
            parse("x1 +", 3),
            Err(ParseError::Syntax { position: 4, .. })
        ));
        assert!(matches!(parse("(x1", 3), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1)", 3), Err(ParseError::Syntax { position: 2, .. })));
        assert!(matches!(parse("sin x1", 3), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("1e", 3), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("1e999", 3), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("2 x1", 3), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("   ", 3), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1 $ 2", 3), Err(ParseError::Syntax { position: 3, .. })));
        assert_eq!(parse("x1", 0).unwrap_err(), ParseError::NoVariables);
    }

    #[test]
    fn deep_inputs_are_rejected_not_overflowed() {
        let nested = format!("{}x1{}", "(".repeat(10_000), ")".repeat(10_000));
        assert!(parse(&nested, 1).is_err());
        let negs = format!("{}x1", "-".repeat(10_000));
        assert!(parse(&negs, 1).is_err());
        let long_sum = vec!["x1"; 10_000].join("+");
        assert!(parse(&long_sum, 1).is_err());
        let ok_sum = vec!["x1"; 500].join("+");
        assert_eq!(evaluate(&parse(&ok_sum, 1).unwrap(), &[1.0]).unwrap(), 500.0);
    }

    #[test]
    fn numbers_in_all_forms() {
        let e = parse("1 + 2.5 + .5 + 3. + 1e2 + 2.5E-1", 1).unwrap();
        assert_eq!(evaluate(&e, &[0.0]).unwrap(), 107.25);
    }

    #[test]
    fn evaluation_examples() {
        let e = parse(WORKED_F, 3).unwrap();
        let v = evaluate(&e, &[1.0, 1.0, 1.0]).unwrap();
        assert!((v - (1f64.sin() - 2.0)).abs() < 1e-15);
        assert_eq!(evaluate(&parse("x1+x2", 2).unwrap(), &[2.0, 3.0]).unwrap(), 5.0);
        assert_eq!(
            evaluate(&parse("x1+x2", 2).unwrap(), &[2.0]).unwrap_err(),
            EvalError::DimensionMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn domain_errors() {
        let cases = [
            ("log(x1)", 0.0, DomainError::LogNonPositive),
            ("sqrt(x1)", -1.0, DomainError::SqrtNegative),
            ("1/x1", 0.0, DomainError::DivisionByZero),
            ("x1^-1", 0.0, DomainError::ZeroToNegativePower),
            ("x1^0.5", -4.0, DomainError::NonPositiveBase),
        ];
        for (text, x, want) in cases {
            let e = parse(text, 1).unwrap();
            assert_eq!(evaluate(&e, &[x]).unwrap_err(), EvalError::Domain(want), "{text}");
        }
        // a variable exponent is fine in value, but its derivative needs ln(base)
        let e = parse("x1^x1", 1).unwrap();
        assert_eq!(evaluate(&e, &[-2.0]).unwrap(), 0.25);
        assert_eq!(
            gradient(&e, &[-2.0]).unwrap_err(),
            EvalError::Domain(DomainError::NonPositiveBase)
        );
        // integer exponents accept any base
        assert_eq!(evaluate(&parse("x1^3", 1).unwrap(), &[-2.0]).unwrap(), -8.0);
        assert_eq!(evaluate(&parse("x1^0", 1).unwrap(), &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn gradient_examples() {
        let e = parse(WORKED_F, 3).unwrap();
        let g = gradient(&e, &[1.0, 1.0, 1.0]).unwrap();
        // ∂f/∂x1 = x2 x3² + 2x1 + x2 cos x1
        assert!((g[0] - (3.0 + 1f64.cos())).abs() < 1e-14);
        // ∂f/∂x2 = x1 x3² − 6x2 + sin x1 − 2 x2 x3²
        assert!((g[1] - (-7.0 + 1f64.sin())).abs() < 1e-14);
        // ∂f/∂x3 = 2 x1 x2 x3 − 2 x2² x3
        assert!(g[2].abs() < 1e-14);

        assert_eq!(gradient(&parse("5", 2).unwrap(), &[0.3, -2.0]).unwrap(), vec![0.0, 0.0]);
        let (a, b) = (1.25, -0.75);
        assert_eq!(gradient(&parse("x1*x2", 2).unwrap(), &[a, b]).unwrap(), vec![b, a]);
    }

    #[test]
    fn hessian_examples() {
        let e = parse(WORKED_F, 3).unwrap();
        let h = hessian(&e, &[1.0, 1.0, 1.0]).unwrap();
        let (s, c) = (1f64.sin(), 1f64.cos());
        let want = [[2.0 - s, 1.0 + c, 2.0], [1.0 + c, -8.0, -2.0], [2.0, -2.0, 0.0]];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert!((h.get(i, j) - w).abs() <= 1e-12);
            }
        }
        let q = parse("x1^2 + 4*x1*x2", 2).unwrap();
        for p in [[0.0, 0.0], [3.0, -7.5]] {
            let h = hessian(&q, &p).unwrap();
            assert_eq!(h.to_rows(), vec![vec![2.0, 4.0], vec![4.0, 0.0]]);
        }
    }

    #[test]
    fn variable_exponent_derivatives() {
        // d/dx x^x = x^x (ln x + 1)
        let e = parse("x1^x1", 1).unwrap();
        let x: f64 = 1.7;
        let g = gradient(&e, &[x]).unwrap();
        assert!((g[0] - x.powf(x) * (x.ln() + 1.0)).abs() < 1e-12);
        // d²/dx² = x^x ((ln x + 1)² + 1/x)
        let h = hessian(&e, &[x]).unwrap();
        let want = x.powf(x) * ((x.ln() + 1.0).powi(2) + 1.0 / x);
        assert!((h.get(0, 0) - want).abs() < 1e-12);
    }

    #[test]
    fn sqrt_at_zero_has_no_finite_derivative() {
        let e = parse("sqrt(x1)", 1).unwrap();
        assert_eq!(evaluate(&e, &[0.0]).unwrap(), 0.0);
        assert_eq!(gradient(&e, &[0.0]).unwrap_err(), EvalError::NonFinite);
    }

    #[test]
    fn from_node_checks_variables() {
        assert!(Expression::from_node(Node::Var(2), 2).is_err());
        assert!(Expression::from_node(Node::Var(1), 2).is_ok());
    }

    fn leaf() -> impl Strategy<Value = Node> {
        prop_oneof![
            (0.0f64..100.0).prop_map(Node::Number),
            (0usize..3).prop_map(Node::Var),
        ]
    }

    fn tree() -> impl Strategy<Value = Node> {
        leaf().prop_recursive(6, 64, 2, |inner| {
            let ops = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            let funcs = prop_oneof![
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Log),
                Just(Func::Sqrt),
            ];
            prop_oneof![
                inner.clone().prop_map(|c| Node::Neg(Box::new(c))),
                (funcs, inner.clone()).prop_map(|(func, c)| Node::Call { func, arg: Box::new(c) }),
                (ops, inner.clone(), inner).prop_map(|(op, l, r)| Node::Binary {
                    op,
                    lhs: Box::new(l),
                    rhs: Box::new(r),
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_form_reparses_identically(root in tree()) {
            let e = Expression::from_node(root, 3).unwrap();
            let text = e.to_string();
            let back = parse(&text, 3).unwrap();
            prop_assert_eq!(back, e, "printed as {}", text);
        }

        #[test]
        fn hessian_is_exactly_symmetric(
            root in tree(),
            p in proptest::collection::vec(0.1f64..3.0, 3),
        ) {
            let e = Expression::from_node(root, 3).unwrap();
            if let Ok(h) = hessian(&e, &p) {
                prop_assert!(is_symmetric(&h, 0.0));
            }
        }

        #[test]
        fn evaluation_is_deterministic(root in tree(), p in proptest::collection::vec(-3.0f64..3.0, 3)) {
            let e = Expression::from_node(root, 3).unwrap();
            let a = evaluate(&e, &p);
            let b = evaluate(&e, &p);
            match (a, b) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
    }
}
