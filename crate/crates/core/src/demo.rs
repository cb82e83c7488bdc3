//! Worked example: a three-variable function at `x̄ = (1, 1, 1)` with the
//! stencil pair `+++` / `-++`.

use std::fmt::Write as _;

use crate::expr::{hessian, parse, Expression};
use crate::linalg::RealMatrix;
use crate::sign_group::SignPattern;
use crate::stencil::{
    format_sig, four_point_stencil, hessian_group, order_estimate, two_point_order, StencilError,
    StencilInput,
};

pub const FUNCTION: &str = "x1*x2*x3^2 + x1^2 - 3*x2^2 + x2*sin(x1) - x2^2*x3^2";
pub const XBAR: [f64; 3] = [1.0, 1.0, 1.0];
pub const H: [f64; 3] = [0.2, 0.05, 0.1];
pub const PATTERN1: &str = "+++";
pub const PATTERN2: &str = "-++";

/// Reference `γ₂`, rounded to four decimals.
pub const REFERENCE_GAMMA2: [[f64; 3]; 3] = [
    [0.9225, 0.3723, 0.1015],
    [0.3723, -0.7896, -0.4877],
    [0.1015, -0.4877, 0.8671],
];
pub const REFERENCE_S_H: f64 = 6.40e-5;
pub const REFERENCE_S_H10: f64 = 6.38e-9;

pub const HESSIAN_TOL: f64 = 1e-12;
pub const GAMMA_TOL: f64 = 5e-5;
pub const STENCIL_REL_TOL: f64 = 0.01;
pub const FITTED_ORDER_RANGE: (f64, f64) = (3.9, 4.1);
pub const DECADE_ORDER_RANGE: (f64, f64) = (3.99, 4.01);
pub const FIT_SCALES: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// Closed-form Hessian at `x̄ = (1, 1, 1)`.
pub fn exact_hessian() -> RealMatrix {
    let (s, c) = (1f64.sin(), 1f64.cos());
    RealMatrix::from_rows(&[
        [2.0 - s, 1.0 + c, 2.0],
        [1.0 + c, -8.0, -2.0],
        [2.0, -2.0, 0.0],
    ])
    .expect("finite 3x3")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkedExample {
    pub hessian: RealMatrix,
    pub gamma2: RealMatrix,
    pub s_h: f64,
    pub s_h10: f64,
    pub fitted_order: Option<f64>,
    pub decade_order: f64,
    pub checks: Vec<Check>,
}

impl WorkedExample {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("f(x) = {}\nxbar = (1, 1, 1), h = (0.2, 0.05, 0.1)\n\nHessian:\n", self.f_display());
        for row in self.hessian.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{:>13}", format_sig(*x))).collect();
            let _ = writeln!(out, "  {}", cells.join(" "));
        }
        let _ = writeln!(out, "\ngamma2 ({PATTERN2}):");
        for row in self.gamma2.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>8.4}")).collect();
            let _ = writeln!(out, "  {}", cells.join(" "));
        }
        let _ = writeln!(out, "\nS(h)    = {}", format_sig(self.s_h));
        let _ = writeln!(out, "S(h/10) = {}", format_sig(self.s_h10));
        match self.fitted_order {
            Some(p) => {
                let _ = writeln!(out, "fitted order = {}", format_sig(p));
            }
            None => out.push_str("fitted order = n/a\n"),
        }
        let _ = writeln!(out, "decade order = {}\n", format_sig(self.decade_order));
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        out
    }

    fn f_display(&self) -> String {
        parse(FUNCTION, 3).map(|e| e.to_string()).unwrap_or_default()
    }
}

fn max_abs_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn function() -> Expression {
    parse(FUNCTION, 3).expect("built-in function parses")
}

fn pattern(text: &str) -> SignPattern {
    text.parse().expect("built-in pattern parses")
}

pub fn run() -> Result<WorkedExample, StencilError> {
    let f = function();
    let hess = hessian(&f, &XBAR)?;
    let (_, group) = hessian_group(&f, &XBAR)?;
    let g1 = group.element(&pattern(PATTERN1))?;
    let g2 = group.element(&pattern(PATTERN2))?;

    let h10: Vec<f64> = H.iter().map(|x| x / 10.0).collect();
    let s_h = four_point_stencil(&f, &XBAR, &g1, &g2, &H)?;
    let s_h10 = four_point_stencil(&f, &XBAR, &g1, &g2, &h10)?;
    let decade_order = two_point_order(1.0, s_h, 0.1, s_h10);
    let input = StencilInput::new(f, XBAR.to_vec(), H.to_vec(), pattern(PATTERN1), pattern(PATTERN2))
        .with_scales(FIT_SCALES.to_vec());
    let fitted_order = order_estimate(&input, &group)?.fitted_order;

    let mut checks = Vec::new();
    let err = max_abs_diff(&hess, &exact_hessian());
    checks.push(Check {
        name: "hessian",
        passed: err <= HESSIAN_TOL,
        detail: format!("max |H - H_exact| = {err:.3e} (tol {HESSIAN_TOL:e})"),
    });

    let reference = RealMatrix::from_rows(&REFERENCE_GAMMA2).expect("finite 3x3");
    let err = max_abs_diff(&g2.matrix, &reference);
    checks.push(Check {
        name: "gamma2",
        passed: err <= GAMMA_TOL,
        detail: format!("max entry error = {err:.3e} (tol {GAMMA_TOL:e})"),
    });

    let rel_h = (s_h - REFERENCE_S_H).abs() / REFERENCE_S_H;
    let rel_h10 = (s_h10 - REFERENCE_S_H10).abs() / REFERENCE_S_H10;
    checks.push(Check {
        name: "stencil",
        passed: rel_h <= STENCIL_REL_TOL && rel_h10 <= STENCIL_REL_TOL,
        detail: format!(
            "S(h) rel err {rel_h:.3e}, S(h/10) rel err {rel_h10:.3e} (tol {STENCIL_REL_TOL})"
        ),
    });

    let in_range = |p: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&p);
    let fitted_ok = fitted_order.is_some_and(|p| in_range(p, FITTED_ORDER_RANGE));
    checks.push(Check {
        name: "order",
        passed: fitted_ok && in_range(decade_order, DECADE_ORDER_RANGE),
        detail: format!(
            "fitted {} in [{}, {}], decade {} in [{}, {}]",
            fitted_order.map_or("n/a".to_string(), format_sig),
            FITTED_ORDER_RANGE.0,
            FITTED_ORDER_RANGE.1,
            format_sig(decade_order),
            DECADE_ORDER_RANGE.0,
            DECADE_ORDER_RANGE.1
        ),
    });

    Ok(WorkedExample {
        hessian: hess,
        gamma2: g2.matrix,
        s_h,
        s_h10,
        fitted_order,
        decade_order,
        checks,
    })
}
