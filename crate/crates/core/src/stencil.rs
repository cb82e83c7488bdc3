//! Second differences and the four-point stencil built from the group of a
//! Hessian.
//!
//! For `γ` commuting with `H(x̄)`, `f(x̄+γh) − 2f(x̄) + f(x̄−γh)` equals
//! `hᵀH(x̄)h` up to `O(‖h‖⁴)`, so the Hessian term cancels in
//!
//! ```text
//! S = f(x̄+γ₁h) + f(x̄−γ₁h) − f(x̄+γ₂h) − f(x̄−γ₂h) = 2(g₄(γ₁h) − g₄(γ₂h)) + O(‖h‖⁶)
//! ```
//!
//! where `g₄` is the quartic Taylor term at `x̄`. [`order_estimate`] evaluates
//! `S` over a ladder of step scales and fits its convergence order.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::expr::{evaluate, hessian, EvalError, Expression};
use crate::linalg::{JacobiOptions, LinalgError, RealMatrix};
use crate::sign_group::{default_commutator_tol, ConjugatedGroup, GroupElement, GroupError, SignPattern};

pub const DEFAULT_SCALES: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-2;
/// `|S|` at or below `NOISE_FLOOR_REL · max(1, |f(x̄)|)` is treated as roundoff.
pub const NOISE_FLOOR_REL: f64 = 1e-14;

pub const CSV_HEADER: &str = "scale,S,second_diff_1,second_diff_2,hquad";

#[derive(Clone, Debug, PartialEq)]
pub enum StencilWarning {
    /// `γ₁ = ±γ₂`, so `S` carries no information.
    GammaPairDegenerate,
    /// `h` is (nearly) an eigenvector of `γⱼ`, `j ∈ {1, 2}`.
    HNearEigenvector(usize),
    /// `|S|` at this scale sits under the noise floor and was left out of the fit.
    BelowNoiseFloor { scale: f64 },
    /// Only one scale is above the noise floor; no order can be fitted.
    InsufficientScales,
}

impl fmt::Display for StencilWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StencilWarning::GammaPairDegenerate => {
                write!(f, "GammaPairDegenerate: gamma1 = +/-gamma2, the stencil is identically zero")
            }
            StencilWarning::HNearEigenvector(j) => {
                write!(f, "HNearEigenvector({j}): h is nearly an eigenvector of gamma{j}")
            }
            StencilWarning::BelowNoiseFloor { scale } => {
                write!(f, "BelowNoiseFloor: |S| at scale {scale} is under the noise floor")
            }
            StencilWarning::InsufficientScales => {
                write!(f, "InsufficientScales: fewer than two scales above the noise floor")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StencilError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("displacement h must be non-zero")]
    ZeroDisplacement,
    #[error("scales must be positive, finite and strictly decreasing, with at least two entries")]
    InvalidScales,
    #[error("group does not commute with the Hessian at the expansion point (defect {defect:e})")]
    GroupMismatch { defect: f64 },
    #[error("every |S| is below the noise floor {noise_floor:e}: the stencil is degenerate or f is too flat")]
    AllBelowNoiseFloor {
        noise_floor: f64,
        warnings: Vec<StencilWarning>,
    },
}

fn offset(x: &[f64], v: &[f64], sign: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| a + sign * b).collect()
}

fn check_len(what: &'static str, expected: usize, v: &[f64]) -> Result<(), StencilError> {
    if v.len() != expected {
        return Err(StencilError::DimensionMismatch {
            what,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// `f(x̄+γh) + f(x̄−γh)`.
fn symmetric_pair(
    f: &Expression,
    xbar: &[f64],
    gamma: &GroupElement,
    h: &[f64],
) -> Result<f64, StencilError> {
    check_len("h", gamma.dim(), h)?;
    check_len("expansion point", gamma.dim(), xbar)?;
    let gh = gamma.apply(h)?;
    Ok(evaluate(f, &offset(xbar, &gh, 1.0))? + evaluate(f, &offset(xbar, &gh, -1.0))?)
}

/// `f(x̄+γh) − 2f(x̄) + f(x̄−γh)`.
pub fn second_difference(
    f: &Expression,
    xbar: &[f64],
    gamma: &GroupElement,
    h: &[f64],
) -> Result<f64, StencilError> {
    let pair = symmetric_pair(f, xbar, gamma, h)?;
    Ok(pair - 2.0 * evaluate(f, xbar)?)
}

/// `S = [f(x̄+γ₁h) + f(x̄−γ₁h)] − [f(x̄+γ₂h) + f(x̄−γ₂h)]`.
///
/// Swapping `γ₁` and `γ₂` negates the result exactly, and `γ₁ = γ₂` gives
/// exactly zero.
pub fn four_point_stencil(
    f: &Expression,
    xbar: &[f64],
    gamma1: &GroupElement,
    gamma2: &GroupElement,
    h: &[f64],
) -> Result<f64, StencilError> {
    Ok(symmetric_pair(f, xbar, gamma1, h)? - symmetric_pair(f, xbar, gamma2, h)?)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn is_plus_minus_identity(gamma: &GroupElement, tol: f64) -> bool {
    let id = RealMatrix::identity(gamma.dim());
    let minus = |s: f64| {
        gamma
            .matrix
            .sub(&id.scale(s))
            .map(|d| d.frobenius_norm() <= tol)
            .unwrap_or(false)
    };
    minus(1.0) || minus(-1.0)
}

/// Flags pairs and displacements for which the stencil carries no
/// fourth-order information.
///
/// `±I` is skipped in the eigenvector test because every `h` is an
/// eigenvector of it; the pairing is then informative as long as the other
/// element does not fix `h` up to sign.
pub fn degeneracy_check(
    gamma1: &GroupElement,
    gamma2: &GroupElement,
    h: &[f64],
    tol: f64,
) -> Vec<StencilWarning> {
    let mut warnings = Vec::new();
    let dist = |s: f64| {
        gamma1
            .matrix
            .sub(&gamma2.matrix.scale(s))
            .map(|d| d.frobenius_norm())
            .unwrap_or(f64::INFINITY)
    };
    if dist(1.0) <= tol || dist(-1.0) <= tol {
        warnings.push(StencilWarning::GammaPairDegenerate);
    }
    let h_norm = norm(h);
    if h_norm == 0.0 {
        return warnings;
    }
    for (j, gamma) in [(1, gamma1), (2, gamma2)] {
        if is_plus_minus_identity(gamma, tol) {
            continue;
        }
        let Ok(gh) = gamma.apply(h) else { continue };
        let fixed = norm(&offset(&gh, h, -1.0)) / h_norm;
        let flipped = norm(&offset(&gh, h, 1.0)) / h_norm;
        if fixed.min(flipped) <= tol {
            warnings.push(StencilWarning::HNearEigenvector(j));
        }
    }
    warnings
}

#[derive(Clone, Debug, PartialEq)]
pub struct StencilInput {
    pub f: Expression,
    pub xbar: Vec<f64>,
    pub h: Vec<f64>,
    pub pattern1: SignPattern,
    pub pattern2: SignPattern,
    pub scales: Vec<f64>,
}

impl StencilInput {
    pub fn new(
        f: Expression,
        xbar: Vec<f64>,
        h: Vec<f64>,
        pattern1: SignPattern,
        pattern2: SignPattern,
    ) -> Self {
        Self {
            f,
            xbar,
            h,
            pattern1,
            pattern2,
            scales: DEFAULT_SCALES.to_vec(),
        }
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        self.scales = scales;
        self
    }

    pub fn validate(&self) -> Result<(), StencilError> {
        let n = self.f.n_vars();
        check_len("expansion point", n, &self.xbar)?;
        check_len("h", n, &self.h)?;
        for (what, p) in [("pattern1", &self.pattern1), ("pattern2", &self.pattern2)] {
            if p.len() != n {
                return Err(StencilError::DimensionMismatch {
                    what,
                    expected: n,
                    found: p.len(),
                });
            }
        }
        if self.h.iter().any(|x| !x.is_finite()) || norm(&self.h) == 0.0 {
            return Err(StencilError::ZeroDisplacement);
        }
        let ok = self.scales.len() >= 2
            && self.scales.iter().all(|s| s.is_finite() && *s > 0.0)
            && self.scales.windows(2).all(|w| w[0] > w[1]);
        if !ok {
            return Err(StencilError::InvalidScales);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleRecord {
    pub scale: f64,
    pub s: f64,
    pub second_diff_1: f64,
    pub second_diff_2: f64,
    /// `(s·h)ᵀ H(x̄) (s·h)`.
    pub hquad: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StencilReport {
    pub records: Vec<ScaleRecord>,
    /// Least-squares slope of `ln|S|` against `ln s` over the scales above
    /// the noise floor.
    pub fitted_order: Option<f64>,
    pub noise_floor: f64,
    pub warnings: Vec<StencilWarning>,
    pub hessian: RealMatrix,
    pub gamma1: GroupElement,
    pub gamma2: GroupElement,
}

/// Formats with six significant digits.
pub fn format_sig(x: f64) -> String {
    format!("{x:.5e}")
}

impl StencilReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                r.scale, r.s, r.second_diff_1, r.second_diff_2, r.hquad
            );
        }
        out
    }

    /// Human-readable table, six significant digits.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>12}  {:>13}  {:>13}  {:>13}  {:>13}\n",
            "scale", "S", "second_diff_1", "second_diff_2", "hquad"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:>12}  {:>13}  {:>13}  {:>13}  {:>13}",
                format_sig(r.scale),
                format_sig(r.s),
                format_sig(r.second_diff_1),
                format_sig(r.second_diff_2),
                format_sig(r.hquad)
            );
        }
        out
    }
}

/// Hessian of `f` at `x̄` and the group conjugated by its eigenvectors.
pub fn hessian_group(
    f: &Expression,
    xbar: &[f64],
) -> Result<(RealMatrix, ConjugatedGroup), StencilError> {
    let h = hessian(f, xbar)?;
    let group = ConjugatedGroup::of_symmetric(&h, &JacobiOptions::default())?;
    Ok((h, group))
}

/// Least-squares slope of `ln|S|` against `ln(scale)`.
pub fn fit_order(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.abs().ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Order implied by two samples: `ln(|S_a|/|S_b|) / ln(scale_a/scale_b)`.
pub fn two_point_order(scale_a: f64, s_a: f64, scale_b: f64, s_b: f64) -> f64 {
    (s_a.abs() / s_b.abs()).ln() / (scale_a / scale_b).ln()
}

/// Evaluates the stencil at each scale and fits its convergence order.
///
/// `group` must be the group of `H(x̄)`: it is rejected when its generators
/// fail to commute with the Hessian.
pub fn order_estimate(
    input: &StencilInput,
    group: &ConjugatedGroup,
) -> Result<StencilReport, StencilError> {
    input.validate()?;
    let f = &input.f;
    let xbar = &input.xbar;
    let hess = hessian(f, xbar)?;
    if group.dim() != hess.dim() {
        return Err(StencilError::DimensionMismatch {
            what: "group",
            expected: hess.dim(),
            found: group.dim(),
        });
    }
    let defect = group.generator_defect(&hess)?;
    if defect > default_commutator_tol(&hess) {
        return Err(StencilError::GroupMismatch { defect });
    }
    let gamma1 = group.element(&input.pattern1)?;
    let gamma2 = group.element(&input.pattern2)?;
    let mut warnings = degeneracy_check(&gamma1, &gamma2, &input.h, DEFAULT_DEGENERACY_TOL);

    let f0 = evaluate(f, xbar)?;
    let noise_floor = NOISE_FLOOR_REL * f0.abs().max(1.0);
    let mut records = Vec::with_capacity(input.scales.len());
    for &scale in &input.scales {
        let h: Vec<f64> = input.h.iter().map(|x| scale * x).collect();
        records.push(ScaleRecord {
            scale,
            s: four_point_stencil(f, xbar, &gamma1, &gamma2, &h)?,
            second_diff_1: second_difference(f, xbar, &gamma1, &h)?,
            second_diff_2: second_difference(f, xbar, &gamma2, &h)?,
            hquad: hess.quadratic_form(&h)?,
        });
    }

    let mut above = Vec::new();
    for r in &records {
        if r.s.abs() > noise_floor {
            above.push((r.scale, r.s));
        } else {
            warnings.push(StencilWarning::BelowNoiseFloor { scale: r.scale });
        }
    }
    if above.is_empty() {
        return Err(StencilError::AllBelowNoiseFloor {
            noise_floor,
            warnings,
        });
    }
    if above.len() == 1 {
        warnings.push(StencilWarning::InsufficientScales);
    }
    Ok(StencilReport {
        records,
        fitted_order: fit_order(&above),
        noise_floor,
        warnings,
        hessian: hess,
        gamma1,
        gamma2,
    })
}

/// [`order_estimate`] with the group derived from `H(x̄)`.
pub fn analyze(input: &StencilInput) -> Result<StencilReport, StencilError> {
    input.validate()?;
    let (_, group) = hessian_group(&input.f, &input.xbar)?;
    order_estimate(input, &group)
}
