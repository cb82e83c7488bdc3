//! The sign group `Σ` of diagonal `±1` matrices and its conjugate
//! `Γ = { Vᵀ σ V }` by an orthogonal `V`.
//!
//! A matrix `B` commutes with all of `Σ` exactly when it is diagonal, so `A`
//! commutes with all of `Γ` exactly when `V A Vᵀ` is diagonal. Choosing `V`
//! as the eigenvector transform of the symmetric part of `A` turns the
//! existential characterization of symmetric matrices into a decision
//! procedure ([`symmetry_via_equivariance`]).
//!
//! Elements of `Γ` are formed as `I − 2 Σ vᵢ vᵢᵀ` over the rows `vᵢ` of `V`
//! whose sign is flipped, which equals `Vᵀ σ V` without the two full
//! products.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{
    commutator_norm, complex_commutator_norm, hermitian_eigen, orthogonality_defect,
    symmetric_eigen, ComplexMatrix, JacobiOptions, LinalgError, RealMatrix,
};

/// Default cap on `n` for [`enumerate_group`].
pub const DEFAULT_ENUMERATION_CAP: usize = 20;
/// Largest `n` accepted by [`CheckMode::Full`].
pub const FULL_CHECK_CAP: usize = 12;
/// Above this `n`, full checks pair every element with the generators only.
const ALL_PAIRS_CAP: usize = 8;
/// Orthogonality/unitarity tolerance required of a conjugating matrix.
pub const BASIS_TOL: f64 = 1e-8;
/// Closure tolerance for products of two group elements.
const CLOSURE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("invalid sign pattern `{text}`: character {position} must be `+` or `-`")]
    InvalidPattern { text: String, position: usize },
    #[error("sign pattern must be non-empty")]
    EmptyPattern,
    #[error("sign pattern has length {pattern}, matrix dimension is {dim}")]
    PatternLength { pattern: usize, dim: usize },
    #[error("matrix is not orthogonal (‖VVᵀ − I‖_F = {defect:e})")]
    NotOrthogonal { defect: f64 },
    #[error("matrix is not unitary (‖WW* − I‖_F = {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("dimension {n} exceeds the enumeration cap {cap}; use the generators instead")]
    DimensionTooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// The diagonal of an element of `Σ`, written as a `+`/`-` string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern(Vec<Sign>);

impl SignPattern {
    pub fn new(signs: Vec<Sign>) -> Result<Self, GroupError> {
        if signs.is_empty() {
            return Err(GroupError::EmptyPattern);
        }
        Ok(Self(signs))
    }

    /// Panics if `n == 0`.
    pub fn all_plus(n: usize) -> Self {
        assert!(n > 0, "sign pattern length must be positive");
        Self(vec![Sign::Plus; n])
    }

    /// The generator with a single `-` at position `i` (0-based).
    pub fn single_flip(n: usize, i: usize) -> Self {
        let mut p = Self::all_plus(n);
        p.0[i] = Sign::Minus;
        p
    }

    /// The `index`-th pattern in lexicographic order with `+` before `-`.
    ///
    /// Position 0 corresponds to the most significant bit of `index`.
    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n > 0 && n <= 64, "sign pattern length must be in 1..=64");
        Self(
            (0..n)
                .map(|i| {
                    if (index >> (n - 1 - i)) & 1 == 1 {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    }
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn minus_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Sign::Minus)
            .map(|(i, _)| i)
    }

    /// Group law of `Σ`: entrywise product of the signs.
    pub fn compose(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| if b == Sign::Minus { a.flip() } else { a })
                .collect(),
        )
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Sign::Plus => "+",
                Sign::Minus => "-",
            })?;
        }
        Ok(())
    }
}

impl FromStr for SignPattern {
    type Err = GroupError;

    fn from_str(text: &str) -> Result<Self, GroupError> {
        let signs = text
            .chars()
            .enumerate()
            .map(|(position, c)| match c {
                '+' => Ok(Sign::Plus),
                '-' => Ok(Sign::Minus),
                _ => Err(GroupError::InvalidPattern {
                    text: text.to_string(),
                    position,
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(signs)
    }
}

/// `σ` as a diagonal matrix.
pub fn sigma_matrix(pattern: &SignPattern) -> RealMatrix {
    let diag: Vec<f64> = pattern.signs().iter().map(|s| s.value()).collect();
    RealMatrix::from_diagonal(&diag)
}

/// An element `γ = Vᵀ σ V` of `Γ` together with the pattern of its `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub matrix: RealMatrix,
    pub pattern: SignPattern,
}

impl GroupElement {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, h: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.matrix.mul_vec(h)
    }
}

fn check_orthogonal(v: &RealMatrix) -> Result<(), GroupError> {
    let defect = orthogonality_defect(v);
    if defect > BASIS_TOL {
        return Err(GroupError::NotOrthogonal { defect });
    }
    Ok(())
}

fn check_pattern(v_dim: usize, pattern: &SignPattern) -> Result<(), GroupError> {
    if pattern.len() != v_dim {
        return Err(GroupError::PatternLength {
            pattern: pattern.len(),
            dim: v_dim,
        });
    }
    Ok(())
}

/// `I − 2 Σ_{i flipped} vᵢ vᵢᵀ`; exactly symmetric by construction.
fn reflect(v: &RealMatrix, pattern: &SignPattern) -> RealMatrix {
    let n = v.dim();
    let mut m = RealMatrix::identity(n);
    for i in pattern.minus_positions() {
        let row = v.row(i);
        for a in 0..n {
            for b in 0..n {
                m.set(a, b, m.get(a, b) - 2.0 * (row[a] * row[b]));
            }
        }
    }
    m
}

/// Builds `γ = Vᵀ σ V` for the given pattern.
pub fn gamma_from_pattern(v: &RealMatrix, pattern: &SignPattern) -> Result<GroupElement, GroupError> {
    check_pattern(v.dim(), pattern)?;
    check_orthogonal(v)?;
    Ok(GroupElement {
        matrix: reflect(v, pattern),
        pattern: pattern.clone(),
    })
}

/// `Γ` for a fixed orthogonal `V`, represented by its `n` single-flip
/// generators `γᵢ = I − 2 vᵢ vᵢᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugatedGroup {
    basis: RealMatrix,
    generators: Vec<GroupElement>,
}

impl ConjugatedGroup {
    pub fn new(v: RealMatrix) -> Result<Self, GroupError> {
        check_orthogonal(&v)?;
        let n = v.dim();
        let generators = (0..n)
            .map(|i| {
                let pattern = SignPattern::single_flip(n, i);
                GroupElement {
                    matrix: reflect(&v, &pattern),
                    pattern,
                }
            })
            .collect();
        Ok(Self {
            basis: v,
            generators,
        })
    }

    /// The group of a symmetric matrix, conjugated by its Jacobi eigenvectors.
    pub fn of_symmetric(a: &RealMatrix, opts: &JacobiOptions) -> Result<Self, GroupError> {
        Self::new(symmetric_eigen(a, opts)?.vectors)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// The conjugating matrix `V` (rows are the shared eigenvectors).
    pub fn basis(&self) -> &RealMatrix {
        &self.basis
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn element(&self, pattern: &SignPattern) -> Result<GroupElement, GroupError> {
        check_pattern(self.dim(), pattern)?;
        Ok(GroupElement {
            matrix: reflect(&self.basis, pattern),
            pattern: pattern.clone(),
        })
    }

    pub fn elements(&self, n_cap: usize) -> Result<GroupElements, GroupError> {
        GroupElements::new(self.basis.clone(), n_cap)
    }

    /// Order of the group, `2ⁿ`.
    pub fn order(&self) -> u128 {
        1u128 << self.dim()
    }

    /// Largest `‖γᵢ A − A γᵢ‖_F` over the generators.
    pub fn generator_defect(&self, a: &RealMatrix) -> Result<f64, GroupError> {
        let mut worst: f64 = 0.0;
        for g in &self.generators {
            worst = worst.max(commutator_norm(&g.matrix, a)?);
        }
        Ok(worst)
    }

    /// Largest `‖γ A − A γ‖_F` over all `2ⁿ` elements.
    pub fn full_defect(&self, a: &RealMatrix, n_cap: usize) -> Result<f64, GroupError> {
        let mut worst: f64 = 0.0;
        for g in self.elements(n_cap)? {
            worst = worst.max(commutator_norm(&g.matrix, a)?);
        }
        Ok(worst)
    }
}

/// Lazy stream of all `2ⁿ` elements of `Γ` in lexicographic pattern order.
#[derive(Clone, Debug)]
pub struct GroupElements {
    basis: RealMatrix,
    next: u64,
    total: u64,
}

impl GroupElements {
    fn new(basis: RealMatrix, n_cap: usize) -> Result<Self, GroupError> {
        let n = basis.dim();
        let cap = n_cap.min(63);
        if n > cap {
            return Err(GroupError::DimensionTooLarge { n, cap });
        }
        check_orthogonal(&basis)?;
        Ok(Self {
            basis,
            next: 0,
            total: 1u64 << n,
        })
    }
}

impl Iterator for GroupElements {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        if self.next == self.total {
            return None;
        }
        let pattern = SignPattern::from_index(self.basis.dim(), self.next);
        self.next += 1;
        Some(GroupElement {
            matrix: reflect(&self.basis, &pattern),
            pattern,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.total - self.next).ok();
        (left.unwrap_or(usize::MAX), left)
    }
}

/// Streams all `2ⁿ` elements of `Γ = { Vᵀ σ V }`; fails when `n > n_cap`.
pub fn enumerate_group(v: &RealMatrix, n_cap: usize) -> Result<GroupElements, GroupError> {
    GroupElements::new(v.clone(), n_cap)
}

/// Scale-aware default tolerance for commutator checks:
/// `1e-8 · max(1, ‖A‖_F)`.
pub fn default_commutator_tol(a: &RealMatrix) -> f64 {
    1e-8 * a.frobenius_norm().max(1.0)
}

/// True iff `A` commutes with every generator of `Γ = { Vᵀ σ V }` to `tol`.
pub fn is_equivariant(a: &RealMatrix, v: &RealMatrix, tol: f64) -> Result<bool, GroupError> {
    if a.dim() != v.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: a.dim(),
            right: v.dim(),
        }
        .into());
    }
    let group = ConjugatedGroup::new(v.clone())?;
    Ok(group.generator_defect(a)? <= tol)
}

/// True iff `B` commutes with the `n` single-flip generators of `Σ` to `tol`.
pub fn commutes_with_sign_group(b: &RealMatrix, tol: f64) -> bool {
    sign_group_defect(b) <= tol
}

/// Largest `‖σᵢ B − B σᵢ‖_F` over the single-flip generators of `Σ`.
pub fn sign_group_defect(b: &RealMatrix) -> f64 {
    let n = b.dim();
    (0..n)
        .map(|i| {
            let sigma = sigma_matrix(&SignPattern::single_flip(n, i));
            commutator_norm(&sigma, b).expect("dimensions match")
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryVerdict {
    pub verdict: bool,
    /// Eigenvectors of the symmetric part of `A`, used as the witness `V`.
    pub v: RealMatrix,
    pub max_commutator: f64,
}

/// Decides `A = Aᵀ` through equivariance.
///
/// `V` is taken from the eigendecomposition of `(A + Aᵀ)/2`; the verdict is
/// whether every generator of the resulting `Γ` commutes with `A` to `tol`.
pub fn symmetry_via_equivariance(a: &RealMatrix, tol: f64) -> Result<SymmetryVerdict, GroupError> {
    let sym = a.symmetric_part();
    let eig = symmetric_eigen(&sym, &JacobiOptions::default())?;
    let group = ConjugatedGroup::new(eig.vectors)?;
    let max_commutator = group.generator_defect(a)?;
    Ok(SymmetryVerdict {
        verdict: max_commutator <= tol,
        v: group.basis,
        max_commutator,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Check the `n` generators and their pairwise products.
    Generators,
    /// Enumerate all `2ⁿ` elements (`n ≤ 12`).
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupReport {
    /// `max ‖γ² − I‖_F`.
    pub involution_max_err: f64,
    /// `max ‖γ − γᵀ‖_F`.
    pub symmetry_max_err: f64,
    /// `max ‖γ_a γ_b − γ_b γ_a‖_F` over the checked pairs.
    pub commutation_max_err: f64,
    /// Largest distance between a product `γ_a γ_b` and the element for the
    /// composed pattern.
    pub closure_max_err: f64,
    pub closure_ok: bool,
    pub order: u128,
    pub elements_checked: usize,
}

/// Verifies the group axioms of `Γ`: involutions, symmetry, commutation and
/// closure.
///
/// In [`CheckMode::Full`] every element is materialized. Pairwise products
/// cover all pairs for `n ≤ 8`; for `9 ≤ n ≤ 12` each element is paired with
/// every generator, which still certifies closure of the generated set.
pub fn group_properties_check(
    group: &ConjugatedGroup,
    mode: CheckMode,
) -> Result<GroupReport, GroupError> {
    let n = group.dim();
    let elements: Vec<GroupElement> = match mode {
        CheckMode::Generators => group.generators.clone(),
        CheckMode::Full => group.elements(FULL_CHECK_CAP)?.collect(),
    };
    let identity = RealMatrix::identity(n);

    let mut involution_max_err: f64 = 0.0;
    let mut symmetry_max_err: f64 = 0.0;
    for g in &elements {
        let sq = g.matrix.matmul(&g.matrix)?;
        involution_max_err = involution_max_err.max(sq.sub(&identity)?.frobenius_norm());
        symmetry_max_err =
            symmetry_max_err.max(g.matrix.sub(&g.matrix.transpose())?.frobenius_norm());
    }

    let pairs: Vec<(usize, usize)> = match mode {
        CheckMode::Generators => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        CheckMode::Full if n <= ALL_PAIRS_CAP => (0..elements.len())
            .flat_map(|a| (a + 1..elements.len()).map(move |b| (a, b)))
            .collect(),
        CheckMode::Full => (0..elements.len())
            .flat_map(|a| (0..n).map(move |i| (a, 1usize << (n - 1 - i))))
            .filter(|(a, b)| a != b)
            .collect(),
    };

    let mut commutation_max_err: f64 = 0.0;
    let mut closure_max_err: f64 = 0.0;
    for (a, b) in pairs {
        let (ga, gb) = (&elements[a].matrix, &elements[b].matrix);
        let ab = ga.matmul(gb)?;
        let ba = gb.matmul(ga)?;
        commutation_max_err = commutation_max_err.max(ab.sub(&ba)?.frobenius_norm());
        let composed = elements[a].pattern.compose(&elements[b].pattern);
        let target = match mode {
            CheckMode::Full => elements[a ^ b].matrix.clone(),
            CheckMode::Generators => group.element(&composed)?.matrix,
        };
        debug_assert!(mode == CheckMode::Generators || elements[a ^ b].pattern == composed);
        closure_max_err = closure_max_err
            .max(ab.sub(&target)?.frobenius_norm())
            .max(ba.sub(&target)?.frobenius_norm());
    }

    Ok(GroupReport {
        involution_max_err,
        symmetry_max_err,
        commutation_max_err,
        closure_max_err,
        closure_ok: closure_max_err <= CLOSURE_TOL,
        order: group.order(),
        elements_checked: elements.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityVerdict {
    pub verdict: bool,
    pub w_used: ComplexMatrix,
    pub max_commutator: f64,
}

/// `W* σ W` for a single flip at `i`: `I − 2 wᵢ* wᵢ` with `wᵢ` row `i` of `W`.
fn complex_generator(w: &ComplexMatrix, i: usize) -> ComplexMatrix {
    let row = w.row(i);
    ComplexMatrix::from_fn(w.dim(), |a, b| {
        let delta = if a == b { 1.0 } else { 0.0 };
        Complex64::new(delta, 0.0) - 2.0 * row[a].conj() * row[b]
    })
}

/// Normality through equivariance under `Γ = { W* σ W }`.
///
/// With `w` given, it must be unitary and the verdict reports whether `A`
/// commutes with each generator. Without `w`, `A` must be Hermitian and `W`
/// comes from [`hermitian_eigen`].
pub fn normality_via_equivariance(
    a: &ComplexMatrix,
    w: Option<&ComplexMatrix>,
    tol: f64,
) -> Result<NormalityVerdict, GroupError> {
    let w_used = match w {
        Some(w) => {
            if w.dim() != a.dim() {
                return Err(LinalgError::DimensionMismatch {
                    left: a.dim(),
                    right: w.dim(),
                }
                .into());
            }
            let defect = w.unitarity_defect();
            if defect > BASIS_TOL {
                return Err(GroupError::NotUnitary { defect });
            }
            w.clone()
        }
        None => hermitian_eigen(a, &JacobiOptions::default())?.vectors,
    };
    let mut max_commutator: f64 = 0.0;
    for i in 0..a.dim() {
        let g = complex_generator(&w_used, i);
        max_commutator = max_commutator.max(complex_commutator_norm(&g, a)?);
    }
    Ok(NormalityVerdict {
        verdict: max_commutator <= tol,
        w_used,
        max_commutator,
    })
}
