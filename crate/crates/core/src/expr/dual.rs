//! Forward-mode number types used to differentiate expressions.

use std::ops::{Add, Mul, Neg, Sub};

/// Arithmetic needed by the expression evaluator.
///
/// Elementary functions go through [`Scalar::chain`], which lifts a scalar
/// function given its value and first two derivatives at the current point.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(x: f64) -> Self;

    fn value(&self) -> f64;

    /// True when every derivative component is zero.
    fn is_constant(&self) -> bool;

    /// Applies `g` where `g(x) = f`, `g'(x) = df`, `g''(x) = d2f` at `x = self.value()`.
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self;

    fn recip(self) -> Self {
        let x = self.value();
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    fn all_finite(&self) -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn constant(x: f64) -> Self {
        x
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn is_constant(&self) -> bool {
        true
    }

    #[inline]
    fn chain(self, f: f64, _df: f64, _d2f: f64) -> Self {
        f
    }

    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// First-order dual number `re + eps·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl Scalar for Dual {
    fn constant(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    fn value(&self) -> f64 {
        self.re
    }

    fn is_constant(&self) -> bool {
        self.eps == 0.0
    }

    fn chain(self, f: f64, df: f64, _d2f: f64) -> Self {
        Self::new(f, df * self.eps)
    }

    fn all_finite(&self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
}

/// Hyper-dual number `value + d1·ε₁ + d2·ε₂ + d12·ε₁ε₂` with
/// `ε₁² = ε₂² = 0`. Seeding `ε₁` along `eᵢ` and `ε₂` along `eⱼ` makes `d12`
/// the exact mixed partial `∂²f/∂xᵢ∂xⱼ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperDual {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl HyperDual {
    pub fn new(value: f64, d1: f64, d2: f64, d12: f64) -> Self {
        Self { value, d1, d2, d12 }
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.value + rhs.value,
            self.d1 + rhs.d1,
            self.d2 + rhs.d2,
            self.d12 + rhs.d12,
        )
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.value - rhs.value,
            self.d1 - rhs.d1,
            self.d2 - rhs.d2,
            self.d12 - rhs.d12,
        )
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.value * rhs.d1 + self.d1 * rhs.value,
            self.value * rhs.d2 + self.d2 * rhs.value,
            self.value * rhs.d12 + self.d1 * rhs.d2 + self.d2 * rhs.d1 + self.d12 * rhs.value,
        )
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.d1, -self.d2, -self.d12)
    }
}

impl Scalar for HyperDual {
    fn constant(x: f64) -> Self {
        Self::new(x, 0.0, 0.0, 0.0)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn is_constant(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0 && self.d12 == 0.0
    }

    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Self::new(
            f,
            df * self.d1,
            df * self.d2,
            df * self.d12 + d2f * self.d1 * self.d2,
        )
    }

    fn all_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d12.is_finite()
    }
}

/// `base^exp` by repeated squaring; `exp ≥ 0`.
pub fn powi<S: Scalar>(base: S, mut exp: u64) -> S {
    let mut acc = S::constant(1.0);
    let mut square = base;
    let mut first = true;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = if first { square } else { acc * square };
            first = false;
        }
        exp >>= 1;
        if exp > 0 {
            square = square * square;
        }
    }
    acc
}
