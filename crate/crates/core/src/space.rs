//! Minimal linear-space operations shared by all solver state types.
//!
//! The descent solver is generic over the domain and target; it only needs
//! cloning, scaling and linear combinations. Norms are supplied per problem,
//! not by this trait, so the same vector type can carry different gradings.

use num_complex::Complex64;

pub trait LinearOps: Clone {
    /// Additive identity with the same shape as `self`.
    fn zeros_like(&self) -> Self;

    /// `self + alpha * other`.
    fn add_scaled(&self, alpha: f64, other: &Self) -> Self;

    /// `alpha * self`.
    fn scaled(&self, alpha: f64) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }
}

impl LinearOps for Complex64 {
    fn zeros_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        self + alpha * other
    }

    fn scaled(&self, alpha: f64) -> Self {
        alpha * self
    }
}

/// Real grid functions (collocation values on a periodic grid).
impl LinearOps for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }

    fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| a + alpha * b)
            .collect()
    }

    fn scaled(&self, alpha: f64) -> Self {
        self.iter().map(|a| alpha * a).collect()
    }
}

/// Sup norm of a real grid function.
pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
