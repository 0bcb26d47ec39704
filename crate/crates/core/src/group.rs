use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A translation of `R^d`, either a symbolic element `k*alpha + m` of the
/// group `Z*alpha + Z^d` or a raw vector (for translations drawn from
/// `p2(Gamma)` or ad hoc sets).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupElement {
    /// `k*alpha + m` with `m` an integer vector of the ambient dimension.
    Orbit { k: i64, m: Vec<i64> },
    /// A concrete translation vector.
    Vector(Vec<OrderedF64>),
}

/// Total-ordered f64 wrapper so group elements can be used as map keys.
/// NaN is rejected at construction of every public type that stores one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderedF64(pub f64);

impl Eq for OrderedF64 {}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl GroupElement {
    /// Symbolic element of `Z*alpha + Z^d`.
    pub fn orbit(k: i64, m: Vec<i64>) -> Self {
        GroupElement::Orbit { k, m }
    }

    /// Raw translation vector.
    pub fn vector(v: Vec<f64>) -> Self {
        GroupElement::Vector(v.into_iter().map(OrderedF64).collect())
    }

    /// Resolve to a concrete d-vector. `alpha` is required for orbit
    /// elements and must match the element's dimension.
    pub fn resolve(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        match self {
            GroupElement::Orbit { k, m } => {
                if alpha.len() != m.len() {
                    return Err(Error::invalid(format!(
                        "group element has dimension {} but alpha has dimension {}",
                        m.len(),
                        alpha.len()
                    )));
                }
                Ok(alpha
                    .iter()
                    .zip(m)
                    .map(|(&a, &mi)| (*k as f64) * a + mi as f64)
                    .collect())
            }
            GroupElement::Vector(v) => Ok(v.iter().map(|x| x.0).collect()),
        }
    }

    /// Dimension of the translation.
    pub fn dim(&self) -> usize {
        match self {
            GroupElement::Orbit { m, .. } => m.len(),
            GroupElement::Vector(v) => v.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_resolution() {
        let g = GroupElement::orbit(2, vec![-1]);
        let v = g.resolve(&[0.25]).unwrap();
        assert_eq!(v, vec![-0.5]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = GroupElement::orbit(1, vec![0, 0]);
        assert!(g.resolve(&[0.5]).is_err());
    }

    #[test]
    fn vector_resolution_ignores_alpha() {
        let g = GroupElement::vector(vec![1.5, -2.0]);
        assert_eq!(g.resolve(&[]).unwrap(), vec![1.5, -2.0]);
    }
}
