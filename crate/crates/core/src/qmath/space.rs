use serde::{Deserialize, Serialize};

use super::{QmathError, Result};

/// Largest total dimension any operator may have.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub dim: usize,
}

/// Ordered tensor product of named factors. The first factor is the most
/// significant digit of a basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl TryFrom<Vec<Factor>> for HilbertSpace {
    type Error = QmathError;
    fn try_from(factors: Vec<Factor>) -> Result<Self> {
        HilbertSpace::new(factors)
    }
}

impl From<HilbertSpace> for Vec<Factor> {
    fn from(s: HilbertSpace) -> Self {
        s.factors
    }
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut total = 1usize;
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(QmathError::InvalidArgument(format!(
                    "factor `{}` has dimension 0",
                    f.name
                )));
            }
            if factors[..i].iter().any(|g| g.name == f.name) {
                return Err(QmathError::DuplicateFactor(f.name.clone()));
            }
            total = total.saturating_mul(f.dim);
            if total > MAX_DIM {
                return Err(QmathError::DimensionGuard(total));
            }
        }
        Ok(HilbertSpace { factors })
    }

    /// Space from `(name, dim)` pairs.
    pub fn of(factors: &[(&str, usize)]) -> Result<Self> {
        Self::new(
            factors
                .iter()
                .map(|(n, d)| Factor {
                    name: n.to_string(),
                    dim: *d,
                })
                .collect(),
        )
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn names(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| QmathError::UnknownFactor(name.to_string()))
    }

    pub fn factor_dim(&self, name: &str) -> Result<usize> {
        Ok(self.factors[self.position(name)?].dim)
    }

    /// Positions of `names`, rejecting unknown or repeated names.
    pub fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self.position(n)?;
            if out.contains(&p) {
                return Err(QmathError::DuplicateFactor(n.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Subspace on the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> HilbertSpace {
        HilbertSpace {
            factors: positions.iter().map(|&p| self.factors[p].clone()).collect(),
        }
    }

    /// Tensor product `self ⊗ other`.
    pub fn join(&self, other: &HilbertSpace) -> Result<HilbertSpace> {
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        HilbertSpace::new(f)
    }

    /// Same space with every factor renamed by `rename`.
    pub fn renamed<F: Fn(&str) -> String>(&self, rename: F) -> Result<HilbertSpace> {
        HilbertSpace::new(
            self.factors
                .iter()
                .map(|f| Factor {
                    name: rename(&f.name),
                    dim: f.dim,
                })
                .collect(),
        )
    }

    /// For each basis index, the pair (index within `part`, index within the
    /// remaining factors), both in original factor order.
    pub fn split(&self, part: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.factors.len();
        let mut is_part = vec![false; n];
        for &p in part {
            is_part[p] = true;
        }
        let total = self.dim();
        let mut a = vec![0; total];
        let mut b = vec![0; total];
        for idx in 0..total {
            let mut rem = idx;
            let mut digits = vec![0; n];
            for i in (0..n).rev() {
                digits[i] = rem % self.factors[i].dim;
                rem /= self.factors[i].dim;
            }
            let (mut ia, mut ib) = (0, 0);
            for i in 0..n {
                if is_part[i] {
                    ia = ia * self.factors[i].dim + digits[i];
                } else {
                    ib = ib * self.factors[i].dim + digits[i];
                }
            }
            a[idx] = ia;
            b[idx] = ib;
        }
        (a, b)
    }

    /// `perm[i]` is the basis index in the space reordered to `order` that
    /// corresponds to basis index `i` of `self`.
    pub fn permutation(&self, order: &[usize]) -> Vec<usize> {
        let n = self.factors.len();
        let total = self.dim();
        (0..total)
            .map(|idx| {
                let mut rem = idx;
                let mut digits = vec![0; n];
                for i in (0..n).rev() {
                    digits[i] = rem % self.factors[i].dim;
                    rem /= self.factors[i].dim;
                }
                order
                    .iter()
                    .fold(0, |acc, &p| acc * self.factors[p].dim + digits[p])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guards() {
        assert!(matches!(
            HilbertSpace::of(&[("A", 2), ("A", 2)]),
            Err(QmathError::DuplicateFactor(_))
        ));
        assert!(matches!(
            HilbertSpace::of(&[("A", 64), ("B", 65)]),
            Err(QmathError::DimensionGuard(_))
        ));
        assert_eq!(HilbertSpace::of(&[("A", 64), ("B", 64)]).unwrap().dim(), 4096);
    }

    #[test]
    fn split_and_permutation() {
        let s = HilbertSpace::of(&[("A", 2), ("B", 3)]).unwrap();
        let (a, b) = s.split(&[1]);
        assert_eq!(a, vec![0, 1, 2, 0, 1, 2]);
        assert_eq!(b, vec![0, 0, 0, 1, 1, 1]);
        let p = s.permutation(&[1, 0]);
        assert_eq!(p, vec![0, 2, 4, 1, 3, 5]);
    }
}
