use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::SampledField;
use super::setup::MultiplicitySetup;
use crate::error::{invalid, Result};

/// An element of Z_2^n acting by coordinate sign flips.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector {
    pub signs: Vec<i8>,
}

impl SignVector {
    pub fn identity(n: usize) -> SignVector {
        SignVector { signs: vec![1; n] }
    }

    pub fn new(signs: Vec<i8>) -> Result<SignVector> {
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(invalid("sign vector entries must be +1 or -1"));
        }
        Ok(SignVector { signs })
    }

    /// The reflection `σ_j` in the hyperplane `x_j = 0`.
    pub fn reflection(n: usize, j: usize) -> SignVector {
        let mut s = SignVector::identity(n);
        s.signs[j] = -1;
        s
    }

    /// Element whose `j`-th sign is `-1` exactly when bit `j` of `mask` is set.
    pub fn from_mask(n: usize, mask: usize) -> SignVector {
        SignVector { signs: (0..n).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect() }
    }

    /// All `2^n` group elements, identity first.
    pub fn all(n: usize) -> Vec<SignVector> {
        (0..1usize << n).map(|m| SignVector::from_mask(n, m)).collect()
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn compose(&self, other: &SignVector) -> SignVector {
        SignVector { signs: self.signs.iter().zip(&other.signs).map(|(a, b)| a * b).collect() }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.signs).map(|(v, s)| v * f64::from(*s)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.signs.iter().all(|s| *s == 1)
    }
}

/// The orbit `{σ x : σ ∈ Z_2^n}` listed over all group elements (with repeats
/// when some coordinate vanishes).
pub fn orbit(setup: &MultiplicitySetup, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    if x.len() != setup.dim() {
        return Err(invalid(format!("point has dimension {}, expected {}", x.len(), setup.dim())));
    }
    Ok(SignVector::all(x.len()).iter().map(|s| s.apply(x)).collect())
}

/// `f ∘ σ`, an exact permutation of the samples.
pub fn reflect_field(f: &SampledField, sigma: &SignVector) -> Result<SampledField> {
    let g = &f.grid;
    if sigma.dim() != g.dim() {
        return Err(invalid("sign vector and grid dimensions differ"));
    }
    for (j, s) in sigma.signs.iter().enumerate() {
        if *s == -1 {
            g.axis(j).require_symmetric()?;
        }
    }
    let mut values = f.values.clone();
    for (j, s) in sigma.signs.iter().enumerate() {
        if *s == -1 {
            values = (0..values.len()).map(|i| values[g.mirror_index(i, j)]).collect();
        }
    }
    SampledField::new(Arc::clone(&f.grid), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::grid::{Axis, TensorGrid};
    use std::collections::HashSet;

    #[test]
    fn group_structure() {
        let all = SignVector::all(3);
        assert_eq!(all.len(), 8);
        assert!(all[0].is_identity());
        for a in &all {
            assert!(a.compose(a).is_identity());
            for b in &all {
                assert_eq!(a.compose(b), b.compose(a));
            }
        }
        assert!(SignVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn orbit_examples() {
        let s = MultiplicitySetup::new(vec![1.0, 1.0]).unwrap();
        let sigma = SignVector::new(vec![-1, 1]).unwrap();
        assert_eq!(sigma.apply(&[1.0, -2.0]), vec![-1.0, -2.0]);
        let o = orbit(&s, &[1.0, -2.0]).unwrap();
        let distinct: HashSet<_> = o.iter().map(|p| p.iter().map(|v| v.to_bits()).collect::<Vec<_>>()).collect();
        assert_eq!(distinct.len(), 4);
        assert!(orbit(&s, &[1.0]).is_err());
    }

    #[test]
    fn reflection_permutes_samples() {
        let g = Arc::new(TensorGrid::uniform(&[1.0, 0.0], 1.0, 0.125, false).unwrap());
        let f = SampledField::from_fn(Arc::clone(&g), |x| x[0] + 10.0 * x[1] * x[1] * x[1]);
        let id = reflect_field(&f, &SignVector::identity(2)).unwrap();
        assert_eq!(id.values, f.values);
        let s = SignVector::new(vec![-1, -1]).unwrap();
        let r = reflect_field(&f, &s).unwrap();
        let expect = SampledField::from_fn(g, |x| -x[0] - 10.0 * x[1] * x[1] * x[1]);
        for (a, b) in r.values.iter().zip(&expect.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_axis_is_rejected() {
        let a = Axis::from_parts(vec![-1.0, 0.0, 2.0], vec![1.0; 3], 0.0).unwrap();
        let g = Arc::new(TensorGrid::new(vec![a]).unwrap());
        let f = SampledField::zeros(g);
        assert!(reflect_field(&f, &SignVector::reflection(1, 0)).is_err());
    }
}
