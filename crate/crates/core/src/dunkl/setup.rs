use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::specfun::ln_gamma;

/// Dimension, multiplicities and the constants derived from them.
///
/// `N = n + 2 Σ k_j` is the homogeneous dimension of `dμ = Π |x_j|^{2k_j} dx`,
/// `c_mm = ∫ e^{-|x|²/2} dμ = 2^{N/2} Π Γ(k_j + 1/2)` and `c_heat = 2^{N/2} c_mm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetupRecord", into = "SetupRecord")]
pub struct MultiplicitySetup {
    k: Vec<f64>,
    ln_gamma_half: Vec<f64>,
    big_n: f64,
    c_heat: f64,
    c_mm: f64,
}

#[derive(Serialize, Deserialize)]
struct SetupRecord {
    k: Vec<f64>,
}

impl TryFrom<SetupRecord> for MultiplicitySetup {
    type Error = crate::error::DunklError;
    fn try_from(r: SetupRecord) -> Result<Self> {
        MultiplicitySetup::new(r.k)
    }
}

impl From<MultiplicitySetup> for SetupRecord {
    fn from(s: MultiplicitySetup) -> Self {
        SetupRecord { k: s.k }
    }
}

impl MultiplicitySetup {
    pub fn new(k: Vec<f64>) -> Result<Self> {
        if k.is_empty() {
            return Err(invalid("dimension must be at least 1"));
        }
        if let Some(bad) = k.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!("multiplicities must be finite and >= 0, got {bad}")));
        }
        let ln_gamma_half: Vec<f64> = k.iter().map(|kj| ln_gamma(kj + 0.5)).collect();
        let big_n = k.len() as f64 + 2.0 * k.iter().sum::<f64>();
        let ln_prod: f64 = ln_gamma_half.iter().sum();
        let c_mm = (0.5 * big_n * std::f64::consts::LN_2 + ln_prod).exp();
        let c_heat = (big_n * std::f64::consts::LN_2 + ln_prod).exp();
        Ok(MultiplicitySetup { k, ln_gamma_half, big_n, c_heat, c_mm })
    }

    /// Same multiplicity on every axis.
    pub fn uniform(n: usize, k: f64) -> Result<Self> {
        Self::new(vec![k; n])
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn k_sum(&self) -> f64 {
        self.k.iter().sum()
    }

    /// Homogeneous dimension `N`.
    pub fn homogeneous_dim(&self) -> f64 {
        self.big_n
    }

    pub fn c_heat(&self) -> f64 {
        self.c_heat
    }

    pub fn c_mm(&self) -> f64 {
        self.c_mm
    }

    /// `ln Γ(k_j + 1/2)`.
    pub fn ln_gamma_half(&self, j: usize) -> f64 {
        self.ln_gamma_half[j]
    }

    /// The one-dimensional setup of axis `j`.
    pub fn axis(&self, j: usize) -> MultiplicitySetup {
        MultiplicitySetup::new(vec![self.k[j]]).expect("axis of a valid setup")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::line_rule;

    #[test]
    fn derived_constants() {
        let s = MultiplicitySetup::new(vec![1.0, 0.5, 0.0]).unwrap();
        assert_eq!(s.homogeneous_dim(), 6.0);
        assert!((s.c_heat() / s.c_mm() - 2f64.powf(3.0)).abs() < 1e-12 * 8.0);
        let z = MultiplicitySetup::uniform(1, 0.0).unwrap();
        assert!((z.c_heat() - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!(MultiplicitySetup::new(vec![-1.0]).is_err());
        assert!(MultiplicitySetup::new(vec![]).is_err());
    }

    #[test]
    fn c_mm_is_the_gaussian_integral() {
        for &k in &[0.0, 0.5, 1.0, 2.3] {
            let s = MultiplicitySetup::uniform(1, k).unwrap();
            let got = line_rule(k, 1.5, 40, 16).integrate(|y| (-0.5 * y * y).exp());
            assert!(((got - s.c_mm()) / s.c_mm()).abs() < 1e-12);
        }
    }

    #[test]
    fn serde_round_trip_validates() {
        let s = MultiplicitySetup::new(vec![1.0, 2.0]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"k":[1.0,2.0]}"#);
        let back: MultiplicitySetup = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<MultiplicitySetup>(r#"{"k":[-1.0]}"#).is_err());
    }
}
