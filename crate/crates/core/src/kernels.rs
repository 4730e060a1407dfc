//! Heat, Bessel-heat and Poisson kernels, and the checks of their global
//! size against the standard comparison functions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dunkl::{kernel_real_scaled, MultiplicitySetup};
use crate::error::{domain, invalid, Result};
use crate::exec::map_indexed;
use crate::geometry::mu_ball;
use crate::quadrature::{cached_gauss_jacobi, line_rule, Rule};
use crate::specfun::{i_reduced_scaled, ln_gamma};

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be positive and finite, got {t}")));
    }
    Ok(())
}

fn check_points(setup: &MultiplicitySetup, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != setup.dim() || y.len() != setup.dim() {
        return Err(invalid(format!("points must have dimension {}", setup.dim())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(domain("points must be finite"));
    }
    Ok(())
}

/// One-dimensional factor of the heat kernel:
/// `(2^{2k+1} Γ(k+1/2))^{-1} t^{-k-1/2} e^{-(x²+y²)/4t} E_k(x/√(2t), y/√(2t))`.
pub(crate) fn heat_1d(k: f64, t: f64, x: f64, y: f64) -> f64 {
    let d = x.abs() - y.abs();
    let z = x * y / (2.0 * t);
    let ln_pref = -(2.0 * k + 1.0) * std::f64::consts::LN_2 - ln_gamma(k + 0.5) - (k + 0.5) * t.ln();
    (ln_pref - d * d / (4.0 * t)).exp() * kernel_real_scaled(k, z)
}

/// Dunkl heat kernel `h_t(x, y)`.
pub fn heat_kernel(setup: &MultiplicitySetup, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_t(t)?;
    check_points(setup, x, y)?;
    Ok(heat_unchecked(setup.k(), t, x, y))
}

pub(crate) fn heat_unchecked(k: &[f64], t: f64, x: &[f64], y: &[f64]) -> f64 {
    k.iter().zip(x.iter().zip(y)).map(|(&kj, (&xj, &yj))| heat_1d(kj, t, xj, yj)).product()
}

/// Heat kernel of the Bessel operator on `(0,∞)^n`, a product of
/// `(2t)^{-1} e^{-(x²+y²)/4t} I_{k-1/2}(xy/2t) (xy)^{1/2-k}`.
pub fn bessel_heat_kernel(setup: &MultiplicitySetup, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_t(t)?;
    check_points(setup, x, y)?;
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(domain("Bessel heat kernel needs strictly positive coordinates"));
    }
    Ok(setup.k().iter().zip(x.iter().zip(y)).map(|(&k, (&a, &b))| bessel_heat_1d(k, t, a, b)).product())
}

pub(crate) fn bessel_heat_1d(k: f64, t: f64, x: f64, y: f64) -> f64 {
    // (xy)^{1/2-k} I_{k-1/2}(w) = (4t)^{1/2-k} e^{w} Ĩ_{k-1/2}(w) with w = xy/2t.
    let w = x * y / (2.0 * t);
    let d = x - y;
    let ln_pref = -(2.0 * t).ln() + (0.5 - k) * (4.0 * t).ln();
    (ln_pref - d * d / (4.0 * t)).exp() * i_reduced_scaled(k - 0.5, w)
}

/// Quadrature for `∫_0^∞ e^{-u} g(u) du/√u`, stored in the variable `u`.
///
/// With `u = s²` the integral becomes `2 ∫_0^∞ e^{-s²} g(s²) ds`, which is
/// integrated by Gauss–Legendre panels on `[0, s_max]`: geometrically graded
/// towards `s = 0` and uniform beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinationRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub u_max: f64,
    pub panels: usize,
    panel_width: f64,
    points_per_panel: usize,
}

impl Default for SubordinationRule {
    fn default() -> Self {
        SubordinationRule::new(0.5, 16)
    }
}

impl SubordinationRule {
    const S_MAX: f64 = 8.0;
    const S_GRADED: f64 = 0.5;
    const GRADED_LEVELS: i32 = 40;

    /// Panels of width `panel_width` on `[1/2, 8]` in `s = √u`; below `1/2`,
    /// dyadic levels each split into `ceil(1/(2 panel_width))` panels.
    pub fn new(panel_width: f64, points_per_panel: usize) -> SubordinationRule {
        let gl = cached_gauss_jacobi(points_per_panel, 0.0, 0.0);
        let split = (Self::S_GRADED / panel_width).ceil().max(1.0) as usize;
        let mut breaks = vec![0.0];
        for lvl in (0..Self::GRADED_LEVELS).rev() {
            let lo = Self::S_GRADED * 0.5f64.powi(lvl + 1);
            for p in 1..=split {
                breaks.push(lo + lo * p as f64 / split as f64);
            }
        }
        let count = ((Self::S_MAX - Self::S_GRADED) / panel_width).ceil() as usize;
        for p in 1..=count {
            breaks.push(Self::S_GRADED + (Self::S_MAX - Self::S_GRADED) * p as f64 / count as f64);
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let panel = gl.affine(w[0], w[1]);
            for (s, ws) in panel.nodes.iter().zip(&panel.weights) {
                nodes.push(s * s);
                weights.push(2.0 * ws * (-s * s).exp());
            }
        }
        SubordinationRule {
            nodes,
            weights,
            u_max: Self::S_MAX * Self::S_MAX,
            panels: breaks.len() - 1,
            panel_width,
            points_per_panel,
        }
    }

    /// The same construction with every panel halved.
    pub fn refined(&self) -> SubordinationRule {
        SubordinationRule::new(0.5 * self.panel_width, self.points_per_panel)
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(u, w)| w * g(*u)).sum()
    }
}

/// Poisson kernel by subordination:
/// `P_t(x,y) = π^{-1/2} ∫_0^∞ e^{-u} h_{t²/4u}(x,y) du/√u`.
pub fn poisson_kernel(setup: &MultiplicitySetup, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    poisson_kernel_with(setup, &SubordinationRule::default(), t, x, y)
}

pub fn poisson_kernel_with(
    setup: &MultiplicitySetup,
    rule: &SubordinationRule,
    t: f64,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_t(t)?;
    check_points(setup, x, y)?;
    Ok(poisson_unchecked(setup.k(), rule, t, x, y))
}

pub(crate) fn poisson_unchecked(k: &[f64], rule: &SubordinationRule, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let t2 = t * t;
    rule.integrate(|u| heat_unchecked(k, t2 / (4.0 * u), x, y)) / PI.sqrt()
}

/// Classical Poisson kernel of the upper half-plane, `t / (π (t² + Δ²))`.
pub fn classical_poisson_1d(t: f64, x: f64, y: f64) -> f64 {
    t / (PI * (t * t + (x - y).powi(2)))
}

/// Classical Gauss–Weierstrass kernel `(4πt)^{-1/2} e^{-(x-y)²/4t}`.
pub fn gauss_weierstrass_1d(t: f64, x: f64, y: f64) -> f64 {
    (-(x - y).powi(2) / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

fn whole_space_rule(setup: &MultiplicitySetup, scale: f64, panels: usize, m: usize) -> Vec<Rule> {
    setup.k().iter().map(|&k| line_rule(k, scale, panels, m)).collect()
}

fn tensor_integrate(rules: &[Rule], f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    let sizes: Vec<usize> = rules.iter().map(Rule::len).collect();
    let total: usize = sizes.iter().product();
    let parts = map_indexed(total, |flat| {
        let mut rem = flat;
        let mut p = vec![0.0; rules.len()];
        let mut w = 1.0;
        for j in (0..rules.len()).rev() {
            let i = rem % sizes[j];
            rem /= sizes[j];
            p[j] = rules[j].nodes[i];
            w *= rules[j].weights[i];
        }
        w * f(&p)
    });
    parts.iter().sum()
}

/// `∫ h_t(x, y) dμ(y)` over the whole space.
pub fn heat_mass(setup: &MultiplicitySetup, t: f64, x: &[f64]) -> Result<f64> {
    check_t(t)?;
    check_points(setup, x, x)?;
    let scale = 2.0 * t.sqrt() + x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let (panels, m) = if setup.dim() == 1 { (64, 16) } else { (32, 12) };
    let rules = whole_space_rule(setup, scale, panels, m);
    Ok(tensor_integrate(&rules, |y| heat_unchecked(setup.k(), t, x, y)))
}

/// `∫ P_t(x, y) dμ(y)` over the whole space.
pub fn poisson_mass(setup: &MultiplicitySetup, t: f64, x: &[f64]) -> Result<f64> {
    poisson_power_integral(setup, t, x, 1.0)
}

/// `∫ P_t(x, y)^p dμ(y)`.
pub fn poisson_power_integral(setup: &MultiplicitySetup, t: f64, x: &[f64], p: f64) -> Result<f64> {
    check_t(t)?;
    check_points(setup, x, x)?;
    if !(p >= 1.0) {
        return Err(invalid("exponent must be >= 1"));
    }
    let scale = t + x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let (panels, m) = if setup.dim() == 1 { (64, 16) } else { (24, 10) };
    let rules = whole_space_rule(setup, scale, panels, m);
    let sub = SubordinationRule::default();
    Ok(tensor_integrate(&rules, |y| poisson_unchecked(setup.k(), &sub, t, x, y).powf(p)))
}

/// `∫ h_t(x, z) h_s(z, y) dμ(z)` next to `h_{t+s}(x, y)`.
pub fn chapman_kolmogorov(setup: &MultiplicitySetup, t: f64, s: f64, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_t(t)?;
    check_t(s)?;
    check_points(setup, x, y)?;
    let scale = 2.0 * (t + s).sqrt() + x.iter().chain(y).fold(0.0_f64, |a, v| a.max(v.abs()));
    let (panels, m) = if setup.dim() == 1 { (64, 16) } else { (32, 12) };
    let rules = whole_space_rule(setup, scale, panels, m);
    let k = setup.k();
    let lhs = tensor_integrate(&rules, |z| heat_unchecked(k, t, x, z) * heat_unchecked(k, s, z, y));
    Ok((lhs, heat_unchecked(k, t + s, x, y)))
}

/// Observed size of a kernel relative to a comparison function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub regime: String,
    pub count: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl KernelBoundReport {
    fn from_ratios(regime: &str, ratios: &[f64]) -> KernelBoundReport {
        KernelBoundReport {
            regime: regime.to_string(),
            count: ratios.len(),
            min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `max/min`, finite when every ratio is positive and finite.
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatRegime {
    /// `|xy| <= t`
    Near,
    /// `xy >= t`
    SameSide,
    /// `-xy >= t`
    OppositeSide,
}

impl HeatRegime {
    pub fn label(&self) -> &'static str {
        match self {
            HeatRegime::Near => "|xy|<=t",
            HeatRegime::SameSide => "xy>=t",
            HeatRegime::OppositeSide => "-xy>=t",
        }
    }

    /// Regimes containing the sample; boundary points belong to two.
    pub fn of(t: f64, x: f64, y: f64) -> Vec<HeatRegime> {
        let z = x * y;
        let mut out = Vec::new();
        if z.abs() <= t {
            out.push(HeatRegime::Near);
        }
        if z >= t {
            out.push(HeatRegime::SameSide);
        }
        if -z >= t {
            out.push(HeatRegime::OppositeSide);
        }
        out
    }
}

/// One row of a heat-regime table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub kernel: f64,
    pub comparand: f64,
    pub ratio: f64,
}

/// Kernel, comparand and their ratio for the one-dimensional heat kernel.
/// The ratio is computed from logarithms so that it stays accurate where both
/// the kernel and the comparand underflow.
pub fn heat_regime_sample(k: f64, regime: HeatRegime, t: f64, x: f64, y: f64) -> RegimeSample {
    let z = x * y;
    let d = x.abs() - y.abs();
    let ln_pref = -(2.0 * k + 1.0) * std::f64::consts::LN_2 - ln_gamma(k + 0.5) - (k + 0.5) * t.ln();
    let ln_kernel = ln_pref - d * d / (4.0 * t) + kernel_real_scaled(k, z / (2.0 * t)).ln();
    let ln_comp = match regime {
        HeatRegime::Near => -(k + 0.5) * t.ln() - (x * x + y * y) / (4.0 * t),
        HeatRegime::SameSide => -0.5 * t.ln() - k * z.ln() - (x - y).powi(2) / (4.0 * t),
        HeatRegime::OppositeSide => 0.5 * t.ln() - (k + 1.0) * (-z).ln() - (x + y).powi(2) / (4.0 * t),
    };
    RegimeSample { t, x, y, kernel: ln_kernel.exp(), comparand: ln_comp.exp(), ratio: (ln_kernel - ln_comp).exp() }
}

/// Ratios of `h_t` to the three regime comparands over the given samples
/// `(t, x, y)`. Every regime must be represented.
pub fn check_heat_regimes(k: f64, samples: &[(f64, f64, f64)]) -> Result<[KernelBoundReport; 3]> {
    if !(k >= 0.0) {
        return Err(invalid("multiplicity must be >= 0"));
    }
    let regimes = [HeatRegime::Near, HeatRegime::SameSide, HeatRegime::OppositeSide];
    let rows: Vec<Vec<(HeatRegime, f64)>> = map_indexed(samples.len(), |i| {
        let (t, x, y) = samples[i];
        HeatRegime::of(t, x, y).into_iter().map(|r| (r, heat_regime_sample(k, r, t, x, y).ratio)).collect()
    });
    let mut out = Vec::with_capacity(3);
    for r in regimes {
        let ratios: Vec<f64> = rows.iter().flatten().filter(|(rr, _)| *rr == r).map(|(_, v)| *v).collect();
        if ratios.is_empty() {
            return Err(invalid(format!("no samples in regime {}", r.label())));
        }
        out.push(KernelBoundReport::from_ratios(r.label(), &ratios));
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

/// `per_regime` samples `(t, x, y)` in each regime, with `t` log-uniform in
/// `[1e-2, 1e2]`, `|x|,|y|` spread over several diffusion lengths, and a
/// fraction placed exactly on the boundaries `|xy| = t`.
pub fn stratified_heat_samples(per_regime: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * per_regime);
    for regime in [HeatRegime::Near, HeatRegime::SameSide, HeatRegime::OppositeSide] {
        let mut n = 0;
        while n < per_regime {
            let t = 10f64.powf(rng.random_range(-2.0..2.0));
            let st = t.sqrt();
            let on_boundary = n % 10 == 0;
            let x = st * 10f64.powf(rng.random_range(-2.0..1.0)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let y = match regime {
                HeatRegime::Near => {
                    let m = if on_boundary { 1.0 } else { rng.random_range(-1.0..1.0) };
                    m * t / x
                }
                HeatRegime::SameSide | HeatRegime::OppositeSide => {
                    let m = if on_boundary { 1.0 } else { 10f64.powf(rng.random_range(0.0..2.0)) };
                    let sign = if regime == HeatRegime::SameSide { 1.0 } else { -1.0 };
                    sign * m * t / x
                }
            };
            if y.abs() > 30.0 * st {
                continue;
            }
            out.push((t, x, y));
            n += 1;
        }
    }
    out
}

/// Suprema of `P_t(x,y) μ(B(x,t))` and of
/// `P_t(x,y) μ(B(x,t)) (1 + μ(B(x,|x|))/μ(B(x,t)))^{1+δ}` (far pairs only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonBoundReport {
    pub delta: f64,
    pub count: usize,
    pub far_count: usize,
    pub sup_local: f64,
    pub sup_far: f64,
    pub min_local: f64,
}

pub fn check_poisson_bounds(
    setup: &MultiplicitySetup,
    samples: &[(f64, Vec<f64>, Vec<f64>)],
    delta: f64,
) -> Result<PoissonBoundReport> {
    let big_n = setup.homogeneous_dim();
    if !(delta > 0.0 && delta < 1.0 / big_n) {
        return Err(invalid(format!("delta must lie in (0, 1/N) = (0, {})", 1.0 / big_n)));
    }
    let n = setup.dim() as f64;
    let sub = SubordinationRule::default();
    let rows = map_indexed(samples.len(), |i| -> Result<(f64, Option<f64>)> {
        let (t, x, y) = &samples[i];
        let p = poisson_kernel_with(setup, &sub, *t, x, y)?;
        let vt = mu_ball(setup, x, *t)?;
        let local = p * vt;
        let xn = norm(x);
        let far = if xn > 2.0 * n * norm(y) {
            let vx = mu_ball(setup, x, xn)?;
            Some(local * (1.0 + vx / vt).powf(1.0 + delta))
        } else {
            None
        };
        Ok((local, far))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let local: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let far: Vec<f64> = rows.iter().filter_map(|r| r.1).collect();
    Ok(PoissonBoundReport {
        delta,
        count: rows.len(),
        far_count: far.len(),
        sup_local: local.iter().copied().fold(0.0, f64::max),
        sup_far: far.iter().copied().fold(0.0, f64::max),
        min_local: local.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
