//! Atoms, heat and Poisson maximal functions, the Riesz characterization
//! ratio of H¹, decay of `P_{t+ε} f`, and the even-extension bridge to the
//! Bessel operator on `(0,∞)^n`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dunkl::{Axis, MultiplicitySetup, SampledField, TensorGrid};
use crate::error::{grid_err, invalid, Result};
use crate::exec::map_indexed;
use crate::geometry::mu_ball;
use crate::kernels::{bessel_heat_1d, heat_unchecked, poisson_unchecked, SubordinationRule};
use crate::quadrature::gauss_jacobi;
use crate::transform::{apply_multiplier, frequency_axis, MultiplierSpec, Normalization, SpectralField, TransformPlan};

/// `count` logarithmically spaced values in `[lo, hi]`.
pub fn log_t_set(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

/// Grid and frequency settings for the H¹ computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyConfig {
    pub extent: f64,
    pub h: f64,
    pub xi_max: f64,
    pub panel_width: f64,
    pub panel_points: usize,
    /// Exponent `p` of the low-pass filter `exp(-36 (|ξ|/Ξ)^p)`.
    pub filter_order: u32,
    pub t_set: Vec<f64>,
}

impl Default for HardyConfig {
    fn default() -> Self {
        HardyConfig {
            extent: 20.0,
            h: 0.05,
            xi_max: 10.0,
            panel_width: 0.125,
            panel_points: 8,
            filter_order: 8,
            t_set: log_t_set(1e-3, 1e3, 40),
        }
    }
}

impl HardyConfig {
    pub fn plan(&self, setup: &MultiplicitySetup) -> Result<TransformPlan> {
        let space = Arc::new(TensorGrid::uniform(setup.k(), self.extent, self.h, false)?);
        let axes: Vec<Axis> = setup
            .k()
            .iter()
            .map(|k| frequency_axis(*k, self.xi_max, self.panel_width, self.panel_points))
            .collect::<Result<_>>()?;
        TransformPlan::new(setup, space, Arc::new(TensorGrid::new(axes)?), Normalization::MacdonaldMehta)
    }

    fn filter(&self) -> MultiplierSpec {
        let (xi, p) = (self.xi_max, self.filter_order as i32);
        MultiplierSpec::custom("low-pass", None, move |v| {
            let r = v.iter().map(|a| a * a).sum::<f64>().sqrt() / xi;
            Complex64::new((-36.0 * r.powi(p)).exp(), 0.0)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Ball {
        Ball { center, radius }
    }

    fn dist(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomProfile {
    /// `sign(x_1 - c_1)` on the ball.
    Odd,
    /// `+1` on the inner half-radius ball, `-1` on the shell.
    RadialCancel,
}

/// A mean-zero field supported in a ball with `‖a‖_∞ = C_a μ(B)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub ball: Ball,
    pub profile: AtomProfile,
    pub field: SampledField,
    pub ball_measure: f64,
    /// `‖a‖_∞ μ(B)`.
    pub sup_constant: f64,
    /// `∫ a dμ` in grid quadrature after the correction.
    pub mean: f64,
}

pub fn make_atom(setup: &MultiplicitySetup, grid: Arc<TensorGrid>, ball: Ball, profile: AtomProfile) -> Result<Atom> {
    let n = setup.dim();
    if ball.center.len() != n || grid.dim() != n {
        return Err(invalid("ball, grid and setup dimensions differ"));
    }
    if !(ball.radius > 0.0) {
        return Err(invalid("ball radius must be positive"));
    }
    for (j, a) in grid.axes().iter().enumerate() {
        let (lo, hi) = (a.nodes[0], a.nodes[a.len() - 1]);
        if ball.center[j] - ball.radius < lo || ball.center[j] + ball.radius > hi {
            return Err(grid_err("ball does not fit inside the grid"));
        }
    }
    let shape = |x: &[f64]| {
        let d = ball.dist(x);
        if d >= ball.radius {
            return None;
        }
        Some(match profile {
            AtomProfile::Odd => {
                let s = x[0] - ball.center[0];
                if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            AtomProfile::RadialCancel => {
                if d < 0.5 * ball.radius {
                    1.0
                } else {
                    -1.0
                }
            }
        })
    };
    let points = grid.points();
    let inside: Vec<Option<f64>> = points.iter().map(|p| shape(p)).collect();
    let count = inside.iter().filter(|v| v.is_some()).count();
    if count < 4 {
        return Err(grid_err("ball contains fewer than four grid nodes"));
    }
    let w = grid.weights();
    let (mut mass, mut vol) = (0.0, 0.0);
    for (i, v) in inside.iter().enumerate() {
        if let Some(v) = v {
            mass += w[i] * v;
            vol += w[i];
        }
    }
    let shift = mass / vol;
    let mut values: Vec<f64> = inside.iter().map(|v| v.map_or(0.0, |v| v - shift)).collect();
    let sup = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if sup == 0.0 {
        return Err(grid_err("atom profile vanishes on the grid"));
    }
    let ball_measure = mu_ball(setup, &ball.center, ball.radius)?;
    let scale = 1.0 / (sup * ball_measure);
    values.iter_mut().for_each(|v| *v *= scale);
    let field = SampledField::new(grid, values)?;
    let mean = field.integral();
    Ok(Atom { ball, profile, sup_constant: field.max_abs() * ball_measure, mean, ball_measure, field })
}

/// Random atoms with centers in `[-c_max, c_max]^n` and radii in `[r_min, r_max]`.
pub fn random_atoms(
    setup: &MultiplicitySetup,
    grid: &Arc<TensorGrid>,
    count: usize,
    c_max: f64,
    (r_min, r_max): (f64, f64),
    seed: u64,
) -> Result<Vec<Atom>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let center: Vec<f64> = (0..setup.dim()).map(|_| rng.random_range(-c_max..=c_max)).collect();
            let radius = rng.random_range(r_min..=r_max);
            let profile = if i % 2 == 0 { AtomProfile::Odd } else { AtomProfile::RadialCancel };
            make_atom(setup, Arc::clone(grid), Ball::new(center, radius), profile)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Semigroup {
    Heat,
    Poisson,
}

impl Semigroup {
    fn multiplier(self, t: f64) -> MultiplierSpec {
        match self {
            Semigroup::Heat => MultiplierSpec::heat(t),
            Semigroup::Poisson => MultiplierSpec::poisson(t),
        }
    }
}

/// `sup_{t ∈ t_set} |S_t f|` at each node, given `ℱf` on the plan's frequency grid.
fn maximal_from_spectrum(plan: &TransformPlan, spec: &SpectralField, semigroup: Semigroup, t_set: &[f64]) -> Result<Vec<Vec<f64>>> {
    t_set
        .iter()
        .map(|&t| {
            let g = apply_multiplier(spec, &semigroup.multiplier(t))?;
            Ok(plan.inverse(&g)?.values.iter().map(|v| v.re.abs()).collect())
        })
        .collect()
}

fn pointwise_max(rows: &[Vec<f64>], pick: impl Fn(usize) -> bool) -> Vec<f64> {
    let mut out = vec![0.0_f64; rows.first().map_or(0, |r| r.len())];
    for (_, r) in rows.iter().enumerate().filter(|(i, _)| pick(*i)) {
        for (o, v) in out.iter_mut().zip(r) {
            *o = o.max(*v);
        }
    }
    out
}

fn check_t_set(t_set: &[f64]) -> Result<()> {
    if t_set.is_empty() {
        return Err(invalid("t set is empty"));
    }
    if t_set.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("t set must be positive"));
    }
    Ok(())
}

/// Maximal function on the plan's space grid: `sup_t |S_t f|` computed
/// spectrally, without filtering.
pub fn maximal_function_with(plan: &TransformPlan, f: &SampledField, semigroup: Semigroup, t_set: &[f64]) -> Result<SampledField> {
    check_t_set(t_set)?;
    let spec = plan.forward(f)?;
    let rows = maximal_from_spectrum(plan, &spec, semigroup, t_set)?;
    SampledField::new(Arc::clone(plan.space()), pointwise_max(&rows, |_| true))
}

pub fn maximal_function(setup: &MultiplicitySetup, f: &SampledField, semigroup: Semigroup, t_set: &[f64]) -> Result<SampledField> {
    maximal_function_with(&TransformPlan::for_grid(setup, Arc::clone(&f.grid))?, f, semigroup, t_set)
}

/// Norms entering the Riesz characterization of H¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H1Report {
    pub l1_norm: f64,
    pub maximal_heat_l1: f64,
    pub maximal_poisson_l1: f64,
    pub riesz_l1: Vec<f64>,
    /// `(‖f‖₁ + Σ_j ‖𝓡_j f‖₁) / ‖h_* f‖₁`.
    pub characterization_ratio: f64,
    pub mean: f64,
    pub mean_zero: bool,
    /// Relative change of `‖h_* f‖₁` when every other `t` is dropped.
    pub t_refinement_delta: f64,
    /// Share of `‖h_* f‖₁` coming from outside the central half of the domain.
    pub domain_delta: f64,
    /// Set when `f` is not mean-zero or the maximal norm is still growing
    /// with the domain.
    pub flagged: bool,
}

impl H1Report {
    pub fn riesz_l1_sum(&self) -> f64 {
        self.riesz_l1.iter().sum()
    }
}

fn weighted_l1(grid: &TensorGrid, v: &[f64], pick: impl Fn(&[f64]) -> bool) -> f64 {
    (0..grid.len()).filter(|i| pick(&grid.point(*i))).map(|i| grid.weight(i) * v[i].abs()).sum()
}

pub fn h1_characterization_ratio(setup: &MultiplicitySetup, cfg: &HardyConfig, plan: &TransformPlan, f: &SampledField) -> Result<H1Report> {
    check_t_set(&cfg.t_set)?;
    if plan.setup() != setup {
        return Err(invalid("plan built for a different setup"));
    }
    let spec = apply_multiplier(&plan.forward(f)?, &cfg.filter())?;
    let grid = plan.space();
    let heat = maximal_from_spectrum(plan, &spec, Semigroup::Heat, &cfg.t_set)?;
    let poisson = maximal_from_spectrum(plan, &spec, Semigroup::Poisson, &cfg.t_set)?;
    let heat_max = pointwise_max(&heat, |_| true);
    let heat_half = pointwise_max(&heat, |i| i % 2 == 0);
    let maximal_heat_l1 = weighted_l1(grid, &heat_max, |_| true);
    let maximal_poisson_l1 = weighted_l1(grid, &pointwise_max(&poisson, |_| true), |_| true);
    let riesz_l1 = (0..setup.dim())
        .map(|j| {
            let g = apply_multiplier(&spec, &MultiplierSpec::riesz(j))?;
            Ok(weighted_l1(grid, &plan.inverse(&g)?.values.iter().map(|v| v.re).collect::<Vec<_>>(), |_| true))
        })
        .collect::<Result<Vec<f64>>>()?;
    if !(maximal_heat_l1 > 0.0) {
        return Err(invalid("maximal function vanishes; ratio undefined"));
    }
    let l1_norm = f.l1_norm();
    let ext: Vec<f64> = grid.axes().iter().map(|a| a.extent()).collect();
    let inner = weighted_l1(grid, &heat_max, |x| x.iter().zip(&ext).all(|(v, e)| v.abs() <= 0.5 * e));
    let domain_delta = 1.0 - inner / maximal_heat_l1;
    let t_refinement_delta = 1.0 - weighted_l1(grid, &heat_half, |_| true) / maximal_heat_l1;
    let mean = f.integral();
    let mean_zero = mean.abs() <= 1e-9 * l1_norm.max(f64::MIN_POSITIVE);
    let characterization_ratio = (l1_norm + riesz_l1.iter().sum::<f64>()) / maximal_heat_l1;
    Ok(H1Report {
        l1_norm,
        maximal_heat_l1,
        maximal_poisson_l1,
        riesz_l1,
        characterization_ratio,
        mean,
        mean_zero,
        t_refinement_delta,
        domain_delta,
        flagged: !mean_zero || domain_delta > 0.1,
    })
}

/// One row of [`poisson_decay_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub radius: f64,
    pub sup: f64,
}

/// `sup |P_{t+ε} f(x)|` over sampled `(t, x)` with `|x| + t ≥ R`, for each `R`.
///
/// The sup is taken over points `x = sR·d`, `t = (1-s)R` scaled by
/// `{1, 1.5, 2}`, with `d` running over the coordinate and diagonal directions.
pub fn poisson_decay_check(setup: &MultiplicitySetup, f: &SampledField, eps: f64, radius_seq: &[f64]) -> Result<Vec<DecayRow>> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let n = setup.dim();
    if f.grid.dim() != n {
        return Err(invalid("field and setup dimensions differ"));
    }
    let support: Vec<(Vec<f64>, f64)> =
        (0..f.len()).filter(|i| f.values[*i] != 0.0).map(|i| (f.grid.point(i), f.grid.weight(i) * f.values[i])).collect();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[j] = s;
            dirs.push(d);
        }
    }
    if n > 1 {
        dirs.push(vec![1.0 / (n as f64).sqrt(); n]);
        dirs.push(vec![-1.0 / (n as f64).sqrt(); n]);
    }
    let rule = SubordinationRule::default();
    let k = setup.k();
    radius_seq
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(invalid("radii must be positive"));
            }
            let mut probes = Vec::new();
            for scale in [1.0, 1.5, 2.0] {
                for d in &dirs {
                    for i in 0..=32 {
                        let s = i as f64 / 32.0;
                        probes.push((scale * (1.0 - s) * r, d.iter().map(|v| v * scale * s * r).collect::<Vec<f64>>()));
                    }
                }
            }
            let vals = map_indexed(probes.len(), |p| {
                let (t, x) = &probes[p];
                support.iter().map(|(y, wf)| wf * poisson_unchecked(k, &rule, t + eps, x, y)).sum::<f64>().abs()
            });
            Ok(DecayRow { radius: r, sup: vals.into_iter().fold(0.0, f64::max) })
        })
        .collect()
}

/// `‖P_* f‖₂ / ‖f‖₂` over a battery of random fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2BoundReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Sums of a few Gaussian bumps with random centers, widths and signs.
pub fn random_field_battery(grid: &Arc<TensorGrid>, count: usize, seed: u64) -> Vec<SampledField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 0.4 * grid.axes().iter().map(|a| a.extent()).fold(f64::INFINITY, f64::min);
    (0..count)
        .map(|_| {
            let bumps: Vec<(Vec<f64>, f64, f64)> = (0..3)
                .map(|_| {
                    let c: Vec<f64> = (0..grid.dim()).map(|_| rng.random_range(-0.5 * span..=0.5 * span)).collect();
                    (c, rng.random_range(0.3..=1.5), if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                })
                .collect();
            SampledField::from_fn(Arc::clone(grid), |x| {
                bumps
                    .iter()
                    .map(|(c, w, s)| s * (-x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (w * w)).exp())
                    .sum()
            })
        })
        .collect()
}

pub fn poisson_maximal_l2_bound(plan: &TransformPlan, fields: &[SampledField], t_set: &[f64]) -> Result<L2BoundReport> {
    let ratios = fields
        .iter()
        .map(|f| {
            let m = maximal_function_with(plan, f, Semigroup::Poisson, t_set)?;
            Ok(m.l2_norm() / f.l2_norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(L2BoundReport { ratios, max_ratio })
}

/// Symmetric Gauss-panel grid used for the Bessel comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldConfig {
    pub extent: f64,
    pub panel_width: f64,
    pub panel_points: usize,
    pub xi_max: f64,
}

impl Default for FoldConfig {
    fn default() -> Self {
        FoldConfig { extent: 10.0, panel_width: 0.5, panel_points: 12, xi_max: 12.0 }
    }
}

impl FoldConfig {
    pub fn grid(&self, setup: &MultiplicitySetup) -> Result<Arc<TensorGrid>> {
        let axes: Vec<Axis> =
            setup.k().iter().map(|k| frequency_axis(*k, self.extent, self.panel_width, self.panel_points)).collect::<Result<_>>()?;
        Ok(Arc::new(TensorGrid::new(axes)?))
    }

    pub fn plan(&self, setup: &MultiplicitySetup) -> Result<TransformPlan> {
        let axes: Vec<Axis> =
            setup.k().iter().map(|k| frequency_axis(*k, self.xi_max, self.panel_width, self.panel_points)).collect::<Result<_>>()?;
        TransformPlan::new(setup, self.grid(setup)?, Arc::new(TensorGrid::new(axes)?), Normalization::MacdonaldMehta)
    }
}

/// The positive half of each axis of a symmetric grid without a node at 0.
pub fn positive_orthant(grid: &TensorGrid) -> Result<Arc<TensorGrid>> {
    let axes = grid
        .axes()
        .iter()
        .map(|a| {
            a.require_symmetric()?;
            if a.zero_index().is_some() {
                return Err(grid_err("the fold needs a grid without a node at the origin"));
            }
            let keep: Vec<usize> = (0..a.len()).filter(|i| a.nodes[*i] > 0.0).collect();
            Axis::from_parts(keep.iter().map(|i| a.nodes[*i]).collect(), keep.iter().map(|i| a.weights[*i]).collect(), a.k)
        })
        .collect::<Result<Vec<Axis>>>()?;
    Ok(Arc::new(TensorGrid::new(axes)?))
}

/// Even extension `f̃(x) = f(|x_1|, …, |x_n|)` of a field on the positive orthant of `full`.
pub fn bessel_fold(f: &SampledField, full: &Arc<TensorGrid>) -> Result<SampledField> {
    let pos = positive_orthant(full)?;
    if *pos != *f.grid {
        return Err(grid_err("field is not sampled on the positive orthant of the target grid"));
    }
    let values = (0..full.len())
        .map(|i| {
            let idx = full.multi_index(i);
            let p: Vec<usize> = idx
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let a = full.axis(j);
                    let m = if a.nodes[*v] > 0.0 { *v } else { a.mirror(*v) };
                    m - (a.len() - pos.axis(j).len())
                })
                .collect();
            f.values[pos.flat_index(&p)]
        })
        .collect();
    SampledField::new(Arc::clone(full), values)
}

/// Bessel-side Riesz transform `R_j f = ∂_j 𝕃^{-1/2} f` of `f = e^{-a|x|²}`:
/// `-√(a/π) x_j ∫_0^1 (1-u)^{-1/2} u^{γ-1/2} e^{-a|x|² u} du`, `γ = Σ(k_j + 1/2)`.
pub fn bessel_riesz_gaussian(setup: &MultiplicitySetup, a: f64, x: &[f64], j: usize) -> Result<f64> {
    let gamma = setup.homogeneous_dim() / 2.0;
    let rule = gauss_jacobi(48, -0.5, gamma - 0.5)?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let scale = 0.5_f64.powf(gamma);
    let integral = rule.integrate(|s| (-a * r2 * 0.5 * (1.0 + s)).exp()) * scale;
    Ok(-(a / PI).sqrt() * x[j] * integral)
}

/// Deviations in the two fold identities for `f = e^{-a|x|²}` on `(0,∞)^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub t: f64,
    pub nodes: usize,
    /// `max |(e^{t𝕃} f)~ - e^{t𝐋} f̃|` over the sampled nodes.
    pub semigroup_max_dev: f64,
    /// `max | |𝓡_j f̃| - |(R_j f)~| | / |(R_j f)~|` per axis.
    pub riesz_max_rel_dev: Vec<f64>,
    /// `‖f‖_{H¹(𝕃)} / ‖f̃‖_{H¹(𝐋)}` on the truncated grid.
    pub h1_constant: f64,
    /// `2^{-n}`, the value forced by the semigroup identity.
    pub expected_h1_constant: f64,
}

pub fn fold_identities(setup: &MultiplicitySetup, cfg: &FoldConfig, a: f64, t: f64, nodes: usize, seed: u64) -> Result<FoldReport> {
    if !(a > 0.0 && t > 0.0) || nodes == 0 {
        return Err(invalid("fold identities need a > 0, t > 0 and at least one node"));
    }
    let n = setup.dim();
    let plan = cfg.plan(setup)?;
    let full = Arc::clone(plan.space());
    let pos = positive_orthant(&full)?;
    let f = SampledField::from_fn(Arc::clone(&pos), |x| (-a * x.iter().map(|v| v * v).sum::<f64>()).exp());
    let ft = bessel_fold(&f, &full)?;
    let k = setup.k();

    // Sample positive nodes where the Gaussian and its transforms are well above rounding.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lim = (20.0 / a).sqrt().min(0.6 * cfg.extent);
    let candidates: Vec<usize> = (0..pos.len()).filter(|i| pos.point(*i).iter().all(|v| *v <= lim)).collect();
    if candidates.is_empty() {
        return Err(grid_err("no sample nodes inside the significant region"));
    }
    let picks: Vec<Vec<f64>> = (0..nodes).map(|_| pos.point(candidates[rng.random_range(0..candidates.len())])).collect();

    let bessel_side = |x: &[f64]| -> f64 {
        (0..pos.len())
            .map(|b| {
                let y = pos.point(b);
                let kern: f64 = (0..n).map(|j| bessel_heat_1d(k[j], t, x[j], y[j])).product();
                pos.weight(b) * kern * f.values[b]
            })
            .sum()
    };
    let dunkl_side = |x: &[f64]| -> f64 { (0..full.len()).map(|b| full.weight(b) * heat_unchecked(k, t, x, &full.point(b)) * ft.values[b]).sum() };
    let devs = map_indexed(picks.len(), |p| {
        let x = &picks[p];
        // Check at x and at a reflected copy of x.
        let mut xr = x.clone();
        xr[0] = -xr[0];
        let lhs = bessel_side(x);
        (lhs - dunkl_side(x)).abs().max((lhs - dunkl_side(&xr)).abs())
    });
    let semigroup_max_dev = devs.into_iter().fold(0.0, f64::max);

    let spec = plan.forward(&ft)?;
    let mut riesz_max_rel_dev = Vec::with_capacity(n);
    for j in 0..n {
        let r = plan.inverse(&apply_multiplier(&spec, &MultiplierSpec::riesz(j))?)?;
        let mut worst: f64 = 0.0;
        for x in &picks {
            let idx: Vec<usize> = (0..n).map(|d| full.axis(d).nodes.iter().position(|v| v == &x[d]).expect("grid node")).collect();
            let dunkl = r.values[full.flat_index(&idx)].re.abs();
            let bessel = bessel_riesz_gaussian(setup, a, x, j)?.abs();
            worst = worst.max((dunkl - bessel).abs() / bessel);
        }
        riesz_max_rel_dev.push(worst);
    }

    // H¹ norms through the maximal functions on a coarse t set.
    let t_set = log_t_set(1e-2, 1e2, 16);
    let dunkl_max = maximal_from_spectrum(&plan, &spec, Semigroup::Heat, &t_set)?;
    let dunkl_l1 = weighted_l1(&full, &pointwise_max(&dunkl_max, |_| true), |_| true);
    let bessel_max = map_indexed(pos.len(), |i| {
        let x = pos.point(i);
        t_set
            .iter()
            .map(|&s| {
                (0..pos.len())
                    .map(|b| {
                        let y = pos.point(b);
                        pos.weight(b) * (0..n).map(|j| bessel_heat_1d(k[j], s, x[j], y[j])).product::<f64>() * f.values[b]
                    })
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    });
    let bessel_l1 = weighted_l1(&pos, &bessel_max, |_| true);
    Ok(FoldReport {
        t,
        nodes,
        semigroup_max_dev,
        riesz_max_rel_dev,
        h1_constant: bessel_l1 / dunkl_l1,
        expected_h1_constant: 0.5_f64.powi(n as i32),
    })
}
