//! Dunkl transform by tensorized quadrature, multiplier operators (Riesz
//! transforms in particular) and the Hörmander-type Sobolev norm of a symbol.
//!
//! The transform is `ℱf(ξ) = c^{-1} ∫ f(x) E(x, -iξ) dμ(x)` with `c` the
//! Macdonald–Mehta constant `∫ e^{-|x|²/2} dμ`, which makes `ℱ` unitary on
//! `L²(dμ)` with inverse `c^{-1} ∫ F(ξ) E(x, iξ) dμ(ξ)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dunkl::{kernel_imag_unit, Axis, Domain, FieldContainer, MultiplicitySetup, SampledField, TensorGrid};
use crate::error::{grid_err, invalid, DunklError, Result};
use crate::exec::map_indexed;
use crate::quadrature::{cached_gauss_jacobi, origin_weighted_rule};

/// Default bound on the share of `∫|f| dμ` carried by the outer tenth of the grid.
pub const ENVELOPE_LIMIT: f64 = 1e-8;

/// Constant dividing the transform integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `c_mm = 2^{N/2} Π Γ(k_j + 1/2)`: unitary, Gaussian `e^{-|x|²/2}` is fixed.
    MacdonaldMehta,
    /// `c_heat = 2^{N/2} c_mm`, the heat-kernel constant; scales norms by `2^{-N/2}`.
    HeatConstant,
}

impl Normalization {
    fn axis_constant(self, k: f64) -> f64 {
        let lg = crate::specfun::ln_gamma(k + 0.5);
        match self {
            Normalization::MacdonaldMehta => ((k + 0.5) * 2f64.ln() + lg).exp(),
            Normalization::HeatConstant => ((2.0 * k + 1.0) * 2f64.ln() + lg).exp(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Normalization::MacdonaldMehta => "macdonald-mehta",
            Normalization::HeatConstant => "heat-constant",
        }
    }
}

/// Complex samples on a tensor grid, tagged with the side of the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Arc<TensorGrid>,
    pub values: Vec<Complex64>,
    pub domain: Domain,
    pub normalization: Normalization,
}

/// Real part of a complex field and the largest discarded imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct RealOutput {
    pub field: SampledField,
    pub imag_residual: f64,
}

impl SpectralField {
    pub fn zeros(grid: Arc<TensorGrid>, domain: Domain) -> SpectralField {
        let n = grid.len();
        SpectralField { grid, values: vec![Complex64::new(0.0, 0.0); n], domain, normalization: Normalization::MacdonaldMehta }
    }

    pub fn from_fn<F>(grid: Arc<TensorGrid>, domain: Domain, f: F) -> SpectralField
    where
        F: Fn(&[f64]) -> Complex64 + Sync + Send,
    {
        let g = Arc::clone(&grid);
        let values = map_indexed(grid.len(), move |i| f(&g.point(i)));
        SpectralField { grid, values, domain, normalization: Normalization::MacdonaldMehta }
    }

    pub fn from_real(f: &SampledField) -> SpectralField {
        SpectralField {
            grid: Arc::clone(&f.grid),
            values: f.values.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
            domain: Domain::Space,
            normalization: Normalization::MacdonaldMehta,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.weights();
        self.values.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.norm()))
    }

    pub fn real_part(&self) -> RealOutput {
        let imag_residual = self.values.iter().fold(0.0_f64, |a, v| a.max(v.im.abs()));
        let field = SampledField { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| v.re).collect() };
        RealOutput { field, imag_residual }
    }

    pub fn to_container(&self) -> FieldContainer {
        FieldContainer::from_parts(
            self.domain,
            &self.grid,
            self.values.iter().map(|v| v.re).collect(),
            Some(self.values.iter().map(|v| v.im).collect()),
        )
    }

    pub fn from_container(c: FieldContainer) -> Result<SpectralField> {
        let domain = c.domain;
        let (grid, re, im) = c.into_parts()?;
        let im = im.unwrap_or_else(|| vec![0.0; re.len()]);
        Ok(SpectralField {
            grid: Arc::new(grid),
            values: re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect(),
            domain,
            normalization: Normalization::MacdonaldMehta,
        })
    }
}

/// Symmetric frequency axis on `[-xi_max, xi_max]` made of Gauss panels, with
/// the weight `|ξ|^{2k}` built into the rule. Zero is a panel edge, never a
/// node, so symbols with a jump at the origin are integrated accurately.
pub fn frequency_axis(k: f64, xi_max: f64, panel_width: f64, points: usize) -> Result<Axis> {
    if !(xi_max > 0.0 && panel_width > 0.0) || points == 0 {
        return Err(invalid("frequency axis needs positive extent, panel width and point count"));
    }
    let panels = (xi_max / panel_width).ceil().max(1.0) as usize;
    let width = xi_max / panels as f64;
    let gl = cached_gauss_jacobi(points, 0.0, 0.0);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let first = origin_weighted_rule(points, k, width);
    nodes.extend_from_slice(&first.nodes);
    weights.extend_from_slice(&first.weights);
    for p in 1..panels {
        let r = gl.affine(p as f64 * width, (p + 1) as f64 * width);
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            nodes.push(*x);
            weights.push(w * x.powf(2.0 * k));
        }
    }
    let mut all_nodes: Vec<f64> = nodes.iter().rev().map(|x| -x).collect();
    all_nodes.extend_from_slice(&nodes);
    let mut all_weights: Vec<f64> = weights.iter().rev().copied().collect();
    all_weights.extend_from_slice(&weights);
    Axis::from_parts(all_nodes, all_weights, k)
}

/// Precomputed per-axis quadrature matrices between a space and a frequency grid.
pub struct TransformPlan {
    setup: MultiplicitySetup,
    space: Arc<TensorGrid>,
    frequency: Arc<TensorGrid>,
    normalization: Normalization,
    /// Row-major `[frequency × space]` forward matrices, weights included.
    forward: Vec<Vec<Complex64>>,
    /// Row-major `[space × frequency]` inverse matrices, weights included.
    inverse: Vec<Vec<Complex64>>,
    envelope_limit: f64,
}

impl fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformPlan")
            .field("space_shape", &self.space.shape())
            .field("frequency_shape", &self.frequency.shape())
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl TransformPlan {
    pub fn new(
        setup: &MultiplicitySetup,
        space: Arc<TensorGrid>,
        frequency: Arc<TensorGrid>,
        normalization: Normalization,
    ) -> Result<TransformPlan> {
        let n = setup.dim();
        if space.dim() != n || frequency.dim() != n {
            return Err(invalid("setup, space grid and frequency grid dimensions differ"));
        }
        for j in 0..n {
            let k = setup.k()[j];
            if space.axis(j).k != k || frequency.axis(j).k != k {
                return Err(grid_err(format!("axis {j} weights were built for a different multiplicity")));
            }
            frequency.axis(j).require_symmetric()?;
        }
        let mut forward = Vec::with_capacity(n);
        let mut inverse = Vec::with_capacity(n);
        for j in 0..n {
            let k = setup.k()[j];
            let c = normalization.axis_constant(k);
            let (xa, fa) = (space.axis(j), frequency.axis(j));
            let (nx, nf) = (xa.len(), fa.len());
            let kern: Vec<Complex64> = map_indexed(nf * nx, |i| kernel_imag_unit(k, fa.nodes[i / nx] * xa.nodes[i % nx]));
            forward.push((0..nf * nx).map(|i| kern[i].conj() * (xa.weights[i % nx] / c)).collect());
            inverse.push((0..nx * nf).map(|i| kern[(i % nf) * nx + i / nf] * (fa.weights[i % nf] / c)).collect());
        }
        Ok(TransformPlan { setup: setup.clone(), space, frequency, normalization, forward, inverse, envelope_limit: ENVELOPE_LIMIT })
    }

    /// Plan whose frequency axes cover `[-Ξ, Ξ]` with `Ξ = min(extent, 0.8/h)`
    /// per axis, so the kernel turns by at most 0.8 rad between space nodes.
    pub fn for_grid(setup: &MultiplicitySetup, space: Arc<TensorGrid>) -> Result<TransformPlan> {
        let mut axes = Vec::with_capacity(setup.dim());
        for j in 0..setup.dim() {
            let a = space.axis(j);
            let h = a.require_uniform()?;
            axes.push(frequency_axis(setup.k()[j], a.extent().min(0.8 / h), 0.5, 10)?);
        }
        let freq = Arc::new(TensorGrid::new(axes)?);
        TransformPlan::new(setup, space, freq, Normalization::MacdonaldMehta)
    }

    pub fn with_envelope_limit(mut self, limit: f64) -> TransformPlan {
        self.envelope_limit = limit;
        self
    }

    pub fn setup(&self) -> &MultiplicitySetup {
        &self.setup
    }

    pub fn space(&self) -> &Arc<TensorGrid> {
        &self.space
    }

    pub fn frequency(&self) -> &Arc<TensorGrid> {
        &self.frequency
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Share of `∫|f| dμ` on nodes with some `|x_j|` beyond 90% of the axis extent.
    pub fn envelope_fraction(&self, f: &SampledField) -> f64 {
        envelope_fraction(f)
    }

    pub fn forward(&self, f: &SampledField) -> Result<SpectralField> {
        if *f.grid != *self.space {
            return Err(grid_err("field is not sampled on the plan's space grid"));
        }
        let fraction = envelope_fraction(f);
        if fraction > self.envelope_limit {
            return Err(DunklError::Envelope { fraction, limit: self.envelope_limit });
        }
        self.forward_complex(&SpectralField::from_real(f))
    }

    pub fn forward_complex(&self, f: &SpectralField) -> Result<SpectralField> {
        if f.domain != Domain::Space || *f.grid != *self.space {
            return Err(grid_err("forward transform expects a space-side field on the plan's space grid"));
        }
        let values = self.apply(&f.values, &self.forward, &self.space.shape(), &self.frequency.shape());
        Ok(SpectralField { grid: Arc::clone(&self.frequency), values, domain: Domain::Frequency, normalization: self.normalization })
    }

    pub fn inverse(&self, f: &SpectralField) -> Result<SpectralField> {
        if f.domain != Domain::Frequency || *f.grid != *self.frequency {
            return Err(grid_err("inverse transform expects a frequency-side field on the plan's frequency grid"));
        }
        let values = self.apply(&f.values, &self.inverse, &self.frequency.shape(), &self.space.shape());
        Ok(SpectralField { grid: Arc::clone(&self.space), values, domain: Domain::Space, normalization: self.normalization })
    }

    /// `ℱ^{-1}(m ℱ f)` with its real part and imaginary residual.
    pub fn multiplier_operator(&self, f: &SampledField, m: &MultiplierSpec) -> Result<RealOutput> {
        let spec = apply_multiplier(&self.forward(f)?, m)?;
        Ok(self.inverse(&spec)?.real_part())
    }

    fn apply(&self, data: &[Complex64], mats: &[Vec<Complex64>], from: &[usize], to: &[usize]) -> Vec<Complex64> {
        let mut shape = from.to_vec();
        let mut cur = data.to_vec();
        for j in 0..shape.len() {
            cur = apply_axis(&cur, &shape, j, &mats[j], to[j]);
            shape[j] = to[j];
        }
        cur
    }
}

/// Contracts axis `j` of a row-major array with the `[out × in]` matrix `mat`.
fn apply_axis(data: &[Complex64], shape: &[usize], j: usize, mat: &[Complex64], out_n: usize) -> Vec<Complex64> {
    let in_n = shape[j];
    let inner: usize = shape[j + 1..].iter().product();
    let outer: usize = shape[..j].iter().product();
    map_indexed(outer * out_n * inner, |o| {
        let i = o % inner;
        let a = (o / inner) % out_n;
        let q = o / (inner * out_n);
        let base = q * in_n * inner + i;
        let row = &mat[a * in_n..(a + 1) * in_n];
        let mut s = Complex64::new(0.0, 0.0);
        for (b, m) in row.iter().enumerate() {
            s += m * data[base + b * inner];
        }
        s
    })
}

fn envelope_fraction(f: &SampledField) -> f64 {
    let g = &f.grid;
    let ext: Vec<f64> = g.axes().iter().map(|a| a.extent()).collect();
    let (mut outer, mut total) = (0.0, 0.0);
    for i in 0..f.len() {
        let m = f.values[i].abs() * g.weight(i);
        total += m;
        if g.point(i).iter().zip(&ext).any(|(x, e)| x.abs() > 0.9 * e) {
            outer += m;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

type Symbol = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A Fourier-side multiplier symbol `m(ξ)`.
#[derive(Clone)]
pub struct MultiplierSpec {
    pub label: String,
    /// Degree of homogeneity, when the symbol is homogeneous.
    pub degree: Option<f64>,
    /// Axis index for the Riesz symbols.
    pub axis: Option<usize>,
    symbol: Symbol,
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSpec").field("label", &self.label).field("degree", &self.degree).field("axis", &self.axis).finish()
    }
}

fn euclid(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl MultiplierSpec {
    pub fn custom(label: impl Into<String>, degree: Option<f64>, symbol: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> MultiplierSpec {
        MultiplierSpec { label: label.into(), degree, axis: None, symbol: Arc::new(symbol) }
    }

    pub fn identity() -> MultiplierSpec {
        MultiplierSpec::custom("identity", Some(0.0), |_| Complex64::new(1.0, 0.0))
    }

    /// `m_j(ξ) = i ξ_j / |ξ|`, set to 0 at `ξ = 0`.
    pub fn riesz(j: usize) -> MultiplierSpec {
        let mut m = MultiplierSpec::custom(format!("riesz-{j}"), Some(0.0), move |xi| {
            let r = euclid(xi);
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, xi[j] / r)
            }
        });
        m.axis = Some(j);
        m
    }

    /// `e^{-t|ξ|²}`, the heat semigroup.
    pub fn heat(t: f64) -> MultiplierSpec {
        MultiplierSpec::custom(format!("heat-{t}"), None, move |xi| Complex64::new((-t * xi.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0))
    }

    /// `e^{-t|ξ|}`, the Poisson semigroup.
    pub fn poisson(t: f64) -> MultiplierSpec {
        MultiplierSpec::custom(format!("poisson-{t}"), None, move |xi| Complex64::new((-t * euclid(xi)).exp(), 0.0))
    }

    /// `|ξ|`, homogeneous of degree one.
    pub fn modulus() -> MultiplierSpec {
        MultiplierSpec::custom("modulus", Some(1.0), |xi| Complex64::new(euclid(xi), 0.0))
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.symbol)(xi)
    }
}

/// Pointwise product with the symbol on the frequency grid.
pub fn apply_multiplier(f: &SpectralField, m: &MultiplierSpec) -> Result<SpectralField> {
    if f.domain != Domain::Frequency {
        return Err(invalid("multipliers act on frequency-side fields"));
    }
    let g = Arc::clone(&f.grid);
    let values = map_indexed(f.len(), |i| f.values[i] * m.eval(&g.point(i)));
    Ok(SpectralField { grid: Arc::clone(&f.grid), values, domain: Domain::Frequency, normalization: f.normalization })
}

/// `ℱf` with the default frequency grid for `f`'s space grid.
pub fn dunkl_transform(setup: &MultiplicitySetup, f: &SampledField) -> Result<SpectralField> {
    TransformPlan::for_grid(setup, Arc::clone(&f.grid))?.forward(f)
}

/// `𝓡_j f = ℱ^{-1}(m_j ℱ f)`.
pub fn riesz_transform(setup: &MultiplicitySetup, f: &SampledField, j: usize) -> Result<RealOutput> {
    if j >= setup.dim() {
        return Err(invalid(format!("axis {j} out of range")));
    }
    TransformPlan::for_grid(setup, Arc::clone(&f.grid))?.multiplier_operator(f, &MultiplierSpec::riesz(j))
}

/// Smooth radial cutoff: 1 on `[1/2, 2]`, 0 outside `(1/4, 4)`.
pub fn cutoff(r: f64) -> f64 {
    fn psi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    fn step(x: f64) -> f64 {
        let a = psi(x);
        let b = psi(1.0 - x);
        a / (a + b)
    }
    if r <= 0.25 || r >= 4.0 {
        0.0
    } else if r < 0.5 {
        step((r - 0.25) / 0.25)
    } else if r <= 2.0 {
        1.0
    } else {
        step((4.0 - r) / 2.0)
    }
}

/// Discretization of the Sobolev norm in [`hoermander_norm_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevGrid {
    /// The symbol is sampled on the periodic box `[-half_width, half_width)^n`.
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl SobolevGrid {
    pub fn for_dim(n: usize) -> SobolevGrid {
        let points_per_axis = match n {
            1 => 1024,
            2 => 256,
            _ => 64,
        };
        SobolevGrid { half_width: 5.0, points_per_axis }
    }
}

/// `sup_{t ∈ t_grid} ‖χ(|·|) m(t ·)‖_{W^{N/2+ε, 2}}` with the classical
/// Sobolev norm `‖g‖² = (2π)^{-n} ∫ (1+|ζ|²)^s |ĝ(ζ)|² dζ`.
pub fn hoermander_norm(m: &MultiplierSpec, setup: &MultiplicitySetup, eps: f64, t_grid: &[f64]) -> Result<f64> {
    hoermander_norm_with(m, setup, eps, t_grid, SobolevGrid::for_dim(setup.dim()))
}

pub fn hoermander_norm_with(m: &MultiplierSpec, setup: &MultiplicitySetup, eps: f64, t_grid: &[f64], grid: SobolevGrid) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(invalid("Sobolev excess must be positive"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("dilation grid must be non-empty and positive"));
    }
    if grid.half_width <= 4.0 || grid.points_per_axis < 8 {
        return Err(invalid("Sobolev grid must contain the cutoff support"));
    }
    let s = 0.5 * setup.homogeneous_dim() + eps;
    let mut sup: f64 = 0.0;
    for &t in t_grid {
        sup = sup.max(sobolev_norm(setup.dim(), s, grid, |xi| {
            let scaled: Vec<f64> = xi.iter().map(|v| t * v).collect();
            m.eval(&scaled) * cutoff(euclid(xi))
        }));
    }
    Ok(sup)
}

/// Periodic trapezoid samples, FFT to Fourier coefficients `c_m`, then
/// `‖g‖² = (2L)^n Σ (1 + |π m / L|²)^s |c_m|²`.
fn sobolev_norm(n: usize, s: f64, grid: SobolevGrid, g: impl Fn(&[f64]) -> Complex64 + Sync + Send) -> f64 {
    let m = grid.points_per_axis;
    let l = grid.half_width;
    let h = 2.0 * l / m as f64;
    let total = m.pow(n as u32);
    let mut data: Vec<Complex64> = map_indexed(total, |flat| {
        let mut rem = flat;
        let mut xi = vec![0.0; n];
        for j in (0..n).rev() {
            xi[j] = -l + h * (rem % m) as f64;
            rem /= m;
        }
        g(&xi)
    });
    let fft = FftPlanner::new().plan_fft_forward(m);
    for j in 0..n {
        let inner = m.pow((n - 1 - j) as u32);
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for outer in 0..total / (m * inner) {
            for i in 0..inner {
                let base = outer * m * inner + i;
                for (b, v) in line.iter_mut().enumerate() {
                    *v = data[base + b * inner];
                }
                fft.process(&mut line);
                for (b, v) in line.iter().enumerate() {
                    data[base + b * inner] = *v;
                }
            }
        }
    }
    let norm = 1.0 / total as f64;
    let mut sum = 0.0;
    for (flat, c) in data.iter().enumerate() {
        let mut rem = flat;
        let mut z2 = 0.0;
        for _ in 0..n {
            let idx = rem % m;
            rem /= m;
            let freq = if idx < m / 2 { idx as f64 } else { idx as f64 - m as f64 };
            let z = PI * freq / l;
            z2 += z * z;
        }
        sum += (1.0 + z2).powf(s) * (c * norm).norm_sqr();
    }
    ((2.0 * l).powi(n as i32) * sum).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(k: &[f64]) -> MultiplicitySetup {
        MultiplicitySetup::new(k.to_vec()).unwrap()
    }

    fn plan(k: &[f64], extent: f64, h: f64) -> TransformPlan {
        let s = setup(k);
        let g = Arc::new(TensorGrid::uniform(k, extent, h, false).unwrap());
        TransformPlan::for_grid(&s, g).unwrap()
    }

    #[test]
    fn frequency_axis_integrates_weighted_gaussian() {
        for &k in &[0.0, 0.3, 1.0, 2.5] {
            let a = frequency_axis(k, 12.0, 0.5, 10).unwrap();
            assert!(a.is_symmetric() && a.staggered);
            let got: f64 = a.nodes.iter().zip(&a.weights).map(|(x, w)| w * (-x * x).exp()).sum();
            let exact = crate::specfun::gamma(k + 0.5).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-13, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn gaussian_is_a_fixed_point() {
        for k in [[0.0, 0.0], [1.0, 0.5]] {
            let p = plan(&k, 8.0, 0.1);
            let f = SampledField::from_fn(Arc::clone(p.space()), |x| (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
            let spec = p.forward(&f).unwrap();
            let g = p.frequency();
            let mut err: f64 = 0.0;
            for (i, v) in spec.values.iter().enumerate() {
                let xi = g.point(i);
                err = err.max((v - Complex64::new((-0.5 * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0)).norm());
            }
            assert!(err < 1e-6, "k={k:?}: {err}");
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = plan(&[1.0], 6.0, 0.1);
        let f = SampledField::zeros(Arc::clone(p.space()));
        assert_eq!(p.forward(&f).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn plancherel_and_inversion() {
        let p = plan(&[0.7], 10.0, 0.1);
        let f = SampledField::from_fn(Arc::clone(p.space()), |x| (1.0 + x[0] - 0.3 * x[0] * x[0]) * (-0.5 * (x[0] - 0.4).powi(2)).exp());
        let spec = p.forward(&f).unwrap();
        let ratio = spec.l2_norm() / f.l2_norm();
        assert!((ratio - 1.0).abs() < 1e-4, "{ratio}");
        let back = p.inverse(&spec).unwrap().real_part();
        let err = back.field.values.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4 && back.imag_residual < 1e-8, "{err} {}", back.imag_residual);
    }

    #[test]
    fn heat_constant_breaks_unitarity_by_the_expected_factor() {
        let s = setup(&[1.0]);
        let g = Arc::new(TensorGrid::uniform(s.k(), 8.0, 0.1, false).unwrap());
        let freq = Arc::new(TensorGrid::new(vec![frequency_axis(1.0, 8.0, 0.5, 10).unwrap()]).unwrap());
        let p = TransformPlan::new(&s, g, freq, Normalization::HeatConstant).unwrap();
        let f = SampledField::from_fn(Arc::clone(p.space()), |x| (-0.5 * x[0] * x[0]).exp());
        let ratio = p.forward(&f).unwrap().l2_norm() / f.l2_norm();
        assert!((ratio - 2f64.powf(-1.5)).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn envelope_rejects_slow_decay() {
        let p = plan(&[0.0], 5.0, 0.1);
        let f = SampledField::from_fn(Arc::clone(p.space()), |x| 1.0 / (1.0 + x[0] * x[0]));
        assert!(matches!(p.forward(&f), Err(DunklError::Envelope { .. })));
        let relaxed = plan(&[0.0], 5.0, 0.1).with_envelope_limit(1.0);
        assert!(relaxed.forward(&f).is_ok());
    }

    #[test]
    fn riesz_symbol_algebra() {
        let g = Arc::new(TensorGrid::new(vec![frequency_axis(0.5, 3.0, 0.5, 4).unwrap(), frequency_axis(1.0, 3.0, 0.5, 4).unwrap()]).unwrap());
        let f = SpectralField::from_fn(Arc::clone(&g), Domain::Frequency, |xi| Complex64::new(xi[0].cos(), xi[1]));
        let mut acc = SpectralField::zeros(Arc::clone(&g), Domain::Frequency);
        for j in 0..2 {
            let m = MultiplierSpec::riesz(j);
            let twice = apply_multiplier(&apply_multiplier(&f, &m).unwrap(), &m).unwrap();
            for (a, b) in acc.values.iter_mut().zip(&twice.values) {
                *a += b;
            }
        }
        for (a, b) in acc.values.iter().zip(&f.values) {
            assert!((a + b).norm() < 1e-10);
        }
        assert_eq!(MultiplierSpec::riesz(0).eval(&[0.0, 0.0]), Complex64::new(0.0, 0.0));
        let id = apply_multiplier(&f, &MultiplierSpec::identity()).unwrap();
        assert_eq!(id.values, f.values);
    }

    /// Dawson's integral `e^{-x²} ∫_0^x e^{t²} dt` by Gauss–Legendre panels.
    fn dawson(x: f64) -> f64 {
        let gl = crate::quadrature::gauss_legendre(20);
        let panels = (x.abs() * 4.0).ceil().max(1.0) as usize;
        let w = x / panels as f64;
        (0..panels).map(|p| gl.affine(p as f64 * w, (p + 1) as f64 * w).integrate(|t| (t * t - x * x).exp())).sum()
    }

    #[test]
    fn classical_riesz_of_gaussian_is_a_dawson_function() {
        let s = setup(&[0.0]);
        let g = Arc::new(TensorGrid::uniform(s.k(), 10.0, 0.05, false).unwrap());
        let f = SampledField::from_fn(Arc::clone(&g), |x| (-x[0] * x[0]).exp());
        let r = riesz_transform(&s, &f, 0).unwrap();
        assert!(r.imag_residual < 1e-8);
        for (i, v) in r.field.values.iter().enumerate() {
            let x = g.point(i)[0];
            if x.abs() <= 6.0 {
                let exact = -2.0 / PI.sqrt() * dawson(x);
                assert!((v - exact).abs() < 1e-4, "x={x}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn riesz_of_even_function_is_odd() {
        let s = setup(&[1.0, 0.5]);
        let g = Arc::new(TensorGrid::uniform(s.k(), 6.0, 0.15, false).unwrap());
        let f = SampledField::from_fn(Arc::clone(&g), |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp());
        for j in 0..2 {
            let r = riesz_transform(&s, &f, j).unwrap();
            for i in 0..g.len() {
                let m = g.mirror_index(i, j);
                assert!((r.field.values[i] + r.field.values[m]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn transform_of_even_real_field_is_real() {
        let p = plan(&[1.0], 8.0, 0.1);
        let f = SampledField::from_fn(Arc::clone(p.space()), |x| (x[0] * x[0] + 1.0) * (-x[0] * x[0]).exp());
        let spec = p.forward(&f).unwrap();
        assert!(spec.values.iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn hoermander_norm_examples() {
        let s = setup(&[1.0]);
        let one = hoermander_norm(&MultiplierSpec::identity(), &s, 0.1, &[1.0]).unwrap();
        let one_b = hoermander_norm(&MultiplierSpec::identity(), &s, 0.1, &[7.0]).unwrap();
        assert!(one.is_finite() && one > 0.0 && (one - one_b).abs() < 1e-12 * one);
        let r = MultiplierSpec::riesz(0);
        let a = hoermander_norm(&r, &s, 0.1, &[1.0]).unwrap();
        let b = hoermander_norm(&r, &s, 0.1, &[10.0]).unwrap();
        assert!(a.is_finite() && ((a - b) / a).abs() < 1e-6);
        let m = MultiplierSpec::modulus();
        let v: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|t| hoermander_norm(&m, &s, 0.1, &[*t]).unwrap()).collect();
        assert!(v[1] > 5.0 * v[0] && v[2] > 5.0 * v[1], "{v:?}");
    }

    #[test]
    fn container_round_trip() {
        let p = plan(&[1.0], 4.0, 0.25);
        let f = SampledField::from_fn(Arc::clone(p.space()), |x| x[0] * (-x[0] * x[0]).exp());
        let spec = p.with_envelope_limit(1.0).forward(&f).unwrap();
        let c = spec.to_container();
        assert_eq!(c.domain, Domain::Frequency);
        let back = SpectralField::from_container(FieldContainer::from_json(&c.to_json()).unwrap()).unwrap();
        assert_eq!(back.values, spec.values);
    }
}
