//! The conjugate system `u_0 = P_t f`, `u_j = -P_t(𝓡_j f)`, its
//! Cauchy–Riemann residuals, the orbit field `F = (u^σ)_σ` and a
//! finite-difference scan of `𝓛(|F|^q) = (∂_t² + 𝐋)(|F|^q)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dunkl::{apply_dunkl_operator, Domain, MultiplicitySetup, SampledField, SignVector, TensorGrid};
use crate::error::{grid_err, invalid, Result};
use crate::exec::map_indexed;
use crate::matlemma::{delta_search, matrix_functionals, rows, Functionals, SearchBudget};
use crate::transform::{SpectralField, TransformPlan};

/// `(u_0, …, u_n)` sampled on `t_grid × space`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateField {
    pub t_grid: Vec<f64>,
    pub space: Arc<TensorGrid>,
    /// `components[ℓ][ti * space.len() + i]`.
    pub components: Vec<Vec<f64>>,
    pub source: String,
    /// Largest imaginary part dropped when the components were made real.
    pub imag_residual: f64,
}

impl ConjugateField {
    pub fn slice(&self, l: usize, ti: usize) -> SampledField {
        let m = self.space.len();
        SampledField { grid: Arc::clone(&self.space), values: self.components[l][ti * m..(ti + 1) * m].to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

fn check_t_grid(t: &[f64]) -> Result<()> {
    if t.is_empty() || t[0] <= 0.0 || t.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("t grid must be positive and strictly increasing"));
    }
    Ok(())
}

/// Uniform grid of `count` values from `t_min` with spacing `dt`.
pub fn uniform_t_grid(t_min: f64, dt: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| t_min + dt * i as f64).collect()
}

fn t_spacing(t: &[f64]) -> Result<f64> {
    if t.len() < 3 {
        return Err(grid_err("t grid needs at least three values"));
    }
    let dt = t[1] - t[0];
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(grid_err("t grid must be uniform"));
    }
    Ok(dt)
}

pub fn build_conjugate_system(setup: &MultiplicitySetup, f: &SampledField, t_grid: &[f64]) -> Result<ConjugateField> {
    let plan = TransformPlan::for_grid(setup, Arc::clone(&f.grid))?;
    build_with_plan(&plan, f, t_grid, "sampled field")
}

pub fn build_with_plan(plan: &TransformPlan, f: &SampledField, t_grid: &[f64], source: &str) -> Result<ConjugateField> {
    let spec = plan.forward(f)?;
    from_spectrum(plan, &spec, t_grid, source)
}

/// Builds the system from `ℱf` given directly on the plan's frequency grid.
pub fn from_spectrum(plan: &TransformPlan, spec: &SpectralField, t_grid: &[f64], source: &str) -> Result<ConjugateField> {
    check_t_grid(t_grid)?;
    if spec.domain != Domain::Frequency || *spec.grid != **plan.frequency() {
        return Err(grid_err("spectrum must live on the plan's frequency grid"));
    }
    let n = plan.setup().dim();
    let freq = plan.frequency();
    let points = freq.points();
    let modulus: Vec<f64> = points.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let m = plan.space().len();
    // One inverse transform per (t, component).
    let slices: Vec<Result<(Vec<f64>, f64)>> = map_indexed(t_grid.len() * (n + 1), |idx| {
        let (ti, l) = (idx / (n + 1), idx % (n + 1));
        let t = t_grid[ti];
        let values: Vec<Complex64> = (0..freq.len())
            .map(|a| {
                let r = modulus[a];
                let decay = (-t * r).exp();
                let sym = if l == 0 {
                    Complex64::new(decay, 0.0)
                } else if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -points[a][l - 1] / r * decay)
                };
                spec.values[a] * sym
            })
            .collect();
        let g = SpectralField { grid: Arc::clone(freq), values, domain: Domain::Frequency, normalization: spec.normalization };
        let out = plan.inverse(&g)?.real_part();
        Ok((out.field.values, out.imag_residual))
    });
    let mut components = vec![vec![0.0; t_grid.len() * m]; n + 1];
    let mut imag_residual: f64 = 0.0;
    for (idx, s) in slices.into_iter().enumerate() {
        let (vals, im) = s?;
        let (ti, l) = (idx / (n + 1), idx % (n + 1));
        components[l][ti * m..(ti + 1) * m].copy_from_slice(&vals);
        imag_residual = imag_residual.max(im);
    }
    Ok(ConjugateField { t_grid: t_grid.to_vec(), space: Arc::clone(plan.space()), components, source: source.to_string(), imag_residual })
}

/// Max-norm residuals of the three Cauchy–Riemann families over interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrResiduals {
    /// `max_j |D_j u_0 - ∂_t u_j|`.
    pub gradient: f64,
    /// `max_{j<ℓ} |D_j u_ℓ - D_ℓ u_j|` (zero when `n = 1`).
    pub symmetry: f64,
    /// `|∂_t u_0 + Σ_j D_j u_j|`.
    pub divergence: f64,
}

impl CrResiduals {
    pub fn max(&self) -> f64 {
        self.gradient.max(self.symmetry).max(self.divergence)
    }
}

fn spatial_interior(grid: &TensorGrid, i: usize, margin: usize) -> bool {
    let idx = grid.multi_index(i);
    idx.iter().zip(grid.shape()).all(|(v, n)| *v >= margin && v + margin < n)
}

pub fn cr_residuals(setup: &MultiplicitySetup, c: &ConjugateField) -> Result<CrResiduals> {
    let n = setup.dim();
    if c.dim() != n {
        return Err(invalid("setup and field dimensions differ"));
    }
    if c.space.shape().iter().any(|s| *s < 5) {
        return Err(grid_err("Cauchy–Riemann residuals need at least 5 nodes per axis"));
    }
    let dt = t_spacing(&c.t_grid)?;
    let m = c.space.len();
    let nt = c.t_grid.len();
    let per_t: Vec<Result<CrResiduals>> = map_indexed(nt - 2, |q| {
        let ti = q + 1;
        // d[j][ℓ] = D_j u_ℓ at this t.
        let mut d = Vec::with_capacity(n);
        for j in 0..n {
            let mut row = Vec::with_capacity(n + 1);
            for l in 0..=n {
                row.push(apply_dunkl_operator(setup, j, &c.slice(l, ti))?.values);
            }
            d.push(row);
        }
        let dtu = |l: usize, i: usize| (c.components[l][(ti + 1) * m + i] - c.components[l][(ti - 1) * m + i]) / (2.0 * dt);
        let mut r = CrResiduals { gradient: 0.0, symmetry: 0.0, divergence: 0.0 };
        for i in (0..m).filter(|i| spatial_interior(&c.space, *i, 1)) {
            let mut div = dtu(0, i);
            for j in 0..n {
                r.gradient = r.gradient.max((d[j][0][i] - dtu(j + 1, i)).abs());
                div += d[j][j + 1][i];
                for l in j + 1..n {
                    r.symmetry = r.symmetry.max((d[j][l + 1][i] - d[l][j + 1][i]).abs());
                }
            }
            r.divergence = r.divergence.max(div.abs());
        }
        Ok(r)
    });
    let mut out = CrResiduals { gradient: 0.0, symmetry: 0.0, divergence: 0.0 };
    for r in per_t {
        let r = r?;
        out.gradient = out.gradient.max(r.gradient);
        out.symmetry = out.symmetry.max(r.symmetry);
        out.divergence = out.divergence.max(r.divergence);
    }
    Ok(out)
}

/// `F(t, x) = (u^σ_ℓ(t, x))_{σ, ℓ}` and its magnitude, with
/// `u^σ_0(t, x) = u_0(t, σx)` and `u^σ_j(t, x) = σ_j u_j(t, σx)`, the conjugate
/// system of `f(σ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitField {
    pub t_grid: Vec<f64>,
    pub space: Arc<TensorGrid>,
    pub group: Vec<SignVector>,
    /// `components[σ][ℓ]`, laid out like [`ConjugateField::components`].
    pub components: Vec<Vec<Vec<f64>>>,
    /// `|F|` at every `(t, x)` node.
    pub magnitude: Vec<f64>,
}

impl OrbitField {
    pub fn component_count(&self) -> usize {
        self.components.len() * self.components.first().map_or(0, |c| c.len())
    }
}

/// Index of `σx` for the node with flat index `i`.
fn reflect_index(grid: &TensorGrid, sigma: &SignVector, i: usize) -> usize {
    let mut out = i;
    for (j, s) in sigma.signs.iter().enumerate() {
        if *s == -1 {
            out = grid.mirror_index(out, j);
        }
    }
    out
}

pub fn build_orbit_field(setup: &MultiplicitySetup, c: &ConjugateField) -> Result<OrbitField> {
    let n = setup.dim();
    if c.dim() != n {
        return Err(invalid("setup and field dimensions differ"));
    }
    for a in c.space.axes() {
        a.require_symmetric()?;
    }
    let group = SignVector::all(n);
    let m = c.space.len();
    let nt = c.t_grid.len();
    let perms: Vec<Vec<usize>> = group.iter().map(|s| (0..m).map(|i| reflect_index(&c.space, s, i)).collect()).collect();
    let components: Vec<Vec<Vec<f64>>> = perms
        .iter()
        .zip(&group)
        .map(|(p, sigma)| {
            c.components
                .iter()
                .enumerate()
                .map(|(l, u)| {
                    let sign = if l == 0 { 1.0 } else { sigma.signs[l - 1] as f64 };
                    (0..nt * m).map(|idx| sign * u[(idx / m) * m + p[idx % m]]).collect()
                })
                .collect()
        })
        .collect();
    let magnitude = (0..nt * m)
        .map(|idx| components.iter().flat_map(|s| s.iter().map(move |u| u[idx] * u[idx])).sum::<f64>().sqrt())
        .collect();
    Ok(OrbitField { t_grid: c.t_grid.clone(), space: Arc::clone(&c.space), group, components, magnitude })
}

/// Result of [`subharmonicity_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub q: f64,
    pub min_value: f64,
    /// `(t, x)` of the minimum.
    pub argmin: Option<(f64, Vec<f64>)>,
    pub violation_count: usize,
    /// Largest per-node finite-difference tolerance used.
    pub tol_fd: f64,
    pub evaluated: usize,
    pub grid_meta: GridMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
    pub tau: f64,
}

/// `𝓛 G` at node `(ti, i)` with stencil step `s` in index units, for a
/// `G` invariant under every reflection (no difference terms).
fn l_operator(g: &[f64], grid: &TensorGrid, k: &[f64], spacing: &[f64], dt: f64, m: usize, ti: usize, i: usize, s: usize) -> f64 {
    let at = |tt: usize, ii: usize| g[tt * m + ii];
    let c = at(ti, i);
    let sd = s as f64 * dt;
    let mut v = (at(ti + s, i) - 2.0 * c + at(ti - s, i)) / (sd * sd);
    let idx = grid.multi_index(i);
    for j in 0..k.len() {
        let st = grid.strides()[j] * s;
        let h = s as f64 * spacing[j];
        let (p, q) = (at(ti, i + st), at(ti, i - st));
        let x = grid.axis(j).nodes[idx[j]];
        v += (p - 2.0 * c + q) / (h * h) + 2.0 * k[j] / x * (p - q) / (2.0 * h);
    }
    v
}

/// Nodes on which the scan is evaluated: coarse-aligned so that the same node
/// can be differenced with step `h` and `2h`, two coarse steps from every edge,
/// off the coordinate hyperplanes, and with `|F| > τ`.
fn scan_nodes(f: &OrbitField, tau: f64) -> Vec<(usize, usize)> {
    let grid = &f.space;
    let m = grid.len();
    let nt = f.t_grid.len();
    let zero_parity: Vec<usize> = grid.axes().iter().map(|a| a.zero_index().unwrap_or(0) % 2).collect();
    let mut out = Vec::new();
    for ti in (2..nt.saturating_sub(2)).filter(|t| t % 2 == 0) {
        for i in 0..m {
            let idx = grid.multi_index(i);
            let ok = idx.iter().enumerate().all(|(j, v)| {
                let n = grid.axis(j).len();
                v % 2 == zero_parity[j] && *v >= 2 && v + 2 < n && grid.axis(j).nodes[*v] != 0.0
            });
            if ok && f.magnitude[ti * m + i] > tau {
                out.push((ti, i));
            }
        }
    }
    out
}

/// Scan of `𝓛(|F|^q)`. A node counts as a violation when the value is below
/// `-tol`, where `tol` is the difference between the step-`h` and step-`2h`
/// evaluations (three times the Richardson error estimate of the former).
pub fn subharmonicity_scan(setup: &MultiplicitySetup, f: &OrbitField, q: f64, tau: Option<f64>) -> Result<ScanReport> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("exponent q must lie in (0, 1], got {q}")));
    }
    let max_f = f.magnitude.iter().fold(0.0_f64, |a, v| a.max(*v));
    let tau = tau.unwrap_or(1e-6 * max_f);
    if !(tau > 0.0) && max_f > 0.0 {
        return Err(invalid("threshold tau must be positive"));
    }
    let dt = t_spacing(&f.t_grid)?;
    let spacing: Vec<f64> = f.space.axes().iter().map(|a| a.require_uniform()).collect::<Result<_>>()?;
    let m = f.space.len();
    let g: Vec<f64> = f.magnitude.iter().map(|v| v.powf(q)).collect();
    let nodes = if max_f > 0.0 { scan_nodes(f, tau) } else { Vec::new() };
    let k = setup.k();
    let vals: Vec<(f64, f64)> = map_indexed(nodes.len(), |a| {
        let (ti, i) = nodes[a];
        let fine = l_operator(&g, &f.space, k, &spacing, dt, m, ti, i, 1);
        let coarse = l_operator(&g, &f.space, k, &spacing, dt, m, ti, i, 2);
        (fine, (fine - coarse).abs())
    });
    let scale = g.iter().fold(0.0_f64, |a, v| a.max(*v)) / spacing.iter().chain([&dt]).fold(f64::INFINITY, |a, h| a.min(*h)).powi(2);
    let floor = 64.0 * f64::EPSILON * scale;
    let mut report = ScanReport {
        q,
        min_value: f64::INFINITY,
        argmin: None,
        violation_count: 0,
        tol_fd: 0.0,
        evaluated: nodes.len(),
        grid_meta: GridMeta {
            shape: f.space.shape(),
            spacing: spacing.clone(),
            t_min: f.t_grid[0],
            t_max: f.t_grid[f.t_grid.len() - 1],
            dt,
            tau,
        },
    };
    for (a, (v, tol)) in vals.iter().enumerate() {
        let tol = tol + floor;
        report.tol_fd = report.tol_fd.max(tol);
        if *v < -tol {
            report.violation_count += 1;
        }
        if *v < report.min_value {
            report.min_value = *v;
            let (ti, i) = nodes[a];
            report.argmin = Some((f.t_grid[ti], f.space.point(i)));
        }
    }
    if nodes.is_empty() {
        report.min_value = 0.0;
    }
    Ok(report)
}

/// Smallest exponent in `qs` with no violations, scanning downward from the largest.
pub fn empirical_q(setup: &MultiplicitySetup, f: &OrbitField, qs: &[f64]) -> Result<Option<f64>> {
    let mut sorted = qs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut best = None;
    for q in sorted {
        if subharmonicity_scan(setup, f, q, None)?.violation_count == 0 {
            best = Some(q);
        } else {
            break;
        }
    }
    Ok(best)
}

/// Proof-driven exponent: `ε* = 1/(12 Σk)`, `δ = δ(ε*)` from the matrix
/// search on `(n+1)×(n+1)` matrices, `q = 2 - 1/(1-δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QBound {
    pub k_sum: f64,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub q: f64,
    /// True when all multiplicities vanish and the classical exponent
    /// `(n-1)/n` is reported instead.
    pub classical: bool,
    /// Whether `0 < q < 1`, which needs `0 < δ < 1/2`.
    pub in_unit_interval: bool,
}

pub fn proof_q_bound(setup: &MultiplicitySetup, budget: SearchBudget) -> Result<QBound> {
    let n = setup.dim();
    let k_sum = setup.k_sum();
    if k_sum == 0.0 {
        let q = (n as f64 - 1.0) / n as f64;
        return Ok(QBound { k_sum, eps: None, delta: None, q, classical: true, in_unit_interval: q > 0.0 && q < 1.0 });
    }
    let eps = 1.0 / (12.0 * k_sum);
    let rep = delta_search(n, eps, budget)?;
    let q = 2.0 - 1.0 / (1.0 - rep.delta);
    Ok(QBound { k_sum, eps: Some(eps), delta: Some(rep.delta), q, classical: false, in_unit_interval: q > 0.0 && q < 1.0 })
}

/// `B_σ` at one node with the two reflection inequalities it satisfies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientMatrix {
    pub sigma: SignVector,
    /// Row `i` holds `∂_{x_i} u_ℓ^σ`, `x_0 = t`.
    pub entries: Vec<Vec<f64>>,
    pub functionals: Functionals,
    /// `-Σ_j (k_j/x_j)(u_j^σ(x) - u_j^σ(σ_j x))`, equal to `tr B_σ` by the CR system.
    pub trace_reflection: f64,
    /// `(Σk)(Σ_j (k_j/x_j²)(u_j^σ(x) - u_j^σ(σ_j x))²)`.
    pub trace_bound: f64,
    /// `2(Σk)(Σ_{i=0}^n Σ_j (k_j/x_j²)(u_i^σ(x) - u_i^σ(σ_j x))²)`.
    pub antisym_bound: f64,
    /// Slack for the trace inequality from the `h` vs `2h` difference.
    pub trace_tol: f64,
    /// Slack for the antisymmetric inequality.
    pub antisym_tol: f64,
}

impl GradientMatrix {
    pub fn trace_inequality_holds(&self) -> bool {
        self.functionals.trace.powi(2) <= self.trace_bound + self.trace_tol
    }

    pub fn antisym_inequality_holds(&self) -> bool {
        self.functionals.antisym_defect <= self.antisym_bound + self.antisym_tol
    }
}

fn gradient_matrix_at(f: &OrbitField, s: usize, dt: f64, spacing: &[f64], ti: usize, i: usize, step: usize) -> DMatrix<f64> {
    let m = f.space.len();
    let n = f.space.dim();
    let u = &f.components[s];
    DMatrix::from_fn(n + 1, n + 1, |r, l| {
        if r == 0 {
            (u[l][(ti + step) * m + i] - u[l][(ti - step) * m + i]) / (2.0 * step as f64 * dt)
        } else {
            let st = f.space.strides()[r - 1] * step;
            (u[l][ti * m + i + st] - u[l][ti * m + i - st]) / (2.0 * step as f64 * spacing[r - 1])
        }
    })
}

/// `B_σ` for every `σ` at the node `(ti, i)`, by central differences.
pub fn gradient_matrices(setup: &MultiplicitySetup, f: &OrbitField, ti: usize, i: usize) -> Result<Vec<GradientMatrix>> {
    let n = setup.dim();
    let dt = t_spacing(&f.t_grid)?;
    let spacing: Vec<f64> = f.space.axes().iter().map(|a| a.require_uniform()).collect::<Result<_>>()?;
    let m = f.space.len();
    if ti < 2 || ti + 2 >= f.t_grid.len() || !spatial_interior(&f.space, i, 2) {
        return Err(grid_err("gradient matrices need an interior node two steps from every edge"));
    }
    let x = f.space.point(i);
    if x.iter().any(|v| *v == 0.0) {
        return Err(invalid("gradient matrices need all coordinates nonzero"));
    }
    let k = setup.k();
    let k_sum = setup.k_sum();
    let mut out = Vec::with_capacity(f.group.len());
    for (s, sigma) in f.group.iter().enumerate() {
        let b = gradient_matrix_at(f, s, dt, &spacing, ti, i, 1);
        let b2 = gradient_matrix_at(f, s, dt, &spacing, ti, i, 2);
        let diff = (&b - &b2).abs();
        let refl = |l: usize, j: usize| f.components[s][l][ti * m + i] - f.components[s][l][ti * m + f.space.mirror_index(i, j)];
        let trace_reflection = -(0..n).map(|j| k[j] / x[j] * refl(j + 1, j)).sum::<f64>();
        let trace_bound = k_sum * (0..n).map(|j| k[j] / (x[j] * x[j]) * refl(j + 1, j).powi(2)).sum::<f64>();
        let antisym_bound =
            2.0 * k_sum * (0..=n).map(|l| (0..n).map(|j| k[j] / (x[j] * x[j]) * refl(l, j).powi(2)).sum::<f64>()).sum::<f64>();
        let functionals = matrix_functionals(&b)?;
        let dtr: f64 = (0..=n).map(|r| diff[(r, r)]).sum();
        let trace_tol = (functionals.trace.abs() + dtr).powi(2) - functionals.trace.powi(2);
        let mut antisym_tol = 0.0;
        for r in 0..=n {
            for c in r + 1..=n {
                let d = (b[(r, c)] - b[(c, r)]).abs();
                let e = diff[(r, c)] + diff[(c, r)];
                antisym_tol += (d + e).powi(2) - d * d;
            }
        }
        out.push(GradientMatrix {
            sigma: sigma.clone(),
            entries: rows(&b),
            functionals,
            trace_reflection,
            trace_bound,
            antisym_bound,
            trace_tol,
            antisym_tol,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::Axis;
    use crate::kernels::poisson_kernel;
    use crate::transform::frequency_axis;
    use std::f64::consts::PI;

    fn setup(k: &[f64]) -> MultiplicitySetup {
        MultiplicitySetup::new(k.to_vec()).unwrap()
    }

    fn plan(k: &[f64], extent: f64, h: f64, xi_max: f64) -> TransformPlan {
        let s = setup(k);
        let space = Arc::new(TensorGrid::uniform(k, extent, h, false).unwrap());
        let axes: Vec<Axis> = k.iter().map(|kk| frequency_axis(*kk, xi_max, 0.5, 10).unwrap()).collect();
        TransformPlan::new(&s, space, Arc::new(TensorGrid::new(axes).unwrap()), crate::transform::Normalization::MacdonaldMehta).unwrap()
    }

    fn bump(x: &[f64]) -> f64 {
        x.iter().map(|v| (-(v - 0.3).powi(2) * 2.0).exp()).product::<f64>() * (1.0 + x[0])
    }

    #[test]
    fn zero_source_gives_zero_system() {
        let p = plan(&[1.0], 4.0, 0.2, 4.0);
        let f = SampledField::zeros(Arc::clone(p.space()));
        let c = build_with_plan(&p, &f, &uniform_t_grid(0.5, 0.2, 5), "zero").unwrap();
        assert!(c.components.iter().all(|u| u.iter().all(|v| *v == 0.0)));
        let r = cr_residuals(&setup(&[1.0]), &c).unwrap();
        assert_eq!(r.max(), 0.0);
        let o = build_orbit_field(&setup(&[1.0]), &c).unwrap();
        let scan = subharmonicity_scan(&setup(&[1.0]), &o, 0.5, None).unwrap();
        assert_eq!((scan.violation_count, scan.evaluated), (0, 0));
    }

    #[test]
    fn classical_conjugate_poisson_pair() {
        let s0 = 0.6;
        let p = plan(&[0.0], 10.0, 0.1, 40.0);
        let spec = SpectralField::from_fn(Arc::clone(p.frequency()), Domain::Frequency, |xi| {
            Complex64::new((-s0 * xi[0].abs()).exp() / (2.0 * PI).sqrt(), 0.0)
        });
        let t = uniform_t_grid(0.5, 0.1, 9);
        let c = from_spectrum(&p, &spec, &t, "poisson").unwrap();
        let mut err: f64 = 0.0;
        for (ti, tt) in t.iter().enumerate() {
            let a = tt + s0;
            for (i, x) in p.space().axis(0).nodes.iter().enumerate() {
                let d = PI * (a * a + x * x);
                err = err.max((c.slice(0, ti).values[i] - a / d).abs());
                err = err.max((c.slice(1, ti).values[i] - x / d).abs());
            }
        }
        assert!(err < 1e-4, "{err}");
        let r = cr_residuals(&setup(&[0.0]), &c).unwrap();
        assert!(r.max() < 5e-3, "{r:?}");
    }

    #[test]
    fn u0_matches_poisson_kernel_route() {
        let s = setup(&[1.0]);
        let p = plan(&[1.0], 8.0, 0.1, 8.0);
        let f = SampledField::from_fn(Arc::clone(p.space()), bump);
        let c = build_with_plan(&p, &f, &[1.0], "bump").unwrap();
        let g = p.space();
        for &x in &[-1.5, 0.0, 0.4, 2.0] {
            let i = g.axis(0).nodes.iter().position(|v| (v - x).abs() < 1e-9).unwrap();
            let direct: f64 = (0..g.len()).map(|b| g.weight(b) * f.values[b] * poisson_kernel(&s, 1.0, &[x], &g.point(b)).unwrap()).sum();
            assert!((c.slice(0, 0).values[i] - direct).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn cr_residuals_are_second_order() {
        let s = setup(&[1.0]);
        let mut res = Vec::new();
        for &h in &[0.1, 0.05, 0.025] {
            let p = plan(&[1.0], 6.0, h, 4.0);
            let f = SampledField::from_fn(Arc::clone(p.space()), bump);
            let c = build_with_plan(&p, &f, &uniform_t_grid(0.5, h, (1.0 / h) as usize + 1), "bump").unwrap();
            res.push(cr_residuals(&s, &c).unwrap());
        }
        for w in res.windows(2) {
            for (a, b) in [(w[0].gradient, w[1].gradient), (w[0].divergence, w[1].divergence)] {
                assert!((3.2..=4.8).contains(&(a / b)), "{res:?}");
            }
        }
    }

    #[test]
    fn orbit_field_invariance_and_even_sources() {
        let s = setup(&[0.5, 1.0]);
        let p = plan(&[0.5, 1.0], 6.0, 0.2, 4.0);
        let f = SampledField::from_fn(Arc::clone(p.space()), |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let c = build_with_plan(&p, &f.clone(), &uniform_t_grid(0.5, 0.2, 3), "gauss").unwrap();
        let o = build_orbit_field(&s, &c).unwrap();
        assert_eq!(o.component_count(), 4 * 3);
        let m = p.space().len();
        for sigma in &o.group {
            for idx in 0..o.magnitude.len() {
                let j = (idx / m) * m + reflect_index(p.space(), sigma, idx % m);
                assert!((o.magnitude[idx] - o.magnitude[j]).abs() <= 1e-14 * (1.0 + o.magnitude[idx]));
            }
        }
        // Radial source: u_0 is G-invariant and every u^σ is the same field.
        for comps in &o.components {
            for (a, b) in comps.iter().zip(&o.components[0]) {
                assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12));
            }
        }
        let one = setup(&[1.0]);
        let p1 = plan(&[1.0], 5.0, 0.2, 4.0);
        let c1 = build_with_plan(&p1, &SampledField::from_fn(Arc::clone(p1.space()), bump), &[1.0], "bump").unwrap();
        assert_eq!(build_orbit_field(&one, &c1).unwrap().component_count(), 4);
    }

    #[test]
    fn classical_scan_has_no_violations() {
        let s = setup(&[0.0]);
        let p = plan(&[0.0], 6.0, 0.05, 8.0);
        let f = SampledField::from_fn(Arc::clone(p.space()), bump);
        let c = build_with_plan(&p, &f, &uniform_t_grid(0.4, 0.05, 25), "bump").unwrap();
        let o = build_orbit_field(&s, &c).unwrap();
        for q in [0.6, 1.0] {
            let r = subharmonicity_scan(&s, &o, q, None).unwrap();
            assert!(r.evaluated > 100);
            assert_eq!(r.violation_count, 0, "{r:?}");
        }
        assert!(subharmonicity_scan(&s, &o, 0.0, None).is_err());
    }

    #[test]
    fn gradient_matrix_inequalities() {
        let s = setup(&[1.0]);
        let p = plan(&[1.0], 5.0, 0.05, 6.0);
        let f = SampledField::from_fn(Arc::clone(p.space()), bump);
        let c = build_with_plan(&p, &f, &uniform_t_grid(0.5, 0.05, 9), "bump").unwrap();
        let o = build_orbit_field(&s, &c).unwrap();
        let g = p.space();
        for i in (10..g.len() - 10).step_by(7) {
            if g.point(i)[0] == 0.0 {
                continue;
            }
            for b in gradient_matrices(&s, &o, 4, i).unwrap() {
                assert!(b.trace_inequality_holds() && b.antisym_inequality_holds(), "{b:?}");
                assert!((b.functionals.trace - b.trace_reflection).abs() < 5e-3 * (1.0 + b.trace_reflection.abs()), "{b:?} {:?}", g.point(i));
            }
        }
    }

    #[test]
    fn classical_gradient_matrices_are_trace_free() {
        let s = setup(&[0.0, 0.0]);
        let p = plan(&[0.0, 0.0], 4.0, 0.1, 5.0);
        let f = SampledField::from_fn(Arc::clone(p.space()), bump);
        let c = build_with_plan(&p, &f, &uniform_t_grid(0.5, 0.1, 5), "bump").unwrap();
        let o = build_orbit_field(&s, &c).unwrap();
        let i = p.space().flat_index(&[30, 47]);
        for b in gradient_matrices(&s, &o, 2, i).unwrap() {
            assert!(b.functionals.trace.abs() < 5e-3, "{b:?}");
            assert_eq!(b.trace_bound, 0.0);
        }
    }

    #[test]
    fn q_bound_examples() {
        let budget = SearchBudget { samples: 8192, restarts: 8, ascent_steps: 150, seed: 3 };
        let classical = proof_q_bound(&setup(&[0.0, 0.0]), budget).unwrap();
        assert!(classical.classical && classical.q == 0.5);
        let mut prev = 0.0;
        for k in [0.5, 1.0, 2.0] {
            let b = proof_q_bound(&setup(&[k]), budget).unwrap();
            assert!(b.in_unit_interval, "{b:?}");
            assert!(b.q >= prev - 1e-12);
            prev = b.q;
        }
    }
}
