//! Measures of Euclidean balls under `dμ`, the quasi-distance
//! `d̃(x,y) = inf { μ(B) : B a closed ball containing x and y }`, and the
//! radius/measure inversion `μ(B(x, √t)) = r`.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dunkl::MultiplicitySetup;
use crate::error::{domain, invalid, Result};
use crate::quadrature::{cached_gauss_jacobi, origin_weighted_rule};
use crate::specfun::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// `μ(B(center, radius))` with the method that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallMeasure {
    pub center: Vec<f64>,
    pub radius: f64,
    pub measure: f64,
    pub method: MeasureMethod,
    /// Standard error, Monte Carlo only.
    pub std_error: Option<f64>,
}

fn check_ball(setup: &MultiplicitySetup, c: &[f64], r: f64) -> Result<()> {
    if c.len() != setup.dim() {
        return Err(invalid(format!("center must have dimension {}", setup.dim())));
    }
    if !(r > 0.0) || !r.is_finite() || c.iter().any(|v| !v.is_finite()) {
        return Err(domain(format!("ball radius must be positive and finite, got {r}")));
    }
    Ok(())
}

/// `μ(B(center, r))`: exact antiderivative for `n = 1`, nested quadrature
/// over slices otherwise.
pub fn mu_ball(setup: &MultiplicitySetup, center: &[f64], r: f64) -> Result<f64> {
    check_ball(setup, center, r)?;
    Ok(mu_ball_nd(setup.k(), center, r))
}

pub fn ball_measure(setup: &MultiplicitySetup, center: &[f64], r: f64) -> Result<BallMeasure> {
    let measure = mu_ball(setup, center, r)?;
    let method = if setup.dim() == 1 { MeasureMethod::ClosedForm } else { MeasureMethod::Quadrature };
    Ok(BallMeasure { center: center.to_vec(), radius: r, measure, method, std_error: None })
}

/// `∫_a^b |y|^{2k} dy`, free of cancellation when `[a, b]` is far from 0.
pub fn interval_measure(k: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let p = 2.0 * k + 1.0;
    if a >= 0.0 {
        if a == 0.0 {
            return b.powf(p) / p;
        }
        // (b^p - a^p)/p = a^p expm1(p ln(b/a)) / p
        return a.powf(p) * (p * ((b - a) / a).ln_1p()).exp_m1() / p;
    }
    if b <= 0.0 {
        return interval_measure(k, -b, -a);
    }
    ((-a).powf(p) + b.powf(p)) / p
}

fn mu_ball_nd(k: &[f64], c: &[f64], r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if k.len() == 1 {
        return interval_measure(k[0], c[0] - r, c[0] + r);
    }
    let (k1, c1) = (k[0], c[0]);
    let (kr, cr) = (&k[1..], &c[1..]);
    // Slice x_1 = c_1 + r sin θ; the section is a ball of radius r cos θ.
    let mut breaks = vec![-FRAC_PI_2, FRAC_PI_2];
    let theta0 = if c1.abs() < r { Some((-c1 / r).asin()) } else { None };
    if let Some(t0) = theta0 {
        breaks.push(t0);
    }
    // The section measure is not smooth in its radius where the section
    // starts to touch a coordinate subspace through the origin.
    for mask in 1..(1usize << cr.len()) {
        let rho = (0..cr.len()).filter(|j| mask >> j & 1 == 1).map(|j| cr[j] * cr[j]).sum::<f64>().sqrt();
        if rho > 0.0 && rho < r {
            let a = (rho / r).acos();
            breaks.push(a);
            breaks.push(-a);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let depth_levels = if k.len() > 2 { 4 } else { 8 };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-15 {
            continue;
        }
        let sing_lo = theta0.is_some_and(|t| (t - lo).abs() < 1e-14);
        let sing_hi = theta0.is_some_and(|t| (t - hi).abs() < 1e-14);
        let f = |th: f64| {
            let s = r * th.cos();
            mu_ball_nd(kr, cr, s) * s
        };
        total += graded_panel(lo, hi, depth_levels, |th| f(th) * (c1 + r * th.sin()).abs().powf(2.0 * k1), sing_lo, sing_hi, k1, |th, t0| {
            // Smooth remainder of |c1 + r sin θ|^{2k1} / |θ - θ0|^{2k1}.
            let d = (th - t0).abs();
            let v = (c1 + r * th.sin()).abs();
            f(th) * if d > 0.0 { (v / d).powf(2.0 * k1) } else { (r * t0.cos()).powf(2.0 * k1) }
        });
    }
    total
}

/// Integral over `[lo, hi]` with dyadic grading towards both ends. If an end is
/// the zero `θ0` of the weight, the last sub-panel there uses a Gauss–Jacobi
/// rule for `|θ - θ0|^{2k}` and `rem(θ, θ0)` carries the smooth factor.
#[allow(clippy::too_many_arguments)]
fn graded_panel(
    lo: f64,
    hi: f64,
    levels: i32,
    full: impl Fn(f64) -> f64,
    sing_lo: bool,
    sing_hi: bool,
    k: f64,
    rem: impl Fn(f64, f64) -> f64,
) -> f64 {
    let gl = cached_gauss_jacobi(10, 0.0, 0.0);
    let len = hi - lo;
    let mut pts = vec![lo];
    for l in (1..=levels).rev() {
        pts.push(lo + 0.5 * len * 0.25f64.powi(l));
    }
    for l in 1..=levels {
        pts.push(hi - 0.5 * len * 0.25f64.powi(l));
    }
    pts.push(hi);
    let mut sum = 0.0;
    let last = pts.len() - 2;
    for (i, w) in pts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if i == 0 && sing_lo {
            let rule = origin_weighted_rule(10, k, b - a);
            sum += rule.integrate(|d| rem(a + d, a));
        } else if i == last && sing_hi {
            let rule = origin_weighted_rule(10, k, b - a);
            sum += rule.integrate(|d| rem(b - d, b));
        } else {
            sum += gl.affine(a, b).integrate(&full);
        }
    }
    sum
}

/// Monte Carlo estimate of `μ(B(center, r))` with its standard error.
pub fn mu_ball_monte_carlo(setup: &MultiplicitySetup, center: &[f64], r: f64, samples: usize, seed: u64) -> Result<BallMeasure> {
    check_ball(setup, center, r)?;
    if samples < 2 {
        return Err(invalid("Monte Carlo needs at least two samples"));
    }
    let n = setup.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rad = r * rng.random::<f64>().powf(1.0 / n as f64);
        let w: f64 = (0..n).map(|j| (center[j] + rad * g[j] / gn).abs().powf(2.0 * setup.k()[j])).product();
        s1 += w;
        s2 += w * w;
    }
    let nf = samples as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let ln_vol = 0.5 * n as f64 * std::f64::consts::PI.ln() - ln_gamma(0.5 * n as f64 + 1.0) + n as f64 * r.ln();
    let vol = ln_vol.exp();
    Ok(BallMeasure {
        center: center.to_vec(),
        radius: r,
        measure: vol * mean,
        method: MeasureMethod::MonteCarlo,
        std_error: Some(vol * (var / nf).sqrt()),
    })
}

/// `μ(B(x,R))/μ(B(x,r))` against the bracketing powers `(R/r)^n` and `(R/r)^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub ratio: f64,
    pub lower_power: f64,
    pub upper_power: f64,
    /// `ratio / (R/r)^n`, bounded below by the doubling constant `c₁`.
    pub lower_exp_ratio: f64,
    /// `ratio / (R/r)^N`, bounded above by the constant `c₂`.
    pub upper_exp_ratio: f64,
}

pub fn doubling_report(setup: &MultiplicitySetup, x: &[f64], r: f64, big_r: f64) -> Result<DoublingReport> {
    if !(big_r >= r) {
        return Err(invalid("outer radius must be at least the inner radius"));
    }
    let ratio = mu_ball(setup, x, big_r)? / mu_ball(setup, x, r)?;
    let q = big_r / r;
    let lower_power = q.powf(setup.dim() as f64);
    let upper_power = q.powf(setup.homogeneous_dim());
    Ok(DoublingReport {
        ratio,
        lower_power,
        upper_power,
        lower_exp_ratio: ratio / lower_power,
        upper_exp_ratio: ratio / upper_power,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

fn smallest_enclosing(setup: &MultiplicitySetup, x: &[f64], y: &[f64], c: &[f64]) -> f64 {
    let r = dist(c, x).max(dist(c, y));
    if r == 0.0 {
        0.0
    } else {
        mu_ball_nd(setup.k(), c, r)
    }
}

/// `d̃(x, y)` with ball centers restricted to the segment `[x, y]`
/// (exact in dimension one, an upper bound in general).
pub fn quasi_distance(setup: &MultiplicitySetup, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != setup.dim() || y.len() != setup.dim() {
        return Err(invalid(format!("points must have dimension {}", setup.dim())));
    }
    if dist(x, y) == 0.0 {
        return Ok(0.0);
    }
    let at = |lam: f64| -> f64 {
        let c: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + lam * (b - a)).collect();
        smallest_enclosing(setup, x, y, &c)
    };
    // Coarse scan, then golden-section search in the best bracket.
    let m = 32;
    let vals: Vec<f64> = (0..=m).map(|i| at(i as f64 / m as f64)).collect();
    let best = (0..=m).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(m / 2);
    let mut a = best.saturating_sub(1) as f64 / m as f64;
    let mut b = (best + 1).min(m) as f64 / m as f64;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c1 = b - g * (b - a);
    let mut c2 = a + g * (b - a);
    let (mut f1, mut f2) = (at(c1), at(c2));
    while b - a > 1e-12 {
        if f1 <= f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = at(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = at(c2);
        }
    }
    Ok(vals[best].min(f1).min(f2).min(at(0.5 * (a + b))))
}

/// `d̃(x, y)` searched over centers in a box around the segment: a coarse grid
/// followed by compass refinement.
pub fn quasi_distance_box(setup: &MultiplicitySetup, x: &[f64], y: &[f64], per_axis: usize) -> Result<f64> {
    if x.len() != setup.dim() || y.len() != setup.dim() {
        return Err(invalid(format!("points must have dimension {}", setup.dim())));
    }
    let n = setup.dim();
    let d = dist(x, y);
    if d == 0.0 {
        return Ok(0.0);
    }
    let per_axis = per_axis.max(3);
    let lo: Vec<f64> = (0..n).map(|j| x[j].min(y[j]) - d).collect();
    let hi: Vec<f64> = (0..n).map(|j| x[j].max(y[j]) + d).collect();
    let mut best_c: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut best = smallest_enclosing(setup, x, y, &best_c);
    let total = per_axis.pow(n as u32);
    for flat in 0..total {
        let mut rem = flat;
        let c: Vec<f64> = (0..n)
            .map(|j| {
                let i = rem % per_axis;
                rem /= per_axis;
                lo[j] + (hi[j] - lo[j]) * i as f64 / (per_axis - 1) as f64
            })
            .collect();
        let v = smallest_enclosing(setup, x, y, &c);
        if v < best {
            best = v;
            best_c = c;
        }
    }
    let mut step = (hi[0] - lo[0]) / (per_axis - 1) as f64;
    while step > 1e-10 * d {
        let mut improved = false;
        for j in 0..n {
            for s in [-1.0, 1.0] {
                let mut c = best_c.clone();
                c[j] += s * step;
                let v = smallest_enclosing(setup, x, y, &c);
                if v < best {
                    best = v;
                    best_c = c;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Both estimates of `d̃(x, y)`; they coincide in dimension one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistanceReport {
    pub segment: f64,
    pub box_search: f64,
}

pub fn quasi_distance_report(setup: &MultiplicitySetup, x: &[f64], y: &[f64]) -> Result<QuasiDistanceReport> {
    Ok(QuasiDistanceReport { segment: quasi_distance(setup, x, y)?, box_search: quasi_distance_box(setup, x, y, 9)? })
}

/// The `t > 0` with `μ(B(x, √t)) = r`, by bisection.
pub fn t_of_r(setup: &MultiplicitySetup, x: &[f64], r: f64) -> Result<f64> {
    if x.len() != setup.dim() {
        return Err(invalid(format!("point must have dimension {}", setup.dim())));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(format!("measure level must be positive, got {r}")));
    }
    let m = |s: f64| mu_ball_nd(setup.k(), x, s.sqrt());
    let (mut lo, mut hi) = (0.0, 1.0);
    while m(hi) < r {
        lo = hi;
        hi *= 4.0;
    }
    if lo == 0.0 {
        lo = hi;
        while m(lo) > r {
            hi = lo;
            lo *= 0.25;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m(mid) < r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest `|x - y| / √t` over sampled `y` with `d̃(x, y) < r`, where
/// `t = t_of_r(x, r)`; a finite value bounds the outer ball of the sandwich
/// `B(x, √t) ⊆ B̃(x, r) ⊆ B(x, c √t)`.
pub fn sandwich_constant(setup: &MultiplicitySetup, x: &[f64], r: f64, samples: usize, seed: u64) -> Result<f64> {
    let t = t_of_r(setup, x, r)?;
    let st = t.sqrt();
    let n = setup.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: f64 = 0.0;
    for _ in 0..samples {
        let scale = st * 10f64.powf(rng.random_range(-1.0..1.5));
        let y: Vec<f64> = (0..n).map(|j| x[j] + scale * rng.random_range(-1.0..1.0)).collect();
        if quasi_distance(setup, x, &y)? < r {
            c = c.max(dist(x, &y) / st);
        }
    }
    Ok(c)
}
