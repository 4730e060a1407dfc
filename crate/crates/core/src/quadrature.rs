//! Gaussian quadrature rules and the weighted rules built from them.
//!
//! Jacobi rules come from the Golub–Welsch eigenvalue problem. Rules used
//! repeatedly (Bessel and Dunkl kernel integrals) are cached by
//! `(size, alpha, beta)`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::specfun::ln_gamma;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Maps a rule on `[-1, 1]` to `[a, b]`, scaling weights by `(b - a) / 2`.
    pub fn affine(&self, a: f64, b: f64) -> Rule {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|x| m + h * x).collect(),
            weights: self.weights.iter().map(|w| w * h).collect(),
        }
    }

    pub fn append(&mut self, other: &Rule) {
        self.nodes.extend_from_slice(&other.nodes);
        self.weights.extend_from_slice(&other.weights);
    }

    /// Adds the reflection `x -> -x` of every node.
    pub fn mirrored(&self) -> Rule {
        let mut out = self.negated();
        out.append(self);
        out
    }

    /// The rule under `x -> -x`, nodes kept increasing.
    pub fn negated(&self) -> Rule {
        Rule {
            nodes: self.nodes.iter().rev().map(|x| -x).collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }

    fn empty() -> Rule {
        Rule { nodes: Vec::new(), weights: Vec::new() }
    }
}

/// Gauss–Jacobi rule for `∫_{-1}^{1} f(x) (1-x)^alpha (1+x)^beta dx`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Rule> {
    if n == 0 {
        return Err(invalid("quadrature rule needs at least one node"));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(invalid(format!("Jacobi exponents must exceed -1, got ({alpha}, {beta})")));
    }
    Ok(golub_welsch(n, alpha, beta))
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    (*cached_gauss_jacobi(n.max(1), 0.0, 0.0)).clone()
}

fn golub_welsch(n: usize, a: f64, b: f64) -> Rule {
    let ab = a + b;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    diag[0] = (b - a) / (ab + 2.0);
    for (i, d) in diag.iter_mut().enumerate().skip(1) {
        let m = i as f64;
        let s = 2.0 * m + ab;
        *d = (b * b - a * a) / (s * (s + 2.0));
    }
    for (i, o) in off.iter_mut().enumerate() {
        let m = (i + 1) as f64;
        let s = 2.0 * m + ab;
        let bm = if i == 0 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        *o = bm.sqrt();
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(ab + 2.0)).exp();
    if n == 1 {
        return Rule { nodes: vec![diag[0]], weights: vec![mu0] };
    }
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jm[(i, i)] = diag[i];
        if i + 1 < n {
            jm[(i, i + 1)] = off[i];
            jm[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

type RuleKey = (usize, u64, u64);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared Gauss–Jacobi rule; panics on invalid exponents (internal use only).
pub(crate) fn cached_gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Arc<Rule> {
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(r) = rule_cache().lock().expect("rule cache poisoned").get(&key) {
        return Arc::clone(r);
    }
    assert!(n > 0 && alpha > -1.0 && beta > -1.0, "bad Jacobi rule request ({n}, {alpha}, {beta})");
    let rule = Arc::new(golub_welsch(n, alpha, beta));
    rule_cache().lock().expect("rule cache poisoned").entry(key).or_insert(rule).clone()
}

/// Rule for `∫_0^b g(y) y^{2k} dy` (exact weight at the origin).
pub fn origin_weighted_rule(m: usize, k: f64, b: f64) -> Rule {
    let base = cached_gauss_jacobi(m, 0.0, 2.0 * k);
    let h = 0.5 * b;
    let scale = h.powf(2.0 * k + 1.0);
    Rule {
        nodes: base.nodes.iter().map(|x| h * (1.0 + x)).collect(),
        weights: base.weights.iter().map(|w| w * scale).collect(),
    }
}

/// Rule for `∫_a^b g(y) y^{2k} dy` with `0 <= a < b`.
///
/// Panels grow geometrically away from the origin so that the weight is
/// resolved even when `a` is tiny.
pub fn positive_interval_rule(m: usize, k: f64, a: f64, b: f64) -> Rule {
    debug_assert!(0.0 <= a && a < b);
    if a == 0.0 {
        return origin_weighted_rule(m, k, b);
    }
    let gl = cached_gauss_jacobi(m, 0.0, 0.0);
    let mut out = Rule::empty();
    let mut lo = a;
    while lo < b {
        let hi = (2.0 * lo).min(b);
        let hi = if b - hi < 0.25 * (hi - lo) { b } else { hi };
        let panel = gl.affine(lo, hi);
        for (x, w) in panel.nodes.iter().zip(&panel.weights) {
            out.nodes.push(*x);
            out.weights.push(w * x.powf(2.0 * k));
        }
        lo = hi;
    }
    out
}

/// Rule for `∫_a^b g(y) |y|^{2k} dy` for any `a < b`, split at the origin.
pub fn interval_rule(m: usize, k: f64, a: f64, b: f64) -> Rule {
    if a >= b {
        return Rule::empty();
    }
    if a >= 0.0 {
        return positive_interval_rule(m, k, a, b);
    }
    if b <= 0.0 {
        return positive_interval_rule(m, k, -b, -a).negated();
    }
    let mut out = positive_interval_rule(m, k, 0.0, -a).negated();
    out.append(&positive_interval_rule(m, k, 0.0, b));
    out
}

/// Rule for `∫_0^∞ g(y) y^{2k} dy` using `y = s tan(phi)` with uniform
/// panels in `phi`. Resolves both Gaussian and algebraic decay at scale `s`.
pub fn half_line_rule(k: f64, s: f64, panels: usize, m: usize) -> Rule {
    let dphi = FRAC_PI_2 / panels as f64;
    let mut out = Rule::empty();
    // First panel: weight phi^{2k} exactly, remaining factor (tan(phi)/phi)^{2k} smooth.
    let first = origin_weighted_rule(m, k, dphi);
    for (phi, w) in first.nodes.iter().zip(&first.weights) {
        let t = phi.tan();
        let c = phi.cos();
        out.nodes.push(s * t);
        out.weights.push(w * (t / phi).powf(2.0 * k) * s.powf(2.0 * k + 1.0) / (c * c));
    }
    let gl = cached_gauss_jacobi(m, 0.0, 0.0);
    for p in 1..panels {
        let panel = gl.affine(p as f64 * dphi, (p + 1) as f64 * dphi);
        for (phi, w) in panel.nodes.iter().zip(&panel.weights) {
            let t = phi.tan();
            let c = phi.cos();
            let y = s * t;
            out.nodes.push(y);
            out.weights.push(w * y.powf(2.0 * k) * s / (c * c));
        }
    }
    out
}

/// Rule for `∫_R g(y) |y|^{2k} dy`, the mirror image of [`half_line_rule`].
pub fn line_rule(k: f64, s: f64, panels: usize, m: usize) -> Rule {
    half_line_rule(k, s, panels, m).mirrored()
}
