//! The numbered acceptance checks, each producing a deterministic record.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conjugate::{build_orbit_field, cr_residuals, from_spectrum, proof_q_bound, subharmonicity_scan, uniform_t_grid, CrResiduals};
use crate::dunkl::{dunkl_kernel, dunkl_kernel_1d, dunkl_kernel_1d_integral, Axis, MultiplicitySetup, SampledField, TensorGrid};
use crate::error::Result;
use crate::geometry::{doubling_report, quasi_distance};
use crate::hardy::{fold_identities, h1_characterization_ratio, make_atom, random_atoms, AtomProfile, Ball, FoldConfig, HardyConfig};
use crate::kernels::{
    chapman_kolmogorov, check_heat_regimes, classical_poisson_1d, gauss_weierstrass_1d, heat_kernel, heat_mass, poisson_kernel,
    poisson_mass, stratified_heat_samples,
};
use crate::matlemma::{
    antisymmetric_extremal, delta_search, find_counterexample, lemma_margin, symmetric_trace_zero_extremal, verify_delta, SearchBudget,
};
use crate::quadrature::gauss_legendre;
use crate::transform::{frequency_axis, riesz_transform, Normalization, SpectralField, TransformPlan};

/// Sample sizes. `Full` uses the sizes the criteria are stated with;
/// `Quick` shrinks the randomized parts for smoke runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Full,
    Quick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub profile: Profile,
}

impl AcceptanceConfig {
    pub fn new(seed: u64, profile: Profile) -> Self {
        AcceptanceConfig { seed, profile }
    }

    fn pick(&self, full: usize, quick: usize) -> usize {
        match self.profile {
            Profile::Full => full,
            Profile::Quick => quick,
        }
    }

    fn sub_seed(&self, id: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!("criterion {:>2} {:<34} {}  {}", self.id, self.name, if self.passed { "PASS" } else { "FAIL" }, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub profile: Profile,
    pub results: Vec<CriterionResult>,
    pub all_passed: bool,
}

impl AcceptanceReport {
    pub fn lines(&self) -> Vec<String> {
        self.results.iter().map(|r| r.line()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "kernel identities"),
    (2, "classical reductions"),
    (3, "mass and semigroup"),
    (4, "transform"),
    (5, "cauchy-riemann convergence"),
    (6, "matrix lemma"),
    (7, "subharmonicity"),
    (8, "heat regime comparability"),
    (9, "geometry"),
    (10, "hardy characterization"),
    (11, "bessel bridge"),
    (12, "determinism"),
];

struct Rec {
    metrics: BTreeMap<String, f64>,
    ok: bool,
    notes: Vec<String>,
}

impl Rec {
    fn new() -> Rec {
        Rec { metrics: BTreeMap::new(), ok: true, notes: Vec::new() }
    }

    fn put(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Records `v` and requires `v <= limit`.
    fn at_most(&mut self, key: &str, v: f64, limit: f64) {
        self.put(key, v);
        if !(v <= limit) {
            self.ok = false;
            self.notes.push(format!("{key}={v:.3e} > {limit:.1e}"));
        }
    }

    fn require(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(what.into());
        }
    }

    fn finish(self, id: u8, summary: String) -> CriterionResult {
        let name = CRITERIA[(id - 1) as usize].1.to_string();
        let detail = if self.notes.is_empty() { summary } else { format!("{summary}; failed: {}", self.notes.join(", ")) };
        CriterionResult { id, name, passed: self.ok, detail, metrics: self.metrics }
    }
}

fn setup(k: &[f64]) -> Result<MultiplicitySetup> {
    MultiplicitySetup::new(k.to_vec())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Dawson's integral `e^{-x²} ∫_0^x e^{s²} ds`.
fn dawson(x: f64) -> f64 {
    let gl = gauss_legendre(20);
    let panels = (x.abs() * 4.0).ceil().max(1.0) as usize;
    let w = x / panels as f64;
    (0..panels).map(|p| gl.affine(p as f64 * w, (p + 1) as f64 * w).integrate(|s| (s * s - x * x).exp())).sum()
}

fn kernel_identities(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sub_seed(1));
    let mut e0: f64 = 0.0;
    for _ in 0..30 {
        let n = rng.random_range(1..=3);
        let k: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        e0 = e0.max((dunkl_kernel(&setup(&k)?, &x, &vec![0.0; n])? - 1.0).abs());
    }
    rec.at_most("max |E(x,0)-1|", e0, 1e-10);
    let mut worst: f64 = 0.0;
    for k in [0.3, 1.0, 2.5] {
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (-5.0 + 0.5 * i as f64, -5.0 + 0.5 * j as f64);
                worst = worst.max(rel(dunkl_kernel_1d(k, x, y)?, dunkl_kernel_1d_integral(k, x, y)?));
            }
        }
    }
    rec.at_most("max rel bessel vs integral", worst, 1e-8);
    Ok(rec.finish(1, format!("|E(x,0)-1| <= {e0:.1e}, representations agree to {worst:.1e}")))
}

fn classical_reductions(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let s0 = setup(&[0.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sub_seed(2));
    let (mut heat, mut pois): (f64, f64) = (0.0, 0.0);
    for _ in 0..cfg.pick(200, 40) {
        let t = 10f64.powf(rng.random_range(-1.0..1.0));
        let (x, y) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        heat = heat.max(rel(heat_kernel(&s0, t, &[x], &[y])?, gauss_weierstrass_1d(t, x, y)));
        pois = pois.max(rel(poisson_kernel(&s0, t, &[x], &[y])?, classical_poisson_1d(t, x, y)));
    }
    rec.at_most("heat rel err", heat, 1e-4);
    rec.at_most("poisson rel err", pois, 1e-4);
    let g = Arc::new(TensorGrid::uniform(&[0.0], 10.0, 0.05, false)?);
    let f = SampledField::from_fn(Arc::clone(&g), |x| (-x[0] * x[0]).exp());
    let r = riesz_transform(&s0, &f, 0)?;
    let (mut err, mut scale): (f64, f64) = (0.0, 0.0);
    for i in 0..g.len() {
        let x = g.point(i)[0];
        if x.abs() <= 6.0 {
            let exact = -2.0 / PI.sqrt() * dawson(x);
            err = err.max((r.field.values[i] - exact).abs());
            scale = scale.max(exact.abs());
        }
    }
    rec.at_most("riesz rel err (sup norm)", err / scale, 1e-4);
    Ok(rec.finish(2, format!("heat {heat:.1e}, poisson {pois:.1e}, riesz {:.1e}", err / scale)))
}

fn mass_and_semigroup(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sub_seed(3));
    let (mut hm, mut pm, mut ck): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in [0.5, 1.0] {
        let s = setup(&[k])?;
        for _ in 0..cfg.pick(8, 3) {
            let t = 10f64.powf(rng.random_range(-1.0..1.0));
            let x = rng.random_range(-3.0..3.0);
            let y = rng.random_range(-3.0..3.0);
            hm = hm.max((heat_mass(&s, t, &[x])? - 1.0).abs());
            pm = pm.max((poisson_mass(&s, t, &[x])? - 1.0).abs());
            let (lhs, rhs) = chapman_kolmogorov(&s, 0.5, 0.5, &[x], &[y])?;
            ck = ck.max(rel(lhs, rhs));
        }
    }
    rec.at_most("heat mass err", hm, 1e-6);
    rec.at_most("poisson mass err", pm, 1e-4);
    rec.at_most("chapman-kolmogorov rel err", ck, 1e-4);
    Ok(rec.finish(3, format!("heat mass {hm:.1e}, poisson mass {pm:.1e}, semigroup {ck:.1e}")))
}

fn transform_checks(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let (mut planch, mut inv, mut fixed): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (k, h) in [(vec![1.0], 0.05), (vec![0.5, 1.5], 0.1)] {
        let s = setup(&k)?;
        let g = Arc::new(TensorGrid::uniform(&k, 8.0, h, false)?);
        let plan = TransformPlan::for_grid(&s, Arc::clone(&g))?;
        let f = SampledField::from_fn(Arc::clone(&g), |x| {
            (1.0 + x[0] - 0.5 * x.iter().skip(1).sum::<f64>()) * (-x.iter().map(|v| v * v).sum::<f64>()).exp()
        });
        let spec = plan.forward(&f)?;
        planch = planch.max((spec.l2_norm() / f.l2_norm() - 1.0).abs());
        let back = plan.inverse(&spec)?;
        let e = back.values.iter().zip(&f.values).map(|(a, b)| (a - Complex64::new(*b, 0.0)).norm()).fold(0.0, f64::max);
        inv = inv.max(e / f.max_abs());
        let gauss = SampledField::from_fn(Arc::clone(&g), |x| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp());
        let gs = plan.forward(&gauss)?;
        let fg = plan.frequency();
        for a in 0..fg.len() {
            let xi = fg.point(a);
            fixed = fixed.max((gs.values[a] - Complex64::new((-0.5 * xi.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)).norm());
        }
    }
    rec.at_most("plancherel |ratio-1|", planch, 1e-4);
    rec.at_most("inversion rel err", inv, 1e-4);
    rec.at_most("gaussian fixed point err", fixed, 1e-6);
    Ok(rec.finish(4, format!("plancherel {planch:.1e}, inversion {inv:.1e}, fixed point {fixed:.1e}")))
}

fn spectral_plan(s: &MultiplicitySetup, space: Arc<TensorGrid>, xi_max: f64) -> Result<TransformPlan> {
    let axes: Vec<Axis> = s.k().iter().map(|k| frequency_axis(*k, xi_max, 0.5, 10)).collect::<Result<_>>()?;
    TransformPlan::new(s, space, Arc::new(TensorGrid::new(axes)?), Normalization::MacdonaldMehta)
}

/// Spectrum of an atom computed once on a fine source grid.
fn atom_spectrum(s: &MultiplicitySetup, extent: f64, h: f64, xi_max: f64, ball: Ball, profile: AtomProfile) -> Result<(TransformPlan, SpectralField)> {
    let space = Arc::new(TensorGrid::uniform(s.k(), extent, h, false)?);
    let plan = spectral_plan(s, Arc::clone(&space), xi_max)?;
    let atom = make_atom(s, space, ball, profile)?;
    let spec = plan.forward(&atom.field)?;
    Ok((plan, spec))
}

fn cr_convergence(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let ratio_ok = |r: f64| (3.5..=4.5).contains(&r);
    // n = 1: gradient and divergence families.
    let s = setup(&[1.0])?;
    let (src, spec) = atom_spectrum(&s, 4.0, 0.0125, 4.0, Ball::new(vec![0.25], 1.0), AtomProfile::Odd)?;
    let mut res: Vec<CrResiduals> = Vec::new();
    for h in [0.05, 0.025, 0.0125] {
        let plan = TransformPlan::new(&s, Arc::new(TensorGrid::uniform(&[1.0], 4.0, h, false)?), Arc::clone(src.frequency()), Normalization::MacdonaldMehta)?;
        let c = from_spectrum(&plan, &spec, &uniform_t_grid(0.5, h, (1.0 / h).round() as usize + 1), "atom")?;
        res.push(cr_residuals(&s, &c)?);
    }
    let mut summary = Vec::new();
    for (name, pick) in [("gradient", 0usize), ("divergence", 2)] {
        let get = |r: &CrResiduals| if pick == 0 { r.gradient } else { r.divergence };
        for (i, w) in res.windows(2).enumerate() {
            let ratio = get(&w[0]) / get(&w[1]);
            rec.put(format!("n1 {name} ratio {}", i + 1), ratio);
            rec.require(ratio_ok(ratio), format!("n1 {name} ratio {ratio:.2}"));
            summary.push(format!("{ratio:.2}"));
        }
        rec.put(format!("n1 {name} finest"), get(&res[2]));
    }
    // The symmetry family needs two axes.
    let s2 = setup(&[1.0, 1.0])?;
    let (src2, spec2) = atom_spectrum(&s2, 3.0, 0.0125, 3.0, Ball::new(vec![0.25, -0.2], 1.0), AtomProfile::Odd)?;
    let mut sym = Vec::new();
    for h in [0.05, 0.025, 0.0125] {
        let plan =
            TransformPlan::new(&s2, Arc::new(TensorGrid::uniform(&[1.0, 1.0], 1.5, h, false)?), Arc::clone(src2.frequency()), Normalization::MacdonaldMehta)?;
        let c = from_spectrum(&plan, &spec2, &uniform_t_grid(0.5, h, 3), "atom")?;
        sym.push(cr_residuals(&s2, &c)?.symmetry);
    }
    for (i, w) in sym.windows(2).enumerate() {
        let ratio = w[0] / w[1];
        rec.put(format!("n2 symmetry ratio {}", i + 1), ratio);
        rec.require(ratio_ok(ratio), format!("n2 symmetry ratio {ratio:.2}"));
        summary.push(format!("{ratio:.2}"));
    }
    Ok(rec.finish(5, format!("refinement ratios (gradient, divergence, symmetry) {}", summary.join(" "))))
}

fn matrix_lemma(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let samples = cfg.pick(1_000_000, 20_000);
    let mut table = Vec::new();
    for n in 1..=3usize {
        for eps in [0.05, 0.1, 0.2] {
            let budget = SearchBudget { samples, seed: cfg.sub_seed(60 + n as u64), ..SearchBudget::default() };
            let rep = delta_search(n, eps, budget)?;
            let ver = verify_delta(n, eps, rep.delta, samples, cfg.sub_seed(70 + n as u64))?;
            let tag = format!("n={n} eps={eps}");
            rec.put(format!("{tag} delta"), rep.delta);
            rec.put(format!("{tag} verify worst margin"), ver.worst_margin);
            rec.require(rep.delta > 0.0, format!("{tag} delta = 0"));
            rec.require(ver.counterexamples == 0 && ver.worst_margin >= -1e-12, format!("{tag} {} counterexamples", ver.counterexamples));
            let size = n + 1;
            let anti = lemma_margin(&antisymmetric_extremal(size), eps, 2.0 * eps)?;
            rec.require(anti >= -1e-12, format!("{tag} antisymmetric margin {anti:.2e}"));
            let past = find_counterexample(n, eps, rep.delta + 0.05, SearchBudget { samples: samples / 10, ..budget })?;
            rec.require(past.is_some(), format!("{tag} no counterexample at delta+0.05"));
            table.push(format!("{tag}:{:.4}", rep.delta));
        }
    }
    let tight = lemma_margin(&symmetric_trace_zero_extremal(2), 0.1, 0.5)?;
    rec.put("diag(1,-1) margin at 1/2", tight);
    rec.require(tight.abs() <= 1e-12, format!("diag(1,-1) margin {tight:.2e}"));
    Ok(rec.finish(6, format!("delta {}", table.join(" "))))
}

fn subharmonicity(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let budget = SearchBudget { samples: cfg.pick(100_000, 10_000), seed: cfg.sub_seed(7), ..SearchBudget::default() };
    let cases: Vec<Vec<f64>> = vec![vec![0.5], vec![1.0], vec![0.5, 0.5], vec![0.5, 1.0], vec![1.0, 1.0]];
    let mut summary = Vec::new();
    for (ci, k) in cases.iter().enumerate() {
        let s = setup(k)?;
        let n = k.len();
        let (extent, h, xi, nt) = if n == 1 { (6.0, 0.05, 8.0, 41) } else { (4.0, 0.1, 5.0, 21) };
        let center: Vec<f64> = [0.3, -0.2][..n].to_vec();
        let profile = if ci % 2 == 0 { AtomProfile::Odd } else { AtomProfile::RadialCancel };
        let space = Arc::new(TensorGrid::uniform(k, extent, h, false)?);
        let plan = spectral_plan(&s, Arc::clone(&space), xi)?;
        let atom = make_atom(&s, space, Ball::new(center, 1.0), profile)?;
        let c = from_spectrum(&plan, &plan.forward(&atom.field)?, &uniform_t_grid(0.2, h, nt), "atom")?;
        let orbit = build_orbit_field(&s, &c)?;
        let qb = proof_q_bound(&s, budget)?;
        let at_bound = subharmonicity_scan(&s, &orbit, qb.q, None)?;
        let small = subharmonicity_scan(&s, &orbit, 0.05, None)?;
        let tag = format!("k={k:?}");
        rec.put(format!("{tag} q bound"), qb.q);
        rec.put(format!("{tag} violations at bound"), at_bound.violation_count as f64);
        rec.put(format!("{tag} violations at 0.05"), small.violation_count as f64);
        rec.put(format!("{tag} nodes"), at_bound.evaluated as f64);
        rec.require(qb.in_unit_interval, format!("{tag} q bound {:.3} outside (0,1)", qb.q));
        rec.require(at_bound.violation_count == 0, format!("{tag} {} violations at q={:.3}", at_bound.violation_count, qb.q));
        rec.require(small.violation_count > 0, format!("{tag} no violations at q=0.05"));
        summary.push(format!("{tag} q={:.3} ({}/{})", qb.q, at_bound.violation_count, small.violation_count));
    }
    Ok(rec.finish(7, format!("violations at bound/at 0.05: {}", summary.join(", "))))
}

fn heat_regimes(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let samples = stratified_heat_samples(cfg.pick(10_000, 1_000), cfg.sub_seed(8));
    let mut summary = Vec::new();
    for k in [0.5, 1.0, 2.0] {
        for r in check_heat_regimes(k, &samples)? {
            rec.put(format!("k={k} {} min", r.regime), r.min_ratio);
            rec.put(format!("k={k} {} max", r.regime), r.max_ratio);
            rec.require(r.min_ratio > 0.0 && r.spread().is_finite(), format!("k={k} {} degenerate", r.regime));
            summary.push(format!("{:.2e}", r.spread()));
        }
    }
    Ok(rec.finish(8, format!("max/min per (k, regime) {}", summary.join(" "))))
}

fn geometry(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sub_seed(9));
    let samples = cfg.pick(10_000, 500);
    for k in [vec![1.0], vec![0.5, 1.0]] {
        let s = setup(&k)?;
        let (mut c1, mut c2) = (f64::INFINITY, 0.0_f64);
        for _ in 0..samples {
            let x: Vec<f64> = k.iter().map(|_| 10f64.powf(rng.random_range(-2.0..1.0)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let r = 10f64.powf(rng.random_range(-2.0..1.0));
            let big = r * 10f64.powf(rng.random_range(0.0..2.0));
            let d = doubling_report(&s, &x, r, big)?;
            c1 = c1.min(d.lower_exp_ratio);
            c2 = c2.max(d.upper_exp_ratio);
        }
        rec.put(format!("k={k:?} c1"), c1);
        rec.put(format!("k={k:?} c2"), c2);
        rec.require(c1 > 0.0 && c2.is_finite(), format!("k={k:?} doubling constants c1={c1:.2e} c2={c2:.2e}"));
    }
    let mut cf: f64 = 0.0;
    let s0 = setup(&[0.0])?;
    let s00 = setup(&[0.0, 0.0])?;
    for _ in 0..20 {
        let (x, y): (f64, f64) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        cf = cf.max((quasi_distance(&s0, &[x], &[y])? - (x - y).abs()).abs());
        let (p, q) = ([x, y], [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]);
        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        cf = cf.max((quasi_distance(&s00, &p, &q)? - PI * d2 / 4.0).abs() / (1.0 + PI * d2 / 4.0));
    }
    let s1 = setup(&[1.0])?;
    cf = cf.max((quasi_distance(&s1, &[-1.0], &[1.0])? - 2.0 / 3.0).abs());
    rec.at_most("closed form d~ err", cf, 1e-8);
    for (k, count) in [(vec![1.0], samples), (vec![0.5, 1.0], cfg.pick(1000, 100))] {
        let s = setup(&k)?;
        let mut a: f64 = 0.0;
        for _ in 0..count {
            let mut pt = || -> Vec<f64> { k.iter().map(|_| rng.random_range(-4.0..4.0)).collect() };
            let (x, y, z) = (pt(), pt(), pt());
            let lhs = quasi_distance(&s, &x, &z)?;
            let rhs = quasi_distance(&s, &x, &y)? + quasi_distance(&s, &y, &z)?;
            if rhs > 0.0 {
                a = a.max(lhs / rhs);
            }
        }
        rec.put(format!("k={k:?} quasi-triangle A"), a);
        rec.require(a.is_finite() && a > 0.0, format!("k={k:?} quasi-triangle constant {a}"));
    }
    Ok(rec.finish(9, format!("closed-form d~ within {cf:.1e}; doubling and quasi-triangle constants finite")))
}

fn hardy(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let s = setup(&[1.0])?;
    let hc = HardyConfig::default();
    let plan = hc.plan(&s)?;
    let atoms = random_atoms(&s, plan.space(), cfg.pick(50, 6), 3.0, (0.3, 2.0), cfg.sub_seed(10))?;
    let ratios: Vec<f64> = atoms
        .iter()
        .map(|a| h1_characterization_ratio(&s, &hc, &plan, &a.field).map(|r| r.characterization_ratio))
        .collect::<Result<_>>()?;
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    rec.put("min ratio", lo);
    rec.put("max ratio", hi);
    rec.require(ratios.iter().all(|r| r.is_finite() && *r > 0.0), "non-finite or non-positive ratio");
    rec.at_most("spread", hi / lo, 100.0);
    let control = SampledField::from_fn(Arc::clone(plan.space()), |x| if x[0].abs() < 1.0 { 1.0 } else { 0.0 });
    let cr = h1_characterization_ratio(&s, &hc, &plan, &control)?;
    rec.put("control ratio", cr.characterization_ratio);
    rec.put("control domain delta", cr.domain_delta);
    rec.require(cr.flagged, "mean-nonzero control not flagged");
    Ok(rec.finish(10, format!("{} atoms, ratio in [{lo:.3}, {hi:.3}], spread {:.2}; control flagged", ratios.len(), hi / lo)))
}

fn bessel_bridge(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let rep = fold_identities(&setup(&[1.0])?, &FoldConfig::default(), 1.0, 0.5, 100, cfg.sub_seed(11))?;
    rec.at_most("semigroup fold dev", rep.semigroup_max_dev, 1e-8);
    rec.at_most("riesz magnitude rel dev", rep.riesz_max_rel_dev[0], 1e-6);
    rec.put("h1 constant", rep.h1_constant);
    Ok(rec.finish(
        11,
        format!("semigroup {:.1e}, riesz {:.1e}, H1 constant {:.6} (2^-n = {})", rep.semigroup_max_dev, rep.riesz_max_rel_dev[0], rep.h1_constant, rep.expected_h1_constant),
    ))
}

/// Runs criteria 1 to 11 twice in the quick profile and compares the
/// serialized records byte for byte.
fn determinism(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rec = Rec::new();
    let quick = AcceptanceConfig::new(cfg.seed, Profile::Quick);
    let once = || -> Result<String> {
        let parts: Vec<CriterionResult> = (1..=11).map(|id| run_criterion_safe(id, &quick)).collect();
        Ok(serde_json::to_string(&parts).expect("serializes"))
    };
    let (a, b) = (once()?, once()?);
    rec.put("bytes", a.len() as f64);
    rec.require(a == b, "reports differ between runs");
    Ok(rec.finish(12, format!("two seeded runs identical ({} bytes)", a.len())))
}

pub fn run_criterion(id: u8, cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    match id {
        1 => kernel_identities(cfg),
        2 => classical_reductions(cfg),
        3 => mass_and_semigroup(cfg),
        4 => transform_checks(cfg),
        5 => cr_convergence(cfg),
        6 => matrix_lemma(cfg),
        7 => subharmonicity(cfg),
        8 => heat_regimes(cfg),
        9 => geometry(cfg),
        10 => hardy(cfg),
        11 => bessel_bridge(cfg),
        12 => determinism(cfg),
        _ => Err(crate::error::invalid(format!("no criterion {id}"))),
    }
}

/// Runs one criterion, turning an error into a failed record.
pub fn run_criterion_safe(id: u8, cfg: &AcceptanceConfig) -> CriterionResult {
    run_criterion(id, cfg).unwrap_or_else(|e| CriterionResult {
        id,
        name: CRITERIA.get((id as usize).wrapping_sub(1)).map_or("unknown", |c| c.1).to_string(),
        passed: false,
        detail: format!("error: {e}"),
        metrics: BTreeMap::new(),
    })
}

pub fn run_all(cfg: &AcceptanceConfig) -> AcceptanceReport {
    let results: Vec<CriterionResult> = CRITERIA.iter().map(|(id, _)| run_criterion_safe(*id, cfg)).collect();
    let all_passed = results.iter().all(|r| r.passed);
    AcceptanceReport { seed: cfg.seed, profile: cfg.profile, results, all_passed }
}

