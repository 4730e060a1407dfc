use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;

use dunkl_core::acceptance::{run_all, AcceptanceConfig, Profile};
use dunkl_core::conjugate::{
    build_orbit_field, cr_residuals, from_spectrum, proof_q_bound, subharmonicity_scan, uniform_t_grid, CrResiduals,
};
use dunkl_core::dunkl::{dunkl_kernel, dunkl_kernel_1d_integral, dunkl_kernel_integral, Axis, FieldContainer, MultiplicitySetup, SampledField, TensorGrid};
use dunkl_core::hardy::{fold_identities, h1_characterization_ratio, make_atom, random_atoms, AtomProfile, Ball, FoldConfig, HardyConfig};
use dunkl_core::kernels::{gauss_weierstrass_1d, heat_kernel, poisson_kernel, poisson_kernel_with, SubordinationRule};
use dunkl_core::matlemma::{delta_search, verify_delta, SearchBudget};
use dunkl_core::specfun::log_gamma;
use dunkl_core::transform::{frequency_axis, riesz_transform, Normalization, TransformPlan};

use crate::config::{Cli, Command, GridSpec, KernelType, Resolved};

pub enum Failure {
    Config(String),
    Runtime(String),
}

fn cfg_err(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn rt(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Caps the worker pool at `DUNKL_THREADS` when set.
pub fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DUNKL_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("DUNKL_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("DUNKL_THREADS must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    fingerprint: String,
    config: &'a Resolved,
    passed: bool,
    failures: Vec<String>,
    report: Value,
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| rt(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cfg: &Resolved, failures: Vec<String>, report: impl Serialize) -> Result<bool, Failure> {
    let passed = failures.is_empty();
    let env = Envelope {
        command: cfg.command,
        fingerprint: cfg.fingerprint(),
        config: cfg,
        passed,
        failures,
        report: serde_json::to_value(report).map_err(rt)?,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(rt)?;
    text.push('\n');
    write_out(cfg.out.as_deref(), &text)?;
    Ok(passed)
}

fn emit_csv(cfg: &Resolved, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(rt)?;
    for r in rows {
        w.write_record(r).map_err(rt)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(rt)?).map_err(rt)?;
    let text = format!("# {} sha256={}\n{body}", crate::config::SCHEMA, cfg.fingerprint());
    write_out(cfg.out.as_deref(), &text)
}

fn fmt(v: f64) -> String {
    format!("{v:.10e}")
}

fn setup_of(cfg: &Resolved) -> Result<MultiplicitySetup, Failure> {
    MultiplicitySetup::new(cfg.k.clone()).map_err(cfg_err)
}

fn space_grid(cfg: &Resolved, default: GridSpec) -> Result<(GridSpec, Arc<TensorGrid>), Failure> {
    let g = cfg.grid.unwrap_or(default);
    Ok((g, Arc::new(TensorGrid::uniform(&cfg.k, g.extent, g.spacing, g.staggered).map_err(cfg_err)?)))
}

fn spectral_plan(s: &MultiplicitySetup, space: Arc<TensorGrid>, xi_max: f64) -> Result<TransformPlan, Failure> {
    let axes: Vec<Axis> = s.k().iter().map(|k| frequency_axis(*k, xi_max, 0.5, 10)).collect::<Result<_, _>>().map_err(cfg_err)?;
    TransformPlan::new(s, space, Arc::new(TensorGrid::new(axes).map_err(cfg_err)?), Normalization::MacdonaldMehta).map_err(cfg_err)
}

fn read_field(path: Option<&Path>) -> Result<Option<SampledField>, Failure> {
    let Some(p) = path else { return Ok(None) };
    let text = std::fs::read_to_string(p).map_err(|e| cfg_err(format!("{}: {e}", p.display())))?;
    let c = FieldContainer::from_json(&text).map_err(cfg_err)?;
    Ok(Some(SampledField::from_container(c).map_err(cfg_err)?))
}

pub fn run(cli: Cli) -> Result<bool, Failure> {
    let mut cfg = Resolved::from_cli(&cli).map_err(Failure::Config)?;
    match cli.command {
        Command::Kernel(a) => {
            let kind = cfg.param("type", a.kind, KernelType::Heat).map_err(cfg_err)?;
            let n = cfg.k.len();
            let ts = cfg.param("t", a.t, vec![1.0]).map_err(cfg_err)?;
            let x = cfg.param("x", a.x, vec![0.0; n]).map_err(cfg_err)?;
            let y = cfg.param("y", a.y, vec![0.0; n]).map_err(cfg_err)?;
            kernel(&cfg, kind, &ts, &x, &y)
        }
        Command::Transform(a) => {
            let field = cfg.param_opt("field", a.field).map_err(cfg_err)?;
            transform(&cfg, field.as_deref())
        }
        Command::Riesz(a) => {
            let field = cfg.param_opt("field", a.field).map_err(cfg_err)?;
            let j = cfg.param("j", a.j, 0).map_err(cfg_err)?;
            riesz(&cfg, field.as_deref(), j)
        }
        Command::VerifyCr(a) => {
            let levels = cfg.param("levels", a.levels, 3).map_err(cfg_err)?;
            let radius = cfg.param("radius", a.radius, 1.0).map_err(cfg_err)?;
            let xi_max = cfg.param("xi_max", None, 4.0).map_err(cfg_err)?;
            verify_cr(&cfg, levels, radius, xi_max)
        }
        Command::VerifyLemma(a) => {
            let eps = cfg.param("eps", a.eps, 0.1).map_err(cfg_err)?;
            let samples = cfg.param("samples", a.samples, 100_000).map_err(cfg_err)?;
            verify_lemma(&cfg, eps, samples)
        }
        Command::SubharmonicScan(a) => {
            let q = cfg.param_opt("q", a.q).map_err(cfg_err)?;
            let tau = cfg.param_opt("tau", a.tau).map_err(cfg_err)?;
            let radius = cfg.param("radius", a.radius, 1.0).map_err(cfg_err)?;
            scan(&mut cfg, q, tau, radius)
        }
        Command::HardyRatio(a) => {
            let atoms = cfg.param("atoms", a.atoms, 50).map_err(cfg_err)?;
            hardy_ratio(&cfg, atoms)
        }
        Command::BesselFold(a) => {
            let ga = cfg.param("a", a.a, 1.0).map_err(cfg_err)?;
            let t = cfg.param("t", a.t, 0.5).map_err(cfg_err)?;
            let nodes = cfg.param("nodes", a.nodes, 100).map_err(cfg_err)?;
            bessel_fold(&cfg, ga, t, nodes)
        }
        Command::VerifyAll(a) => {
            let quick = cfg.param("quick", Some(a.quick).filter(|q| *q), false).map_err(cfg_err)?;
            let report = run_all(&AcceptanceConfig::new(cfg.seed, if quick { Profile::Quick } else { Profile::Full }));
            for line in report.lines() {
                eprintln!("{line}");
            }
            let failures = report.results.iter().filter(|r| !r.passed).map(|r| format!("criterion {}: {}", r.id, r.detail)).collect();
            emit_json(&cfg, failures, &report)
        }
    }
}

/// Heat kernel from its closed form with the integral representation of `E_k`.
fn heat_from_integral(k: &[f64], t: f64, x: &[f64], y: &[f64]) -> Result<f64, Failure> {
    let mut p = 1.0;
    for ((&kj, &xj), &yj) in k.iter().zip(x).zip(y) {
        let ln_pref = -(2.0 * kj + 1.0) * std::f64::consts::LN_2 - log_gamma(kj + 0.5).map_err(rt)? - (kj + 0.5) * t.ln();
        let s = (2.0 * t).sqrt();
        p *= (ln_pref - (xj * xj + yj * yj) / (4.0 * t)).exp() * dunkl_kernel_1d_integral(kj, xj / s, yj / s).map_err(rt)?;
    }
    Ok(p)
}

/// Classical Poisson kernel of the upper half-space in `R^{n+1}_+`.
fn classical_poisson(t: f64, x: &[f64], y: &[f64]) -> Result<f64, Failure> {
    let n = x.len() as f64;
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    let c = (log_gamma((n + 1.0) / 2.0).map_err(rt)? - (n + 1.0) / 2.0 * PI.ln()).exp();
    Ok(c * t / (t * t + d2).powf((n + 1.0) / 2.0))
}

/// Each row pairs the kernel with an independent evaluation: the classical
/// closed form when all multiplicities vanish, otherwise the integral
/// representation of `E_k` (heat, Dunkl) or a refined subordination rule
/// (Poisson).
fn kernel(cfg: &Resolved, kind: KernelType, ts: &[f64], x: &[f64], y: &[f64]) -> Result<bool, Failure> {
    let s = setup_of(cfg)?;
    let n = s.dim();
    if x.len() != n || y.len() != n {
        return Err(cfg_err(format!("points must have {n} coordinates")));
    }
    let classical = cfg.k.iter().all(|k| *k == 0.0);
    let ts: Vec<f64> = if kind == KernelType::Dunkl { vec![f64::NAN] } else { ts.to_vec() };
    let mut rows = Vec::new();
    let mut ok = true;
    for &t in &ts {
        let (val, cmp) = match kind {
            KernelType::Heat => {
                let v = heat_kernel(&s, t, x, y).map_err(cfg_err)?;
                let c = if classical { x.iter().zip(y).map(|(a, b)| gauss_weierstrass_1d(t, *a, *b)).product() } else { heat_from_integral(&cfg.k, t, x, y)? };
                (v, c)
            }
            KernelType::Poisson => {
                let v = poisson_kernel(&s, t, x, y).map_err(cfg_err)?;
                let c = if classical { classical_poisson(t, x, y)? } else { poisson_kernel_with(&s, &SubordinationRule::default().refined(), t, x, y).map_err(rt)? };
                (v, c)
            }
            KernelType::Dunkl => (dunkl_kernel(&s, x, y).map_err(cfg_err)?, dunkl_kernel_integral(&s, x, y).map_err(rt)?),
        };
        let ratio = val / cmp;
        ok &= (ratio - 1.0).abs() <= 1e-4;
        let mut row = vec![if t.is_nan() { String::new() } else { fmt(t) }];
        row.extend(x.iter().chain(y).map(|v| fmt(*v)));
        row.extend([fmt(val), fmt(cmp), fmt(ratio)]);
        rows.push(row);
    }
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|j| format!("x{j}")));
    header.extend((0..n).map(|j| format!("y{j}")));
    header.extend(["kernel", "comparand", "ratio"].map(String::from));
    emit_csv(cfg, &header, &rows)?;
    Ok(ok)
}

#[derive(Serialize)]
struct TransformReport {
    plancherel_ratio: f64,
    inversion_error: f64,
    envelope_fraction: f64,
    nodes: usize,
}

fn transform(cfg: &Resolved, field: Option<&Path>) -> Result<bool, Failure> {
    let f = match read_field(field)? {
        Some(f) => f,
        None => {
            let (_, g) = space_grid(cfg, GridSpec { extent: 8.0, spacing: 0.05, staggered: false })?;
            SampledField::from_fn(g, |x| (1.0 + x[0] - 0.5 * x.iter().skip(1).sum::<f64>()) * (-x.iter().map(|v| v * v).sum::<f64>()).exp())
        }
    };
    let s = MultiplicitySetup::new(f.grid.k()).map_err(cfg_err)?;
    let plan = TransformPlan::for_grid(&s, Arc::clone(&f.grid)).map_err(cfg_err)?;
    let spec = plan.forward(&f).map_err(rt)?;
    let back = plan.inverse(&spec).map_err(rt)?;
    let err = back.values.iter().zip(&f.values).map(|(a, b)| ((a.re - b).powi(2) + a.im * a.im).sqrt()).fold(0.0, f64::max);
    let rep = TransformReport {
        plancherel_ratio: spec.l2_norm() / f.l2_norm(),
        inversion_error: err / f.max_abs(),
        envelope_fraction: plan.envelope_fraction(&f),
        nodes: f.len(),
    };
    let mut failures = Vec::new();
    if !((rep.plancherel_ratio - 1.0).abs() <= 1e-4) {
        failures.push(format!("plancherel ratio {}", rep.plancherel_ratio));
    }
    if !(rep.inversion_error <= 1e-4) {
        failures.push(format!("inversion error {}", rep.inversion_error));
    }
    emit_json(cfg, failures, rep)
}

fn riesz(cfg: &Resolved, field: Option<&Path>, j: usize) -> Result<bool, Failure> {
    let f = read_field(field)?.ok_or_else(|| cfg_err("riesz needs --field"))?;
    let s = MultiplicitySetup::new(f.grid.k()).map_err(cfg_err)?;
    if j >= s.dim() {
        return Err(cfg_err(format!("axis {j} out of range for dimension {}", s.dim())));
    }
    let r = riesz_transform(&s, &f, j).map_err(rt)?;
    let mut text = r.field.to_container().to_json();
    text.push('\n');
    write_out(cfg.out.as_deref(), &text)?;
    let ok = r.imag_residual < 1e-8;
    eprintln!("riesz j={j}: imaginary residual {:.3e}, fingerprint {}", r.imag_residual, cfg.fingerprint());
    Ok(ok)
}

#[derive(Serialize)]
struct CrLevel {
    spacing: f64,
    residuals: CrResiduals,
}

#[derive(Serialize)]
struct CrReport {
    levels: Vec<CrLevel>,
    /// Coarse-to-fine residual ratios per family; second order gives about 4.
    gradient_ratios: Vec<f64>,
    symmetry_ratios: Vec<f64>,
    divergence_ratios: Vec<f64>,
}

fn verify_cr(cfg: &Resolved, levels: usize, radius: f64, xi_max: f64) -> Result<bool, Failure> {
    if levels < 2 {
        return Err(cfg_err("verify-cr needs at least 2 levels"));
    }
    let s = setup_of(cfg)?;
    let n = s.dim();
    let g = cfg.grid.unwrap_or(GridSpec { extent: 4.0, spacing: 0.05, staggered: false });
    let tg = cfg.t_grid.map(|t| (t.t_min, t.dt * (t.count.max(2) - 1) as f64)).unwrap_or((0.5, 1.0));
    let fine = g.spacing / 2f64.powi(levels as i32 - 1);
    let src_grid = Arc::new(TensorGrid::uniform(&cfg.k, g.extent, fine, g.staggered).map_err(cfg_err)?);
    let src = spectral_plan(&s, Arc::clone(&src_grid), xi_max)?;
    let center: Vec<f64> = (0..n).map(|j| [0.25, -0.2][j % 2]).collect();
    let atom = make_atom(&s, src_grid, Ball::new(center, radius), AtomProfile::Odd).map_err(cfg_err)?;
    let spec = src.forward(&atom.field).map_err(rt)?;
    let mut out = Vec::new();
    for l in 0..levels {
        let h = g.spacing / 2f64.powi(l as i32);
        let space = Arc::new(TensorGrid::uniform(&cfg.k, g.extent, h, g.staggered).map_err(cfg_err)?);
        let plan = TransformPlan::new(&s, space, Arc::clone(src.frequency()), Normalization::MacdonaldMehta).map_err(rt)?;
        let count = ((tg.1 / h).round() as usize + 1).max(3);
        let c = from_spectrum(&plan, &spec, &uniform_t_grid(tg.0, h, count), "atom").map_err(rt)?;
        out.push(CrLevel { spacing: h, residuals: cr_residuals(&s, &c).map_err(rt)? });
    }
    let ratios = |pick: fn(&CrResiduals) -> f64| -> Vec<f64> { out.windows(2).map(|w| pick(&w[0].residuals) / pick(&w[1].residuals)).collect() };
    let rep = CrReport {
        gradient_ratios: ratios(|r| r.gradient),
        symmetry_ratios: if n > 1 { ratios(|r| r.symmetry) } else { Vec::new() },
        divergence_ratios: ratios(|r| r.divergence),
        levels: out,
    };
    let mut failures = Vec::new();
    for (name, v) in [("gradient", &rep.gradient_ratios), ("symmetry", &rep.symmetry_ratios), ("divergence", &rep.divergence_ratios)] {
        for r in v.iter().filter(|r| !(3.5..=4.5).contains(*r)) {
            failures.push(format!("{name} refinement ratio {r:.3}"));
        }
    }
    emit_json(cfg, failures, rep)
}

#[derive(Serialize)]
struct LemmaReport {
    n: usize,
    eps: f64,
    delta: f64,
    worst_margin: f64,
    worst_matrix: Vec<Vec<f64>>,
    verify_samples: usize,
    verify_counterexamples: usize,
    verify_worst_margin: f64,
}

fn verify_lemma(cfg: &Resolved, eps: f64, samples: usize) -> Result<bool, Failure> {
    if !(eps > 0.0) || samples == 0 {
        return Err(cfg_err("verify-lemma needs eps > 0 and samples > 0"));
    }
    let n = cfg.k.len();
    let rep = delta_search(n, eps, SearchBudget { samples, seed: cfg.seed, ..SearchBudget::default() }).map_err(cfg_err)?;
    let ver = verify_delta(n, eps, rep.delta, samples, cfg.seed.wrapping_add(1)).map_err(rt)?;
    let out = LemmaReport {
        n,
        eps,
        delta: rep.delta,
        worst_margin: rep.worst_margin,
        worst_matrix: rep.worst_matrix,
        verify_samples: ver.samples,
        verify_counterexamples: ver.counterexamples,
        verify_worst_margin: ver.worst_margin,
    };
    let failures = if ver.counterexamples > 0 { vec![format!("{} counterexamples at delta {}", ver.counterexamples, rep.delta)] } else { Vec::new() };
    emit_json(cfg, failures, out)
}

fn scan(cfg: &mut Resolved, q: Option<f64>, tau: Option<f64>, radius: f64) -> Result<bool, Failure> {
    let s = setup_of(cfg)?;
    let n = s.dim();
    let (grid, xi, count) = if n == 1 { (GridSpec { extent: 6.0, spacing: 0.05, staggered: false }, 8.0, 41) } else { (GridSpec { extent: 4.0, spacing: 0.1, staggered: false }, 5.0, 21) };
    let (g, space) = space_grid(cfg, grid)?;
    let xi = cfg.param("xi_max", None, xi).map_err(cfg_err)?;
    let (t_min, dt, count) = cfg.t_grid.map(|t| (t.t_min, t.dt, t.count)).unwrap_or((0.2, g.spacing, count));
    let q = match q {
        Some(q) => q,
        None => {
            let b = proof_q_bound(&s, SearchBudget { seed: cfg.seed, ..SearchBudget::default() }).map_err(rt)?;
            eprintln!("proof-derived q bound {:.4} (delta {:?})", b.q, b.delta);
            b.q
        }
    };
    if !(q > 0.0 && q <= 1.0) {
        return Err(cfg_err(format!("q = {q} is outside (0, 1]; pass --q")));
    }
    let plan = spectral_plan(&s, Arc::clone(&space), xi)?;
    let center: Vec<f64> = (0..n).map(|j| [0.3, -0.2][j % 2]).collect();
    let atom = make_atom(&s, space, Ball::new(center, radius), AtomProfile::Odd).map_err(cfg_err)?;
    let c = from_spectrum(&plan, &plan.forward(&atom.field).map_err(rt)?, &uniform_t_grid(t_min, dt, count), "atom").map_err(rt)?;
    let orbit = build_orbit_field(&s, &c).map_err(rt)?;
    let rep = subharmonicity_scan(&s, &orbit, q, tau).map_err(rt)?;
    let failures = if rep.violation_count > 0 { vec![format!("{} violations at q = {q}", rep.violation_count)] } else { Vec::new() };
    emit_json(cfg, failures, rep)
}

fn hardy_ratio(cfg: &Resolved, count: usize) -> Result<bool, Failure> {
    let s = setup_of(cfg)?;
    let mut hc = HardyConfig::default();
    if let Some(g) = cfg.grid {
        hc.extent = g.extent;
        hc.h = g.spacing;
    }
    let plan = hc.plan(&s).map_err(cfg_err)?;
    let c_max = (0.15 * hc.extent).min(3.0);
    let atoms = random_atoms(&s, plan.space(), count, c_max, (0.3, 2.0), cfg.seed).map_err(cfg_err)?;
    let mut rows = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for (i, a) in atoms.iter().enumerate() {
        let r = h1_characterization_ratio(&s, &hc, &plan, &a.field).map_err(rt)?;
        lo = lo.min(r.characterization_ratio);
        hi = hi.max(r.characterization_ratio);
        let center = a.ball.center.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(";");
        rows.push(vec![
            i.to_string(),
            center,
            fmt(a.ball.radius),
            fmt(r.l1_norm),
            fmt(r.riesz_l1_sum()),
            fmt(r.maximal_heat_l1),
            fmt(r.characterization_ratio),
        ]);
    }
    let header = ["atom_id", "center", "radius", "l1", "riesz_l1_sum", "maximal_l1", "ratio"].map(String::from);
    emit_csv(cfg, &header, &rows)?;
    let spread = hi / lo;
    eprintln!("{count} atoms: ratio in [{lo:.4}, {hi:.4}], spread {spread:.3}");
    Ok(spread.is_finite() && spread < 100.0)
}

fn bessel_fold(cfg: &Resolved, a: f64, t: f64, nodes: usize) -> Result<bool, Failure> {
    let s = setup_of(cfg)?;
    let rep = fold_identities(&s, &FoldConfig::default(), a, t, nodes, cfg.seed).map_err(cfg_err)?;
    let mut failures = Vec::new();
    if !(rep.semigroup_max_dev <= 1e-8) {
        failures.push(format!("semigroup deviation {:.3e}", rep.semigroup_max_dev));
    }
    for (j, d) in rep.riesz_max_rel_dev.iter().enumerate() {
        if !(*d <= 1e-6) {
            failures.push(format!("riesz {j} deviation {d:.3e}"));
        }
    }
    emit_json(cfg, failures, rep)
}
