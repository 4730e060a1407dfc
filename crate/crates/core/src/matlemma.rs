//! The operator-norm inequality
//! `‖B‖² ≤ (1-δ)‖B‖²_HS + ε((tr B)² + Σ_{i<j}(b_ij - b_ji)²)` for real square
//! matrices, and an empirical search for the largest admissible `δ(ε)`.
//!
//! The margin is homogeneous of degree two, so the search works on
//! `ρ(B) = (‖B‖² - ε Q(B)) / ‖B‖²_HS` and every admissible `δ` satisfies
//! `δ ≤ 1 - sup ρ`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::map_indexed;

/// Resolution of the δ grid searched by [`delta_search`].
pub const DELTA_GRID: f64 = 1e-4;

const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    pub op_norm: f64,
    pub hs_norm: f64,
    pub trace: f64,
    /// `Σ_{i<j} (b_ij - b_ji)²`.
    pub antisym_defect: f64,
}

/// A matrix together with its four functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSample {
    pub entries: Vec<Vec<f64>>,
    pub functionals: Functionals,
}

impl MatrixSample {
    pub fn new(b: &DMatrix<f64>) -> Result<MatrixSample> {
        Ok(MatrixSample { entries: rows(b), functionals: matrix_functionals(b)? })
    }
}

pub fn rows(b: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..b.nrows()).map(|i| b.row(i).iter().copied().collect()).collect()
}

pub fn from_rows(r: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = r.len();
    if r.iter().any(|row| row.len() != n) {
        return Err(invalid("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| r[i][j]))
}

fn check_square(b: &DMatrix<f64>) -> Result<()> {
    if b.nrows() != b.ncols() || b.nrows() < 2 {
        return Err(invalid(format!("expected a square matrix of size >= 2, got {}x{}", b.nrows(), b.ncols())));
    }
    Ok(())
}

fn op_norm(b: &DMatrix<f64>) -> f64 {
    b.clone().singular_values().iter().fold(0.0_f64, |a, v| a.max(*v))
}

fn quad_penalty(b: &DMatrix<f64>) -> (f64, f64) {
    let n = b.nrows();
    let mut anti = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = b[(i, j)] - b[(j, i)];
            anti += d * d;
        }
    }
    (b.trace(), anti)
}

pub fn matrix_functionals(b: &DMatrix<f64>) -> Result<Functionals> {
    check_square(b)?;
    let (trace, antisym_defect) = quad_penalty(b);
    Ok(Functionals { op_norm: op_norm(b), hs_norm: b.norm(), trace, antisym_defect })
}

fn check_params(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid(format!("delta must lie in [0, 1), got {delta}")));
    }
    Ok(())
}

/// `(1-δ)‖B‖²_HS + ε((tr B)² + Σ_{i<j}(b_ij - b_ji)²) - ‖B‖²`.
pub fn lemma_margin(b: &DMatrix<f64>, eps: f64, delta: f64) -> Result<f64> {
    check_square(b)?;
    check_params(eps, delta)?;
    Ok(margin_unchecked(b, eps, delta))
}

fn margin_unchecked(b: &DMatrix<f64>, eps: f64, delta: f64) -> f64 {
    let (tr, anti) = quad_penalty(b);
    let op = op_norm(b);
    (1.0 - delta) * b.norm_squared() + eps * (tr * tr + anti) - op * op
}

/// `ρ(B)`; `margin(B) = ‖B‖²_HS (1 - δ - ρ(B))`.
fn rho(b: &DMatrix<f64>, eps: f64) -> f64 {
    let hs2 = b.norm_squared();
    if hs2 == 0.0 {
        return f64::NEG_INFINITY;
    }
    let (tr, anti) = quad_penalty(b);
    let op = op_norm(b);
    (op * op - eps * (tr * tr + anti)) / hs2
}

/// Whether `margin(tB) = t² margin(B)` to relative `1e-12`.
pub fn homogeneity_check(b: &DMatrix<f64>, t: f64, eps: f64, delta: f64) -> Result<bool> {
    if t == 0.0 {
        return Err(invalid("scale must be nonzero"));
    }
    let m = lemma_margin(b, eps, delta)?;
    let mt = lemma_margin(&(b * t), eps, delta)?;
    let scale = (t * t * m).abs().max(t * t * b.norm_squared() * f64::EPSILON * 16.0);
    Ok((mt - t * t * m).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE))
}

/// `diag(1, -1, 0, …)`: symmetric, trace zero, tight at `δ = 1/2`.
pub fn symmetric_trace_zero_extremal(size: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(size, size);
    b[(0, 0)] = 1.0;
    b[(1, 1)] = -1.0;
    b
}

/// The rotation generator in the first two coordinates.
pub fn antisymmetric_extremal(size: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(size, size);
    b[(0, 1)] = 1.0;
    b[(1, 0)] = -1.0;
    b
}

/// Largest `δ` with nonnegative margin on the symmetric trace-zero family.
pub const SYMMETRIC_FAMILY_CAP: f64 = 0.5;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// A random matrix, normalized to `‖B‖_HS = 1`. The mixture follows the
/// decomposition `B = A + S`: plain Gaussian matrices, `A + S` with `‖S‖_HS = 1`
/// and `A` over several decades of scale, and nearly trace-free symmetric `S`.
pub fn random_matrix(size: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let kind = rng.random_range(0..3u8);
    let mut b = match kind {
        0 => DMatrix::from_fn(size, size, |_, _| gaussian(rng)),
        1 => {
            let g = DMatrix::from_fn(size, size, |_, _| gaussian(rng));
            let s = (&g + g.transpose()) * 0.5;
            let s = &s / s.norm().max(f64::MIN_POSITIVE);
            let h = DMatrix::from_fn(size, size, |_, _| gaussian(rng));
            let a = (&h - h.transpose()) * 0.5;
            let a = &a / a.norm().max(f64::MIN_POSITIVE);
            let lam = 10f64.powf(rng.random_range(-2.0..2.0));
            s + a * lam
        }
        _ => {
            let g = DMatrix::from_fn(size, size, |_, _| gaussian(rng));
            let mut s = (&g + g.transpose()) * 0.5;
            let shift = s.trace() / size as f64 * (1.0 - 10f64.powf(rng.random_range(-3.0..0.0)));
            for i in 0..size {
                s[(i, i)] -= shift;
            }
            s
        }
    };
    let nrm = b.norm();
    if nrm > 0.0 {
        b /= nrm;
    }
    b
}

/// Gradient ascent on `ρ` from `start` with central-difference gradients and
/// an adaptive step; iterates stay on the unit HS sphere.
pub fn ascend(start: &DMatrix<f64>, eps: f64, steps: usize) -> (DMatrix<f64>, f64) {
    let mut b = start / start.norm().max(f64::MIN_POSITIVE);
    let mut val = rho(&b, eps);
    let mut step = 0.05;
    let fd = 1e-6;
    let (r, c) = b.shape();
    for _ in 0..steps {
        let mut grad = DMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let mut p = b.clone();
                p[(i, j)] += fd;
                let mut m = b.clone();
                m[(i, j)] -= fd;
                grad[(i, j)] = (rho(&p, eps) - rho(&m, eps)) / (2.0 * fd);
            }
        }
        let gn = grad.norm();
        if gn < 1e-14 {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let cand = &b + &grad * (step / gn);
            let cand = &cand / cand.norm();
            let v = rho(&cand, eps);
            if v > val {
                b = cand;
                val = v;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            // A repeated top singular value can stall the difference gradient;
            // a small random nudge breaks the tie.
            let mut rng = ChaCha8Rng::seed_from_u64(val.to_bits());
            let cand = &b + DMatrix::from_fn(r, c, |_, _| 1e-4 * gaussian(&mut rng));
            let cand = &cand / cand.norm();
            let v = rho(&cand, eps);
            if v > val {
                b = cand;
                val = v;
                step = 1e-3;
            } else {
                break;
            }
        }
    }
    (b, val)
}

/// Work budget of [`delta_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub samples: usize,
    /// Ascent restarts from the worst random samples.
    pub restarts: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { samples: 100_000, restarts: 48, ascent_steps: 400, seed: 42 }
    }
}

/// Result of a δ search for `(n+1)×(n+1)` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    /// Largest `ρ` met by the search; `δ ≤ 1 - rho_max`.
    pub rho_max: f64,
    /// Margin of the worst matrix at the returned `δ`, HS-normalized.
    pub worst_margin: f64,
    pub worst_matrix: Vec<Vec<f64>>,
    pub samples: usize,
    pub ascent_restarts: usize,
}

/// Scans `count` random matrices in deterministic blocks and keeps the `keep`
/// largest values of `ρ`.
fn scan(size: usize, eps: f64, count: usize, seed: u64, keep: usize) -> Vec<(f64, DMatrix<f64>)> {
    let blocks = count.div_ceil(BLOCK);
    let per_block: Vec<Vec<(f64, DMatrix<f64>)>> = map_indexed(blocks, |blk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(blk as u64);
        let n = BLOCK.min(count - blk * BLOCK);
        let mut best: Vec<(f64, DMatrix<f64>)> = Vec::with_capacity(keep + 1);
        for _ in 0..n {
            let b = random_matrix(size, &mut rng);
            let r = rho(&b, eps);
            if best.len() < keep || r > best[best.len() - 1].0 {
                let pos = best.partition_point(|(v, _)| *v >= r);
                best.insert(pos, (r, b));
                best.truncate(keep);
            }
        }
        best
    });
    let mut all: Vec<(f64, DMatrix<f64>)> = per_block.into_iter().flatten().collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    all.truncate(keep);
    all
}

/// Largest `δ` on the grid `DELTA_GRID · i` with no counterexample among the
/// random samples, their ascent refinements and the two extremal families.
pub fn delta_search(n: usize, eps: f64, budget: SearchBudget) -> Result<DeltaReport> {
    if n == 0 {
        return Err(invalid("n must be a positive integer"));
    }
    check_params(eps, 0.0)?;
    if budget.samples == 0 || budget.ascent_steps == 0 {
        return Err(invalid("search budget must be nonzero"));
    }
    let size = n + 1;
    let seeds = scan(size, eps, budget.samples, budget.seed, budget.restarts.max(1));
    let mut starts: Vec<DMatrix<f64>> = seeds.into_iter().map(|(_, b)| b).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x5eed);
    for _ in 0..budget.restarts {
        starts.push(random_matrix(size, &mut rng));
    }
    let mut candidates: Vec<(f64, DMatrix<f64>)> = map_indexed(starts.len(), |i| {
        let (b, v) = ascend(&starts[i], eps, budget.ascent_steps);
        (v, b)
    });
    for b in [symmetric_trace_zero_extremal(size), antisymmetric_extremal(size)] {
        candidates.push((rho(&b, eps), &b / b.norm()));
    }
    // Bisection over grid indices against the candidate set.
    let admissible = |i: u64| candidates.iter().all(|(_, b)| margin_unchecked(b, eps, i as f64 * DELTA_GRID) >= 0.0);
    let (mut lo, mut hi) = (0u64, (1.0 / DELTA_GRID) as u64);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = lo as f64 * DELTA_GRID;
    let (rho_max, worst) = candidates.iter().max_by(|a, b| a.0.total_cmp(&b.0)).map(|(v, b)| (*v, b.clone())).expect("candidates");
    Ok(DeltaReport {
        n,
        eps,
        delta,
        rho_max,
        worst_margin: margin_unchecked(&worst, eps, delta),
        worst_matrix: rows(&worst),
        samples: budget.samples,
        ascent_restarts: starts.len(),
    })
}

/// Fresh random matrices checked at a fixed `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub counterexamples: usize,
    /// Smallest HS-normalized margin met.
    pub worst_margin: f64,
    pub worst_matrix: Vec<Vec<f64>>,
}

/// Counts matrices with margin below `-1e-12` among `samples` fresh draws,
/// each also refined by a short ascent when it is among the worst.
pub fn verify_delta(n: usize, eps: f64, delta: f64, samples: usize, seed: u64) -> Result<VerifyReport> {
    check_params(eps, delta)?;
    if n == 0 || samples == 0 {
        return Err(invalid("n and samples must be positive"));
    }
    let size = n + 1;
    let blocks = samples.div_ceil(BLOCK);
    let per_block: Vec<(usize, f64, DMatrix<f64>)> = map_indexed(blocks, |blk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(blk as u64);
        let cnt = BLOCK.min(samples - blk * BLOCK);
        let mut bad = 0;
        let mut worst = (f64::INFINITY, DMatrix::zeros(size, size));
        for _ in 0..cnt {
            let b = random_matrix(size, &mut rng);
            let m = margin_unchecked(&b, eps, delta);
            if m < -1e-12 {
                bad += 1;
            }
            if m < worst.0 {
                worst = (m, b);
            }
        }
        (bad, worst.0, worst.1)
    });
    let mut counterexamples: usize = per_block.iter().map(|p| p.0).sum();
    let (mut worst_margin, mut worst) = per_block
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| (p.1, p.2.clone()))
        .expect("at least one block");
    let (refined, r) = ascend(&worst, eps, 200);
    let m = 1.0 - delta - r;
    if m < worst_margin {
        if m < -1e-12 {
            counterexamples += 1;
        }
        worst_margin = m;
        worst = refined;
    }
    Ok(VerifyReport { samples, counterexamples, worst_margin, worst_matrix: rows(&worst) })
}

/// A matrix with negative margin at `δ`, if the search finds one.
pub fn find_counterexample(n: usize, eps: f64, delta: f64, budget: SearchBudget) -> Result<Option<MatrixSample>> {
    check_params(eps, delta)?;
    let size = n + 1;
    let mut cands = vec![symmetric_trace_zero_extremal(size), antisymmetric_extremal(size)];
    cands.extend(scan(size, eps, budget.samples.max(1), budget.seed, budget.restarts.max(1)).into_iter().map(|(_, b)| b));
    for c in &cands {
        if margin_unchecked(c, eps, delta) < -1e-12 {
            return Ok(Some(MatrixSample::new(c)?));
        }
    }
    for c in cands.iter().skip(2) {
        let (b, _) = ascend(c, eps, budget.ascent_steps);
        if margin_unchecked(&b, eps, delta) < -1e-12 {
            return Ok(Some(MatrixSample::new(&b)?));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn m(r: &[&[f64]]) -> DMatrix<f64> {
        from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn functional_examples() {
        let f = matrix_functionals(&DMatrix::identity(2, 2)).unwrap();
        assert!((f.op_norm - 1.0).abs() < 1e-15 && (f.hs_norm - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!((f.trace, f.antisym_defect), (2.0, 0.0));
        let f = matrix_functionals(&m(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap();
        assert!((f.op_norm - 1.0).abs() < 1e-15);
        assert_eq!((f.trace, f.antisym_defect), (0.0, 4.0));
        let f = matrix_functionals(&m(&[&[1.0, 0.0], &[0.0, -1.0]])).unwrap();
        assert!((f.op_norm - 1.0).abs() < 1e-15 && f.trace == 0.0 && f.antisym_defect == 0.0);
        assert!(matrix_functionals(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn margin_examples() {
        let rot = m(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!((lemma_margin(&rot, 0.1, 0.2).unwrap() - 1.0).abs() < 1e-14);
        let d = symmetric_trace_zero_extremal(2);
        assert!(lemma_margin(&d, 0.3, 0.5).unwrap().abs() < 1e-14);
        assert_eq!(lemma_margin(&DMatrix::zeros(3, 3), 0.1, 0.1).unwrap(), 0.0);
        assert!(lemma_margin(&d, 0.0, 0.1).is_err());
    }

    #[test]
    fn homogeneity_examples() {
        let rot = m(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(homogeneity_check(&rot, 1.0, 0.1, 0.2).unwrap());
        assert!((lemma_margin(&(&rot * 2.0), 0.1, 0.2).unwrap() - 4.0).abs() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_matrix(3, &mut rng);
        assert!(homogeneity_check(&b, -3.0, 0.1, 0.05).unwrap());
        assert!(homogeneity_check(&b, 0.0, 0.1, 0.05).is_err());
    }

    #[test]
    fn search_on_two_by_two() {
        let budget = SearchBudget { samples: 20_000, restarts: 16, ascent_steps: 300, seed: 1 };
        let r = delta_search(1, 0.1, budget).unwrap();
        // Rank-one matrices force δ ≤ ε.
        assert!(r.delta > 0.0 && r.delta <= 0.1, "{r:?}");
        assert!(r.worst_margin >= 0.0);
        let v = verify_delta(1, 0.1, r.delta, 50_000, 99).unwrap();
        assert_eq!(v.counterexamples, 0, "{v:?}");
        let c = find_counterexample(1, 0.1, r.delta + 0.05, budget).unwrap();
        assert!(c.is_some());
        // Large ε approaches the symmetric cap from below, within O(1/ε).
        let big = delta_search(1, 50.0, budget).unwrap();
        assert!(big.delta <= SYMMETRIC_FAMILY_CAP && big.delta >= SYMMETRIC_FAMILY_CAP - 0.25 / 50.0, "{big:?}");
        assert!(find_counterexample(1, 50.0, SYMMETRIC_FAMILY_CAP + 0.05, budget).unwrap().is_some());
    }

    #[test]
    fn antisymmetric_family_admits_two_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for size in 2..5 {
            for _ in 0..200 {
                let h = DMatrix::from_fn(size, size, |_, _| gaussian(&mut rng));
                let a = (&h - h.transpose()) * 0.5;
                assert!(lemma_margin(&a, 0.2, 0.4).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn search_is_deterministic_across_modes() {
        let budget = SearchBudget { samples: 9000, restarts: 4, ascent_steps: 50, seed: 5 };
        let a = crate::exec::with_mode(crate::Exec::Sequential, || delta_search(2, 0.1, budget).unwrap());
        let b = crate::exec::with_mode(crate::Exec::Parallel, || delta_search(2, 0.1, budget).unwrap());
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn decomposition_identities(seed in 0u64..10_000, size in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = DMatrix::from_fn(size, size, |_, _| gaussian(&mut rng));
            let s = (&b + b.transpose()) * 0.5;
            let a = (&b - b.transpose()) * 0.5;
            let f = matrix_functionals(&b).unwrap();
            let hs2 = f.hs_norm * f.hs_norm;
            prop_assert!((hs2 - s.norm_squared() - a.norm_squared()).abs() < 1e-12 * hs2.max(1.0));
            prop_assert!((f.antisym_defect - 2.0 * a.norm_squared()).abs() < 1e-12 * hs2.max(1.0));
            prop_assert!(f.op_norm <= f.hs_norm * (1.0 + 1e-14));
        }
    }
}
