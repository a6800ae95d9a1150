//! Brute-force spectral cross-check of `U` and `T = U + V`.
//!
//! The operators are re-assembled as dense matrices on a coarser grid, made
//! symmetric by the similarity `S^{1/2} (·) S^{−1/2}` with the cell volumes `S`,
//! and fully diagonalized. None of the reduced criteria (`B`, `M`, `f*`) are
//! used: the negative count, kernel candidates and the minimum of `⟨Tv, v⟩`
//! over `{f}^⊥` come straight from eigenvalues.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground_state::{pow_pos, GroundState};
use crate::operators::Operators;
use rayon::prelude::*;

use crate::verifier::{PipelineEntry, SpectralReport};

pub const KERNEL_FLOOR: f64 = 1e-4;
pub const DEFAULT_K: usize = 6;
pub const MAX_POINTS: usize = 1201;
/// The oracle domain ends where `Q` drops below this fraction of `Q(0)`.
pub const TRUNCATION: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub lowest_eigenvalues: Vec<f64>,
    pub negative_count: usize,
    pub kernel_candidates: Vec<f64>,
    pub constrained_minimum: Option<f64>,
}

/// Eigen-decomposition of a symmetric matrix, ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn summary(&self, k: usize, kernel_floor: f64) -> SpectrumSummary {
        summarize(&self.eigenvalues, k, kernel_floor)
    }
}

fn summarize(sorted: &[f64], k: usize, kernel_floor: f64) -> SpectrumSummary {
    SpectrumSummary {
        lowest_eigenvalues: sorted.iter().take(k).copied().collect(),
        negative_count: sorted.iter().filter(|&&l| l < -kernel_floor).count(),
        kernel_candidates: sorted.iter().filter(|l| l.abs() < kernel_floor).copied().collect(),
        constrained_minimum: None,
    }
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::invalid(format!("matrix is {}×{}, not square", a.nrows(), a.ncols())));
    }
    let scale = a.amax();
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric at ({i}, {j}): {:e} vs {:e}",
                    a[(i, j)],
                    a[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Full symmetric eigen-decomposition.
pub fn full_spectrum(a: &DMatrix<f64>) -> Result<Spectrum> {
    check_symmetric(a)?;
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(a.nrows(), a.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `min ⟨Tv, v⟩/⟨v, v⟩` over `v ⊥ g`: a Householder reflector maps `g` to `e₁`, and the
/// answer is the lowest eigenvalue of the trailing `(n−1)×(n−1)` block of `H T H`.
pub fn constrained_minimum(t: &DMatrix<f64>, g: &DVector<f64>) -> Result<f64> {
    check_symmetric(t)?;
    let n = t.nrows();
    if g.len() != n || n < 2 {
        return Err(Error::invalid("constraint vector does not match the matrix"));
    }
    let gn = g.norm();
    if gn == 0.0 {
        return Err(Error::invalid("constraint vector is zero"));
    }
    // H = I − 2 u uᵀ with u ∝ g + sign(g₀)‖g‖e₁
    let sign = if g[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = g.clone();
    u[0] += sign * gn;
    let un = u.norm();
    u /= un;
    let tu = t * &u;
    let utu = u.dot(&tu);
    // H T H = T − 2u(Tu)ᵀ − 2(Tu)uᵀ + 4(uᵀTu) u uᵀ
    let block = DMatrix::from_fn(n - 1, n - 1, |i, j| {
        let (a, b) = (i + 1, j + 1);
        t[(a, b)] - 2.0 * u[a] * tu[b] - 2.0 * tu[a] * u[b] + 4.0 * utu * u[a] * u[b]
    });
    let sym = (&block + block.transpose()) * 0.5;
    Ok(eigenvalues(&sym)?[0])
}

/// Dense symmetrized `U` and `T` on the oracle grid.
#[derive(Debug, Clone)]
pub struct OracleProblem {
    pub n: usize,
    pub h: f64,
    pub r_cut: f64,
    pub u: DMatrix<f64>,
    pub t: DMatrix<f64>,
    /// `S^{1/2} f̂`, the kernel direction in the symmetrized basis.
    pub g: DVector<f64>,
}

impl OracleProblem {
    pub fn assemble(gs: &GroundState, ops: &Operators, max_points: usize) -> Result<Self> {
        let grid = gs.grid();
        let q = gs.q().values();
        let qr = gs.qr().values();
        let p = gs.p();
        let c = ops.pair.c();
        let cut = q
            .iter()
            .position(|&v| v <= TRUNCATION * q[0])
            .unwrap_or(q.len() - 1);
        let stride = cut.div_ceil(max_points - 1).max(1);
        let intervals = cut.div_ceil(stride);
        if intervals * stride >= q.len() || intervals < 3 {
            return Err(Error::invalid("oracle grid does not fit in the ground-state grid"));
        }
        let h = grid.h() * stride as f64;
        let m = intervals; // unknowns; node `intervals` carries the Dirichlet zero
        let node = |i: usize| i * stride;
        let r = |i: usize| i as f64 * h;

        let flux: Vec<f64> = (0..m).map(|i| (r(i) + 0.5 * h).powi(3) / h).collect();
        let vol: Vec<f64> = (0..m)
            .map(|i| {
                if i == 0 {
                    h.powi(4) / 64.0
                } else {
                    r(i).powi(3) * h + r(i) * h.powi(3) / 4.0
                }
            })
            .collect();
        let sq: Vec<f64> = vol.iter().map(|w| w.sqrt()).collect();

        let mut u = DMatrix::zeros(m, m);
        for i in 0..m {
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            let pot = 1.0 - p * pow_pos(q[node(i)], p - 1.0);
            u[(i, i)] = (flux[i] + left) / vol[i] + pot;
            if i + 1 < m {
                let e = -flux[i] / (sq[i] * sq[i + 1]);
                u[(i, i + 1)] = e;
                u[(i + 1, i)] = e;
            }
        }

        // hat-space functions; origin values from the limit of Q_r/r
        let qr_over_r = |i: usize| qr[node(i)] / r(i);
        let origin = (4.0 * qr_over_r(1) - qr_over_r(2)) / 3.0;
        let fhat: Vec<f64> = (0..m).map(|i| if i == 0 { origin } else { qr_over_r(i) }).collect();
        let h1hat: Vec<f64> = (0..m)
            .map(|i| c * p * pow_pos(q[node(i)], p - 1.0) * fhat[i])
            .collect();
        let h2hat: Vec<f64> = (0..m).map(|i| c * q[node(i)]).collect();
        let a1 = DVector::from_fn(m, |i, _| sq[i] * h1hat[i]);
        let a2 = DVector::from_fn(m, |i, _| sq[i] * h2hat[i]);
        let kv = &a1 * a2.transpose() + &a2 * a1.transpose();
        let t = &u + kv;
        let g = DVector::from_fn(m, |i, _| sq[i] * fhat[i]);
        Ok(OracleProblem {
            n: intervals + 1,
            h,
            r_cut: r(intervals),
            u,
            t,
            g,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub p: f64,
    pub n: usize,
    pub h: f64,
    pub r_cut: f64,
    pub u: SpectrumSummary,
    pub t: SpectrumSummary,
    /// Normalized `⟨f*, e⟩` with `e` the negative eigenvector of `T` (oracle's own `f*`).
    pub fstar_overlap: Option<f64>,
    /// Oracle's own `cos∠(f, f*)`.
    pub fstar_cos: Option<f64>,
    /// Largest relative violation of the quadratic-form identity over the random sample.
    pub identity_error: Option<f64>,
    pub identity_samples: usize,
}

impl OracleReport {
    /// `T` has one negative eigenvalue, no kernel, and is positive on `{f}^⊥`.
    pub fn positive_on_complement(&self) -> bool {
        self.t.negative_count == 1
            && self.t.kernel_candidates.is_empty()
            && self.t.constrained_minimum.is_some_and(|m| m > 0.0)
    }

    /// `U` has no eigenvalue below `−1e-3`, its lowest is `0 ± 1e-3`, and the next one is positive.
    pub fn u_spectrum_consistent(&self) -> bool {
        let ev = &self.u.lowest_eigenvalues;
        ev.len() >= 2 && ev[0] >= -1e-3 && ev[0].abs() <= 1e-3 && ev[1] > 0.0
    }

    pub fn agrees_with(&self, report: &SpectralReport) -> bool {
        report.verdict == self.positive_on_complement()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleConfig {
    pub max_points: usize,
    pub k: usize,
    pub kernel_floor: f64,
    pub identity_samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_points: MAX_POINTS,
            k: DEFAULT_K,
            kernel_floor: KERNEL_FLOOR,
            identity_samples: 50,
            seed: 0x5eed,
        }
    }
}

/// Check `⟨Tv,v⟩ = −t²⟨g,f*⟩ + ⟨Tw,w⟩`, `t = ⟨v,e⟩/⟨f*,e⟩`, `w = v − t f*`,
/// for random `v ⊥ g`; returns the largest relative error.
pub fn identity_check(
    t: &DMatrix<f64>,
    g: &DVector<f64>,
    fstar: &DVector<f64>,
    e: &DVector<f64>,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.len();
    let gg = g.dot(g);
    let gf = g.dot(fstar);
    let fe = fstar.dot(e);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let mut v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let k = v.dot(g) / gg;
        v.axpy(-k, g, 1.0);
        let tv = v.dot(&(t * &v));
        let s = v.dot(e) / fe;
        let w = &v - fstar * s;
        let tw = w.dot(&(t * &w));
        let rhs = -s * s * gf + tw;
        let scale = tv.abs() + tw.abs() + (s * s * gf).abs();
        worst = worst.max((tv - rhs).abs() / scale);
    }
    worst
}

pub fn run_oracle(gs: &GroundState, ops: &Operators, cfg: &OracleConfig) -> Result<OracleReport> {
    let prob = OracleProblem::assemble(gs, ops, cfg.max_points)?;
    let u_ev = eigenvalues(&prob.u)?;
    let t_spec = full_spectrum(&prob.t)?;
    let mut t_summary = t_spec.summary(cfg.k, cfg.kernel_floor);
    t_summary.constrained_minimum = Some(constrained_minimum(&prob.t, &prob.g)?);
    let mut u_summary = summarize(&u_ev, cfg.k, cfg.kernel_floor);
    u_summary.constrained_minimum = Some(constrained_minimum(&prob.u, &prob.g)?);

    let (mut fstar_overlap, mut fstar_cos, mut identity_error) = (None, None, None);
    if t_summary.negative_count >= 1 && t_summary.kernel_candidates.is_empty() {
        let e = t_spec.eigenvectors.column(0).into_owned();
        let fstar = prob
            .t
            .clone()
            .lu()
            .solve(&prob.g)
            .ok_or_else(|| Error::solver("dense T is singular"))?;
        fstar_overlap = Some(fstar.dot(&e) / (fstar.norm() * e.norm()));
        fstar_cos = Some(fstar.dot(&prob.g) / (fstar.norm() * prob.g.norm()));
        identity_error = Some(identity_check(&prob.t, &prob.g, &fstar, &e, cfg.identity_samples, cfg.seed));
    }
    Ok(OracleReport {
        p: gs.p(),
        n: prob.n,
        h: prob.h,
        r_cut: prob.r_cut,
        u: u_summary,
        t: t_summary,
        fstar_overlap,
        fstar_cos,
        identity_error,
        identity_samples: cfg.identity_samples,
    })
}

/// Oracle outcome for one `p`.
#[derive(Debug)]
pub struct OracleEntry {
    pub p: f64,
    pub outcome: Result<OracleReport>,
}

/// [`run_oracle`] for every successful pipeline, in parallel.
pub fn oracle_sweep(pipelines: &[PipelineEntry], cfg: &OracleConfig) -> Vec<OracleEntry> {
    pipelines
        .par_iter()
        .map(|entry| OracleEntry {
            p: entry.p,
            outcome: match &entry.outcome {
                Ok(pipe) => run_oracle(&pipe.gs, &pipe.ops, cfg),
                Err(e) => Err(Error::solver(format!("no pipeline to check: {e}"))),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matrix_spectrum() {
        let a = DMatrix::<f64>::identity(5, 5);
        let s = full_spectrum(&a).unwrap();
        assert!(s.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
        let sum = s.summary(3, KERNEL_FLOOR);
        assert_eq!(sum.lowest_eigenvalues.len(), 3);
        assert_eq!(sum.negative_count, 0);
        assert!(sum.kernel_candidates.is_empty());
    }

    #[test]
    fn constrained_minimum_of_identity_is_one() {
        let a = DMatrix::<f64>::identity(6, 6);
        let g = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.0, 0.5, 1.0]);
        assert!((constrained_minimum(&a, &g).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn constraint_removes_the_negative_direction() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 1.0, 3.0]));
        let g = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!((constrained_minimum(&a, &g).unwrap() - 1.0).abs() < 1e-13);
        let g = DVector::from_vec(vec![-1.0, 0.0, 0.0]);
        assert!((constrained_minimum(&a, &g).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_symmetric() {
        let mut a = DMatrix::<f64>::identity(3, 3);
        a[(0, 1)] = 1.0;
        assert!(matches!(full_spectrum(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn identity_holds_for_small_indefinite_matrix() {
        let t = DMatrix::from_row_slice(3, 3, &[-1.0, 0.2, 0.0, 0.2, 2.0, 0.3, 0.0, 0.3, 1.5]);
        let s = full_spectrum(&t).unwrap();
        let e = s.eigenvectors.column(0).into_owned();
        let g = DVector::from_vec(vec![1.0, 0.5, -0.2]);
        let fstar = t.clone().lu().solve(&g).unwrap();
        assert!(identity_check(&t, &g, &fstar, &e, 50, 7) < 1e-12);
    }
}
