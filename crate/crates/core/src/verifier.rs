//! The three numerical checks behind the coercivity of `T = U + V` on `{f}^⊥`:
//! `ind V = 1`, non-singularity of the 3×3 matrix `M`, and `⟪f, f*⟫ < 0`.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, StageExt};
use crate::grid::{inner_rdr, norm_rdr, GridFunction};
use crate::ground_state::{pokhozhaev_report, solve_ground_state, GroundState, IdentityReport, SolveConfig};
use crate::operators::{apply_v, build_operators, project_fperp, solve_hstar, KernelData, Operators, RankTwoPair};

/// Relative size below which a sign is not trusted at all.
pub const SIGN_FLOOR: f64 = 1e-14;
/// Relative size below which a sign is re-checked on a refined grid.
pub const NEAR_FLOOR: f64 = 1e-6;
/// Allowed `‖T f* − f‖ / ‖f‖`.
pub const FSTAR_RESIDUAL_FLOOR: f64 = 1e-3;

/// `B_ij = ⟪V h_i, h_j⟫` and its eigenvalues, ascending.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IndexMatrixB {
    pub entries: [[f64; 2]; 2],
    pub eigenvalues: (f64, f64),
}

/// `a·d − b·c` with one rounding error (Kahan's fma trick).
fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let w = b * c;
    let e = (-b).mul_add(c, w);
    let f = a.mul_add(d, -w);
    f + e
}

impl IndexMatrixB {
    pub fn from_entries(entries: [[f64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = entries;
        let off = 0.5 * (b + c);
        let mean = 0.5 * (a + d);
        let disc = (0.5 * (a - d)).hypot(off);
        let det = det2(a, off, off, d);
        // larger-magnitude root first, the other from the determinant
        let (l1, l2) = if mean == 0.0 {
            (-disc, disc)
        } else {
            let big = mean + mean.signum() * disc;
            let small = if big == 0.0 { 0.0 } else { det / big };
            if big < small {
                (big, small)
            } else {
                (small, big)
            }
        };
        IndexMatrixB {
            entries,
            eigenvalues: (l1, l2),
        }
    }

    /// Diagonal matrix with the given eigenvalues.
    pub fn from_eigenvalues(l1: f64, l2: f64) -> Self {
        IndexMatrixB::from_entries([[l1.min(l2), 0.0], [0.0, l1.max(l2)]])
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub fn build_index_matrix(pair: &RankTwoPair) -> Result<IndexMatrixB> {
    let hs = [pair.h1(), pair.h2()];
    let mut entries = [[0.0; 2]; 2];
    for (i, hi) in hs.iter().enumerate() {
        let vhi = apply_v(hi, pair)?;
        for (j, hj) in hs.iter().enumerate() {
            // row i, column j: ⟪V h_j, h_i⟫
            entries[j][i] = inner_rdr(&vhi, hj)?;
        }
    }
    let b = IndexMatrixB::from_entries(entries);
    let scale = b.max_abs_entry();
    if (entries[0][1] - entries[1][0]).abs() > 1e-10 * scale {
        return Err(Error::InternalConsistency(format!(
            "B is not symmetric: {:e} vs {:e}",
            entries[0][1], entries[1][0]
        )));
    }
    let (g11, g12, g22) = pair.gram();
    let structural = [
        (entries[0][0], 2.0 * g11 * g12),
        (entries[1][1], 2.0 * g22 * g12),
        (entries[0][1], g11 * g22 + g12 * g12),
    ];
    for (got, expect) in structural {
        if (got - expect).abs() > 1e-8 * expect.abs().max(1e-300) {
            return Err(Error::InternalConsistency(format!(
                "B entry {got:e} disagrees with its Gram form {expect:e}"
            )));
        }
    }
    Ok(b)
}

/// `λ₁ < 0 < λ₂`. Eigenvalues within `floor·max|λ|` of zero are indeterminate.
pub fn check_index_v(b: &IndexMatrixB, floor: f64) -> Result<bool> {
    let (l1, l2) = b.eigenvalues;
    let scale = l1.abs().max(l2.abs());
    for l in [l1, l2] {
        if l.abs() <= floor * scale || !l.is_finite() {
            return Err(Error::IndeterminateSign(format!(
                "eigenvalue {l:e} of B is within the sign floor (scale {scale:e})"
            )));
        }
    }
    Ok(l1 < 0.0 && l2 > 0.0)
}

/// Preimages `h_j* ⊥ f` of `h̃_j` under `U`.
#[derive(Debug, Clone)]
pub struct HStars {
    pub h1_tilde: GridFunction,
    pub h2_tilde: GridFunction,
    pub h1_star: GridFunction,
    pub h2_star: GridFunction,
}

pub fn compute_hstars(ops: &Operators) -> Result<HStars> {
    compute_hstars_for(ops, &ops.pair)
}

fn compute_hstars_for(ops: &Operators, pair: &RankTwoPair) -> Result<HStars> {
    let h1_tilde = project_fperp(pair.h1(), &ops.kern)?;
    let h2_tilde = project_fperp(pair.h2(), &ops.kern)?;
    let h1_star = solve_hstar(&h1_tilde, &ops.u, &ops.kern)?;
    let h2_star = solve_hstar(&h2_tilde, &ops.u, &ops.kern)?;
    Ok(HStars {
        h1_tilde,
        h2_tilde,
        h1_star,
        h2_star,
    })
}

/// `M` with columns `Vf`, `h̃₁ + V h₁*`, `h̃₂ + V h₂*` paired against rows `f`, `h̃₁`, `h̃₂`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MatrixM {
    pub entries: [[f64; 3]; 3],
    pub det: f64,
    /// `|det|` as the product of singular values (after column equilibration).
    pub det_svd: f64,
    pub min_singular_value: f64,
    /// Hadamard bound `Π ‖column‖`, the natural magnitude of `det`.
    pub det_scale: f64,
}

impl MatrixM {
    pub fn from_entries(entries: [[f64; 3]; 3]) -> Self {
        let m = Matrix3::from_fn(|i, j| entries[i][j]);
        let e = &entries;
        let det = e[0][0] * det2(e[1][1], e[1][2], e[2][1], e[2][2])
            - e[0][1] * det2(e[1][0], e[1][2], e[2][0], e[2][2])
            + e[0][2] * det2(e[1][0], e[1][1], e[2][0], e[2][1]);
        let norms: Vec<f64> = (0..3).map(|j| m.column(j).norm()).collect();
        let det_scale: f64 = norms.iter().product();
        let min_singular_value = m.singular_values().min();
        let det_svd = if norms.contains(&0.0) {
            0.0
        } else {
            let mut scaled = m;
            for j in 0..3 {
                scaled.column_mut(j).scale_mut(1.0 / norms[j]);
            }
            scaled.singular_values().iter().product::<f64>() * det_scale
        };
        MatrixM {
            entries,
            det,
            det_svd,
            min_singular_value,
            det_scale,
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.entries[i][j])
    }

    /// Closed-form and singular-value determinants agree to `tol` relative.
    pub fn check_consistency(&self, tol: f64) -> Result<()> {
        let a = self.det.abs();
        if (a - self.det_svd).abs() > tol * a.max(self.det_svd) {
            return Err(Error::InternalConsistency(format!(
                "det M = {:e} by expansion but {:e} by singular values",
                self.det, self.det_svd
            )));
        }
        Ok(())
    }

    /// Non-singular if `|det|` clears `floor·det_scale`.
    pub fn is_nonsingular(&self, floor: f64) -> bool {
        self.det_scale > 0.0 && self.det.abs() > floor * self.det_scale
    }
}

pub fn build_matrix_m(ops: &Operators, hstars: &HStars) -> Result<MatrixM> {
    build_matrix_m_for(ops, &ops.pair, hstars)
}

fn build_matrix_m_for(ops: &Operators, pair: &RankTwoPair, hs: &HStars) -> Result<MatrixM> {
    let f = ops.kern.f();
    let mut c1 = apply_v(&hs.h1_star, pair)?;
    c1.add_scaled(1.0, &hs.h1_tilde);
    let mut c2 = apply_v(&hs.h2_star, pair)?;
    c2.add_scaled(1.0, &hs.h2_tilde);
    let cols = [apply_v(f, pair)?, c1, c2];
    let rows = [f, &hs.h1_tilde, &hs.h2_tilde];
    let mut entries = [[0.0; 3]; 3];
    for (i, row) in rows.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            entries[i][j] = inner_rdr(col, row)?;
        }
    }
    Ok(MatrixM::from_entries(entries))
}

/// `M` for a modified pair on the same operators (used for degenerate-input checks).
pub fn build_matrix_m_with_pair(ops: &Operators, pair: &RankTwoPair) -> Result<MatrixM> {
    let hs = compute_hstars_for(ops, pair)?;
    build_matrix_m_for(ops, pair, &hs)
}

/// `(U + V) v`.
pub fn apply_t(ops: &Operators, v: &GridFunction) -> Result<GridFunction> {
    let mut out = ops.u.apply(v)?;
    out.add_scaled(1.0, &apply_v(v, &ops.pair)?);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FStar {
    /// `(β, γ₁, γ₂)`.
    pub coefficients: [f64; 3],
    pub fstar: GridFunction,
    /// `‖T f* − f‖ / ‖f‖`.
    pub residual: f64,
    /// `‖M x − rhs‖ / ‖rhs‖`.
    pub system_residual: f64,
}

/// Solve `M (β, γ₁, γ₂)ᵀ = rhs` and assemble `f* = βf + γ₁h₁* + γ₂h₂*`.
pub fn solve_fstar_with_rhs(m: &MatrixM, rhs: [f64; 3], ops: &Operators, hs: &HStars) -> Result<FStar> {
    if !m.is_nonsingular(SIGN_FLOOR) {
        return Err(Error::invalid(format!("M is singular (det {:e})", m.det)));
    }
    let mat = m.matrix();
    let b = Vector3::from(rhs);
    let x = mat
        .full_piv_lu()
        .solve(&b)
        .ok_or_else(|| Error::invalid("M is singular"))?;
    let bnorm = b.norm();
    let system_residual = if bnorm == 0.0 {
        (mat * x).norm()
    } else {
        (mat * x - b).norm() / bnorm
    };
    let mut fstar = ops.kern.f().scaled(x[0]);
    fstar.add_scaled(x[1], &hs.h1_star);
    fstar.add_scaled(x[2], &hs.h2_star);
    let tf = apply_t(ops, &fstar)?;
    let f = ops.kern.f();
    let residual = if bnorm == 0.0 {
        norm_rdr(&tf) / ops.kern.f_norm_sq().sqrt()
    } else {
        norm_rdr(&(&tf - f)) / ops.kern.f_norm_sq().sqrt()
    };
    Ok(FStar {
        coefficients: [x[0], x[1], x[2]],
        fstar,
        residual,
        system_residual,
    })
}

pub fn solve_fstar(m: &MatrixM, ops: &Operators, hs: &HStars) -> Result<FStar> {
    let fs = solve_fstar_with_rhs(m, [ops.kern.f_norm_sq(), 0.0, 0.0], ops, hs)?;
    if fs.residual >= FSTAR_RESIDUAL_FLOOR {
        return Err(Error::post(format!("‖T f* − f‖/‖f‖ = {:e}", fs.residual)));
    }
    Ok(fs)
}

/// `cos∠(f, f*)` and whether it is negative beyond `floor`.
pub fn pairing_sign(fstar: &GridFunction, kern: &KernelData, floor: f64) -> Result<(f64, bool)> {
    let nn = inner_rdr(fstar, fstar)?;
    if nn == 0.0 {
        return Err(Error::invalid("f* is zero"));
    }
    let cos = (inner_rdr(kern.f(), fstar)? / (kern.f_norm_sq() * nn).sqrt()).clamp(-1.0, 1.0);
    if cos.abs() <= floor {
        return Err(Error::IndeterminateSign(format!("cos∠(f, f*) = {cos:e}")));
    }
    Ok((cos, cos < -floor))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Checks {
    pub ind_v_is_1: bool,
    pub m_nonsingular: bool,
    pub pairing_negative: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.ind_v_is_1 && self.m_nonsingular && self.pairing_negative
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub p: f64,
    pub amplitude: f64,
    pub r_max: f64,
    pub grid_n: usize,
    pub identities: IdentityReport,
    pub b: IndexMatrixB,
    pub m: MatrixM,
    pub coefficients: Option<[f64; 3]>,
    #[serde(skip)]
    pub fstar: Option<GridFunction>,
    pub cos_angle: Option<f64>,
    pub fstar_residual: Option<f64>,
    pub checks: Checks,
    pub verdict: bool,
    /// Whether a near-floor quantity triggered a re-check on a refined grid.
    pub revalidated: bool,
    pub untested_regime: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub solve: SolveConfig,
    pub sign_floor: f64,
    pub near_floor: f64,
    pub revalidate_near_floor: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            solve: SolveConfig::default(),
            sign_floor: SIGN_FLOOR,
            near_floor: NEAR_FLOOR,
            revalidate_near_floor: true,
        }
    }
}

/// Everything computed for one `p`, kept for reporting and the oracle.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub gs: GroundState,
    pub ops: Operators,
    pub hstars: HStars,
    pub report: SpectralReport,
}

fn evaluate(p: f64, cfg: &VerifyConfig) -> Result<Pipeline> {
    let gs = solve_ground_state(p, &cfg.solve).stage("ground state")?;
    let identities = pokhozhaev_report(&gs);
    let ops = build_operators(&gs).stage("operators")?;
    let b = build_index_matrix(&ops.pair).stage("index matrix B")?;
    let ind_v_is_1 = check_index_v(&b, cfg.sign_floor).stage("index check")?;
    let hstars = compute_hstars(&ops).stage("h* solves")?;
    let m = build_matrix_m(&ops, &hstars).stage("matrix M")?;
    m.check_consistency(1e-8).stage("matrix M")?;
    let m_nonsingular = m.is_nonsingular(cfg.sign_floor);
    let (coefficients, fstar, cos_angle, fstar_residual, pairing_negative) = if m_nonsingular {
        let fs = solve_fstar(&m, &ops, &hstars).stage("f* solve")?;
        if fs.system_residual > 1e-10 {
            return Err(Error::InternalConsistency(format!(
                "M system residual {:e}",
                fs.system_residual
            )))
            .stage("f* solve");
        }
        let (cos, neg) = pairing_sign(&fs.fstar, &ops.kern, cfg.sign_floor).stage("pairing sign")?;
        (Some(fs.coefficients), Some(fs.fstar), Some(cos), Some(fs.residual), neg)
    } else {
        (None, None, None, None, false)
    };
    let checks = Checks {
        ind_v_is_1,
        m_nonsingular,
        pairing_negative,
    };
    let report = SpectralReport {
        p,
        amplitude: gs.amplitude(),
        r_max: gs.grid().r_max(),
        grid_n: gs.grid().n(),
        identities,
        b,
        m,
        coefficients,
        fstar,
        cos_angle,
        fstar_residual,
        checks,
        verdict: checks.all(),
        revalidated: false,
        untested_regime: gs.meta().untested_regime,
    };
    Ok(Pipeline {
        gs,
        ops,
        hstars,
        report,
    })
}

/// Whether any sign decision sits within `near` (relative) of zero.
pub fn near_floor(report: &SpectralReport, near: f64) -> bool {
    let (l1, l2) = report.b.eigenvalues;
    let lscale = l1.abs().max(l2.abs());
    let mut near_any = l1.abs() < near * lscale || l2.abs() < near * lscale;
    near_any |= report.m.det.abs() < near * report.m.det_scale;
    if let Some(c) = report.cos_angle {
        near_any |= c.abs() < near;
    }
    near_any
}

/// Full pipeline for one `p`, returning every intermediate object.
pub fn verify_pipeline(p: f64, cfg: &VerifyConfig) -> Result<Pipeline> {
    if !(p > 1.0 && p <= 3.0) {
        return Err(Error::invalid(format!("p must lie in (1, 3], got {p}")));
    }
    let mut pipe = evaluate(p, cfg)?;
    if cfg.revalidate_near_floor && near_floor(&pipe.report, cfg.near_floor) {
        let fine_cfg = VerifyConfig {
            solve: cfg.solve.refined(),
            revalidate_near_floor: false,
            ..cfg.clone()
        };
        let fine = evaluate(p, &fine_cfg).stage("refined-grid revalidation")?;
        let (a, b) = (&pipe.report, &fine.report);
        let same_signs = a.checks == b.checks
            && a.b.eigenvalues.0.signum() == b.b.eigenvalues.0.signum()
            && a.b.eigenvalues.1.signum() == b.b.eigenvalues.1.signum()
            && a.m.det.signum() == b.m.det.signum();
        if !same_signs {
            return Err(Error::IndeterminateSign(format!(
                "signs at p = {p} change under grid refinement"
            )));
        }
        pipe.report.revalidated = true;
    }
    Ok(pipe)
}

pub fn verify(p: f64, cfg: &VerifyConfig) -> Result<SpectralReport> {
    verify_pipeline(p, cfg).map(|pipe| pipe.report)
}

#[derive(Debug)]
pub struct SweepEntry {
    pub p: f64,
    pub outcome: Result<SpectralReport>,
}

/// `verify` for every `p`, in parallel; results keep the input order.
pub fn sweep(p_values: &[f64], cfg: &VerifyConfig) -> Vec<SweepEntry> {
    sweep_pipelines(p_values, cfg)
        .into_iter()
        .map(PipelineEntry::into_sweep_entry)
        .collect()
}

#[derive(Debug)]
pub struct PipelineEntry {
    pub p: f64,
    pub outcome: Result<Pipeline>,
}

impl PipelineEntry {
    pub fn into_sweep_entry(self) -> SweepEntry {
        SweepEntry {
            p: self.p,
            outcome: self.outcome.map(|pipe| pipe.report),
        }
    }
}

/// Like [`sweep`] but keeps every intermediate object.
pub fn sweep_pipelines(p_values: &[f64], cfg: &VerifyConfig) -> Vec<PipelineEntry> {
    p_values
        .par_iter()
        .map(|&p| PipelineEntry {
            p,
            outcome: verify_pipeline(p, cfg),
        })
        .collect()
}

/// `3.0, 2.9, …, 1.1`.
pub fn default_p_values() -> Vec<f64> {
    (0..20).map(|k| (30 - k) as f64 / 10.0).collect()
}
