//! Radial operators of the first even angular sector.
//!
//! `U = −∂_r² − (1/r)∂_r + 1/r² + 1 − pQ^{p−1}` is discretized through its
//! conjugate `Û = r^{−1} U r = −r^{−3}∂_r(r³∂_r) + 1 − pQ^{p−1}`, which is
//! regular at the origin. `Û` uses a finite-volume divergence form on the grid
//! nodes `0..n−1` with a homogeneous Dirichlet value at `r_max`; it is exactly
//! symmetric in the cell-volume inner product `Σ w_i u_i v_i`, `w_i ≈ r_i³ h`.
//!
//! `V v = ⟪v, h₂⟫h₁ + ⟪v, h₁⟫h₂` and every pairing `⟪·,·⟫` use Simpson's rule.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{inner_rdr, norm_rdr, GridFunction, Measure, RadialGrid};
use crate::ground_state::{pow_pos, GroundState};
use crate::tridiag::{eigenvalue_by_bisection, Tridiagonal, TridiagonalLu};

/// Floor on [`independence_margin`].
pub const INDEPENDENCE_FLOOR: f64 = 1e-6;
/// Allowed distance of the lowest eigenvalue of `U` from zero.
pub const KERNEL_EIGENVALUE_FLOOR: f64 = 1e-4;
/// Allowed kernel residual `‖Uf‖/‖f‖`.
pub const KERNEL_RESIDUAL_FLOOR: f64 = 1e-3;

/// `c = ((p−1)/‖Q‖²_{L²(ℝ²)})^{1/2}`.
pub fn normalization_constant(gs: &GroundState) -> f64 {
    let q = gs.q();
    let mass = 2.0 * PI * inner_rdr(q, q).expect("shared grid");
    ((gs.p() - 1.0) / mass).sqrt()
}

/// `h₁ = c (Q^p)_r`, `h₂ = c r Q`.
#[derive(Debug, Clone)]
pub struct RankTwoPair {
    c: f64,
    h1: GridFunction,
    h2: GridFunction,
}

impl RankTwoPair {
    pub fn new(c: f64, h1: GridFunction, h2: GridFunction) -> Result<Self> {
        if !h1.grid().same_as(h2.grid()) {
            return Err(Error::invalid("h1 and h2 live on different grids"));
        }
        if !c.is_finite() || c < 0.0 {
            return Err(Error::invalid(format!("normalization constant must be >= 0, got {c}")));
        }
        Ok(RankTwoPair { c, h1, h2 })
    }

    pub fn from_ground_state(gs: &GroundState) -> Self {
        let p = gs.p();
        let c = normalization_constant(gs);
        let h1 = gs.q().zip_map(gs.qr(), |_, q, qr| c * p * pow_pos(q, p - 1.0) * qr);
        let h2 = gs.q().map(|r, q| c * r * q);
        RankTwoPair { c, h1, h2 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn h1(&self) -> &GridFunction {
        &self.h1
    }

    pub fn h2(&self) -> &GridFunction {
        &self.h2
    }

    /// `(a h₁, b h₂)`.
    pub fn rescaled(&self, a: f64, b: f64) -> RankTwoPair {
        RankTwoPair {
            c: self.c,
            h1: self.h1.scaled(a),
            h2: self.h2.scaled(b),
        }
    }

    /// Gram entries `(g₁₁, g₁₂, g₂₂)`, `g_ij = ⟪h_i, h_j⟫`.
    pub fn gram(&self) -> (f64, f64, f64) {
        let ip = |a, b| inner_rdr(a, b).expect("shared grid");
        (ip(&self.h1, &self.h1), ip(&self.h1, &self.h2), ip(&self.h2, &self.h2))
    }
}

/// `V v = ⟪v, h₂⟫ h₁ + ⟪v, h₁⟫ h₂`.
pub fn apply_v(v: &GridFunction, pair: &RankTwoPair) -> Result<GridFunction> {
    let a = inner_rdr(v, &pair.h2)?;
    let b = inner_rdr(v, &pair.h1)?;
    let mut out = pair.h1.scaled(a);
    out.add_scaled(b, &pair.h2);
    Ok(out)
}

/// Finite-volume `Û`, used directly (`Measure::R3dr`) or conjugated to `U = r Û r^{−1}`
/// (`Measure::Rdr`).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Arc<RadialGrid>,
    measure: Measure,
    flux: Arc<Vec<f64>>,
    volume: Arc<Vec<f64>>,
    potential: GridFunction,
    lu: Arc<TridiagonalLu>,
}

impl DiscreteOperator {
    fn hat(gs: &GroundState) -> Result<Self> {
        let grid = gs.grid().clone();
        let h = grid.h();
        let m = grid.n() - 1;
        let p = gs.p();
        let flux: Vec<f64> = (0..m)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                r * r * r / h
            })
            .collect();
        let volume: Vec<f64> = (0..m)
            .map(|i| {
                if i == 0 {
                    h.powi(4) / 64.0
                } else {
                    let r = grid.r(i);
                    r * r * r * h + r * h * h * h / 4.0
                }
            })
            .collect();
        let potential = gs.q().map(|_, q| 1.0 - p * pow_pos(q, p - 1.0));
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m - 1];
        let mut sub = vec![0.0; m - 1];
        for i in 0..m {
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            diag[i] = (flux[i] + left) / volume[i] + potential[i];
            if i + 1 < m {
                sup[i] = -flux[i] / volume[i];
                sub[i] = -flux[i] / volume[i + 1];
            }
        }
        let lu = Tridiagonal::new(sub, diag, sup)?.factor()?;
        Ok(DiscreteOperator {
            grid,
            measure: Measure::R3dr,
            flux: Arc::new(flux),
            volume: Arc::new(volume),
            potential,
            lu: Arc::new(lu),
        })
    }

    fn conjugated(&self) -> Self {
        DiscreteOperator {
            measure: Measure::Rdr,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn potential(&self) -> &GridFunction {
        &self.potential
    }

    /// Number of unknowns (all nodes except `r_max`).
    pub fn unknowns(&self) -> usize {
        self.volume.len()
    }

    /// Cell volumes of the hat-space inner product.
    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    /// Symmetric tridiagonal form `W^{1/2} Û W^{−1/2}`: diagonal and off-diagonal.
    pub fn symmetric_tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.unknowns();
        let (a, w) = (&self.flux, &self.volume);
        let d = (0..m)
            .map(|i| {
                let left = if i > 0 { a[i - 1] } else { 0.0 };
                (a[i] + left) / w[i] + self.potential[i]
            })
            .collect();
        let e = (0..m - 1).map(|i| -a[i] / (w[i] * w[i + 1]).sqrt()).collect();
        (d, e)
    }

    /// Lowest eigenvalue of the discrete operator (Sturm bisection).
    pub fn lowest_eigenvalue(&self) -> Result<f64> {
        let (d, e) = self.symmetric_tridiagonal();
        eigenvalue_by_bisection(&d, &e, 0)
    }

    fn apply_hat_raw(&self, u: &[f64]) -> Vec<f64> {
        let m = self.unknowns();
        let (a, w) = (&self.flux, &self.volume);
        (0..m)
            .map(|i| {
                let right = if i + 1 < m { u[i + 1] } else { 0.0 };
                let mut s = a[i] * (u[i] - right);
                if i > 0 {
                    s += a[i - 1] * (u[i] - u[i - 1]);
                }
                s / w[i] + self.potential[i] * u[i]
            })
            .collect()
    }

    /// `v ↦ v/r` on the unknowns, extended evenly to the origin (`û₀ = û₁`) so that the
    /// conjugated operator stays exactly symmetric in its weights.
    pub fn to_hat(&self, v: &GridFunction) -> Vec<f64> {
        let m = self.unknowns();
        let mut u = vec![0.0; m];
        for i in 1..m {
            u[i] = v[i] / self.grid.r(i);
        }
        if m > 1 {
            u[0] = u[1];
        }
        u
    }

    /// `u ↦ r u`, zero at `r_max`.
    pub fn from_hat(&self, u: &[f64]) -> GridFunction {
        let mut v = vec![0.0; self.grid.n()];
        for (i, x) in u.iter().enumerate() {
            v[i] = self.grid.r(i) * x;
        }
        GridFunction::from_raw(self.grid.clone(), v)
    }

    fn check_grid(&self, v: &GridFunction) -> Result<()> {
        if !self.grid.same_as(v.grid()) {
            return Err(Error::invalid("function and operator live on different grids"));
        }
        Ok(())
    }

    /// Apply the operator in its own measure: `Û u` for `R3dr`, `r Û (v/r)` for `Rdr`.
    /// The value at `r_max` is treated as the Dirichlet zero and the output vanishes there.
    pub fn apply(&self, v: &GridFunction) -> Result<GridFunction> {
        self.check_grid(v)?;
        Ok(match self.measure {
            Measure::R3dr => {
                let m = self.unknowns();
                let mut y = self.apply_hat_raw(&v.values()[..m]);
                y.push(0.0);
                GridFunction::from_raw(self.grid.clone(), y)
            }
            Measure::Rdr => self.from_hat(&self.apply_hat_raw(&self.to_hat(v))),
        })
    }

    /// Discrete inner product in which the operator is exactly symmetric.
    pub fn inner(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.check_grid(u)?;
        self.check_grid(v)?;
        let mut s = 0.0;
        for (i, w) in self.volume.iter().enumerate() {
            let weight = match self.measure {
                Measure::R3dr => *w,
                Measure::Rdr if i == 0 => 0.0,
                Measure::Rdr => {
                    let r = self.grid.r(i);
                    w / (r * r)
                }
            };
            s += weight * (u[i] * v[i]);
        }
        Ok(s)
    }

    /// `Û^{−1} b` on the unknowns (Dirichlet at `r_max`).
    pub(crate) fn solve_hat(&self, b: &[f64]) -> Vec<f64> {
        self.lu.solve(b)
    }
}

/// Kernel direction `f = Q_r` of `U`.
#[derive(Debug, Clone)]
pub struct KernelData {
    f: GridFunction,
    f_norm_sq: f64,
    lowest_eigenvalue: f64,
}

impl KernelData {
    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn f_norm_sq(&self) -> f64 {
        self.f_norm_sq
    }

    /// Lowest eigenvalue of the discrete `U`.
    pub fn lowest_eigenvalue(&self) -> f64 {
        self.lowest_eigenvalue
    }
}

#[derive(Debug, Clone)]
pub struct Operators {
    pub u: DiscreteOperator,
    pub hat_u: DiscreteOperator,
    pub pair: RankTwoPair,
    pub kern: KernelData,
}

/// Smallest singular value of the column matrix of the normalized `{f, h₁, h₂}` in the
/// `r dr` inner product, i.e. the square root of the smallest eigenvalue of their Gram matrix.
pub fn independence_margin(f: &GridFunction, pair: &RankTwoPair) -> Result<f64> {
    let vs = [f, &pair.h1, &pair.h2];
    let mut g = nalgebra::Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            g[(i, j)] = inner_rdr(vs[i], vs[j])?;
        }
    }
    let d: Vec<f64> = (0..3).map(|i| g[(i, i)].sqrt()).collect();
    if d.contains(&0.0) {
        return Ok(0.0);
    }
    for i in 0..3 {
        for j in 0..3 {
            g[(i, j)] /= d[i] * d[j];
        }
    }
    Ok(g.symmetric_eigenvalues().min().max(0.0).sqrt())
}

pub fn build_operators(gs: &GroundState) -> Result<Operators> {
    gs.check_invariants()
        .map_err(|e| Error::invalid(format!("ground state rejected: {e}")))?;
    let hat_u = DiscreteOperator::hat(gs)?;
    let u = hat_u.conjugated();
    let pair = RankTwoPair::from_ground_state(gs);

    let f = gs.qr().clone();
    let n = f.len();
    if f[0] != 0.0 {
        return Err(Error::post(format!("f(0) = {:e}, expected 0", f[0])));
    }
    if let Some(i) = (1..n - 1).find(|&i| f[i] >= 0.0) {
        return Err(Error::post(format!("f = Q_r is not negative at r = {}", gs.grid().r(i))));
    }
    let f_norm_sq = inner_rdr(&f, &f)?;
    let lowest_eigenvalue = hat_u.lowest_eigenvalue()?;
    if lowest_eigenvalue.abs() > KERNEL_EIGENVALUE_FLOOR {
        return Err(Error::post(format!(
            "lowest eigenvalue of U is {lowest_eigenvalue:e}, expected 0 within {KERNEL_EIGENVALUE_FLOOR:e}"
        )));
    }
    let kern = KernelData {
        f,
        f_norm_sq,
        lowest_eigenvalue,
    };
    let residual = kernel_residual(&u, &kern)?;
    if residual >= KERNEL_RESIDUAL_FLOOR {
        return Err(Error::post(format!("kernel residual ‖Uf‖/‖f‖ = {residual:e}")));
    }
    let margin = independence_margin(&kern.f, &pair)?;
    if margin <= INDEPENDENCE_FLOOR {
        return Err(Error::post(format!("{{f, h1, h2}} is numerically dependent (margin {margin:e})")));
    }
    Ok(Operators { u, hat_u, pair, kern })
}

/// `‖U f‖ / ‖f‖` in the `r dr` norm.
pub fn kernel_residual(u: &DiscreteOperator, kern: &KernelData) -> Result<f64> {
    let uf = u.apply(&kern.f)?;
    Ok(norm_rdr(&uf) / kern.f_norm_sq.sqrt())
}

/// Exact images `w₁ = U h₁`, `w₂ = U h₂`.
pub fn exact_images(gs: &GroundState) -> (GridFunction, GridFunction) {
    let p = gs.p();
    let c = normalization_constant(gs);
    let k = -p * (p - 1.0) * c;
    let w1 = gs.q().zip_map(gs.qr(), |r, q, qr| {
        if r == 0.0 {
            // every term carries at least one factor Q_r, and Q_r²/r → 0
            return 0.0;
        }
        k * ((p - 2.0) * pow_pos(q, p - 3.0) * qr * qr * qr + 3.0 * pow_pos(q, p - 1.0) * qr
            - 3.0 * pow_pos(q, 2.0 * (p - 1.0)) * qr
            - 2.0 / r * pow_pos(q, p - 2.0) * qr * qr)
    });
    let w2 = gs
        .q()
        .zip_map(gs.qr(), |r, q, qr| -2.0 * c * qr - (p - 1.0) * c * r * pow_pos(q, p));
    (w1, w2)
}

/// `v − (⟪v,f⟫/⟪f,f⟫) f`.
pub fn project_fperp(v: &GridFunction, kern: &KernelData) -> Result<GridFunction> {
    let k = inner_rdr(v, &kern.f)? / kern.f_norm_sq;
    let mut out = v.clone();
    out.add_scaled(-k, &kern.f);
    Ok(out)
}

/// Tolerance on `|⟪h̃, f⟫| / (‖h̃‖‖f‖)` accepted by [`solve_hstar`].
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// The unique `h* ⊥ f` with `U h* = h̃`, via the kernel-bordered system
/// `[[Û, f̂], [f̂ᵀW, 0]]` eliminated through two solves with `Û`.
pub fn solve_hstar(h_tilde: &GridFunction, u: &DiscreteOperator, kern: &KernelData) -> Result<GridFunction> {
    u.check_grid(h_tilde)?;
    let norm = norm_rdr(h_tilde);
    if norm == 0.0 {
        return Ok(GridFunction::zeros(u.grid.clone()));
    }
    let overlap = inner_rdr(h_tilde, &kern.f)? / (norm * kern.f_norm_sq.sqrt());
    if overlap.abs() > ORTHOGONALITY_TOL {
        return Err(Error::invalid(format!(
            "right-hand side is not orthogonal to the kernel (normalized overlap {overlap:e})"
        )));
    }
    let b = u.to_hat(h_tilde);
    let fh = u.to_hat(&kern.f);
    let x = u.solve_hat(&b);
    let y = u.solve_hat(&fh);
    let w = u.grid.weights(Measure::R3dr);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x * y)).sum::<f64>();
    let (xf, yf) = (dot(&x, &fh), dot(&y, &fh));
    let ynorm = dot(&y, &y).sqrt() * dot(&fh, &fh).sqrt();
    if !(yf.abs() > 1e-12 * ynorm) || !yf.is_finite() {
        return Err(Error::solver("bordered system is numerically singular"));
    }
    let mu = xf / yf;
    let sol: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - mu * b).collect();
    Ok(u.from_hat(&sol))
}

/// Relative `r dr` deviations of the direct and inverse benchmarks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BenchmarkDeviations {
    pub direct_h1: f64,
    pub direct_h2: f64,
    pub inverse_h1: f64,
    pub inverse_h2: f64,
    pub kernel_residual: f64,
}

impl BenchmarkDeviations {
    pub fn max(&self) -> f64 {
        [self.direct_h1, self.direct_h2, self.inverse_h1, self.inverse_h2]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Benchmark curves: computed vs exact values on the grid.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub u_h1: GridFunction,
    pub w1: GridFunction,
    pub u_h2: GridFunction,
    pub w2: GridFunction,
    pub inv_w1: GridFunction,
    pub h1_tilde: GridFunction,
    pub inv_w2: GridFunction,
    pub h2_tilde: GridFunction,
    pub deviations: BenchmarkDeviations,
}

fn relative_deviation(computed: &GridFunction, exact: &GridFunction) -> f64 {
    norm_rdr(&(computed - exact)) / norm_rdr(exact)
}

pub fn benchmark(gs: &GroundState, ops: &Operators) -> Result<Benchmark> {
    let (w1, w2) = exact_images(gs);
    let u_h1 = ops.u.apply(ops.pair.h1())?;
    let u_h2 = ops.u.apply(ops.pair.h2())?;
    let h1_tilde = project_fperp(ops.pair.h1(), &ops.kern)?;
    let h2_tilde = project_fperp(ops.pair.h2(), &ops.kern)?;
    let inv_w1 = solve_hstar(&project_fperp(&w1, &ops.kern)?, &ops.u, &ops.kern)?;
    let inv_w2 = solve_hstar(&project_fperp(&w2, &ops.kern)?, &ops.u, &ops.kern)?;
    let deviations = BenchmarkDeviations {
        direct_h1: relative_deviation(&u_h1, &w1),
        direct_h2: relative_deviation(&u_h2, &w2),
        inverse_h1: relative_deviation(&inv_w1, &h1_tilde),
        inverse_h2: relative_deviation(&inv_w2, &h2_tilde),
        kernel_residual: kernel_residual(&ops.u, &ops.kern)?,
    };
    Ok(Benchmark {
        u_h1,
        w1,
        u_h2,
        w2,
        inv_w1,
        h1_tilde,
        inv_w2,
        h2_tilde,
        deviations,
    })
}
