//! Tridiagonal linear algebra: a pivoted LU solve for general tridiagonal
//! systems and Sturm-sequence eigenvalue bisection for symmetric ones.

use crate::error::{Error, Result};

/// General (not necessarily symmetric) tridiagonal matrix.
///
/// Row `i` reads `sub[i-1]·x[i-1] + diag[i]·x[i] + sup[i]·x[i+1]`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::invalid(format!(
                "inconsistent tridiagonal band lengths: sub {}, diag {}, sup {}",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(Tridiagonal { sub, diag, sup })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n);
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.sup[i] * x[i + 1];
            y[i + 1] += self.sub[i] * x[i];
        }
        y
    }

    pub fn factor(&self) -> Result<TridiagonalLu> {
        TridiagonalLu::new(self)
    }
}

/// LU factorization with partial (row) pivoting, as in LAPACK `?gttrf`.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    // multipliers
    l: Vec<f64>,
    // U bands: main, first and second superdiagonal
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
    min_pivot_ratio: f64,
}

impl TridiagonalLu {
    fn new(a: &Tridiagonal) -> Result<Self> {
        let n = a.n();
        let mut u0 = a.diag.clone();
        let mut u1 = a.sup.clone();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut dl = a.sub.clone();
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let scale = a
            .diag
            .iter()
            .chain(&a.sub)
            .chain(&a.sup)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::solver("tridiagonal matrix is zero or non-finite"));
        }

        for i in 0..n - 1 {
            if u0[i].abs() >= dl[i].abs() {
                // no interchange
                if u0[i] == 0.0 {
                    return Err(Error::solver(format!("zero pivot at row {i}")));
                }
                let m = dl[i] / u0[i];
                l[i] = m;
                u0[i + 1] -= m * u1[i];
            } else {
                // swap rows i and i+1
                swapped[i] = true;
                let m = u0[i] / dl[i];
                l[i] = m;
                u0[i] = dl[i];
                let t = u0[i + 1];
                u0[i + 1] = u1[i] - m * t;
                u1[i] = t;
                if i + 1 < n - 1 {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -m * u2[i];
                }
            }
            dl[i] = 0.0;
        }
        let min_pivot = u0.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min_pivot == 0.0 {
            return Err(Error::solver("tridiagonal matrix is singular"));
        }
        Ok(TridiagonalLu {
            l,
            u0,
            u1,
            u2,
            swapped,
            min_pivot_ratio: min_pivot / scale,
        })
    }

    /// Smallest pivot relative to the largest matrix entry; a cheap singularity indicator.
    pub fn min_pivot_ratio(&self) -> f64 {
        self.min_pivot_ratio
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let t = x[i];
                x[i] = x[i + 1];
                x[i + 1] = t - self.l[i] * x[i];
            } else {
                x[i + 1] -= self.l[i] * x[i];
            }
        }
        x[n - 1] /= self.u0[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.u1[n - 2] * x[n - 1]) / self.u0[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.u1[i] * x[i + 1] - self.u2[i] * x[i + 2]) / self.u0[i];
        }
        x
    }
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal matrix
/// with diagonal `d` and off-diagonal `e`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    debug_assert_eq!(e.len() + 1, d.len());
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        q = if i == 0 { d[0] - x } else { d[i] - x - e[i - 1] * e[i - 1] / q };
        // an exact zero pivot counts as negative
        if q.abs() < tiny {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix by bisection.
pub fn eigenvalue_by_bisection(d: &[f64], e: &[f64], k: usize) -> Result<f64> {
    let n = d.len();
    if k >= n || e.len() + 1 != n {
        return Err(Error::invalid(format!(
            "eigenvalue index {k} out of range for a {n}×{n} matrix"
        )));
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { e[i].abs() } else { 0.0 };
        let rad = left + right;
        lo = lo.min(d[i] - rad);
        hi = hi.max(d[i] + rad);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(hi);
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_a_system_that_needs_pivoting() {
        // first pivot is zero
        let a = Tridiagonal::new(vec![1.0, 1.0], vec![0.0, 1.0, 2.0], vec![2.0, 3.0]).unwrap();
        let x = vec![1.0, -2.0, 0.5];
        let b = a.apply(&x);
        let got = a.factor().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Tridiagonal::new(vec![1.0], vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(a.factor(), Err(Error::SolverFailure(_))));
    }

    #[test]
    fn bad_band_lengths() {
        assert!(Tridiagonal::new(vec![1.0], vec![1.0, 1.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn bisection_on_discrete_laplacian() {
        // eigenvalues of tridiag(-1, 2, -1) of size n: 2 - 2cos(kπ/(n+1))
        let n = 50;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        for k in [0, 1, 10, n - 1] {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            let got = eigenvalue_by_bisection(&d, &e, k).unwrap();
            assert!((got - exact).abs() < 1e-13, "k={k}: {got} vs {exact}");
        }
        assert_eq!(sturm_count(&d, &e, -0.1), 0);
        assert_eq!(sturm_count(&d, &e, 4.1), n);
    }

    proptest! {
        #[test]
        fn lu_solve_round_trips(
            diag in prop::collection::vec(-5.0..5.0f64, 12),
            sub in prop::collection::vec(-5.0..5.0f64, 11),
            sup in prop::collection::vec(-5.0..5.0f64, 11),
            x in prop::collection::vec(-1.0..1.0f64, 12),
        ) {
            // diagonal dominance keeps the matrix well conditioned
            let diag: Vec<f64> = diag.iter().map(|d| d.abs() + 10.5).collect();
            let a = Tridiagonal::new(sub, diag, sup).unwrap();
            let got = a.factor().unwrap().solve(&a.apply(&x));
            for (g, e) in got.iter().zip(&x) {
                prop_assert!((g - e).abs() < 1e-11);
            }
        }
    }
}
