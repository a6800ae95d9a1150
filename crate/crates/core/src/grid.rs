//! Uniform radial grids on `[0, r_max]` and composite Simpson quadrature in the
//! `r dr` and `r³ dr` measures.
//!
//! Every integral over `[0, ∞)` in this crate is approximated on `[0, r_max]`;
//! the profiles involved decay like `e^{-r}`, so the truncation error is far
//! below the quadrature error once `r_max` is chosen from the decay of `Q`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial measure attached to an inner product or an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    /// `r dr`, the radial part of the 2D Lebesgue measure.
    Rdr,
    /// `r³ dr`, the measure of the conjugated operators.
    R3dr,
}

/// Uniform grid `r_i = i·h`, `i = 0..n`, with `r_{n-1} = r_max`.
///
/// `n` is odd so that Simpson's rule applies on the whole interval.
#[derive(Clone)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    h: f64,
    w_rdr: Vec<f64>,
    w_r3dr: Vec<f64>,
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("r_max", &self.r_max)
            .field("n", &self.n)
            .field("h", &self.h)
            .finish()
    }
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Arc<Self>> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
        }
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "grid needs an odd number of points >= 3 for Simpson's rule, got {n}"
            )));
        }
        let h = r_max / (n - 1) as f64;
        Ok(Arc::new(Self::build(h, n)))
    }

    /// Grid with a given spacing and an even number of intervals; `r_max = intervals·h`.
    pub fn with_spacing(h: f64, intervals: usize) -> Result<Arc<Self>> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {h}")));
        }
        if intervals < 2 || intervals % 2 == 1 {
            return Err(Error::invalid(format!(
                "Simpson's rule needs an even number of intervals, got {intervals}"
            )));
        }
        Ok(Arc::new(Self::build(h, intervals + 1)))
    }

    fn build(h: f64, n: usize) -> Self {
        let simpson = simpson_weights(n, h);
        let mut w_rdr = Vec::with_capacity(n);
        let mut w_r3dr = Vec::with_capacity(n);
        for (i, w) in simpson.iter().enumerate() {
            let r = i as f64 * h;
            w_rdr.push(w * r);
            w_r3dr.push(w * r * r * r);
        }
        RadialGrid {
            r_max: (n - 1) as f64 * h,
            n,
            h,
            w_rdr,
            w_r3dr,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.r(i))
    }

    /// Simpson weights with the measure folded in.
    pub fn weights(&self, measure: Measure) -> &[f64] {
        match measure {
            Measure::Rdr => &self.w_rdr,
            Measure::R3dr => &self.w_r3dr,
        }
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n == other.n && self.h.to_bits() == other.h.to_bits()
    }

    /// Same interval, spacing halved.
    pub fn refined(&self) -> Arc<Self> {
        Arc::new(Self::build(self.h / 2.0, 2 * self.n - 1))
    }

    /// Index of the grid point at radius `r`, if `r` is (to rounding) a grid point.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        let x = r / self.h;
        let i = x.round();
        if (x - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.n {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Composite Simpson weights for `n` (odd) equally spaced points.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    debug_assert!(n >= 3 && n % 2 == 1);
    (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Composite Simpson integral of equally spaced samples.
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Simpson's rule needs an odd number of samples >= 3, got {n}"
        )));
    }
    Ok(simpson_weights(n, h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum())
}

/// Real samples on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::invalid(format!(
                "grid function has {} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value {} at r = {}",
                values[i],
                grid.r(i)
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_raw(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        GridFunction::from_raw(grid, vec![0.0; n])
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.radii().map(f).collect();
        GridFunction::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.r(i), v))
            .collect();
        GridFunction::from_raw(self.grid.clone(), values)
    }

    /// Pointwise `f(r, self, other)`. Panics if the grids differ.
    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64, f64) -> f64) -> GridFunction {
        assert_same_grid(self, other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (&a, &b))| f(self.grid.r(i), a, b))
            .collect();
        GridFunction::from_raw(self.grid.clone(), values)
    }

    /// `r·v(r)`.
    pub fn times_r(&self) -> GridFunction {
        self.map(|r, v| r * v)
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        self.map(|_, v| a * v)
    }

    /// `self += a·other`. Panics if the grids differ.
    pub fn add_scaled(&mut self, a: f64, other: &GridFunction) {
        assert_same_grid(self, other);
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

fn assert_same_grid(a: &GridFunction, b: &GridFunction) {
    assert!(
        a.grid.same_as(&b.grid),
        "grid functions live on different grids ({:?} vs {:?})",
        a.grid,
        b.grid
    );
}

impl Add for &GridFunction {
    type Output = GridFunction;

    fn add(self, rhs: &GridFunction) -> GridFunction {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;

    fn sub(self, rhs: &GridFunction) -> GridFunction {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Mul<&GridFunction> for f64 {
    type Output = GridFunction;

    fn mul(self, rhs: &GridFunction) -> GridFunction {
        rhs.scaled(self)
    }
}

fn weighted_dot(u: &GridFunction, v: &GridFunction, measure: Measure) -> Result<f64> {
    if !u.grid.same_as(&v.grid) {
        return Err(Error::invalid(format!(
            "inner product of functions on different grids ({:?} vs {:?})",
            u.grid, v.grid
        )));
    }
    Ok(u.grid
        .weights(measure)
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(w, (a, b))| w * (a * b))
        .sum())
}

/// `⟪u, v⟫ = ∫ u v r dr` by composite Simpson.
pub fn inner_rdr(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    weighted_dot(u, v, Measure::Rdr)
}

/// `∫ u v r³ dr` by composite Simpson.
pub fn inner_r3dr(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    weighted_dot(u, v, Measure::R3dr)
}

/// `‖u‖²_{L²(ℝ²)}` of the radial function `u(|x|)`, i.e. `2π⟪u, u⟫`.
pub fn norm2d_sq(u: &GridFunction) -> f64 {
    2.0 * PI * inner_rdr(u, u).expect("a function shares its own grid")
}

/// `⟪u, u⟫^{1/2}`.
pub fn norm_rdr(u: &GridFunction) -> f64 {
    inner_rdr(u, u)
        .expect("a function shares its own grid")
        .max(0.0)
        .sqrt()
}
