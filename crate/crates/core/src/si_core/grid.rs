use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, max_abs_diff, CMat, CVec, C64};
use crate::dft;

/// Uniform digital-frequency grid `omega_q = 2 pi q / N`, `q = 0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FrequencyGrid {
    n: usize,
}

impl FrequencyGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("frequency grid needs at least one point".into()));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn omega(&self, q: usize) -> f64 {
        2.0 * PI * q as f64 / self.n as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |q| self.omega(q))
    }
}

impl TryFrom<usize> for FrequencyGrid {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<FrequencyGrid> for usize {
    fn from(g: FrequencyGrid) -> usize {
        g.n
    }
}

/// A matrix-valued 2π-periodic function known at the points of a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMatrixFunction {
    rows: usize,
    cols: usize,
    grid: FrequencyGrid,
    values: Vec<CMat>,
}

impl PeriodicMatrixFunction {
    pub fn new(grid: FrequencyGrid, values: Vec<CMat>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} matrices supplied for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        let (rows, cols) = values[0].shape();
        if let Some(q) = values.iter().position(|v| v.shape() != (rows, cols)) {
            return Err(Error::Dimension(format!(
                "grid point {q} has shape {:?}, expected {:?}",
                values[q].shape(),
                (rows, cols)
            )));
        }
        Ok(Self { rows, cols, grid, values })
    }

    pub fn from_fn(
        grid: FrequencyGrid,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, f64) -> CMat,
    ) -> Result<Self> {
        let values = (0..grid.len()).map(|q| f(q, grid.omega(q))).collect::<Vec<_>>();
        let out = Self::new(grid, values)?;
        if out.rows != rows || out.cols != cols {
            return Err(Error::Dimension(format!(
                "generated {}x{} matrices, expected {rows}x{cols}",
                out.rows, out.cols
            )));
        }
        Ok(out)
    }

    pub fn constant(grid: FrequencyGrid, m: CMat) -> Self {
        let (rows, cols) = m.shape();
        Self { rows, cols, grid, values: vec![m; grid.len()] }
    }

    pub fn identity(grid: FrequencyGrid, n: usize) -> Self {
        Self::constant(grid, CMat::identity(n, n))
    }

    /// Diagonal function built from per-point diagonal entries.
    pub fn diagonal(grid: FrequencyGrid, n: usize, mut f: impl FnMut(usize, f64) -> Vec<C64>) -> Result<Self> {
        Self::from_fn(grid, n, n, |q, w| {
            let d = f(q, w);
            CMat::from_diagonal(&CVec::from_vec(d))
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    pub fn at(&self, q: usize) -> &CMat {
        &self.values[q]
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    /// Pointwise product `self(ω) · rhs(ω)`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.grid != rhs.grid || self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} on N={} by {}x{} on N={}",
                self.rows,
                self.cols,
                self.grid.len(),
                rhs.rows,
                rhs.cols,
                rhs.grid.len()
            )));
        }
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a * b).collect();
        Ok(Self { rows: self.rows, cols: rhs.cols, grid: self.grid, values })
    }

    /// Pointwise product with a frequency-independent matrix on the right.
    pub fn mul_const(&self, rhs: &CMat) -> Result<Self> {
        self.mul(&Self::constant(self.grid, rhs.clone()))
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(f).collect())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest deviation from a frequency-independent function.
    pub fn variation(&self) -> f64 {
        self.values.iter().map(|v| max_abs_diff(v, &self.values[0])).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && self.values.iter().all(|v| {
                (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || v[(r, c)] == C64::new(0.0, 0.0)))
            })
    }

    /// Fails on the first grid point whose condition number exceeds `cond_tol`.
    pub fn check_invertible(&self, cond_tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("{}x{} operator is not square", self.rows, self.cols)));
        }
        for (q, v) in self.values.iter().enumerate() {
            let cond = condition_number(v);
            // Negated so a NaN condition number also counts as singular.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(cond <= cond_tol) {
                return Err(Error::SingularOperator { q, cond, limit: cond_tol });
            }
        }
        Ok(())
    }

    pub fn inverse(&self, cond_tol: f64) -> Result<Self> {
        self.check_invertible(cond_tol)?;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(q, v)| {
                v.clone().try_inverse().ok_or(Error::SingularOperator { q, cond: f64::INFINITY, limit: cond_tol })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.grid, values)
    }

    /// Circular impulse responses: entry `(i, l)` of `taps[n]` is the inverse DFT of
    /// `[self(ω_q)]_{il}` at lag `n`.
    pub fn taps(&self) -> Vec<CMat> {
        let n = self.grid.len();
        let mut out = vec![CMat::zeros(self.rows, self.cols); n];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let spectrum: Vec<C64> = self.values.iter().map(|v| v[(r, c)]).collect();
                for (lag, h) in dft::inverse(&spectrum).into_iter().enumerate() {
                    out[lag][(r, c)] = h;
                }
            }
        }
        out
    }
}
