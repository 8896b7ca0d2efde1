use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::si_core::{FrequencyGrid, PeriodicMatrixFunction};

use super::{MatrixKind, MeasurementDesign};

/// JSON form of a [`MeasurementDesign`]. Complex values are `[re, im]` pairs; matrices are row-major.
///
/// Doubles are written in shortest round-trip form, so a decode reproduces every bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub p: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<[f64; 2]>,
    /// One row-major `p x p` block per grid point.
    #[serde(rename = "W")]
    pub w: Vec<Vec<[f64; 2]>>,
    /// One length-`m` diagonal per grid point.
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub matrix_kind: Option<MatrixKind>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn row_major(m: &CMat) -> Vec<[f64; 2]> {
    (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| (r, c))).map(|(r, c)| pair(&m[(r, c)])).collect()
}

fn from_row_major(rows: usize, cols: usize, data: &[[f64; 2]], what: &str) -> Result<CMat> {
    if data.len() != rows * cols {
        return Err(Error::Dimension(format!("{what}: {} entries, expected {rows}x{cols}", data.len())));
    }
    Ok(CMat::from_fn(rows, cols, |r, c| {
        let [re, im] = data[r * cols + c];
        C64::new(re, im)
    }))
}

impl DesignDocument {
    pub fn from_design(d: &MeasurementDesign) -> Self {
        Self {
            p: d.p(),
            m: d.m(),
            n: d.grid().len(),
            a: row_major(d.a()),
            w: d.w().values().iter().map(row_major).collect(),
            z: d.z().map(|z| z.values().iter().map(|v| v.diagonal().iter().map(pair).collect()).collect()),
            matrix_kind: d.matrix_kind(),
            seed: d.seed(),
        }
    }

    /// Rebuilds the design; shapes are checked, invertibility is checked against `cond_tol`.
    pub fn to_design(&self, cond_tol: f64) -> Result<MeasurementDesign> {
        let grid = FrequencyGrid::new(self.n)?;
        if self.w.len() != self.n {
            return Err(Error::Dimension(format!("W has {} grid points, N = {}", self.w.len(), self.n)));
        }
        let a = from_row_major(self.p, self.m, &self.a, "A")?;
        let w = self
            .w
            .iter()
            .map(|blk| from_row_major(self.p, self.p, blk, "W"))
            .collect::<Result<Vec<_>>>()?;
        let w = PeriodicMatrixFunction::new(grid, w)?;
        let z = match &self.z {
            None => None,
            Some(diags) => {
                if diags.len() != self.n || diags.iter().any(|d| d.len() != self.m) {
                    return Err(Error::Dimension("Z must hold one length-m diagonal per grid point".into()));
                }
                let vals = diags
                    .iter()
                    .map(|d| CMat::from_diagonal(&CVec::from_iterator(self.m, d.iter().map(|&[re, im]| C64::new(re, im)))))
                    .collect();
                Some(PeriodicMatrixFunction::new(grid, vals)?)
            }
        };
        Ok(MeasurementDesign::new(a, w, z, cond_tol)?.with_provenance(self.matrix_kind, self.seed))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
