use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

fn check_rectangular(sequences: &[Vec<C64>]) -> Result<usize> {
    let len = sequences.first().map_or(0, Vec::len);
    if let Some(i) = sequences.iter().position(|s| s.len() != len) {
        return Err(Error::Dimension(format!(
            "channel {i} has length {}, expected {len}",
            sequences[i].len()
        )));
    }
    Ok(len)
}

/// `m` coefficient sequences `d_l[n]` of common length `N`, with circular semantics.
///
/// The support is derived from the data: a channel belongs to it iff some entry is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBank {
    sequences: Vec<Vec<C64>>,
    len: usize,
    support: BTreeSet<usize>,
}

impl CoefficientBank {
    pub fn new(sequences: Vec<Vec<C64>>) -> Result<Self> {
        let len = check_rectangular(&sequences)?;
        let support = sequences
            .iter()
            .enumerate()
            .filter(|(_, s)| s.iter().any(|&z| z != ZERO))
            .map(|(i, _)| i)
            .collect();
        Ok(Self { sequences, len, support })
    }

    pub fn zeros(m: usize, len: usize) -> Self {
        Self { sequences: vec![vec![ZERO; len]; m], len, support: BTreeSet::new() }
    }

    pub fn channels(&self) -> usize {
        self.sequences.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sequences(&self) -> &[Vec<C64>] {
        &self.sequences
    }

    pub fn channel(&self, l: usize) -> &[C64] {
        &self.sequences[l]
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn energy(&self, l: usize) -> f64 {
        self.sequences[l].iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn total_energy(&self) -> f64 {
        (0..self.channels()).map(|l| self.energy(l)).sum()
    }

    pub fn into_sequences(self) -> Vec<Vec<C64>> {
        self.sequences
    }

    /// `||self - other||^2` over all channels and samples.
    pub fn squared_distance(&self, other: &Self) -> Result<f64> {
        if self.channels() != other.channels() || self.len != other.len {
            return Err(Error::Dimension("coefficient banks differ in shape".into()));
        }
        Ok(self
            .sequences
            .iter()
            .zip(&other.sequences)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()))
            .sum())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.channels() != other.channels() || self.len != other.len {
            return Err(Error::Dimension("coefficient banks differ in shape".into()));
        }
        Ok(self
            .sequences
            .iter()
            .zip(&other.sequences)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }
}

/// `p` sample sequences `y_i[n]` of common length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBank {
    sequences: Vec<Vec<C64>>,
    len: usize,
}

impl MeasurementBank {
    pub fn new(sequences: Vec<Vec<C64>>) -> Result<Self> {
        let len = check_rectangular(&sequences)?;
        Ok(Self { sequences, len })
    }

    pub fn channels(&self) -> usize {
        self.sequences.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sequences(&self) -> &[Vec<C64>] {
        &self.sequences
    }

    pub fn channel(&self, i: usize) -> &[C64] {
        &self.sequences[i]
    }

    pub fn into_sequences(self) -> Vec<Vec<C64>> {
        self.sequences
    }

    pub fn norm(&self) -> f64 {
        self.sequences.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sequences
            .iter()
            .zip(&other.sequences)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}
