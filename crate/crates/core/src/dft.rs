//! Unnormalized forward DFT and normalized inverse, `X[q] = sum_n x[n] e^{-j 2 pi q n / N}`.

use rustfft::FftPlanner;

use crate::linalg::C64;

pub fn forward(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

pub fn inverse(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        for z in &mut buf {
            *z *= scale;
        }
    }
    buf
}

pub fn forward_all(seqs: &[Vec<C64>]) -> Vec<Vec<C64>> {
    seqs.iter().map(|s| forward(s)).collect()
}

pub fn inverse_all(seqs: &[Vec<C64>]) -> Vec<Vec<C64>> {
    seqs.iter().map(|s| inverse(s)).collect()
}

/// DTFT of a finite sequence starting at index `start`, evaluated at `omega`.
pub fn dtft(x: &[C64], start: i64, omega: f64) -> C64 {
    x.iter()
        .enumerate()
        .map(|(n, &v)| v * C64::from_polar(1.0, -omega * (start + n as i64) as f64))
        .sum()
}
