//! Fixed benchmark instances shared by the criterion benches.

use si_subnyq_core::ctf::{compute_q, frame_from_q};
use si_subnyq_core::sampling_design::sensing_matrix;
use si_subnyq_core::sparse_model::synthesize;
use si_subnyq_core::{
    compressive_sample, AmplitudeDist, CMat, CoefficientBank, FrequencyGrid, MatrixKind, MeasurementBank,
    MeasurementDesign, SparsityProfile, Tolerances,
};

pub struct Instance {
    pub design: MeasurementDesign,
    pub truth: CoefficientBank,
    pub y: MeasurementBank,
    pub k: usize,
}

/// Gaussian `p x m` design with `k` active channels spread evenly over `0..m`.
pub fn instance(m: usize, p: usize, k: usize, n: usize, seed: u64) -> Instance {
    let grid = FrequencyGrid::new(n).expect("n >= 1");
    let a = sensing_matrix(MatrixKind::Gaussian, p, m, seed).expect("p, m >= 1");
    let design = MeasurementDesign::plain(a, grid);
    let profile = SparsityProfile::new(m, (0..k).map(|i| i * m / k.max(1))).expect("indices below m");
    let truth = synthesize(&profile, n, seed ^ 1, AmplitudeDist::ComplexGaussian).expect("n >= 1");
    let y = compressive_sample(&truth, &design).expect("matching shapes");
    Instance { design, truth, y, k }
}

/// The frame `V` handed to the MMV solvers.
pub fn frame(inst: &Instance) -> CMat {
    frame_from_q(&compute_q(&inst.y), &Tolerances::default()).expect("hermitian Q").v
}
