//! Fixed-seed invariant checks across every module, each under a stable dotted name.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use si_subnyq_core::ctf::{compute_q, nmse, recover, recover_support, solve_frame, CtfOptions, Solver};
use si_subnyq_core::linalg::{max_abs_diff, rank};
use si_subnyq_core::sampling_design::{
    biorthogonalize, build_sampling_filters, fourier_rows, kruskal_rank, random_diagonal, random_shaping,
    sensing_matrix,
};
use si_subnyq_core::scenarios::{
    build_multiband, build_periodic_sparsity, delay_filter_equivalence_check, derive_seed,
    fractional_delay_demodulate, fractional_delay_frequency, interleave, piecewise_constant_waveform_check,
    active_base_indices, BaseGenerator, MultibandScenario, PeriodicSparsityScenario, DELAY_CHECK_POINTS,
};
use si_subnyq_core::si_core::{
    cross_spectrum, cross_spectrum_matrix, filterbank_sample, filterbank_sample_circular, reconstruct_subspace,
    riesz_check, PiecewiseConstant,
};
use si_subnyq_core::sparse_model::synthesize;
use si_subnyq_core::{
    compressive_sample, AmplitudeDist, CMat, CoefficientBank, FrequencyGrid, GeneratorSet, MatrixKind,
    MeasurementDesign, PeriodicMatrixFunction, SparsityProfile, C64,
};

use crate::config::ExperimentConfig;
use crate::runner::{run_trials, trials_csv};

/// Deliberate faults for exercising the suite's failure path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tamper {
    /// Zero the shaping matrix at one grid point.
    pub singular_w: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        let failed = self.failures().count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

type Check = (&'static str, fn(Tamper) -> (bool, String));

const CHECKS: &[Check] = &[
    ("si_core.box_cross_spectrum", box_cross_spectrum),
    ("si_core.orthonormal_slices", orthonormal_slices),
    ("si_core.riesz_gram", riesz_gram),
    ("si_core.filterbank_dual_path", filterbank_dual_path),
    ("si_core.subspace_round_trip", subspace_round_trip),
    ("sparse_model.support_honesty", support_honesty),
    ("sampling_design.biorthogonality", biorthogonality),
    ("sampling_design.operator_identity", operator_identity),
    ("sampling_design.W_invertible", w_invertible),
    ("sampling_design.compressive_dual_path", compressive_dual_path),
    ("sampling_design.fourier_full_spark", fourier_full_spark),
    ("ctf.rank_bound", rank_bound),
    ("ctf.frame_invariance", frame_invariance),
    ("ctf.shaping_invariance", shaping_invariance),
    ("ctf.exact_recovery", exact_recovery),
    ("ctf.somp_agreement", somp_agreement),
    ("scenarios.periodic_waveform", periodic_waveform),
    ("scenarios.periodic_pattern", periodic_pattern),
    ("scenarios.rate_accounting", rate_accounting),
    ("scenarios.delay_filter", delay_filter),
    ("scenarios.fractional_delay", fractional_delay),
    ("scenarios.multiband_recovery", multiband_recovery),
    ("cli.determinism", determinism),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

pub fn verify(tamper: Tamper) -> VerifyReport {
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = f(tamper);
            CheckResult { name, passed, detail }
        })
        .collect();
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}

fn grid(n: usize) -> FrequencyGrid {
    FrequencyGrid::new(n).expect("positive grid")
}

fn cgauss(r: &mut ChaCha8Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(s * r.sample::<f64, _>(StandardNormal), s * r.sample::<f64, _>(StandardNormal))
}

fn random_generators(r: &mut ChaCha8Rng, channels: usize, n: usize) -> GeneratorSet {
    let aliases = channels + 1;
    let alias: Vec<i64> = (0..aliases as i64).map(|j| j - aliases as i64 / 2).collect();
    let lo = alias[0];
    let vals: Vec<C64> = (0..channels * n * aliases).map(|_| cgauss(r)).collect();
    GeneratorSet::spectral(1.0, grid(n), alias, channels, move |ch, q, j| {
        vals[(ch * n + q) * aliases + (j - lo) as usize]
    })
    .expect("valid alias table")
}

fn within(value: f64, tol: f64, what: &str) -> (bool, String) {
    (value <= tol, format!("{what} = {value:.2e} (limit {tol:.0e})"))
}

fn fail(e: impl std::fmt::Display) -> (bool, String) {
    (false, format!("error: {e}"))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(e),
        }
    };
}

fn planted(m: usize, k: usize, n: usize, seed: u64) -> CoefficientBank {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let profile = SparsityProfile::random(m, k, &mut r).expect("k <= m");
    synthesize(&profile, n, derive_seed(seed, 1), AmplitudeDist::ComplexGaussian).expect("n >= 1")
}

fn full_spark(p: usize, m: usize, seed: u64) -> CMat {
    (0..)
        .map(|i| sensing_matrix(MatrixKind::Gaussian, p, m, derive_seed(seed, i)).expect("p <= m"))
        .find(|a| kruskal_rank(a, 1e-10).expect("small m") == p)
        .expect("generic draws have full spark")
}

fn box_cross_spectrum(_: Tamper) -> (bool, String) {
    let g = tri!(GeneratorSet::piecewise(1.0, 1.0, grid(16), vec![PiecewiseConstant::unit_box(0)]));
    let phi = tri!(cross_spectrum(&g, 0, &g, 0));
    within(phi.iter().map(|z| (z - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max), 1e-14, "max |phi_AA - 1|")
}

fn orthonormal_slices(_: Tamper) -> (bool, String) {
    let sc = multiband_scenario(7, vec![1, 2, 4, 7], 0);
    let b = tri!(build_multiband(&sc));
    let m_aa = tri!(cross_spectrum_matrix(&b.generators, &b.generators));
    let id = CMat::identity(7, 7);
    within(m_aa.values().iter().map(|v| max_abs_diff(v, &id)).fold(0.0, f64::max), 1e-12, "max |M_AA - I|")
}

fn riesz_gram(_: Tamper) -> (bool, String) {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let a = random_generators(&mut r, 3, 8);
    let gram = tri!(cross_spectrum_matrix(&a, &a));
    let rep = tri!(riesz_check(&gram, 1e-12, 1e12, 1e-12));
    (rep.is_riesz && rep.min_eig >= 0.0, format!("eigenvalues in [{:.3e}, {:.3e}]", rep.min_eig, rep.max_eig))
}

fn filterbank_dual_path(_: Tamper) -> (bool, String) {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let op = tri!(PeriodicMatrixFunction::from_fn(grid(12), 3, 5, |_, _| CMat::from_fn(3, 5, |_, _| cgauss(&mut r))));
    let d = planted(5, 3, 12, 5);
    let a = tri!(filterbank_sample(&d, &op));
    let b = tri!(filterbank_sample_circular(&d, &op));
    within(a.max_abs_diff(&b), 1e-12, "frequency vs circular convolution")
}

fn subspace_round_trip(_: Tamper) -> (bool, String) {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let op = tri!(PeriodicMatrixFunction::from_fn(grid(8), 4, 4, |_, _| {
        CMat::identity(4, 4) * C64::new(3.0, 0.0) + CMat::from_fn(4, 4, |_, _| cgauss(&mut r) * 0.3)
    }));
    let d = planted(4, 4, 8, 7);
    let c = tri!(filterbank_sample(&d, &op));
    let back = tri!(reconstruct_subspace(&c, &op, 1e8));
    within(tri!(back.max_abs_diff(&d)), 1e-10, "max |d_hat - d|")
}

fn support_honesty(_: Tamper) -> (bool, String) {
    let profile = tri!(SparsityProfile::new(9, [0, 4, 8]));
    let d = tri!(synthesize(&profile, 16, 8, AmplitudeDist::UnitModulus));
    (d.support() == profile.support(), format!("support {:?}", d.support()))
}

fn biorthogonality(_: Tamper) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut r = ChaCha8Rng::seed_from_u64(100 + seed);
        let m = r.random_range(1..=6);
        let a = random_generators(&mut r, m, 8);
        let h = random_generators(&mut r, m, 8);
        let v = tri!(biorthogonalize(&h, &a, 1e8));
        let m_va = tri!(cross_spectrum_matrix(&v, &a));
        let id = CMat::identity(m, m);
        worst = m_va.values().iter().map(|x| max_abs_diff(x, &id)).fold(worst, f64::max);
    }
    within(worst, 1e-10, "max |M_VA - I|")
}

fn operator_identity(_: Tamper) -> (bool, String) {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let (m, p, n) = (4, 2, 8);
    let a_gen = random_generators(&mut r, m, n);
    let v = tri!(biorthogonalize(&random_generators(&mut r, m, n), &a_gen, 1e8));
    let design = tri!(MeasurementDesign::new(
        tri!(sensing_matrix(MatrixKind::Gaussian, p, m, 10)),
        tri!(random_shaping(grid(n), p, 11)),
        Some(tri!(random_diagonal(grid(n), m, 12))),
        1e8,
    ));
    let s = tri!(build_sampling_filters(&design, &v));
    let m_sa = tri!(cross_spectrum_matrix(&s, &a_gen));
    let op = tri!(design.operator());
    within(m_sa.values().iter().zip(op.values()).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max), 1e-10, "max |M_SA - W A Z|")
}

fn w_invertible(t: Tamper) -> (bool, String) {
    let mut w = tri!(random_shaping(grid(8), 3, 13));
    if t.singular_w {
        let mut values = w.values().to_vec();
        values[5] = CMat::zeros(3, 3);
        w = tri!(PeriodicMatrixFunction::new(grid(8), values));
    }
    let a = tri!(sensing_matrix(MatrixKind::Gaussian, 3, 5, 14));
    match MeasurementDesign::new(a, w, None, 1e8) {
        Ok(_) => (true, "W invertible at all 8 grid points".into()),
        Err(e) => (false, e.to_string()),
    }
}

fn compressive_dual_path(_: Tamper) -> (bool, String) {
    let design = tri!(MeasurementDesign::new(
        tri!(sensing_matrix(MatrixKind::Gaussian, 3, 5, 15)),
        tri!(random_shaping(grid(8), 3, 16)),
        Some(tri!(random_diagonal(grid(8), 5, 17))),
        1e8,
    ));
    let d = planted(5, 2, 8, 18);
    let direct = tri!(compressive_sample(&d, &design));
    let fb = tri!(filterbank_sample(&d, &tri!(design.operator())));
    within(direct.max_abs_diff(&fb), 1e-12, "direct vs filter bank")
}

fn fourier_full_spark(_: Tamper) -> (bool, String) {
    let a = tri!(fourier_rows(7, &[1, 3, 4]));
    let s = tri!(kruskal_rank(&a, 1e-10));
    (s == 3, format!("kruskal rank {s} for 3 rows of the 7-point DFT"))
}

fn rank_bound(_: Tamper) -> (bool, String) {
    let mut worst = 0;
    for seed in 0..10 {
        let design = MeasurementDesign::plain(full_spark(5, 8, seed), grid(16));
        let y = tri!(compressive_sample(&planted(8, 3, 16, seed), &design));
        worst = worst.max(rank(&compute_q(&y), 1e-10));
    }
    (worst <= 3, format!("max rank(Q) = {worst} for k = 3"))
}

fn frame_invariance(_: Tamper) -> (bool, String) {
    let opts = CtfOptions::default();
    let mut r = ChaCha8Rng::seed_from_u64(19);
    for seed in 0..10 {
        let a = full_spark(4, 7, seed);
        let design = MeasurementDesign::plain(a.clone(), grid(16));
        let y = tri!(compressive_sample(&planted(7, 2, 16, seed + 20), &design));
        let est = tri!(recover_support(&y, &design, 2, &opts));
        let g = CMat::from_fn(est.rank_q, est.rank_q, |_, _| cgauss(&mut r));
        let (alt, _) = tri!(solve_frame(&a, &est.frame * g, 2, &opts));
        if alt != est.support {
            return (false, format!("seed {seed}: {alt:?} vs {:?}", est.support));
        }
    }
    (true, "10 seeds agree under V -> V G".into())
}

fn shaping_invariance(_: Tamper) -> (bool, String) {
    let opts = CtfOptions::default();
    for seed in 0..10 {
        let a = full_spark(4, 7, seed + 40);
        let plain = MeasurementDesign::plain(a, grid(16));
        let shaped = tri!(tri!(plain.with_shaping(tri!(random_shaping(grid(16), 4, seed))))
            .with_diagonal(Some(tri!(random_diagonal(grid(16), 7, seed)))));
        let d = planted(7, 2, 16, seed + 60);
        let s1 = tri!(recover_support(&tri!(compressive_sample(&d, &plain)), &plain, 2, &opts)).support;
        let s2 = tri!(recover_support(&tri!(compressive_sample(&d, &shaped)), &shaped, 2, &opts)).support;
        if s1 != s2 || &s1 != d.support() {
            return (false, format!("seed {seed}: {s1:?} vs {s2:?}"));
        }
    }
    (true, "10 seeds agree with random W and Z".into())
}

fn exact_recovery(_: Tamper) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let design = MeasurementDesign::plain(full_spark(4, 6, seed + 80), grid(32));
        let d = planted(6, 2, 32, seed + 81);
        let r = tri!(recover(&tri!(compressive_sample(&d, &design)), &design, 2, &CtfOptions::default()));
        if r.support != *d.support() {
            return (false, format!("seed {seed}: found {:?}", r.support));
        }
        worst = worst.max(tri!(nmse(&r.coefficients, &d)));
    }
    within(worst, 1e-9, "worst nmse over 20 instances")
}

fn somp_agreement(_: Tamper) -> (bool, String) {
    let (mut agree, total) = (0, 40);
    for seed in 0..total {
        let design = MeasurementDesign::plain(tri!(sensing_matrix(MatrixKind::Gaussian, 8, 20, seed + 200)), grid(16));
        let y = tri!(compressive_sample(&planted(20, 2, 16, seed + 300), &design));
        let ex = tri!(recover_support(&y, &design, 2, &CtfOptions::default())).support;
        let so = tri!(recover_support(&y, &design, 2, &CtfOptions::with_solver(Solver::Somp))).support;
        agree += usize::from(ex == so);
    }
    (agree * 100 >= 95 * total as usize, format!("{agree}/{total} supports agree"))
}

fn periodic_scenario(m: usize, pattern: Vec<usize>, p: usize, seed: u64) -> PeriodicSparsityScenario {
    PeriodicSparsityScenario {
        m,
        k: pattern.len(),
        pattern,
        base_period: 1.0,
        n_blocks: 8,
        seed,
        p,
        matrix_kind: MatrixKind::Gaussian,
        sensing: None,
        generator: BaseGenerator::Box,
        amplitude: AmplitudeDist::ComplexGaussian,
    }
}

fn multiband_scenario(m: usize, cosets: Vec<usize>, seed: u64) -> MultibandScenario {
    MultibandScenario {
        n_bands: 1,
        band_width: std::f64::consts::TAU / m as f64,
        m,
        nyquist_period: 1.0,
        cosets,
        seed,
        n: 16,
        amplitude: AmplitudeDist::ComplexGaussian,
    }
}

fn periodic_waveform(_: Tamper) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let b = tri!(build_periodic_sparsity(&periodic_scenario(4, vec![2], 2, seed)));
        worst = worst.max(tri!(piecewise_constant_waveform_check(&b)).relative_error);
    }
    within(worst, 1e-6, "quadrature vs filter bank (relative)")
}

fn periodic_pattern(_: Tamper) -> (bool, String) {
    let b = tri!(build_periodic_sparsity(&periodic_scenario(7, vec![1, 4], 4, 21)));
    let r = tri!(recover(&tri!(b.measurements()), &b.design, 2, &CtfOptions::default()));
    let idx = active_base_indices(&interleave(&r.coefficients), 1e-9);
    let ok = !idx.is_empty() && idx.iter().all(|t| t % 7 == 1 || t % 7 == 4);
    (ok, format!("{} recovered indices, all 1 or 4 mod 7: {ok}", idx.len()))
}

fn rate_accounting(_: Tamper) -> (bool, String) {
    let r = periodic_scenario(7, vec![1, 4], 4, 0).rate();
    (r.factor == (4, 7), format!("compression factor {}/{}", r.factor.0, r.factor.1))
}

fn delay_filter(_: Tamper) -> (bool, String) {
    let b = tri!(build_multiband(&multiband_scenario(7, vec![1, 3, 4, 7], 1)));
    let rep = tri!(delay_filter_equivalence_check(&b, DELAY_CHECK_POINTS));
    within(rep.dense_deviation.max(rep.grid_deviation), 1e-9, "max |G_i - e^{-j c_i ω T}|")
}

fn fractional_delay(_: Tamper) -> (bool, String) {
    let mut r = ChaCha8Rng::seed_from_u64(22);
    let y: Vec<C64> = (0..32).map(|_| cgauss(&mut r)).collect();
    let a = tri!(fractional_delay_demodulate(&y, 3, 4, 1.0));
    let b = tri!(fractional_delay_frequency(&y, 3, 4, 1.0));
    let norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    within(err / norm, 1e-8, "chain vs multiply (relative)")
}

fn multiband_recovery(_: Tamper) -> (bool, String) {
    for seed in 0..5 {
        let b = tri!(build_multiband(&multiband_scenario(7, vec![1, 2, 4, 7], seed)));
        let r = tri!(recover(&tri!(b.measurements()), &b.design, 2, &CtfOptions::default()));
        if &r.support != b.active_slices() || tri!(nmse(&r.coefficients, b.signal.coefficients())) > 1e-9 {
            return (false, format!("seed {seed}: found {:?}", r.support));
        }
    }
    (true, "5 seeds recover the slice support".into())
}

fn determinism(_: Tamper) -> (bool, String) {
    let cfg = ExperimentConfig { trials: 4, seed: 7, ..ExperimentConfig::default() };
    let a = tri!(run_trials(&cfg).and_then(|o| trials_csv(&o.records)));
    let b = tri!(run_trials(&cfg).and_then(|o| trials_csv(&o.records)));
    (a == b, format!("{} CSV bytes, identical: {}", a.len(), a == b))
}
