use super::*;
use crate::linalg::{max_abs_diff, rank, ONE};
use crate::sampling_design::{compressive_sample, random_diagonal, random_shaping, sensing_matrix, MatrixKind};
use crate::si_core::{FrequencyGrid, PeriodicMatrixFunction};
use crate::sparse_model::{synthesize, AmplitudeDist, SparsityProfile};
use crate::testutil::{random_matrix, rng};

fn grid(n: usize) -> FrequencyGrid {
    FrequencyGrid::new(n).unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn planted(m: usize, support: &[usize], n: usize, seed: u64) -> CoefficientBank {
    synthesize(&SparsityProfile::new(m, support.iter().copied()).unwrap(), n, seed, AmplitudeDist::default()).unwrap()
}

#[test]
fn demodulate_identity_and_scalar() {
    let a = sensing_matrix(MatrixKind::Gaussian, 3, 5, 1).unwrap();
    let d = planted(5, &[0, 2], 8, 2);
    let plain = MeasurementDesign::plain(a.clone(), grid(8));
    let y = compressive_sample(&d, &plain).unwrap();
    assert!(demodulate(&y, &plain, 1e8).unwrap().max_abs_diff(&y) < 1e-14);
    let doubled = plain.with_shaping(PeriodicMatrixFunction::constant(grid(8), CMat::identity(3, 3) * C64::new(2.0, 0.0))).unwrap();
    let y2 = compressive_sample(&d, &doubled).unwrap();
    assert!(demodulate(&y2, &doubled, 1e8).unwrap().max_abs_diff(&y) < 1e-14);
}

#[test]
fn demodulate_undoes_random_shaping() {
    let a = sensing_matrix(MatrixKind::Gaussian, 3, 5, 3).unwrap();
    let d = planted(5, &[1, 4], 16, 4);
    let shaped = MeasurementDesign::new(a.clone(), random_shaping(grid(16), 3, 5).unwrap(), None, 1e8).unwrap();
    let y = compressive_sample(&d, &shaped).unwrap();
    let direct = compressive_sample(&d, &MeasurementDesign::plain(a, grid(16))).unwrap();
    assert!(demodulate(&y, &shaped, 1e8).unwrap().max_abs_diff(&direct) <= 1e-10);
}

#[test]
fn demodulate_rejects_singular_shaping() {
    let a = CMat::identity(2, 2);
    let w = PeriodicMatrixFunction::diagonal(grid(4), 2, |q, _| vec![ONE, if q == 2 { ZERO } else { ONE }]).unwrap();
    let design = MeasurementDesign::from_parts(a, w, None).unwrap();
    let y = MeasurementBank::new(vec![vec![ONE; 4]; 2]).unwrap();
    assert!(matches!(demodulate(&y, &design, 1e8), Err(Error::SingularOperator { q: 2, .. })));
}

#[test]
fn q_small_cases() {
    let zero = MeasurementBank::new(vec![vec![ZERO; 5]; 3]).unwrap();
    assert_eq!(compute_q(&zero), CMat::zeros(3, 3));
    let y = MeasurementBank::new(vec![vec![ONE, C64::new(0.0, 1.0)]]).unwrap();
    let q = compute_q(&y);
    assert!((q[(0, 0)] - C64::new(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn q_rank_bounded_by_joint_support() {
    for seed in 0..10 {
        let a = sensing_matrix(MatrixKind::Gaussian, 6, 10, seed).unwrap();
        let d = planted(10, &[1, 5, 7], 32, seed + 100);
        let y = compressive_sample(&d, &MeasurementDesign::plain(a, grid(32))).unwrap();
        let q = compute_q(&y);
        assert!(rank(&q, 1e-10) <= 3);
        let qf = compute_q_frequency(&y);
        assert!(max_abs_diff(&qf, &(q.clone() * C64::new(32.0, 0.0))) <= 1e-10 * qf.norm());
    }
}

#[test]
fn frame_of_identity_and_zero() {
    let f = frame_from_q(&CMat::identity(2, 2), &tol()).unwrap();
    assert_eq!(f.rank(), 2);
    assert!(max_abs_diff(&(&f.v * f.v.adjoint()), &CMat::identity(2, 2)) < 1e-14);
    let z = frame_from_q(&CMat::zeros(3, 3), &tol()).unwrap();
    assert_eq!(z.v.shape(), (3, 0));
}

#[test]
fn frame_spans_top_eigenvectors() {
    let mut r = rng(7);
    let b = random_matrix(&mut r, 4, 2);
    let q = &b * b.adjoint();
    let f = frame_from_q(&q, &tol()).unwrap();
    assert_eq!(f.rank(), 2);
    assert!(max_abs_diff(&(&f.v * f.v.adjoint()), &q) <= 1e-9 * q.norm());
    // Same column space as B: projecting B onto span(V) leaves nothing.
    let resid = crate::linalg::projection_residual(&f.v, &b, 1e-12);
    assert!(resid.norm() <= 1e-10 * b.norm());
}

#[test]
fn indefinite_q_rejected() {
    let q = CMat::from_diagonal(&CVec::from_vec(vec![ONE, C64::new(-0.5, 0.0)]));
    assert!(matches!(frame_from_q(&q, &tol()), Err(Error::InvalidInput(_))));
}

#[test]
fn zero_signal_gives_empty_support() {
    let a = sensing_matrix(MatrixKind::Gaussian, 4, 6, 1).unwrap();
    let design = MeasurementDesign::plain(a, grid(8));
    let y = compressive_sample(&CoefficientBank::zeros(6, 8), &design).unwrap();
    let est = recover_support(&y, &design, 2, &CtfOptions::default()).unwrap();
    assert!(est.support.is_empty());
    assert_eq!(est.rank_q, 0);
}

#[test]
fn planted_support_recovered_end_to_end() {
    let a = sensing_matrix(MatrixKind::Gaussian, 4, 6, 12).unwrap();
    assert!(crate::sampling_design::kruskal_rank(&a, 1e-10).unwrap() >= 4);
    let design = MeasurementDesign::plain(a.clone(), grid(16));
    let d = planted(6, &[0, 3], 16, 13);
    let y = compressive_sample(&d, &design).unwrap();
    let est = recover_support(&y, &design, 2, &CtfOptions::default()).unwrap();
    assert_eq!(est.support, BTreeSet::from([0, 3]));
    // Same answer through any other invertible W.
    let shaped = design.with_shaping(random_shaping(grid(16), 4, 14).unwrap()).unwrap();
    let y2 = compressive_sample(&d, &shaped).unwrap();
    assert_eq!(recover_support(&y2, &shaped, 2, &CtfOptions::default()).unwrap().support, est.support);
    // And with the frequency-domain Gram matrix.
    let opts = CtfOptions { q_domain: QDomain::Frequency, ..CtfOptions::default() };
    assert_eq!(recover_support(&y, &design, 2, &opts).unwrap().support, est.support);
}

#[test]
fn coefficients_exact_on_true_support_and_supersets() {
    let a = sensing_matrix(MatrixKind::Gaussian, 4, 6, 20).unwrap();
    let z = random_diagonal(grid(16), 6, 22).unwrap();
    let design = MeasurementDesign::new(a, random_shaping(grid(16), 4, 21).unwrap(), Some(z), 1e8).unwrap();
    let d = planted(6, &[2, 5], 16, 23);
    let y = compressive_sample(&d, &design).unwrap();
    let exact = recover_coefficients(&y, &design, &BTreeSet::from([2, 5]), &tol()).unwrap();
    assert!(nmse(&exact, &d).unwrap().sqrt() <= 1e-9);
    let superset = recover_coefficients(&y, &design, &BTreeSet::from([1, 2, 5]), &tol()).unwrap();
    assert!(superset.max_abs_diff(&d).unwrap() <= 1e-9 * d.total_energy().sqrt());
    let empty = recover_coefficients(&y, &design, &BTreeSet::new(), &tol()).unwrap();
    assert_eq!(empty, CoefficientBank::zeros(6, 16));
}

#[test]
fn rank_deficient_support_rejected() {
    let mut a = sensing_matrix(MatrixKind::Gaussian, 3, 4, 1).unwrap();
    let c = a.column(0).clone_owned();
    a.set_column(1, &c);
    let design = MeasurementDesign::plain(a, grid(4));
    let y = MeasurementBank::new(vec![vec![ONE; 4]; 3]).unwrap();
    assert!(matches!(
        recover_coefficients(&y, &design, &BTreeSet::from([0, 1]), &tol()),
        Err(Error::RankDeficient { .. })
    ));
}

#[test]
fn frame_choice_does_not_change_support() {
    for seed in 0..10 {
        let a = sensing_matrix(MatrixKind::Gaussian, 5, 8, seed).unwrap();
        let design = MeasurementDesign::plain(a.clone(), grid(16));
        let d = planted(8, &[(seed % 8) as usize, ((seed + 3) % 8) as usize], 16, seed + 50);
        let y = compressive_sample(&d, &design).unwrap();
        let est = recover_support(&y, &design, 2, &CtfOptions::default()).unwrap();
        let mut r = rng(seed + 99);
        let g = random_matrix(&mut r, est.rank_q, est.rank_q);
        let (alt, _) = solve_frame(&a, &est.frame * g, 2, &CtfOptions::default()).unwrap();
        assert_eq!(alt, est.support);
    }
}

#[test]
fn nmse_conventions() {
    let z = CoefficientBank::zeros(2, 3);
    assert_eq!(nmse(&z, &z).unwrap(), 0.0);
    let d = planted(2, &[0], 3, 1);
    assert_eq!(nmse(&z, &d).unwrap(), 1.0);
    assert_eq!(nmse(&d, &z).unwrap(), f64::INFINITY);
}
