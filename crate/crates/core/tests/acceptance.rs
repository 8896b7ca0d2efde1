//! Acceptance criteria at desk scale. Runs without the test harness so every criterion prints
//! exactly one PASS/FAIL line; the process fails if any criterion does.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use si_subnyq_core::combinatorics::Combinations;
use si_subnyq_core::ctf::{compute_q, nmse, recover, recover_support, solve_frame, CtfOptions, MmvProblem, Solver};
use si_subnyq_core::linalg::{max_abs_diff, rank};
use si_subnyq_core::sampling_design::{
    biorthogonalize, build_sampling_filters, kruskal_rank, random_diagonal, random_shaping, sensing_matrix,
};
use si_subnyq_core::scenarios::{
    active_base_indices, build_multiband, build_periodic_sparsity, delay_filter_equivalence_check, derive_seed,
    fractional_delay_demodulate, fractional_delay_frequency, interleave, piecewise_constant_waveform_check,
    BaseGenerator, MultibandScenario, PeriodicSparsityScenario, DELAY_CHECK_POINTS,
};
use si_subnyq_core::si_core::cross_spectrum_matrix;
use si_subnyq_core::sparse_model::synthesize;
use si_subnyq_core::{
    compressive_sample, AmplitudeDist, CMat, FrequencyGrid, GeneratorSet, MatrixKind,
    MeasurementDesign, SparsityProfile, Tolerances, C64,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn cgauss(r: &mut ChaCha8Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(s * r.sample::<f64, _>(StandardNormal), s * r.sample::<f64, _>(StandardNormal))
}

fn grid(n: usize) -> FrequencyGrid {
    FrequencyGrid::new(n).unwrap()
}

/// Seeded `p x m` Gaussian matrix with Kruskal rank exactly `p`, redrawing until it has.
fn full_spark(p: usize, m: usize, seed: u64) -> CMat {
    (0..)
        .map(|attempt| sensing_matrix(MatrixKind::Gaussian, p, m, derive_seed(seed, 100 + attempt)).unwrap())
        .find(|a| kruskal_rank(a, 1e-10).unwrap() == p)
        .unwrap()
}

fn random_support(m: usize, k: usize, r: &mut ChaCha8Rng) -> SparsityProfile {
    SparsityProfile::random(m, k, r).unwrap()
}

/// Random spectral generator set whose alias table has more entries than channels.
fn random_generators(r: &mut ChaCha8Rng, channels: usize, n: usize, period: f64) -> GeneratorSet {
    let aliases = channels + 1;
    let alias: Vec<i64> = (0..aliases as i64).map(|j| j - aliases as i64 / 2).collect();
    let lo = alias[0];
    let vals: Vec<C64> = (0..channels * n * aliases).map(|_| cgauss(r)).collect();
    GeneratorSet::spectral(period, grid(n), alias, channels, move |ch, q, j| {
        vals[(ch * n + q) * aliases + (j - lo) as usize]
    })
    .unwrap()
}

fn exact_recovery() -> Outcome {
    let (m, p, k, n) = (6, 4, 2, 32);
    let mut worst: f64 = 0.0;
    let mut exact = 0;
    for i in 0..100u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(i, 1));
        let a = full_spark(p, m, i);
        let design = MeasurementDesign::plain(a, grid(n))
            .with_shaping(random_shaping(grid(n), p, derive_seed(i, 2)).unwrap())
            .unwrap();
        let profile = random_support(m, k, &mut r);
        let d = synthesize(&profile, n, derive_seed(i, 3), AmplitudeDist::ComplexGaussian).unwrap();
        let y = compressive_sample(&d, &design).unwrap();
        let res = recover(&y, &design, k, &CtfOptions::default()).unwrap();
        let e = nmse(&res.coefficients, &d).unwrap();
        worst = worst.max(e);
        if &res.support == profile.support() && e <= 1e-9 {
            exact += 1;
        }
    }
    Outcome { passed: exact == 100, detail: format!("{exact}/100 exact, worst nmse {worst:.2e}") }
}

fn operator_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(i, 10));
        let m = r.random_range(2..=8);
        let p = r.random_range(1..=m.min(6));
        let n = r.random_range(2..=32);
        let period = r.random_range(0.5..2.0);
        let a_gen = random_generators(&mut r, m, n, period);
        let h = random_generators(&mut r, m, n, period);
        let v = biorthogonalize(&h, &a_gen, 1e8).unwrap();
        let z = r.random_bool(0.5).then(|| random_diagonal(grid(n), m, derive_seed(i, 11)).unwrap());
        let design = MeasurementDesign::new(
            sensing_matrix(MatrixKind::Gaussian, p, m, derive_seed(i, 12)).unwrap(),
            random_shaping(grid(n), p, derive_seed(i, 13)).unwrap(),
            z,
            1e8,
        )
        .unwrap();
        let s = build_sampling_filters(&design, &v).unwrap();
        let m_sa = cross_spectrum_matrix(&s, &a_gen).unwrap();
        let op = design.operator().unwrap();
        for (x, y) in m_sa.values().iter().zip(op.values()) {
            worst = worst.max(max_abs_diff(x, y));
        }
    }
    Outcome { passed: worst <= 1e-10, detail: format!("max |M_SA - W A Z| = {worst:.2e} over 20 designs") }
}

fn biorthogonality() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(i, 20));
        let m = r.random_range(1..=8);
        let n = r.random_range(1..=32);
        let a_gen = random_generators(&mut r, m, n, 1.0);
        let h = random_generators(&mut r, m, n, 1.0);
        let v = biorthogonalize(&h, &a_gen, 1e8).unwrap();
        let m_va = cross_spectrum_matrix(&v, &a_gen).unwrap();
        let id = CMat::identity(m, m);
        for x in m_va.values() {
            worst = worst.max(max_abs_diff(x, &id));
        }
    }
    Outcome { passed: worst <= 1e-10, detail: format!("max |M_VA - I| = {worst:.2e} over 20 sets") }
}

fn ctf_correctness() -> Outcome {
    let (m, p, k, n) = (8, 5, 2, 24);
    let opts = CtfOptions::default();
    let mut failures = Vec::new();
    for i in 0..50u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(i, 30));
        let a = full_spark(p, m, derive_seed(i, 31));
        let plain = MeasurementDesign::plain(a.clone(), grid(n));
        let profile = random_support(m, k, &mut r);
        let d = synthesize(&profile, n, derive_seed(i, 32), AmplitudeDist::ComplexGaussian).unwrap();
        let y = compressive_sample(&d, &plain).unwrap();
        let base = recover_support(&y, &plain, k, &opts).unwrap();
        let q_rank = rank(&compute_q(&y), 1e-10);
        let g = CMat::from_fn(base.rank_q, base.rank_q, |_, _| cgauss(&mut r));
        let (alt, _) = solve_frame(&a, &base.frame * g, k, &opts).unwrap();
        let shaped = plain
            .with_shaping(random_shaping(grid(n), p, derive_seed(i, 33)).unwrap())
            .unwrap()
            .with_diagonal(Some(random_diagonal(grid(n), m, derive_seed(i, 34)).unwrap()))
            .unwrap();
        let via_wz = recover_support(&compressive_sample(&d, &shaped).unwrap(), &shaped, k, &opts).unwrap();
        let ok = base.rank_q <= k
            && q_rank <= k
            && &base.support == profile.support()
            && alt == base.support
            && via_wz.support == base.support
            && via_wz.rank_q <= k;
        if !ok {
            failures.push(i);
        }
    }
    Outcome { passed: failures.is_empty(), detail: format!("50 seeds, failing seeds {failures:?}") }
}

fn minimal_rate() -> Outcome {
    let (m, k, n) = (8, 2, 16);
    let p = 2 * k;
    let tol = Tolerances::default();
    let opts = CtfOptions::default();
    let mut recovered = 0;
    let mut ambiguous = 0;
    for i in 0..50u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(i, 40));
        let a = full_spark(p, m, derive_seed(i, 41));
        let design = MeasurementDesign::plain(a.clone(), grid(n));
        let profile = random_support(m, k, &mut r);
        let d = synthesize(&profile, n, derive_seed(i, 42), AmplitudeDist::ComplexGaussian).unwrap();
        let y = compressive_sample(&d, &design).unwrap();
        let res = recover(&y, &design, k, &opts).unwrap();
        if &res.support == profile.support() && nmse(&res.coefficients, &d).unwrap() <= 1e-9 {
            recovered += 1;
        }
        let frame = recover_support(&y, &design, k, &opts).unwrap().frame;
        let prob = MmvProblem::new(a, frame, k).unwrap();
        let fits = (0..=k)
            .flat_map(|size| Combinations::new(m, size))
            .map(|c| c.into_iter().collect::<BTreeSet<usize>>())
            .filter(|s| prob.relative_residual(s, &tol) <= tol.residual_tol)
            .filter(|s| s != profile.support())
            .count();
        if fits > 0 {
            ambiguous += 1;
        }
    }
    Outcome {
        passed: recovered == 50 && ambiguous == 0,
        detail: format!("{recovered}/50 recovered at p = 2k = {p}, {ambiguous} instances with an alternative support"),
    }
}

fn multiband_example() -> Outcome {
    let mut dense: f64 = 0.0;
    for (m, cosets) in [(7usize, vec![1, 3, 4, 7]), (11, vec![2, 3, 5, 7, 8, 10, 11, 1]), (13, vec![0, 5])] {
        let sc = MultibandScenario {
            n_bands: 1,
            band_width: std::f64::consts::TAU / m as f64,
            m,
            nyquist_period: 0.7,
            cosets,
            seed: m as u64,
            n: 16,
            amplitude: AmplitudeDist::ComplexGaussian,
        };
        let mut sc = sc;
        sc.band_width = std::f64::consts::TAU / (m as f64 * sc.nyquist_period);
        let b = build_multiband(&sc).unwrap();
        let rep = delay_filter_equivalence_check(&b, DELAY_CHECK_POINTS).unwrap();
        dense = dense.max(rep.dense_deviation).max(rep.grid_deviation);
    }

    let mut chain: f64 = 0.0;
    let mut r = ChaCha8Rng::seed_from_u64(60);
    for (m, c, n) in [(4, 3, 32), (5, 2, 17), (7, 7, 20), (3, 0, 9)] {
        let y: Vec<C64> = (0..n).map(|_| cgauss(&mut r)).collect();
        let t = r.random_range(0.2..3.0);
        let x = fractional_delay_demodulate(&y, c, m, t).unwrap();
        let f = fractional_delay_frequency(&y, c, m, t).unwrap();
        let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let err = x.iter().zip(&f).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        chain = chain.max(err / norm);
    }

    let (m, n_bands, p) = (11usize, 2usize, 8usize);
    let mut recovered = 0;
    let mut spark_ok = 0;
    for seed in 0..50u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(seed, 61));
        let mut pool: Vec<usize> = (1..=m).collect();
        let cosets: Vec<usize> = (0..p).map(|_| pool.swap_remove(r.random_range(0..pool.len()))).collect();
        let sc = MultibandScenario {
            n_bands,
            band_width: std::f64::consts::TAU / m as f64,
            m,
            nyquist_period: 1.0,
            cosets,
            seed,
            n: 16,
            amplitude: AmplitudeDist::ComplexGaussian,
        };
        let b = build_multiband(&sc).unwrap();
        if kruskal_rank(b.design.a(), 1e-10).unwrap() == p {
            spark_ok += 1;
        }
        let y = b.measurements().unwrap();
        let res = recover(&y, &b.design, sc.k_max(), &CtfOptions::default()).unwrap();
        let truth = b.signal.coefficients();
        let err = res.coefficients.max_abs_diff(truth).unwrap() / truth.total_energy().sqrt();
        if &res.support == b.active_slices() && err <= 1e-9 {
            recovered += 1;
        }
    }
    Outcome {
        passed: dense <= 1e-9 && chain <= 1e-8 && recovered == 50 && spark_ok == 50,
        detail: format!(
            "delay identity {dense:.2e} ({DELAY_CHECK_POINTS} points), chain vs multiply {chain:.2e}, \
             {recovered}/50 recovered (m = {m}, p = {p}), full spark {spark_ok}/50"
        ),
    }
}

fn periodic_example() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(seed, 70));
        let m: usize = r.random_range(2..=8);
        let k = r.random_range(1..=m.div_ceil(2));
        let mut pool: Vec<usize> = (1..=m).collect();
        let pattern: Vec<usize> = (0..k).map(|_| pool.swap_remove(r.random_range(0..pool.len()))).collect();
        let sc = PeriodicSparsityScenario {
            m,
            k,
            pattern,
            base_period: r.random_range(0.1..2.0),
            n_blocks: r.random_range(1..=10),
            seed,
            p: m.min(2 * k),
            matrix_kind: MatrixKind::Gaussian,
            sensing: None,
            generator: BaseGenerator::Box,
            amplitude: AmplitudeDist::ComplexGaussian,
        };
        let rep = piecewise_constant_waveform_check(&build_periodic_sparsity(&sc).unwrap()).unwrap();
        worst = worst.max(rep.relative_error);
    }

    let mut pattern_ok = 0;
    for seed in 0..20u64 {
        let sc = PeriodicSparsityScenario {
            m: 7,
            k: 2,
            pattern: vec![1, 4],
            base_period: 1.0,
            n_blocks: 8,
            seed,
            p: 4,
            matrix_kind: MatrixKind::Gaussian,
            sensing: None,
            generator: BaseGenerator::Box,
            amplitude: AmplitudeDist::ComplexGaussian,
        };
        let b = build_periodic_sparsity(&sc).unwrap();
        if kruskal_rank(b.design.a(), 1e-10).unwrap() < 4 {
            continue;
        }
        let res = recover(&b.measurements().unwrap(), &b.design, 2, &CtfOptions::default()).unwrap();
        let idx = active_base_indices(&interleave(&res.coefficients), 1e-9);
        if !idx.is_empty()
            && idx.iter().all(|t| t % 7 == 1 || t % 7 == 4)
            && nmse(&res.coefficients, b.signal.coefficients()).unwrap() <= 1e-9
        {
            pattern_ok += 1;
        }
    }
    Outcome {
        passed: worst <= 1e-6 && pattern_ok == 20,
        detail: format!("quadrature vs filter bank {worst:.2e} relative (20 seeds), {{1,4}} mod 7 respected {pattern_ok}/20"),
    }
}

fn somp_vs_exhaustive() -> Outcome {
    let (m, p, k, n) = (20, 8, 2, 16);
    let exhaustive = CtfOptions::default();
    let somp = CtfOptions::with_solver(Solver::Somp);
    let (mut eligible, mut agree, mut exhaustive_fail, mut somp_fail) = (0, 0, 0, 0);
    for i in 0..200u64 {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(i, 80));
        let a = sensing_matrix(MatrixKind::Gaussian, p, m, derive_seed(i, 81)).unwrap();
        let design = MeasurementDesign::plain(a, grid(n));
        let profile = random_support(m, k, &mut r);
        let d = synthesize(&profile, n, derive_seed(i, 82), AmplitudeDist::ComplexGaussian).unwrap();
        let y = compressive_sample(&d, &design).unwrap();
        let ex = recover_support(&y, &design, k, &exhaustive).unwrap();
        if &ex.support != profile.support() {
            exhaustive_fail += 1;
            continue;
        }
        match recover_support(&y, &design, k, &somp) {
            Ok(s) => {
                eligible += 1;
                if s.support == ex.support {
                    agree += 1;
                }
            }
            Err(_) => somp_fail += 1,
        }
    }
    let rate = agree as f64 / eligible.max(1) as f64;
    Outcome {
        passed: eligible > 0 && rate >= 0.95,
        detail: format!(
            "agreement {agree}/{eligible} = {:.1}% (exhaustive missed {exhaustive_fail}, SOMP errored {somp_fail})",
            100.0 * rate
        ),
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 8] = [
        ("exact recovery at guaranteed rates", exact_recovery, Duration::from_secs(10)),
        ("filter-bank operator identity", operator_identity, Duration::from_secs(5)),
        ("biorthogonality", biorthogonality, Duration::from_secs(5)),
        ("CTF correctness and invariance", ctf_correctness, Duration::from_secs(20)),
        ("minimal-rate boundary", minimal_rate, Duration::from_secs(30)),
        ("multiband example", multiband_example, Duration::from_secs(30)),
        ("periodic-sparsity example", periodic_example, Duration::from_secs(20)),
        ("SOMP vs exhaustive", somp_vs_exhaustive, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (idx, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let ok = out.passed && elapsed <= *budget;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {} [{:.2}s of {}s]",
            idx + 1,
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
