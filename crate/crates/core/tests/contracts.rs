//! Cross-module invariants: relations the estimators, set algebra, io
//! layer, and verifier must satisfy jointly.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_bounds::{
    estimate, gsr_lower, jsr_upper, load_matrix_set, run_suite, save_matrix_set,
    set_hadamard_mean, set_power, word_matrix, CheckFamily, InstanceConfig, NonNegMatrix, Norm,
    OperatorSet, ProductWord, WeightMode, WeightVector, DEFAULT_WORD_BUDGET,
};

fn random_set(rng: &mut ChaCha8Rng, size: usize, dim: usize, density: f64) -> OperatorSet {
    let members: Vec<NonNegMatrix> = (0..size)
        .map(|_| {
            let entries: Vec<f64> = (0..dim * dim)
                .map(|_| {
                    if rng.random_bool(density) {
                        1.0 - rng.random::<f64>()
                    } else {
                        0.0
                    }
                })
                .collect();
            NonNegMatrix::new(dim, dim, entries).unwrap()
        })
        .collect();
    OperatorSet::new(members).unwrap()
}

fn assert_close(a: f64, b: f64, rtol: f64, context: &str) {
    assert!(
        (a - b).abs() <= rtol * a.abs().max(1.0),
        "{context}: {a:e} vs {b:e}"
    );
}

#[test]
fn singleton_estimates_recover_the_radius_at_every_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(7001);
    for case in 0..100 {
        let dim = rng.random_range(1..=5);
        let set = random_set(&mut rng, 1, dim, 0.8);
        let rho = set.member(0).spectral_radius(1e-13).unwrap();
        for depth in 1..=5 {
            let (lower, _) = gsr_lower(&set, depth, DEFAULT_WORD_BUDGET).unwrap();
            // Radii of powers are powers of the radius, so the lower
            // estimate of a singleton is depth-independent.
            assert_close(lower, rho, 1e-9, &format!("case {case} depth {depth}"));
        }
    }
}

#[test]
fn power_set_estimates_bracket_the_root_estimates() {
    let mut rng = ChaCha8Rng::seed_from_u64(7002);
    for case in 0..40 {
        let dim = rng.random_range(2..=4);
        let set = random_set(&mut rng, 2, dim, 0.7);
        for m in [2usize, 3] {
            let mut mats = Vec::new();
            for item in set_power(&set, m, DEFAULT_WORD_BUDGET).unwrap() {
                mats.push(item.unwrap().1);
            }
            let power_set = OperatorSet::new(mats).unwrap();
            let depth = 2;

            // Words of the power set are the original words with length a
            // multiple of m, so its lower estimate cannot exceed the m-th
            // power of the full-depth lower estimate, and its upper
            // estimate cannot undercut the m-th power of the full-depth
            // upper estimate.
            let (power_lower, _) = gsr_lower(&power_set, depth, DEFAULT_WORD_BUDGET).unwrap();
            let (base_lower, _) = gsr_lower(&set, m * depth, DEFAULT_WORD_BUDGET).unwrap();
            let lifted_lower = base_lower.powi(m as i32);
            assert!(
                power_lower <= lifted_lower + 1e-9 * lifted_lower.abs().max(1.0),
                "case {case} m={m}: power lower {power_lower:e} above {lifted_lower:e}"
            );

            let power_upper =
                jsr_upper(&power_set, depth, Norm::RowSum, DEFAULT_WORD_BUDGET).unwrap();
            let base_upper = jsr_upper(&set, m * depth, Norm::RowSum, DEFAULT_WORD_BUDGET)
                .unwrap()
                .powi(m as i32);
            assert!(
                power_upper >= base_upper - 1e-9 * power_upper.abs().max(1.0),
                "case {case} m={m}: power upper {power_upper:e} below {base_upper:e}"
            );
        }
    }
}

#[test]
fn estimates_survive_a_file_round_trip_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(7003);
    let dir = std::env::temp_dir().join(format!("spectral-bounds-contracts-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for case in 0..10 {
        let set = random_set(&mut rng, 3, 4, 0.6);
        let path = dir.join(format!("set-{case}.json"));
        save_matrix_set(&set, &path).unwrap();
        let loaded = load_matrix_set(&path).unwrap();
        let a = estimate(&set, 3, Norm::RowSum, DEFAULT_WORD_BUDGET).unwrap();
        let b = estimate(&loaded, 3, Norm::RowSum, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(a.lower.to_bits(), b.lower.to_bits(), "case {case} lower");
        assert_eq!(a.upper.to_bits(), b.upper.to_bits(), "case {case} upper");
        assert_eq!(a.argmax_word, b.argmax_word, "case {case} argmax");
    }
}

#[test]
fn suite_reports_are_identical_across_thread_counts() {
    let cfg = InstanceConfig {
        dim_range: (1, 3),
        set_size_range: (1, 2),
        m_range: (1, 2),
        seed: 7004,
        trials: 6,
        depth: 3,
        ..InstanceConfig::default()
    };
    let run_in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_suite(&cfg, &CheckFamily::ALL, DEFAULT_WORD_BUDGET).unwrap())
    };
    let single = run_in_pool(1);
    let quad = run_in_pool(4);
    assert_eq!(single.reports, quad.reports);
    assert_eq!(single.summaries, quad.summaries);
}

#[test]
fn rotated_words_share_their_radii() {
    let mut rng = ChaCha8Rng::seed_from_u64(7005);
    for case in 0..50 {
        let set = random_set(&mut rng, 3, 4, 0.7);
        let len = rng.random_range(2..=5usize);
        let indices: Vec<usize> = (0..len).map(|_| rng.random_range(0..3)).collect();
        let mut radii = Vec::with_capacity(len);
        for shift in 0..len {
            let rotated: Vec<usize> = (0..len).map(|i| indices[(i + shift) % len]).collect();
            let mat = word_matrix(
                std::slice::from_ref(&set),
                &ProductWord::homogeneous(rotated),
            )
            .unwrap();
            radii.push(mat.spectral_radius(1e-13).unwrap());
        }
        let max = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            max - min <= 1e-9 * max.max(1.0),
            "case {case}: rotation radii spread [{min:e}, {max:e}] for word {indices:?}"
        );
    }
}

#[test]
fn mean_of_rescaled_sets_matches_the_rescaled_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(7006);
    let weights = WeightVector::new(vec![0.2, 0.3, 0.5], WeightMode::ExactOne).unwrap();
    for case in 0..30 {
        let sets: Vec<OperatorSet> = (0..3).map(|_| random_set(&mut rng, 2, 3, 0.8)).collect();
        let factor = 1.7;
        let scaled_sets: Vec<OperatorSet> = sets
            .iter()
            .map(|s| spectral_bounds::rescale(s, factor).unwrap())
            .collect();
        let mean = set_hadamard_mean(&sets, &weights).unwrap();
        let scaled_mean = set_hadamard_mean(&scaled_sets, &weights).unwrap();
        // Exact-one weights make the mean homogeneous of degree one.
        assert_eq!(mean.len(), scaled_mean.len());
        for (a, b) in mean.members().iter().zip(scaled_mean.members()) {
            for (x, y) in a.entries().iter().zip(b.entries()) {
                let want = factor * x;
                assert!(
                    (y - want).abs() <= 1e-12 * want.abs().max(1.0),
                    "case {case}: entry {y:e} vs {want:e}"
                );
            }
        }
    }
}
