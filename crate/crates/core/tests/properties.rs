use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use pframe::certify::{
    buzano_overlap_bound, certify_point, estimate_sup_c, pointwise_max_product, CheckConfig,
    OptimizerConfig,
};
use pframe::duality::{dual_certify, generate_vector_frame};
use pframe::entropy::{p_renyi_entropy, p_shannon_entropy};
use pframe::frames::{generate_frame, AnalysisFrame, FrameKind};
use pframe::search::{equality_gap, renyi_sweep};
use pframe::spaces::{
    dual_norm, norm, pairing, sample_unit_sphere, Field, Functional, Norm, NormedSpace, Vector,
};

const QS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
const PS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(re, im)| Complex64::new(re, im)),
        len,
    )
}

fn space_strategy() -> impl Strategy<Value = NormedSpace> {
    (
        1usize..6,
        0usize..5,
        any::<bool>(),
        any::<bool>(),
        prop::collection::vec(0.1..5.0f64, 6),
    )
        .prop_map(|(dim, qi, complex, weighted, w)| {
            let field = if complex { Field::Complex } else { Field::Real };
            let q = QS[qi];
            let norm = if weighted {
                Norm::WeightedLq {
                    q,
                    weights: w[..dim].to_vec(),
                }
            } else {
                Norm::Lq { q }
            };
            NormedSpace::new(dim, field, norm).unwrap()
        })
}

fn with_vectors(count: usize) -> impl Strategy<Value = (NormedSpace, Vec<Vec<Complex64>>)> {
    space_strategy().prop_flat_map(move |s| {
        let dim = s.dim();
        let real = s.field() == Field::Real;
        (Just(s), prop::collection::vec(complex_vec(dim), count)).prop_map(move |(s, mut vs)| {
            if real {
                vs.iter_mut().flatten().for_each(|c| c.im = 0.0);
            }
            (s, vs)
        })
    })
}

/// Frame kinds that live on one common space, so any two can be paired.
fn same_space_kinds(family: usize, p_index: usize, dim: usize) -> Vec<FrameKind> {
    let p = PS[p_index];
    let split: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            if i % 2 == 0 {
                vec![0.3, 0.7]
            } else {
                vec![0.2, 0.2, 0.6]
            }
        })
        .collect();
    match family {
        0 => vec![
            FrameKind::Coordinate {
                p,
                dim,
                weights: None,
            },
            FrameKind::Coordinate {
                p,
                dim,
                weights: Some(split),
            },
        ],
        _ => vec![
            FrameKind::Coordinate {
                p: 2.0,
                dim,
                weights: None,
            },
            FrameKind::Coordinate {
                p: 2.0,
                dim,
                weights: Some(split),
            },
            FrameKind::Fourier { n: dim },
            FrameKind::RandomParseval2 { n: dim + 2, d: dim },
        ],
    }
}

fn pair_strategy() -> impl Strategy<Value = (AnalysisFrame, AnalysisFrame, u64)> {
    (
        0usize..2,
        0usize..4,
        1usize..6,
        0usize..4,
        0usize..4,
        any::<u64>(),
    )
        .prop_map(|(family, pi, dim, a, b, seed)| {
            let kinds = same_space_kinds(family, pi, dim);
            let f = generate_frame(&kinds[a % kinds.len()], seed).unwrap();
            let g = generate_frame(&kinds[b % kinds.len()], seed.wrapping_add(1)).unwrap();
            (f, g, seed)
        })
}

fn point_on(frame: &AnalysisFrame, seed: u64) -> Vector {
    sample_unit_sphere(&frame.space().with_field(Field::Complex), 1, seed)
        .unwrap()
        .remove(0)
}

fn real_point(frame: &AnalysisFrame, seed: u64) -> Vector {
    sample_unit_sphere(&frame.space().with_field(Field::Real), 1, seed)
        .unwrap()
        .remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_is_homogeneous((s, v) in with_vectors(1), re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let lambda = if s.field() == Field::Real { Complex64::new(re, 0.0) } else { Complex64::new(re, im) };
        let x = Vector::new(v[0].clone());
        let scaled = Vector::new(v[0].iter().map(|c| c * lambda).collect());
        let lhs = norm(&s, &scaled).unwrap();
        let rhs = lambda.norm() * norm(&s, &x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn triangle_inequality((s, v) in with_vectors(2)) {
        let sum: Vec<Complex64> = v[0].iter().zip(&v[1]).map(|(a, b)| a + b).collect();
        let lhs = norm(&s, &Vector::new(sum)).unwrap();
        let rhs = norm(&s, &Vector::new(v[0].clone())).unwrap() + norm(&s, &Vector::new(v[1].clone())).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn holder_inequality((s, v) in with_vectors(2)) {
        let f = Functional::new(v[0].clone());
        let x = Vector::new(v[1].clone());
        let lhs = pairing(&f, &x).unwrap().norm();
        let rhs = dual_norm(&s, &f).unwrap() * norm(&s, &x).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn entropies_are_scale_invariant((f, _g, seed) in pair_strategy(), re in 0.01..100.0f64, im in -100.0..100.0f64) {
        let x = point_on(&f, seed);
        let lambda = Complex64::new(re, im);
        let y = Vector::new(x.coords().iter().map(|c| c * lambda).collect());
        let s = p_shannon_entropy(&f, &x).unwrap().value;
        prop_assert!((s - p_shannon_entropy(&f, &y).unwrap().value).abs() <= 1e-12);
        for alpha in [0.5, 2.0] {
            let r = p_renyi_entropy(&f, &x, alpha).unwrap().value;
            prop_assert!((r - p_renyi_entropy(&f, &y, alpha).unwrap().value).abs() <= 1e-12);
        }
    }

    #[test]
    fn entropy_stays_in_range((f, _g, seed) in pair_strategy()) {
        let s = p_shannon_entropy(&f, &point_on(&f, seed)).unwrap().value;
        prop_assert!(s >= 0.0);
        prop_assert!(s <= (f.len() as f64).ln() + 1e-9);
    }

    #[test]
    fn renyi_is_non_increasing_in_order((f, _g, seed) in pair_strategy()) {
        let x = point_on(&f, seed);
        let values: Vec<f64> = [0.25, 0.5, 2.0, 3.0].iter().map(|&a| p_renyi_entropy(&f, &x, a).unwrap().value).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn pointwise_floor_holds((f, g, seed) in pair_strategy()) {
        let x = point_on(&f, seed);
        let m = pointwise_max_product(&f, &g, &x).unwrap();
        let nm = (f.len() * g.len()) as f64;
        prop_assert!(nm * m.powf(f.p()) >= 1.0 - 1e-9);
    }

    #[test]
    fn equality_gap_is_nonnegative((f, g, seed) in pair_strategy()) {
        prop_assert!(equality_gap(&f, &g, &point_on(&f, seed)).unwrap() >= -1e-9);
    }

    #[test]
    fn sweep_curve_is_non_increasing((f, g, seed) in pair_strategy()) {
        let alphas = [0.1, 0.25, 0.5, 0.9, 0.999, 1.001, 1.5, 2.0, 3.0, 10.0];
        let curve = renyi_sweep(&f, &g, &point_on(&f, seed), &alphas).unwrap();
        for w in curve.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generation_and_estimation_are_deterministic((f, g, seed) in pair_strategy()) {
        let cfg = OptimizerConfig { starts: 4, max_iters: 100, ..OptimizerConfig::with_seed(seed) };
        prop_assert_eq!(estimate_sup_c(&f, &g, &cfg).unwrap(), estimate_sup_c(&f, &g, &cfg).unwrap());
        prop_assert_eq!(
            sample_unit_sphere(f.space(), 20, seed).unwrap(),
            sample_unit_sphere(f.space(), 20, seed).unwrap()
        );
    }

    #[test]
    fn primal_and_dual_agree_for_p_two(dim in 1usize..5, a in 0usize..4, b in 0usize..4, seed in any::<u64>()) {
        let kinds = same_space_kinds(1, 2, dim);
        let (ka, kb) = (&kinds[a], &kinds[b]);
        let f = generate_frame(ka, seed).unwrap();
        let g = generate_frame(kb, seed.wrapping_add(1)).unwrap();
        let tau = generate_vector_frame(ka, seed).unwrap();
        let omega = generate_vector_frame(kb, seed.wrapping_add(1)).unwrap();
        let x = point_on(&f, seed);
        let cfg = OptimizerConfig { starts: 8, ..OptimizerConfig::with_seed(seed) };
        let primal = certify_point(&f, &g, &x, &cfg, &CheckConfig::default()).unwrap();
        let conj = Functional::new(x.coords().iter().map(Complex64::conj).collect());
        let dual = dual_certify(&tau, &omega, &conj, &cfg, &CheckConfig::default()).unwrap();
        for (p, d) in [
            (primal.lhs, dual.lhs),
            (primal.m_point, dual.m_point),
            (primal.rhs_point, dual.rhs_point),
            (primal.floor, dual.floor),
        ] {
            prop_assert!((p - d).abs() <= 1e-9, "{} vs {}", p, d);
        }
    }
}

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let q = m.qr().q();
    (0..dim)
        .map(|i| (0..dim).map(|j| q[(i, j)]).collect())
        .collect()
}

#[test]
fn buzano_bound_dominates_the_estimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for i in 0..50 {
        let dim = 2 + i % 5;
        let tau = generate_frame(
            &FrameKind::Orthonormal {
                basis: random_unitary(dim, &mut rng),
            },
            0,
        )
        .unwrap();
        let omega = generate_frame(
            &FrameKind::Orthonormal {
                basis: random_unitary(dim, &mut rng),
            },
            0,
        )
        .unwrap();
        let bound = buzano_overlap_bound(&tau, &omega).unwrap();
        let c_hat = estimate_sup_c(&tau, &omega, &OptimizerConfig::with_seed(i as u64))
            .unwrap()
            .c_hat;
        assert!(c_hat <= bound + 1e-6, "pair {i}: {c_hat} > {bound}");
        assert!(c_hat >= 1.0 / dim as f64 - 1e-9);
    }
}

#[test]
fn dual_norm_matches_sampled_supremum() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for q in QS {
        // Gaussian sphere samples rarely reach the corner maximisers of ℓ¹ and ℓ^∞ beyond two dimensions.
        let dims: &[usize] = if q == 1.0 || q.is_infinite() {
            &[2]
        } else {
            &[2, 3]
        };
        for &dim in dims {
            let space = NormedSpace::lq(dim, Field::Real, q).unwrap();
            let samples = sample_unit_sphere(&space, 10_000, 62 + dim as u64).unwrap();
            for _ in 0..200 {
                let f = Functional::from_real(
                    &(0..dim)
                        .map(|_| rng.gen_range(-1.0..1.0))
                        .collect::<Vec<f64>>(),
                );
                let exact = dual_norm(&space, &f).unwrap();
                let sampled = samples
                    .iter()
                    .map(|x| pairing(&f, x).unwrap().norm())
                    .fold(0.0, f64::max);
                assert!(
                    sampled <= exact + 1e-12,
                    "q={q}: sampled {sampled} above {exact}"
                );
                assert!(
                    sampled >= exact - 1e-2,
                    "q={q} dim={dim}: sampled {sampled} far below {exact}"
                );
            }
        }
    }
}

#[test]
fn renyi_approaches_shannon_linearly() {
    let mut worst_c: f64 = 0.0;
    for i in 0..100u64 {
        let kinds = same_space_kinds((i % 2) as usize, (i % 4) as usize, 2 + (i % 4) as usize);
        let f = generate_frame(&kinds[(i as usize / 2) % kinds.len()], i).unwrap();
        let x = real_point(&f, 500 + i);
        let s = p_shannon_entropy(&f, &x).unwrap().value;
        for h in [1e-3, 1e-4] {
            for alpha in [1.0 - h, 1.0 + h] {
                let r = p_renyi_entropy(&f, &x, alpha).unwrap().value;
                worst_c = worst_c.max((r - s).abs() / h);
            }
        }
    }
    assert!(worst_c < 50.0, "observed constant {worst_c}");
}
