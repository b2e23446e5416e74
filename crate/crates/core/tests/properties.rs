use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use qrd::linalg::complex_gaussian;
use qrd::quantum::{self, ChoiMatrix};
use qrd::ratedistortion::{self, KrausPair};
use qrd::realization::{self, RealizationCircuit};
use qrd::verify::trial_rng;
use qrd::{ComplexMatrix, DensityMatrix, KrausChannel, SourceSpec, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn gaussian_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::new(dim, (0..dim * dim).map(|_| complex_gaussian(rng)).collect()).unwrap()
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = gaussian_matrix(dim, rng);
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / t)).unwrap()
}

fn h2(p: f64) -> f64 {
    let t = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    t(p) + t(1.0 - p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn multiply_is_associative(seed in any::<u64>(), dim in 1usize..=8) {
        let mut rng = trial_rng(seed, 0);
        let (a, b, c) = (gaussian_matrix(dim, &mut rng), gaussian_matrix(dim, &mut rng), gaussian_matrix(dim, &mut rng));
        let left = &(&a * &b) * &c;
        let right = &a * &(&b * &c);
        prop_assert!(left.max_abs_diff(&right) <= 1e-12 * (1.0 + left.max_abs()));
    }

    #[test]
    fn trace_is_cyclic(seed in any::<u64>(), dim in 1usize..=8) {
        let mut rng = trial_rng(seed, 0);
        let (a, b) = (gaussian_matrix(dim, &mut rng), gaussian_matrix(dim, &mut rng));
        prop_assert!(((&a * &b).trace() - (&b * &a).trace()).norm() <= 1e-12 * (dim * dim) as f64);
    }

    #[test]
    fn partial_trace_undoes_kron(seed in any::<u64>(), na in 1usize..=2, nb in 1usize..=2) {
        let mut rng = trial_rng(seed, 0);
        let a = gaussian_matrix(1 << na, &mut rng);
        let b = gaussian_matrix(1 << nb, &mut rng);
        let keep: Vec<usize> = (0..na).collect();
        let reduced = a.kron(&b).unwrap().partial_trace(&keep).unwrap();
        prop_assert!(reduced.max_abs_diff(&a.scale(b.trace())) <= 1e-12 * (1.0 + reduced.max_abs()));
    }

    #[test]
    fn eigenvalues_sum_to_trace(seed in any::<u64>(), dim in 1usize..=16) {
        let mut rng = trial_rng(seed, 0);
        let g = gaussian_matrix(dim, &mut rng);
        let psd = &g * &g.adjoint();
        let eig = psd.hermitian_eigen().unwrap();
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - psd.trace().re).abs() <= 1e-10 * (1.0 + psd.trace().re));
        prop_assert!(eig.values.iter().all(|&v| v >= -1e-10));
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = eig.vectors.conjugate(&ComplexMatrix::from_diag(&eig.values)).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&psd) <= 1e-10 * (1.0 + psd.max_abs()));
    }

    #[test]
    fn kraus_pairs_are_complete(alpha in 0.0..FRAC_PI_2, delta in 0.0..=FRAC_PI_2) {
        let pair = KrausPair::diagonal(alpha, delta);
        let sum = &(&pair.a1.adjoint() * &pair.a1) + &(&pair.a2.adjoint() * &pair.a2);
        prop_assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-12);
    }

    #[test]
    fn pair_distortion_ignores_alpha(p0 in 0.5..0.99f64, alpha in 0.0..FRAC_PI_2, delta in 0.0..=FRAC_PI_2) {
        let src = SourceSpec::new(p0).unwrap();
        let ch = KrausPair::diagonal(alpha, delta).channel();
        let d = quantum::distortion(&src.rho(), &ch).unwrap();
        let p1 = 1.0 - p0;
        prop_assert!((d - 2.0 * p0 * p1 * (1.0 - delta.cos())).abs() <= 1e-10);
    }

    #[test]
    fn residual_matches_finite_difference(p0 in 0.5..0.95f64, delta in 0.05..1.45f64, t in 0.05..0.95f64) {
        let src = SourceSpec::new(p0).unwrap();
        let alpha = t * (FRAC_PI_2 - delta);
        let h = 1e-6;
        let fd = (ratedistortion::diagonal_average_entropy(alpha + h, delta, &src)
            - ratedistortion::diagonal_average_entropy(alpha - h, delta, &src))
            / (2.0 * h);
        let r = ratedistortion::stationarity_residual(alpha, delta, &src).unwrap();
        prop_assert!((r - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "residual {r}, finite difference {fd}");
    }

    #[test]
    fn solved_angle_minimizes_average_entropy(p0 in 0.5..0.95f64, delta in 0.02..1.55f64, seed in any::<u64>()) {
        let src = SourceSpec::new(p0).unwrap();
        let alpha = ratedistortion::solve_alpha(delta, &src, 1e-12).unwrap();
        let best = ratedistortion::diagonal_average_entropy(alpha, delta, &src);
        let mut rng = trial_rng(seed, 0);
        for _ in 0..50 {
            let a = rng.random::<f64>() * (FRAC_PI_2 - delta);
            prop_assert!(best <= ratedistortion::diagonal_average_entropy(a, delta, &src) + 1e-12);
        }
    }

    #[test]
    fn classical_rate_is_an_entropy(p0 in 0.5..0.95f64, delta in 0.0..=FRAC_PI_2) {
        let src = SourceSpec::new(p0).unwrap();
        let p = ratedistortion::r1_curve_point(delta, &src).unwrap();
        prop_assert!((0.0..=1.0).contains(&p.classical_rate));
        prop_assert!((p.classical_rate - h2(p.lambda1)).abs() <= 1e-12);
        if p0 == 0.5 {
            prop_assert!((p.classical_rate - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn unitary_channels_exchange_no_entropy(seed in any::<u64>(), n in 1usize..=2) {
        let dim = 1 << n;
        let mut rng = trial_rng(seed, 0);
        let u = ComplexMatrix::random_unitary_with(dim, &mut rng);
        let rho = random_state(dim, &mut rng);
        let se = quantum::entropy_exchange(&rho, &KrausChannel::unitary(u).unwrap()).unwrap();
        prop_assert!(se.abs() <= 1e-10);
    }

    #[test]
    fn choi_fidelity_matches_kraus_fidelity(seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = trial_rng(seed, 0);
        let ch = KrausChannel::random_stinespring(2, k, &mut rng);
        let rho = random_state(2, &mut rng);
        let kraus = quantum::entanglement_fidelity(&rho, &ch).unwrap();
        let choi = quantum::choi_entanglement_fidelity(&ChoiMatrix::from_kraus(&ch).unwrap(), &rho).unwrap();
        prop_assert!((kraus - choi).abs() <= 1e-9);
        prop_assert!((quantum::distortion(&rho, &ch).unwrap() - (1.0 - kraus)).abs() == 0.0);
    }

    #[test]
    fn circuit_reproduces_pair(p0 in 0.5..0.95f64, delta in 0.01..1.56f64) {
        let src = SourceSpec::new(p0).unwrap();
        let circ = realization::build_circuit(delta, &src).unwrap();
        prop_assert!(circ.unitary.unitarity_defect() <= 1e-12);
        let rho = src.rho();
        let (expected, _) = quantum::apply(&circ.kraus_pair.channel(), &rho).unwrap();
        prop_assert!(circ.induced_output(&rho).unwrap().max_abs_diff(&expected) <= 1e-11);
        let joint = circ.joint_state(&rho).unwrap();
        let upper = RealizationCircuit::ancilla_block(&joint, 0, 1);
        let cross = &(&circ.kraus_pair.a1 * rho.matrix()) * &circ.kraus_pair.a2.adjoint();
        prop_assert!(upper.max_abs_diff(&cross) <= 1e-12);
        let m = realization::measure_ancilla(&circ, &src).unwrap();
        prop_assert!((m.p_type1 - circ.kraus_pair.lambda1(&rho)).abs() <= 1e-12);
    }
}

#[test]
fn polar_decomposition_on_random_inputs() {
    for dim in [2, 4] {
        for t in 0..10_000u64 {
            let mut rng = trial_rng(31, t);
            let a = gaussian_matrix(dim, &mut rng);
            let (u, p) = a.polar_decompose().unwrap();
            assert!((&u * &p).max_abs_diff(&a) <= 1e-9, "dim {dim} trial {t}");
            assert!(u.unitarity_defect() <= 1e-9);
            assert!(p.is_hermitian(1e-10));
            assert!(p.hermitian_eigenvalues().unwrap().iter().all(|&v| v >= -1e-10));
        }
    }
}

#[test]
fn random_channels_respect_entropy_bounds() {
    for t in 0..10_000u64 {
        let mut rng = trial_rng(17, t);
        let k = rng.random_range(1..=4);
        let ch = KrausChannel::random_stinespring(2, k, &mut rng);
        let rho = random_state(2, &mut rng);
        let f = quantum::entanglement_fidelity(&rho, &ch).unwrap();
        assert!((-1e-12..=1.0 + 1e-12).contains(&f), "trial {t}: F_e = {f}");
        assert!(quantum::entropy_exchange(&rho, &ch).unwrap() >= -1e-12);
        let sbar = quantum::average_entropy(&ch, &rho).unwrap();
        let s_out = quantum::von_neumann_entropy(&quantum::apply_normalized(&ch, &rho).unwrap()).unwrap();
        assert!(sbar <= s_out + 1e-9, "trial {t}: {sbar} > {s_out}");
    }
}

/// Environment entropy from an explicit dilation `|s> -> sum_i A_i |s> |i>`,
/// with the environment traced in after the fact.
#[test]
fn exchange_entropy_matches_explicit_dilation() {
    for t in 0..2_000u64 {
        let mut rng = trial_rng(23, t);
        let ch = KrausChannel::random_stinespring(2, 2, &mut rng);
        let rho = random_state(2, &mut rng);
        let mut v = vec![vec![C64::new(0.0, 0.0); 2]; 4];
        for (i, a) in ch.elements().iter().enumerate() {
            for out in 0..2 {
                for s in 0..2 {
                    v[2 * out + i][s] = a[(out, s)];
                }
            }
        }
        let mut joint = ComplexMatrix::zeros(4);
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..2 {
                    for u in 0..2 {
                        acc += v[r][s] * rho.matrix()[(s, u)] * v[c][u].conj();
                    }
                }
                joint[(r, c)] = acc;
            }
        }
        let env = joint.partial_trace(&[1]).unwrap();
        let direct = quantum::von_neumann_entropy(&env).unwrap();
        let se = quantum::entropy_exchange(&rho, &ch).unwrap();
        assert!((direct - se).abs() <= 1e-8, "trial {t}: {direct} vs {se}");
    }
}

#[test]
fn empirical_classical_rate_converges() {
    let mut covered = 0;
    for p0 in [0.5, 0.6, 0.7] {
        let src = SourceSpec::new(p0).unwrap();
        for delta in [0.3, 0.8, 1.3] {
            let circ = realization::build_circuit(delta, &src).unwrap();
            let r = realization::simulate_stream(&circ, &src, 1_000_000, covered).unwrap();
            if !(0.1..=0.9).contains(&r.analytic_lambda1) {
                continue;
            }
            covered += 1;
            assert!((r.empirical_classical_rate - r.analytic_classical_rate).abs() <= 0.01);
        }
    }
    assert!(covered >= 5, "only {covered} configurations had lambda1 in [0.1, 0.9]");
}

#[test]
fn suites_are_reproducible() {
    let src = SourceSpec::new(0.7).unwrap();
    let a = qrd::verify::check_theorem1(500, 8, &src).unwrap();
    let b = qrd::verify::check_theorem1(500, 8, &src).unwrap();
    assert_eq!(a, b);
    let c = qrd::verify::check_theorem3_isotropic(2, 200, 8).unwrap();
    assert_eq!(c, qrd::verify::check_theorem3_isotropic(2, 200, 8).unwrap());
}
