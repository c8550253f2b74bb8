mod common;

use common::{assert_close, max_abs_diff, random_word, rotation2, sl2_spec, sl2_strong_spec, sl3_spec};
use rmlab_core::flag::{act, dist_flag, iwasawa_cocycle, FlagPoint};
use rmlab_core::lie::{cartan_decompose, GroupElement};
use rmlab_core::mat::Mat;
use rmlab_core::rep::proj_dist;
use rmlab_core::rng::StreamRng;
use rmlab_core::walk::{
    deviation_curve, empirical_frequencies, fit_curve_slope, holder_fit_from_deltas,
    is_good_element, lyapunov_vector, monte_carlo_mean, sample_product, stationary_angle,
    stationary_sample, stationary_vector, zariski_density_check, CurvePoint, DeviationMode,
    MeasureSpec, WalkError, WalkState,
};

fn single_atom_spec(g: GroupElement) -> MeasureSpec {
    let m = g.rank();
    MeasureSpec::new(m, vec![g], vec![1.0], "single".into()).unwrap()
}

#[test]
fn spec_validation_errors() {
    let g = GroupElement::new(Mat::diag(&[2.0, 0.5])).unwrap();
    assert_eq!(
        MeasureSpec::new(1, vec![], vec![], "e".into()).unwrap_err(),
        WalkError::EmptyAtoms
    );
    assert_eq!(
        MeasureSpec::new(2, vec![g.clone()], vec![1.0], "e".into()).unwrap_err(),
        WalkError::RankMismatch { expected: 2, found: 1 }
    );
    match MeasureSpec::new(1, vec![g.clone(), g.clone()], vec![0.5, 0.6], "e".into()) {
        Err(WalkError::WeightsNotNormalized { sum }) => assert_close(sum, 1.1, 1e-12, "sum"),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(
        MeasureSpec::new(1, vec![g.clone(), g], vec![1.0, 0.0], "e".into()).unwrap_err(),
        WalkError::NonPositiveWeight { index: 1 }
    );
}

#[test]
fn empty_walk_is_identity() {
    let state = WalkState::identity(2);
    assert_eq!(state.steps(), 0);
    let kappa = state.kappa();
    assert!(kappa.iter().all(|&x| x.abs() < 1e-12));
    assert!(max_abs_diff(state.group_element().mat(), &Mat::identity(3)) < 1e-12);
}

#[test]
fn five_steps_of_one_atom_is_fifth_power() {
    let g = GroupElement::new(rotation2(0.4).mul(&Mat::diag(&[1.5, 1.0 / 1.5]))).unwrap();
    let mut state = WalkState::identity(1);
    let mut power = GroupElement::identity(1);
    for _ in 0..5 {
        state.step(&g);
        power = power.mul(&g);
    }
    assert_eq!(state.steps(), 5);
    assert!(max_abs_diff(state.group_element().mat(), power.mat()) < 1e-10);
    let kappa = cartan_decompose(&power).unwrap().kappa;
    let state_kappa = state.kappa();
    for i in 0..2 {
        assert_close(state_kappa[i], kappa[i], 1e-10, "kappa of g^5");
    }
}

#[test]
fn empirical_frequencies_match_weights() {
    let base = sl2_spec();
    let spec = MeasureSpec::new(
        1,
        base.atoms().to_vec(),
        vec![0.3, 0.7],
        "skewed".into(),
    )
    .unwrap();
    let draws = 100_000;
    let freq = empirical_frequencies(&spec, draws, 401);
    for (f, w) in freq.iter().zip(spec.weights()) {
        // 3 sigma of a binomial proportion.
        let tol = 3.0 * (w * (1.0 - w) / draws as f64).sqrt();
        assert_close(*f, *w, tol, "atom frequency");
    }
}

#[test]
fn walk_state_matches_naive_product_at_short_length() {
    // The renormalized per-degree state must be transparent: same kappa,
    // same cocycle, same flag action as the plain matrix product.
    let mut rng = StreamRng::new(81, 0);
    for spec in [sl2_spec(), sl3_spec()] {
        let ext = spec.exterior_atoms();
        for _ in 0..50 {
            let mut state = WalkState::identity(spec.rank());
            let mut g = GroupElement::identity(spec.rank());
            for _ in 0..30 {
                let i = spec.sample_index(&mut rng);
                let wedges: Vec<&Mat> = ext.iter().map(|per_d| &per_d[i]).collect();
                state.step_exterior(&wedges);
                g = g.mul(&spec.atoms()[i]);
            }
            let kappa = cartan_decompose(&g).unwrap().kappa;
            let state_kappa = state.kappa();
            for i in 0..spec.dim() {
                assert_close(state_kappa[i], kappa[i], 1e-6, "kappa via walk state");
            }
            let eta = FlagPoint::base(spec.rank());
            let sigma = iwasawa_cocycle(&g, &eta);
            let state_sigma = state.sigma(&eta);
            for i in 0..spec.dim() {
                assert_close(state_sigma[i], sigma[i], 1e-6, "sigma via walk state");
            }
            assert!(dist_flag(&state.act_flag(&eta), &act(&g, &eta)) < 1e-6);
        }
    }
}

#[test]
fn long_products_keep_finite_cartan_data() {
    // n = 2000 overflows naive products; the state still reports linear
    // growth of chi_d and a tiny gap.
    let spec = sl2_strong_spec();
    let mut rng = StreamRng::new(82, 0);
    let state = sample_product(&spec, 2000, &mut rng);
    let kappa = state.kappa();
    assert!(kappa[0].is_finite() && kappa[0] > 100.0);
    assert_close(kappa[0] + kappa[1], 0.0, 1e-6, "trace-free");
    assert!(state.gap() < 1e-50);
}

#[test]
fn lyapunov_of_deterministic_diagonal_is_exact() {
    let g = GroupElement::new(Mat::diag(&[1f64.exp(), (-1f64).exp()])).unwrap();
    let est = lyapunov_vector(&single_atom_spec(g), 50, 10, 7);
    assert_close(est.sigma_mu[0], 1.0, 1e-10, "top exponent");
    assert_close(est.sigma_mu[1], -1.0, 1e-10, "bottom exponent");
    assert!(est.stderr.iter().all(|&s| s < 1e-12));
    let (a, _) = est.min_alpha();
    assert_close(a, 2.0, 1e-9, "simple-root gap");
}

#[test]
fn lyapunov_vector_is_ordered_and_trace_free() {
    for spec in [sl2_spec(), sl3_spec()] {
        let est = lyapunov_vector(&spec, 100, 400, 8);
        assert_close(est.sigma_mu.iter().sum::<f64>(), 0.0, 1e-9, "trace-free");
        let (a, err) = est.min_alpha();
        assert!(a > 5.0 * err, "simple gap {a} vs stderr {err}");
    }
}

#[test]
fn deviation_probability_trivial_cases() {
    let g = GroupElement::new(Mat::diag(&[2f64.exp(), (-2f64).exp()])).unwrap();
    let spec = single_atom_spec(g);
    let eta = FlagPoint::base(1);
    let exact = vec![2.0, -2.0];
    let curve = deviation_curve(
        &spec,
        DeviationMode::CartanNorm,
        &exact,
        0.1,
        &[1.0, 0.0],
        &eta,
        &[10, 20, 30],
        50,
        9,
    );
    assert!(curve.points.iter().all(|p| p.hits == 0), "exact drift never deviates");
    assert!(curve.slope.is_none());

    let wrong = vec![1.0, -1.0];
    let curve = deviation_curve(
        &spec,
        DeviationMode::CartanNorm,
        &wrong,
        0.1,
        &[1.0, 0.0],
        &eta,
        &[10, 20, 30],
        50,
        9,
    );
    assert!(curve.points.iter().all(|p| p.hits == p.samples), "wrong drift always deviates");
}

#[test]
fn deviation_probability_decays_for_random_walks() {
    let spec = sl2_strong_spec();
    let est = lyapunov_vector(&spec, 400, 400, 10);
    let eta = FlagPoint::base(1);
    let curve = deviation_curve(
        &spec,
        DeviationMode::CartanNorm,
        &est.sigma_mu,
        0.35,
        &[1.0, 0.0],
        &eta,
        &[6, 10, 14, 18, 22],
        4000,
        11,
    );
    let first = curve.points.first().unwrap().probability;
    let last = curve.points.last().unwrap().probability;
    assert!(first > last, "decay: {first} vs {last}");
    if let Some((slope, _)) = curve.slope {
        assert!(slope < 0.0, "negative slope, got {slope}");
    }
}

#[test]
fn fit_curve_slope_needs_three_populated_points() {
    let mk = |n: usize, hits: usize| CurvePoint {
        n,
        probability: hits as f64 / 100.0,
        hits,
        samples: 100,
    };
    assert!(fit_curve_slope(&[mk(10, 50), mk(20, 10)]).is_none());
    assert!(fit_curve_slope(&[mk(10, 50), mk(20, 10), mk(30, 0)]).is_none());
    let (slope, _) = fit_curve_slope(&[mk(10, 80), mk(20, 40), mk(30, 20)]).unwrap();
    assert!(slope < 0.0);
}

#[test]
fn stationary_sampling_consistency() {
    let spec = sl2_spec();
    // Zero steps returns the start flag.
    let start = stationary_sample(&spec, 0, 12, 0);
    assert!(dist_flag(&start, &FlagPoint::base(1)) < 1e-12);
    // The fast vector iteration follows the same trajectory as the flag
    // chain: same seed, same draws, same line.
    for stream in 0..20 {
        let v = stationary_vector(&spec, 40, 12, stream);
        let flag = stationary_sample(&spec, 40, 12, stream);
        assert!(proj_dist(&v, &flag.k.col(0)) < 1e-7, "line of the flag chain");
        let theta = stationary_angle(&spec, 40, 12, stream);
        assert!((0.0..core::f64::consts::PI).contains(&theta));
        let dir = vec![theta.cos(), theta.sin()];
        assert!(proj_dist(&v, &dir) < 1e-7, "angle encodes the same line");
    }
}

#[test]
fn holder_fit_recovers_synthetic_exponents() {
    let mut rng = StreamRng::new(83, 0);
    let r_grid: Vec<f64> = (0..8).map(|i| 0.3 * 0.5f64.powi(i)).collect();
    // Uniform deltas: mass(r) = r / scale, exponent 1.
    let uniform: Vec<f64> = (0..200_000).map(|_| rng.uniform()).collect();
    let fit = holder_fit_from_deltas(&uniform, &r_grid).unwrap();
    assert_close(fit.exponent, 1.0, 0.02, "uniform law");
    // Squared uniforms: mass(r) = sqrt(r), exponent 1/2.
    let squared: Vec<f64> = uniform.iter().map(|u| u * u).collect();
    let fit = holder_fit_from_deltas(&squared, &r_grid).unwrap();
    assert_close(fit.exponent, 0.5, 0.02, "squared law");
    // Too little mass at the largest radius is an error, not a bad fit.
    let far: Vec<f64> = (0..1000).map(|_| 0.5 + 0.5 * rng.uniform()).collect();
    match holder_fit_from_deltas(&far, &[0.1, 0.2]) {
        Err(WalkError::InsufficientMass { .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn stationary_measure_has_positive_holder_mass_exponent() {
    let spec = sl2_spec();
    let y = vec![0.0, 1.0];
    let r_grid: Vec<f64> = (0..6).map(|i| 0.3 * 0.5f64.powi(i)).collect();
    let deltas: Vec<f64> = (0..50_000)
        .map(|i| {
            let v = stationary_vector(&spec, 60, 13, i as u64);
            rmlab_core::rep::delta_pair(&v, &y)
        })
        .collect();
    let fit = holder_fit_from_deltas(&deltas, &r_grid).unwrap();
    assert!(fit.exponent > 3.0 * fit.ci95, "exponent {} ci {}", fit.exponent, fit.ci95);
}

#[test]
fn good_element_predicate() {
    let a = 1f64.exp();
    let g = GroupElement::new(Mat::diag(&[a, 1.0 / a])).unwrap();
    let n = 20;
    let mut h = WalkState::identity(1);
    for _ in 0..n {
        h.step(&g);
    }
    let eta = FlagPoint::base(1);
    let c_a = rmlab_core::lie::structural_constants(1).c_a;
    // Exact drift, maximally separated flags: good.
    let report = is_good_element(&h, n, 0.5, &eta, &eta, &[1.0, -1.0], c_a);
    assert!(report.is_good);
    assert_close(report.kappa_deviation, 0.0, 1e-9, "kappa matches drift");
    assert_close(report.delta_eta, 1.0, 1e-9, "repelling separation");
    assert_close(report.delta_zeta, 1.0, 1e-9, "attracting separation");
    // A wrong drift vector fails the kappa test.
    let report = is_good_element(&h, n, 0.5, &eta, &eta, &[0.5, -0.5], c_a);
    assert!(!report.is_good);
    // A flag on the repelling hyperplane fails the separation test.
    let w = FlagPoint::new(Mat::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]])).unwrap();
    let report = is_good_element(&h, n, 0.5, &w, &eta, &[1.0, -1.0], c_a);
    assert!(!report.is_good);
}

#[test]
fn most_long_samples_are_good_elements() {
    // With eps comfortably above the empirical kappa fluctuation scale,
    // the vast majority of trajectories are good for generic flags.
    let spec = sl2_strong_spec();
    let n = 150;
    let est = lyapunov_vector(&spec, 600, 400, 14);
    let c_a = rmlab_core::lie::structural_constants(1).c_a;
    let mut rng = StreamRng::new(15, 0);
    let eta = FlagPoint::new(rmlab_core::flag::random_special_orthogonal(2, &mut rng)).unwrap();
    let zeta = FlagPoint::new(rmlab_core::flag::random_special_orthogonal(2, &mut rng)).unwrap();
    let mut good = 0;
    let trials = 200;
    for i in 0..trials {
        let mut stream_rng = StreamRng::new(16, i);
        let h = sample_product(&spec, n, &mut stream_rng);
        if is_good_element(&h, n, 0.9, &eta, &zeta, &est.sigma_mu, c_a).is_good {
            good += 1;
        }
    }
    assert!(good > trials * 8 / 10, "only {good}/{trials} good");
}

#[test]
fn zariski_density_check_accepts_shipped_specs() {
    for spec in [sl2_spec(), sl3_spec()] {
        let check = zariski_density_check(&spec, 6);
        assert!(check.no_common_line, "{}", spec.label);
        assert!(check.has_interior_kappa, "{}", spec.label);
        assert!(check.passed());
    }
}

#[test]
fn zariski_density_check_rejects_degenerate_specs() {
    // Two upper-triangular atoms share the invariant line R e_1.
    let t1 = GroupElement::new(Mat::from_rows(&[vec![2.0, 1.0], vec![0.0, 0.5]])).unwrap();
    let t2 = GroupElement::new(Mat::from_rows(&[vec![0.5, 1.0], vec![0.0, 2.0]])).unwrap();
    let spec = MeasureSpec::new(1, vec![t1, t2], vec![0.5, 0.5], "triangular".into()).unwrap();
    assert!(!zariski_density_check(&spec, 4).no_common_line);

    // Two rotations generate a compact group: kappa never enters the
    // interior of the chamber.
    let r1 = GroupElement::new(rotation2(0.3)).unwrap();
    let r2 = GroupElement::new(rotation2(1.1)).unwrap();
    let spec = MeasureSpec::new(1, vec![r1, r2], vec![0.5, 0.5], "rotations".into()).unwrap();
    assert!(!zariski_density_check(&spec, 4).has_interior_kappa);
}

#[test]
fn monte_carlo_mean_is_deterministic_in_stream_order() {
    let stat = monte_carlo_mean(1000, |i| (i % 10) as f64);
    assert_close(stat.mean, 4.5, 1e-12, "stream-ordered mean");
    assert_eq!(stat.n, 1000);
    let again = monte_carlo_mean(1000, |i| (i % 10) as f64);
    assert_eq!(stat.mean.to_bits(), again.mean.to_bits());
}

#[test]
fn random_word_products_stay_unimodular() {
    let mut rng = StreamRng::new(84, 0);
    for _ in 0..20 {
        let g = random_word(&sl3_spec(), 25, &mut rng);
        assert_close(g.mat().det(), 1.0, 1e-6, "det of long word");
    }
}
