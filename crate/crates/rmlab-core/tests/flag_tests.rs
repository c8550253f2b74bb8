mod common;

use common::{assert_close, max_abs_diff, random_sl, random_word, sl3_spec};
use rmlab_core::flag::{
    act, act_signed, alpha_circle_point, arc_distance, attracting_flag, change_flags,
    cocycle_derivative, d0, d1, delta_flag, dist_alpha, dist_flag, iwasawa_cocycle, m_mul,
    random_special_orthogonal, repelling_flag, sign_m_mats, FlagError, FlagPoint, SignM,
    SignedFlag,
};
use rmlab_core::lie::{cartan_decompose, rotation, structural_constants, GroupElement};
use rmlab_core::mat::{vec_norm, vec_sub, Mat};
use rmlab_core::rep::{exterior_matrix_of, proj_dist};
use rmlab_core::rng::StreamRng;

fn random_flag(n: usize, rng: &mut StreamRng) -> FlagPoint {
    FlagPoint::new(random_special_orthogonal(n, rng)).unwrap()
}

fn random_signed_flag(n: usize, rng: &mut StreamRng) -> SignedFlag {
    SignedFlag::new(random_special_orthogonal(n, rng)).unwrap()
}

/// chi_d of a chamber-valued vector: sum of the first d entries.
fn chi(v: &[f64], d: usize) -> f64 {
    v[..d].iter().sum()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn cocycle_additivity() {
    let mut rng = StreamRng::new(51, 0);
    for n in [2usize, 3, 4] {
        for _ in 0..200 {
            let g = random_sl(n, &mut rng);
            let h = random_sl(n, &mut rng);
            let eta = random_flag(n, &mut rng);
            let lhs = iwasawa_cocycle(&g.mul(&h), &eta);
            let h_eta = act(&h, &eta);
            let a = iwasawa_cocycle(&g, &h_eta);
            let b = iwasawa_cocycle(&h, &eta);
            for i in 0..n {
                assert_close(lhs[i], a[i] + b[i], 1e-8, "sigma(gh) = sigma(g, h eta) + sigma(h)");
            }
        }
    }
}

#[test]
fn cocycle_is_trace_free() {
    let mut rng = StreamRng::new(52, 0);
    for _ in 0..100 {
        let g = random_sl(3, &mut rng);
        let eta = random_flag(3, &mut rng);
        let sigma = iwasawa_cocycle(&g, &eta);
        assert_close(sigma.iter().sum::<f64>(), 0.0, 1e-10, "trace-free sigma");
    }
}

#[test]
fn cocycle_of_descending_diagonal_at_base_is_kappa() {
    let g = GroupElement::new(Mat::diag(&[3.0, 1.0, 1.0 / 3.0])).unwrap();
    let sigma = iwasawa_cocycle(&g, &FlagPoint::base(2));
    let kappa = cartan_decompose(&g).unwrap().kappa;
    for i in 0..3 {
        assert_close(sigma[i], kappa[i], 1e-12, "sigma at eta_o of diagonal");
    }
}

#[test]
fn highest_weight_of_cocycle_is_log_wedge_norm() {
    // chi_d sigma(g, eta) = log |wedge^d g u| for the unit wedge u of eta.
    let mut rng = StreamRng::new(53, 0);
    for _ in 0..200 {
        let g = random_sl(3, &mut rng);
        let eta = random_flag(3, &mut rng);
        let sigma = iwasawa_cocycle(&g, &eta);
        for d in 1..=2 {
            let rho = exterior_matrix_of(g.mat(), d);
            let direct = vec_norm(&rho.matvec(&eta.wedge(d))).ln();
            assert_close(chi(&sigma, d), direct, 1e-8, "chi_d sigma = log |rho(g) u|");
        }
    }
}

#[test]
fn highest_weight_of_kappa_is_log_operator_norm() {
    let mut rng = StreamRng::new(54, 0);
    for _ in 0..200 {
        let g = random_sl(3, &mut rng);
        let kappa = cartan_decompose(&g).unwrap().kappa;
        for d in 1..=2 {
            let rho = exterior_matrix_of(g.mat(), d);
            assert_close(chi(&kappa, d), rho.norm_op().ln(), 1e-8, "chi_d kappa = log |wedge^d g|");
        }
    }
}

#[test]
fn cocycle_minus_kappa_bounded_by_log_delta() {
    // |sigma(g, eta) - kappa(g)| <= C_1 |log delta(eta, zeta^m_g)|.
    let mut rng = StreamRng::new(55, 0);
    for m in [1usize, 2] {
        let n = m + 1;
        let c1 = structural_constants(m).c1;
        for _ in 0..500 {
            let g = random_sl(n, &mut rng);
            let eta = random_flag(n, &mut rng);
            let delta = delta_flag(&eta, &repelling_flag(&g));
            if delta <= 0.0 {
                continue;
            }
            let sigma = iwasawa_cocycle(&g, &eta);
            let kappa = cartan_decompose(&g).unwrap().kappa;
            let diff = vec_norm(&vec_sub(&sigma, &kappa));
            let bound = c1 * delta.ln().abs();
            assert!(diff <= bound + 1e-9, "|sigma - kappa| = {diff} vs C1 |log delta| = {bound}");
        }
    }
}

#[test]
fn attracting_and_repelling_flags_of_diagonal() {
    let g = GroupElement::new(Mat::diag(&[4.0, 1.0, 0.25])).unwrap();
    let eta_m = attracting_flag(&g);
    let zeta = repelling_flag(&g);
    assert!(dist_flag(&eta_m, &FlagPoint::base(2)) < 1e-10);
    assert_close(delta_flag(&FlagPoint::base(2), &zeta), 1.0, 1e-10, "delta(eta_o, zeta_o)");
}

#[test]
fn dist_alpha_examples() {
    let eta = FlagPoint::base(1);
    assert_close(dist_alpha(&eta, &eta, 1), 0.0, 1e-12, "self distance");
    // e_1 vs e_2 in P^1 are orthogonal lines.
    let w = FlagPoint::new(Mat::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]])).unwrap();
    assert_close(dist_alpha(&eta, &w, 1), 1.0, 1e-12, "orthogonal lines");
    // The long Weyl element in SL(3) sends the base flag to a transverse one.
    let w0 = FlagPoint::new(Mat::from_rows(&[
        vec![0.0, 0.0, 1.0],
        vec![0.0, -1.0, 0.0],
        vec![1.0, 0.0, 0.0],
    ]))
    .unwrap();
    let base3 = FlagPoint::base(2);
    assert_close(dist_alpha(&base3, &w0, 1), 1.0, 1e-12, "w0 moves e_1 to e_3");
    assert_close(dist_flag(&base3, &w0), 1.0, 1e-12, "flag distance to w0 eta_o");
}

#[test]
fn dist_flag_triangle_inequality() {
    let mut rng = StreamRng::new(56, 0);
    for _ in 0..300 {
        let a = random_flag(3, &mut rng);
        let b = random_flag(3, &mut rng);
        let c = random_flag(3, &mut rng);
        let (ab, bc, ac) = (dist_flag(&a, &b), dist_flag(&b, &c), dist_flag(&a, &c));
        assert!(ac <= ab + bc + 1e-12, "triangle: {ac} vs {ab} + {bc}");
        assert!(ab <= 1.0 + 1e-12);
    }
}

#[test]
fn delta_flag_examples_and_range() {
    // delta(eta_o, zeta_o) = 1; a quarter rotation sends it to 0 in SL(2).
    let base = FlagPoint::base(1);
    assert_close(delta_flag(&base, &base), 1.0, 1e-12, "base pairing");
    let w = FlagPoint::new(Mat::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]])).unwrap();
    assert_close(delta_flag(&base, &w), 0.0, 1e-12, "orthogonal pairing");
    let mut rng = StreamRng::new(57, 0);
    for _ in 0..200 {
        let a = random_flag(3, &mut rng);
        let b = random_flag(3, &mut rng);
        let d = delta_flag(&a, &b);
        assert!((0.0..=1.0 + 1e-12).contains(&d));
    }
}

#[test]
fn sign_of_equal_arguments_is_identity() {
    let mut rng = StreamRng::new(58, 0);
    for n in [2usize, 3, 4] {
        let k = random_special_orthogonal(n, &mut rng);
        match sign_m_mats(&k, &k).unwrap() {
            SignM::Element(eps) => assert!(eps.iter().all(|&e| e == 1)),
            SignM::Zero => panic!("m(k, k) must be the identity"),
        }
    }
}

#[test]
fn sign_is_equivariant_under_right_m_action() {
    // m(g, g' m0) = m(g, g') m0 for m0 in the sign group.
    let mut rng = StreamRng::new(59, 0);
    let m0s = [
        vec![-1i8, -1, 1],
        vec![1, -1, -1],
        vec![-1, 1, -1],
        vec![1, 1, 1],
    ];
    for _ in 0..100 {
        let a = random_special_orthogonal(3, &mut rng);
        let b = random_special_orthogonal(3, &mut rng);
        let base = match sign_m_mats(&a, &b) {
            Ok(SignM::Element(eps)) => eps,
            _ => continue,
        };
        for m0 in &m0s {
            let bm = b.mul(&Mat::diag(&m0.iter().map(|&e| e as f64).collect::<Vec<_>>()));
            match sign_m_mats(&a, &bm).unwrap() {
                SignM::Element(eps) => assert_eq!(eps, m_mul(&base, m0)),
                SignM::Zero => panic!("right M action cannot reach the boundary"),
            }
        }
    }
}

#[test]
fn sign_detects_boundary_and_near_boundary() {
    let id = Mat::identity(2);
    let quarter = rotation(2, 0, 1, core::f64::consts::FRAC_PI_2);
    assert_eq!(sign_m_mats(&id, &quarter).unwrap(), SignM::Zero);
    let near = rotation(2, 0, 1, core::f64::consts::FRAC_PI_2 - 1e-10);
    match sign_m_mats(&id, &near).unwrap_err() {
        FlagError::AmbiguousSign { degree, inner } => {
            assert_eq!(degree, 1);
            assert!(inner.abs() < 1e-9);
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn sign_is_locally_constant() {
    // For k1, k2, k3 with delta(k2 eta_o, k1 zeta_o) > d(k2 eta_o, k3 eta_o):
    // m(k1, k2) = m(k1, k3) m(k2, k3).
    let mut rng = StreamRng::new(60, 0);
    let mut checked = 0;
    for _ in 0..500 {
        let k1 = random_special_orthogonal(3, &mut rng);
        let k2 = random_special_orthogonal(3, &mut rng);
        let t = rng.uniform_range(-0.05, 0.05);
        let s = rng.uniform_range(-0.05, 0.05);
        let k3 = k2.mul(&rotation(3, 0, 1, t)).mul(&rotation(3, 1, 2, s));
        let f1 = FlagPoint::new(k1.clone()).unwrap();
        let f2 = FlagPoint::new(k2.clone()).unwrap();
        let f3 = FlagPoint::new(k3.clone()).unwrap();
        if delta_flag(&f2, &f1) <= dist_flag(&f2, &f3) {
            continue;
        }
        let m12 = match sign_m_mats(&k1, &k2) {
            Ok(SignM::Element(e)) => e,
            _ => continue,
        };
        let m13 = match sign_m_mats(&k1, &k3) {
            Ok(SignM::Element(e)) => e,
            _ => continue,
        };
        let m23 = match sign_m_mats(&k2, &k3) {
            Ok(SignM::Element(e)) => e,
            _ => continue,
        };
        checked += 1;
        assert_eq!(m12, m_mul(&m13, &m23), "sign locality");
    }
    assert!(checked > 200, "only {checked} triples checked");
}

#[test]
fn sign_relates_cartan_factors() {
    // m(k_g, g h) = m(l_g^{-1}, h) for generic h.
    let mut rng = StreamRng::new(61, 0);
    let mut checked = 0;
    for _ in 0..200 {
        let g = random_sl(3, &mut rng);
        let h = random_sl(3, &mut rng);
        let cartan = cartan_decompose(&g).unwrap();
        let lhs = sign_m_mats(&cartan.k, g.mul(&h).mat());
        let rhs = sign_m_mats(&cartan.l.transpose(), h.mat());
        match (lhs, rhs) {
            (Ok(SignM::Element(a)), Ok(SignM::Element(b))) => {
                checked += 1;
                assert_eq!(a, b, "m(k_g, gh) = m(l_g^-1, h)");
            }
            _ => continue,
        }
    }
    assert!(checked > 100);
}

#[test]
fn alpha_circle_geometry() {
    let z = SignedFlag::base(2);
    // t = 0 stays put.
    assert!(max_abs_diff(&alpha_circle_point(&z, 1, 0.0).k, &z.k) < 1e-15);
    // A quarter turn of the alpha_1-circle moves the line e_1 to e_2.
    let q = alpha_circle_point(&z, 1, core::f64::consts::FRAC_PI_2).project();
    let mut e2 = vec![0.0; 3];
    e2[1] = 1.0;
    assert!(proj_dist(&q.wedge(1), &e2) < 1e-12);
    // The plane member is untouched by the alpha_1-circle.
    let mut rng = StreamRng::new(62, 0);
    for _ in 0..50 {
        let z = random_signed_flag(3, &mut rng);
        let t = rng.uniform_range(0.0, core::f64::consts::PI);
        let moved = alpha_circle_point(&z, 1, t).project();
        // proj_dist resolves nearly identical lines only to ~1e-8.
        assert!(dist_alpha(&z.project(), &moved, 2) < 1e-7, "wedge^2 image is constant");
    }
}

#[test]
fn arc_distance_values_and_errors() {
    let mut rng = StreamRng::new(63, 0);
    let z = random_signed_flag(3, &mut rng);
    for d in 1..=2 {
        assert_close(arc_distance(&z, &z, d).unwrap(), 0.0, 1e-12, "self arc");
        let q = alpha_circle_point(&z, d, core::f64::consts::FRAC_PI_2);
        assert_close(
            arc_distance(&z, &q, d).unwrap(),
            core::f64::consts::FRAC_PI_2,
            1e-8,
            "quarter turn",
        );
        for t in [0.4f64, 1.2, 2.8] {
            let zt = alpha_circle_point(&z, d, t);
            let expected = t.min(core::f64::consts::PI - t);
            assert_close(arc_distance(&z, &zt, d).unwrap(), expected, 1e-8, "arc length");
        }
    }
    // Generic pairs are not on a common circle.
    let other = random_signed_flag(3, &mut rng);
    match arc_distance(&z, &other, 1) {
        Err(FlagError::NotOnCircle { .. }) => {}
        other => panic!("expected NotOnCircle, got {other:?}"),
    }
}

#[test]
fn cocycle_derivative_vanishes_in_symmetric_cases() {
    assert_close(
        cocycle_derivative(&GroupElement::identity(2), &SignedFlag::base(2), 1),
        0.0,
        1e-12,
        "identity",
    );
    let g = GroupElement::new(Mat::diag(&[2.0, 1.0, 0.5])).unwrap();
    for d in 1..=2 {
        assert_close(cocycle_derivative(&g, &SignedFlag::base(2), d), 0.0, 1e-12, "diagonal at base");
    }
}

#[test]
fn cocycle_derivative_matches_finite_difference() {
    let mut rng = StreamRng::new(64, 0);
    let h = 1e-5;
    for n in [2usize, 3] {
        for _ in 0..200 {
            let g = random_sl(n, &mut rng);
            let z = random_signed_flag(n, &mut rng);
            for d in 1..n {
                let exact = cocycle_derivative(&g, &z, d);
                let chi_sigma = |t: f64| {
                    let eta = alpha_circle_point(&z, d, t).project();
                    chi(&iwasawa_cocycle(&g, &eta), d)
                };
                let numeric = (chi_sigma(h) - chi_sigma(-h)) / (2.0 * h);
                let tol = 1e-5 * exact.abs().max(1.0);
                assert_close(exact, numeric, tol, "d/dt chi_d sigma along the circle");
            }
        }
    }
}

#[test]
fn newton_leibniz_along_alpha_circles() {
    // phi(g z2) - phi(g z1) = +- int_0^u d_alpha phi(g gamma(s))
    // e^{-alpha sigma(g, gamma(s))} ds for the unit-speed circle path gamma.
    let mut rng = StreamRng::new(65, 0);
    for n in [2usize, 3] {
        let c1: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let c2: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.normal()).collect();
        for trial in 0..20 {
            let g = random_sl(n, &mut rng);
            let z1 = random_signed_flag(n, &mut rng);
            let d = 1 + trial % (n - 1);
            let u = 0.3;
            let z2 = alpha_circle_point(&z1, d, u);
            let phi = |eta: &FlagPoint| {
                let w1 = eta.wedge(1);
                let mut v = (2.0 * w1.iter().zip(&c1).map(|(a, b)| a * b).sum::<f64>()).sin();
                if n > 2 {
                    let w2 = eta.wedge(2);
                    v += 0.7 * w2.iter().zip(&c2).map(|(a, b)| a * b).sum::<f64>().cos();
                }
                v
            };
            let lhs = phi(&act_signed(&g, &z2).project()) - phi(&act_signed(&g, &z1).project());
            let rhs = simpson(
                |s| {
                    let gamma = alpha_circle_point(&z1, d, s);
                    let sigma = iwasawa_cocycle(&g, &gamma.project());
                    let alpha_sigma = sigma[d - 1] - sigma[d];
                    let gz = act_signed(&g, &gamma);
                    rmlab_core::fourier::alpha_derivative(&phi, &gz, d) * (-alpha_sigma).exp()
                },
                0.0,
                u,
                100,
            );
            let err = (lhs - rhs).abs().min((lhs + rhs).abs());
            assert!(err <= 1e-4, "Newton-Leibniz residual {err:e} (lhs {lhs}, rhs {rhs})");
        }
    }
}

#[test]
fn change_flags_rank_one_uses_a_single_move() {
    let mut rng = StreamRng::new(66, 0);
    let mut checked = 0;
    for _ in 0..200 {
        let g = random_sl(2, &mut rng);
        let eta = random_flag(2, &mut rng);
        let eta2 = random_flag(2, &mut rng);
        let delta = 0.1;
        let out = match change_flags(&eta, &eta2, &g, delta) {
            Ok(out) => out,
            Err(FlagError::PreconditionViolated { .. }) => continue,
            Err(other) => panic!("unexpected error {other:?}"),
        };
        checked += 1;
        assert_eq!(out.moves.len(), 1);
        assert_eq!(out.chain_a.len(), 2);
        assert_eq!(out.chain_b.len(), 1);
        let end = &out.endpoints[0];
        assert!(
            end.dist <= 100.0 * end.bound_scale + 1e-12,
            "endpoint {:.3e} vs scale {:.3e}",
            end.dist,
            end.bound_scale
        );
    }
    assert!(checked > 50, "only {checked} pairs admissible");
}

#[test]
fn change_flags_identical_inputs_need_no_motion() {
    let mut rng = StreamRng::new(67, 0);
    let mut checked = 0;
    for _ in 0..100 {
        let g = random_word(&sl3_spec(), 15, &mut rng);
        let eta = random_flag(3, &mut rng);
        let out = match change_flags(&eta, &eta, &g, 0.05) {
            Ok(out) => out,
            Err(FlagError::PreconditionViolated { .. }) => continue,
            Err(other) => panic!("unexpected error {other:?}"),
        };
        checked += 1;
        for mv in &out.moves {
            assert!(mv.moved <= 1e-6, "move of size {:.3e} for equal flags", mv.moved);
        }
    }
    assert!(checked > 20);
}

#[test]
fn change_flags_brings_images_together() {
    let mut rng = StreamRng::new(68, 0);
    let spec = sl3_spec();
    let delta = 0.05;
    let mut checked = 0;
    for _ in 0..300 {
        let g = random_word(&spec, 20, &mut rng);
        let eta = random_flag(3, &mut rng);
        let eta2 = random_flag(3, &mut rng);
        let out = match change_flags(&eta, &eta2, &g, delta) {
            Ok(out) => out,
            Err(FlagError::PreconditionViolated { .. }) => continue,
            Err(other) => panic!("unexpected error {other:?}"),
        };
        checked += 1;
        for mv in &out.moves {
            assert!(
                (mv.moved - mv.reference).abs() <= 100.0 * mv.error_scale + 1e-12,
                "alpha_{}: moved {:.3e} vs reference {:.3e} (scale {:.3e})",
                mv.d,
                mv.moved,
                mv.reference,
                mv.error_scale
            );
        }
        for end in &out.endpoints {
            assert!(
                end.dist <= 100.0 * end.bound_scale + 1e-12,
                "alpha_{} endpoint {:.3e} vs scale {:.3e}",
                end.d,
                end.dist,
                end.bound_scale
            );
        }
    }
    assert!(checked > 50, "only {checked} triples admissible");
}

#[test]
fn lift_distance_dominates_flag_distance() {
    // sqrt(2) d_0(z, z') >= d(pi z, pi z'), and for pairs with trivial sign
    // the flag distance dominates d_0.
    let mut rng = StreamRng::new(69, 0);
    for _ in 0..300 {
        let z1 = random_signed_flag(3, &mut rng);
        let z2 = random_signed_flag(3, &mut rng);
        let lift = d0(&z1, &z2);
        let down = dist_flag(&z1.project(), &z2.project());
        assert!(2f64.sqrt() * lift >= down - 1e-12);
        if let Ok(SignM::Element(eps)) = sign_m_mats(&z1.k, &z2.k) {
            if eps.iter().all(|&e| e == 1) {
                assert!(down >= lift - 1e-12, "trivial sign: d {down} vs d0 {lift}");
            }
        }
    }
}

#[test]
fn riemannian_distance_closed_forms() {
    // SO(2): d0/d1 = |sin(t/2)| / |t|, which lies in [1/pi, 1/2].
    let z = SignedFlag::base(1);
    for t in [0.3f64, 1.0, 2.0, 3.0] {
        let zt = alpha_circle_point(&z, 1, t);
        let r1 = d1(&z, &zt).unwrap();
        assert_close(r1, 2f64.sqrt() * t, 1e-10, "SO(2) distance");
        let ratio = d0(&z, &zt) / r1;
        assert!(ratio >= 1.0 / core::f64::consts::PI - 1e-9 && ratio <= 0.5 + 1e-9);
    }
    // SO(3): rotation by t in a coordinate plane has d1 = sqrt(2) t, and
    // d1 dominates d0 on random pairs.
    let z3 = SignedFlag::base(2);
    let rot = SignedFlag::new(rotation(3, 0, 1, 0.8)).unwrap();
    assert_close(d1(&z3, &rot).unwrap(), 2f64.sqrt() * 0.8, 1e-10, "SO(3) angle");
    let mut rng = StreamRng::new(70, 0);
    for _ in 0..200 {
        let a = random_signed_flag(3, &mut rng);
        let b = random_signed_flag(3, &mut rng);
        assert!(d1(&a, &b).unwrap() >= d0(&a, &b) - 1e-9);
    }
    // No closed form is provided beyond rank 2.
    let a4 = random_signed_flag(4, &mut rng);
    match d1(&a4, &a4) {
        Err(FlagError::UnsupportedRank { rank }) => assert_eq!(rank, 3),
        other => panic!("expected UnsupportedRank, got {other:?}"),
    }
}

#[test]
fn random_special_orthogonal_is_orthogonal() {
    let mut rng = StreamRng::new(71, 0);
    for n in [2usize, 3, 5] {
        for _ in 0..50 {
            let k = random_special_orthogonal(n, &mut rng);
            assert!(max_abs_diff(&k.transpose().mul(&k), &Mat::identity(n)) < 1e-12);
            assert_close(k.det(), 1.0, 1e-10, "det");
        }
    }
}
