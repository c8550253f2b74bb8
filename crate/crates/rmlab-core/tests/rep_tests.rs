mod common;

use common::{assert_close, max_abs_diff, random_sl};
use rmlab_core::lie::{cartan_decompose, rotation, GroupElement};
use rmlab_core::mat::{normalize, vec_dot, vec_norm, Mat};
use rmlab_core::rep::{
    binom, delta_pair, density_points, exterior_matrix_of, exterior_power, gamma12, gamma12_of,
    gamma13_of, lex_subsets, operator_norm_identity_check, proj_dist, wedge_columns,
};
use rmlab_core::rng::StreamRng;

#[test]
fn binom_and_subset_counts() {
    assert_eq!(binom(4, 2), 6);
    assert_eq!(binom(5, 0), 1);
    assert_eq!(lex_subsets(4, 2).len(), 6);
    assert_eq!(lex_subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
    let s42 = lex_subsets(4, 2);
    assert_eq!(s42[0], vec![0, 1]);
    assert_eq!(s42[1], vec![0, 2]);
    assert_eq!(s42[5], vec![2, 3]);
    for w in s42.windows(2) {
        assert!(w[0] < w[1], "lexicographic order");
    }
}

#[test]
fn exterior_degree_one_is_identity_map() {
    let mut rng = StreamRng::new(31, 0);
    let g = random_sl(3, &mut rng);
    let rho = exterior_power(&g, 1);
    assert!(max_abs_diff(&rho.mat, g.mat()) < 1e-15);
}

#[test]
fn exterior_of_diagonal_sl3() {
    let (a, b, c) = (2.0, 1.5, 1.0 / 3.0);
    let g = GroupElement::new(Mat::diag(&[a, b, c])).unwrap();
    let rho = exterior_power(&g, 2);
    let expected = Mat::diag(&[a * b, a * c, b * c]);
    assert!(max_abs_diff(&rho.mat, &expected) < 1e-12);
}

#[test]
fn exterior_of_identity() {
    let g = GroupElement::identity(3);
    for d in 1..=3 {
        let rho = exterior_power(&g, d);
        assert!(max_abs_diff(&rho.mat, &Mat::identity(binom(4, d))) < 1e-15);
    }
}

#[test]
fn exterior_multiplicativity() {
    let mut rng = StreamRng::new(32, 0);
    for _ in 0..100 {
        let g = random_sl(4, &mut rng);
        let h = random_sl(4, &mut rng);
        for d in 1..=3 {
            let lhs = exterior_matrix_of(&g.mat().mul(h.mat()), d);
            let rhs = exterior_matrix_of(g.mat(), d).mul(&exterior_matrix_of(h.mat(), d));
            assert!(
                max_abs_diff(&lhs, &rhs) < 1e-8 * lhs.max_abs().max(1.0),
                "wedge^{d} multiplicative"
            );
        }
    }
}

#[test]
fn top_exterior_power_is_determinant() {
    let mut rng = StreamRng::new(33, 0);
    for _ in 0..50 {
        let g = random_sl(3, &mut rng);
        let top = exterior_matrix_of(g.mat(), 3);
        assert_eq!(top.rows(), 1);
        assert_close(top[(0, 0)], 1.0, 1e-9, "wedge^3 g = det g");
    }
}

#[test]
fn gamma12_identities() {
    assert_close(gamma12(&GroupElement::identity(2), 1), 1.0, 1e-12, "identity");
    let t = 0.7f64;
    let g = GroupElement::new(Mat::diag(&[t.exp(), (-t).exp()])).unwrap();
    assert_close(gamma12(&g, 1), (-2.0 * t).exp(), 1e-10, "sl2 diagonal");

    let mut rng = StreamRng::new(34, 0);
    for _ in 0..100 {
        let g = random_sl(3, &mut rng);
        let kappa = cartan_decompose(&g).unwrap().kappa;
        for d in 1..=2 {
            assert_close(
                gamma12(&g, d),
                (-(kappa[d - 1] - kappa[d])).exp(),
                1e-8 * gamma12(&g, d).max(1.0),
                "gamma12 = e^{-alpha kappa}",
            );
        }
    }
}

#[test]
fn gamma13_of_diagonal() {
    // diag(e^2, e, e^-3): |w3| = 1, |w2| = e^3, |g| = e^2.
    let a = Mat::diag(&[2f64.exp(), 1f64.exp(), (-3f64).exp()]);
    assert_close(gamma13_of(&a), (-5f64).exp(), 1e-12, "gamma13 diagonal");
    let _ = gamma12_of(&a);
}

#[test]
fn density_points_of_diagonal() {
    let g = GroupElement::new(Mat::diag(&[3.0, 1.0, 1.0 / 3.0])).unwrap();
    for d in 1..=2 {
        let dp = density_points(&g, d);
        assert!(dp.unique);
        assert_close(dp.xm[0].abs(), 1.0, 1e-12, "xm = e_{1..d}");
        assert_close(dp.ym[0].abs(), 1.0, 1e-12, "ym = e_{1..d}");
    }
}

#[test]
fn density_points_of_rotated_diagonal() {
    let r = rotation(2, 0, 1, 0.6);
    let g = GroupElement::new(r.mul(&Mat::diag(&[4.0, 0.25]))).unwrap();
    let dp = density_points(&g, 1);
    let expected = r.col(0);
    assert!(proj_dist(&dp.xm, &expected) < 1e-10, "xm = r e_1");
}

#[test]
fn ym_is_xm_of_transpose() {
    let mut rng = StreamRng::new(35, 0);
    for _ in 0..100 {
        let g = random_sl(3, &mut rng);
        let kappa = cartan_decompose(&g).unwrap().kappa;
        for d in 1..=2 {
            // Singular vectors lose accuracy as the spectral gap closes;
            // compare only away from degeneracy.
            if kappa[d - 1] - kappa[d] < 1e-3 {
                continue;
            }
            let dp = density_points(&g, d);
            let dpt = density_points(&g.transpose(), d);
            assert!(proj_dist(&dp.ym, &dpt.xm) < 1e-6, "ym(g) = xm(g^T)");
        }
    }
}

#[test]
fn operator_norm_identity() {
    assert!(operator_norm_identity_check(&GroupElement::identity(3), 2) < 1e-12);
    let g = GroupElement::new(Mat::diag(&[2.0, 0.5])).unwrap();
    assert!(operator_norm_identity_check(&g, 1) < 1e-12);
    let mut rng = StreamRng::new(36, 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let g = random_sl(3, &mut rng);
        for d in 1..=2 {
            worst = worst.max(operator_norm_identity_check(&g, d));
        }
    }
    assert!(worst <= 1e-8, "max residual {worst:e}");
}

#[test]
fn proj_dist_matches_wedge_norm() {
    let mut rng = StreamRng::new(37, 0);
    for _ in 0..200 {
        let v: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let w: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let wedge = rmlab_core::flag::wedge2(&v, &w);
        let direct = vec_norm(&wedge) / (vec_norm(&v) * vec_norm(&w));
        assert_close(proj_dist(&v, &w), direct, 1e-12, "Gram identity");
    }
}

#[test]
fn delta_bounded_by_contraction() {
    // delta(x, y^m_g) <= |g v| / (|g| |v|) <= 1 in every wedge power.
    let mut rng = StreamRng::new(38, 0);
    for _ in 0..500 {
        let g = random_sl(3, &mut rng);
        for d in 1..=2 {
            let rho = exterior_power(&g, d);
            let dp = density_points(&g, d);
            let v: Vec<f64> = (0..rho.dim).map(|_| rng.normal()).collect();
            let ratio = vec_norm(&rho.mat.matvec(&v)) / (rho.mat.norm_op() * vec_norm(&v));
            let delta = delta_pair(&v, &dp.ym);
            assert!(delta <= ratio + 1e-9, "delta {delta} vs ratio {ratio}");
            assert!(ratio <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn lipschitz_contraction_on_separated_points() {
    // For x, x' at distance >= delta from the repelling hyperplane, the
    // action of g contracts by at most gamma12 delta^{-2}.
    let mut rng = StreamRng::new(39, 0);
    let mut checked = 0;
    for _ in 0..2000 {
        let g = random_sl(3, &mut rng);
        let a = g.mat();
        let dp = density_points(&g, 1);
        let v: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let w: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let delta = delta_pair(&v, &dp.ym).min(delta_pair(&w, &dp.ym));
        if delta < 1e-2 {
            continue;
        }
        checked += 1;
        let lhs = proj_dist(&a.matvec(&v), &a.matvec(&w));
        let rhs = gamma12_of(a) / (delta * delta) * proj_dist(&v, &w);
        assert!(lhs <= rhs + 1e-9, "contraction bound: {lhs} vs {rhs}");
    }
    assert!(checked > 500);
}

#[test]
fn distance_lower_bound_via_wedge() {
    // gamma12(g) delta(x ^ x', y^m of wedge^2 g) <= d(gx, gx') / d(x, x').
    let mut rng = StreamRng::new(40, 0);
    let mut checked = 0;
    for _ in 0..2000 {
        let g = random_sl(3, &mut rng);
        let a = g.mat();
        let v = normalize(&(0..3).map(|_| rng.normal()).collect::<Vec<_>>());
        let w = normalize(&(0..3).map(|_| rng.normal()).collect::<Vec<_>>());
        let dxx = proj_dist(&v, &w);
        if dxx < 1e-3 {
            continue;
        }
        checked += 1;
        let a2 = exterior_matrix_of(a, 2);
        let svd2 = a2.svd().unwrap();
        let ym2: Vec<f64> = svd2.vt.row(0).into();
        let wedge = rmlab_core::flag::wedge2(&v, &w);
        let lhs = gamma12_of(a) * delta_pair(&wedge, &ym2);
        let rhs = proj_dist(&a.matvec(&v), &a.matvec(&w)) / dxx;
        assert!(lhs <= rhs + 1e-9, "lower bound: {lhs} vs {rhs}");
    }
    assert!(checked > 1000);
}

#[test]
fn wedge_columns_matches_exterior_action() {
    let mut rng = StreamRng::new(41, 0);
    for _ in 0..100 {
        let g = random_sl(4, &mut rng);
        for d in 1..=3usize {
            let cols: Vec<usize> = (0..d).collect();
            let w = wedge_columns(g.mat(), &cols);
            // The wedge of the first d columns is wedge^d(g) e_{1..d}.
            let rho = exterior_matrix_of(g.mat(), d);
            let mut e = vec![0.0; rho.rows()];
            e[0] = 1.0;
            let expected = rho.matvec(&e);
            for (a, b) in w.iter().zip(&expected) {
                assert_close(*a, *b, 1e-10, "wedge_columns vs exterior matrix");
            }
        }
    }
    let _ = vec_dot(&[1.0], &[1.0]);
}
