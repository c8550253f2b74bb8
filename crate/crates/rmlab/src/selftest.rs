//! Built-in invariant suites: `geom-selftest` exercises the decomposition
//! and flag-geometry identities on random words, `selftest` adds quick
//! checks from every other module.

use anyhow::anyhow;
use num_complex::Complex64;

use rmlab_core::flag::{
    act, alpha_circle_point, cocycle_derivative, d0, d1, delta_flag, dist_flag, iwasawa_cocycle,
    random_special_orthogonal, repelling_flag, FlagPoint, SignedFlag,
};
use rmlab_core::lie::{
    cartan_decompose, iwasawa_decompose, structural_constants, GroupElement,
};
use rmlab_core::mat::{vec_norm, vec_sub, Mat};
use rmlab_core::noncon::{affine_det, e_d_map, x_from_deviation, y_from_deviation};
use rmlab_core::rep::exterior_matrix_of;
use rmlab_core::rng::StreamRng;
use rmlab_core::transfer::{build_transfer, p1_action, p1_cocycle, spectral_radius};
use rmlab_core::walk::{zariski_density_check, MeasureSpec};

use crate::commands::{bump, CmdFailure, CmdResult};
use crate::report::{f, Report};
use crate::specio::{builtin_sl2, builtin_sl2_strong, builtin_sl3};

struct CheckResult {
    name: &'static str,
    instances: usize,
    worst: f64,
    ok: bool,
}

fn chi(v: &[f64], d: usize) -> f64 {
    v[..d].iter().sum()
}

fn random_word(spec: &MeasureSpec, rng: &mut StreamRng) -> GroupElement {
    let len = 1 + (rng.uniform_range(0.0, 30.0) as usize).min(29);
    let mut g = GroupElement::identity(spec.rank());
    for _ in 0..len {
        g = g.mul(spec.sample_atom(rng));
    }
    g
}

fn random_flag(n: usize, rng: &mut StreamRng) -> FlagPoint {
    FlagPoint::new(random_special_orthogonal(n, rng)).unwrap()
}

fn rel_residual(got: &Mat, want: &Mat) -> f64 {
    got.sub(want).max_abs() / want.max_abs().max(1.0)
}

/// Decomposition and geometry identities on random words of the builtin
/// specs. Returns one result row per check.
fn geom_checks(words: usize, seed: u64) -> Vec<CheckResult> {
    let specs = [builtin_sl2(), builtin_sl3()];
    let mut cartan_worst = 0.0f64;
    let mut iwasawa_worst = 0.0f64;
    let mut flip_worst = 0.0f64;
    let mut additivity_worst = 0.0f64;
    let mut norm_id_worst = 0.0f64;
    let mut iwacar_worst = f64::NEG_INFINITY;
    let mut appb_worst = f64::NEG_INFINITY;
    let mut derivative_worst = 0.0f64;
    let mut rng = StreamRng::new(seed, 0);
    for spec in &specs {
        let n = spec.dim();
        let c1 = structural_constants(spec.rank()).c1;
        for _ in 0..words {
            let g = random_word(spec, &mut rng);
            let h = random_word(spec, &mut rng);
            let eta = random_flag(n, &mut rng);

            let ct = cartan_decompose(&g).expect("cartan decomposition");
            let exp_kappa = Mat::diag(&ct.kappa.iter().map(|x| x.exp()).collect::<Vec<_>>());
            cartan_worst = cartan_worst.max(rel_residual(&ct.k.mul(&exp_kappa).mul(&ct.l), g.mat()));

            let it = iwasawa_decompose(&g);
            let exp_sigma = Mat::diag(&it.sigma.iter().map(|x| x.exp()).collect::<Vec<_>>());
            iwasawa_worst =
                iwasawa_worst.max(rel_residual(&it.k.mul(&exp_sigma).mul(&it.n), g.mat()));

            let kappa_inv = cartan_decompose(&g.inverse()).expect("cartan decomposition").kappa;
            for i in 0..n {
                flip_worst = flip_worst.max((kappa_inv[i] + ct.kappa[n - 1 - i]).abs());
            }

            let lhs = iwasawa_cocycle(&g.mul(&h), &eta);
            let rhs_a = iwasawa_cocycle(&g, &act(&h, &eta));
            let rhs_b = iwasawa_cocycle(&h, &eta);
            // Relative to the cocycle norm: on long words the entries reach
            // ~30 and the raw residual is dominated by QR conditioning.
            let scale = vec_norm(&lhs).max(1.0);
            for i in 0..n {
                additivity_worst =
                    additivity_worst.max((lhs[i] - rhs_a[i] - rhs_b[i]).abs() / scale);
            }

            // chi_d sigma(g, eta) = log |wedge^d g u| for the unit wedge of
            // eta, and chi_d kappa(g) = log |wedge^d g|.
            let sigma = iwasawa_cocycle(&g, &eta);
            for d in 1..n {
                let rho = exterior_matrix_of(g.mat(), d);
                let image = rho.matvec(&eta.wedge(d));
                norm_id_worst =
                    norm_id_worst.max((chi(&sigma, d) - vec_norm(&image).ln()).abs());
                norm_id_worst =
                    norm_id_worst.max((chi(&ct.kappa, d) - rho.norm_op().ln()).abs());
            }

            // |sigma(g, eta) - kappa(g)| <= C1 |log delta(eta, zeta^m_g)|.
            let delta = delta_flag(&eta, &repelling_flag(&g));
            if delta > 0.0 {
                let diff = vec_norm(&vec_sub(&sigma, &ct.kappa));
                iwacar_worst = iwacar_worst.max(diff - c1 * delta.ln().abs());
            }

            // Appendix B distance comparison on the sign cover.
            let z1 = SignedFlag::new(random_special_orthogonal(n, &mut rng)).unwrap();
            let z2 = SignedFlag::new(random_special_orthogonal(n, &mut rng)).unwrap();
            let dd0 = d0(&z1, &z2);
            appb_worst =
                appb_worst.max(dist_flag(&z1.project(), &z2.project()) - 2.0f64.sqrt() * dd0);
            if let Ok(dd1) = d1(&z1, &z2) {
                appb_worst = appb_worst.max(dd0 - dd1);
            }

            // Directional derivative along the alpha_d-circles against a
            // central finite difference.
            let z = SignedFlag::new(random_special_orthogonal(n, &mut rng)).unwrap();
            let step = 1e-5;
            for d in 1..n {
                let exact = cocycle_derivative(&g, &z, d);
                let chi_sigma = |t: f64| {
                    let eta_t = alpha_circle_point(&z, d, t).project();
                    chi(&iwasawa_cocycle(&g, &eta_t), d)
                };
                let numeric = (chi_sigma(step) - chi_sigma(-step)) / (2.0 * step);
                derivative_worst =
                    derivative_worst.max((exact - numeric).abs() / exact.abs().max(1.0));
            }
        }
    }
    let instances = 2 * words;
    vec![
        CheckResult {
            name: "cartan-reconstruction",
            instances,
            worst: cartan_worst,
            ok: cartan_worst <= 1e-9,
        },
        CheckResult {
            name: "iwasawa-reconstruction",
            instances,
            worst: iwasawa_worst,
            ok: iwasawa_worst <= 1e-9,
        },
        CheckResult {
            name: "kappa-inverse-flip",
            instances,
            worst: flip_worst,
            ok: flip_worst <= 1e-8,
        },
        CheckResult {
            name: "cocycle-additivity",
            instances,
            worst: additivity_worst,
            ok: additivity_worst <= 1e-8,
        },
        CheckResult {
            name: "norm-cocycle-identities",
            instances,
            worst: norm_id_worst,
            ok: norm_id_worst <= 1e-8,
        },
        CheckResult {
            name: "iwasawa-cartan-comparison",
            instances,
            worst: iwacar_worst,
            ok: iwacar_worst <= 1e-9,
        },
        CheckResult {
            name: "signed-distance-comparison",
            instances,
            worst: appb_worst,
            ok: appb_worst <= 1e-9,
        },
        CheckResult {
            name: "circle-derivative",
            instances,
            worst: derivative_worst,
            ok: derivative_worst <= 1e-5,
        },
    ]
}

fn quick_checks(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut rng = StreamRng::new(seed, 1);

    // Transfer operator: Markov at z = 0, cocycle additivity on P^1.
    let sl2 = builtin_sl2();
    let t0 = build_transfer(&sl2, Complex64::default(), 256).unwrap();
    let row_res = t0.row_sum_residual();
    let radius = spectral_radius(&t0).map(|r| (r - 1.0).abs()).unwrap_or(f64::INFINITY);
    out.push(CheckResult {
        name: "markov-row-sums",
        instances: 256,
        worst: row_res,
        ok: row_res <= 1e-12,
    });
    out.push(CheckResult {
        name: "markov-spectral-radius",
        instances: 1,
        worst: radius,
        ok: radius <= 1e-6,
    });
    let mut p1_worst = 0.0f64;
    for _ in 0..100 {
        let g = sl2.sample_atom(&mut rng).clone();
        let h = sl2.sample_atom(&mut rng).mul(&g);
        let theta = rng.uniform_range(0.0, std::f64::consts::PI);
        let lhs = p1_cocycle(&h.mul(&g), theta);
        let rhs = p1_cocycle(&h, p1_action(&g, theta)) + p1_cocycle(&g, theta);
        p1_worst = p1_worst.max((lhs - rhs).abs());
    }
    out.push(CheckResult {
        name: "p1-cocycle-additivity",
        instances: 100,
        worst: p1_worst,
        ok: p1_worst <= 1e-10,
    });

    // Renewal: the one-atom diagonal walk is an exact integer ladder.
    let diag =
        GroupElement::new(Mat::diag(&[1.0f64.exp(), (-1.0f64).exp()])).unwrap();
    let det_spec = MeasureSpec::new(1, vec![diag], vec![1.0], "ladder".into()).unwrap();
    let fbump = bump(1.0);
    let r = rmlab_core::renewal::renewal_sum(
        &det_spec,
        &fbump,
        1.0,
        &[1.0, 0.0],
        7.3,
        1.0,
        0.05,
        4,
        seed,
    )
    .expect("deterministic renewal sum");
    let oracle: f64 = (0..=r.n_max).map(|k| fbump(k as f64 - 7.3)).sum();
    let renewal_err = (r.estimate - oracle).abs();
    out.push(CheckResult {
        name: "renewal-lattice-oracle",
        instances: r.n_max,
        worst: renewal_err,
        ok: renewal_err <= 1e-10,
    });

    // Fourier: trivial coefficient and conjugation symmetry.
    let angles: Vec<f64> = (0..500)
        .map(|_| rng.uniform_range(0.0, std::f64::consts::PI))
        .collect();
    let mut conj_worst = 0.0f64;
    for k in 1..6i64 {
        let (plus, _) = rmlab_core::fourier::fourier_from_angles(&angles, k);
        let (minus, _) = rmlab_core::fourier::fourier_from_angles(&angles, -k);
        conj_worst = conj_worst.max((plus - minus.conj()).norm());
    }
    out.push(CheckResult {
        name: "fourier-conjugation",
        instances: 5,
        worst: conj_worst,
        ok: conj_worst <= 1e-12,
    });

    // Non-concentration: the weight identity p_d Y = E_d(X) on random
    // trace-free deviations.
    let mut ed_worst = 0.0f64;
    for m in [1usize, 2] {
        let roots = structural_constants(m);
        for _ in 0..200 {
            let mut w: Vec<f64> = (0..=m).map(|_| rng.normal()).collect();
            let mean = w.iter().sum::<f64>() / (m + 1) as f64;
            for x in w.iter_mut() {
                *x -= mean;
            }
            let mut clamped = 0;
            let y = y_from_deviation(&w, &mut clamped);
            let x = x_from_deviation(&w, &mut clamped);
            for d in 1..=m {
                let lhs = y[d - 1];
                let rhs = e_d_map(&roots, &x, d)[d - 1];
                ed_worst = ed_worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
            }
        }
    }
    out.push(CheckResult {
        name: "weight-map-identity",
        instances: 400,
        worst: ed_worst,
        ok: ed_worst <= 1e-10,
    });
    let degenerate = affine_det(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]]);
    out.push(CheckResult {
        name: "affine-det-degenerate",
        instances: 1,
        worst: degenerate.abs(),
        ok: degenerate.abs() <= 1e-12,
    });

    // Walk engine: the builtin specs pass the density certificate.
    let mut density_ok = true;
    for spec in [builtin_sl2(), builtin_sl2_strong(), builtin_sl3()] {
        density_ok &= zariski_density_check(&spec, 3).passed();
    }
    out.push(CheckResult {
        name: "density-certificate",
        instances: 3,
        worst: if density_ok { 0.0 } else { 1.0 },
        ok: density_ok,
    });

    out
}

fn report_from(checks: Vec<CheckResult>, command: &str, seed: u64) -> CmdResult {
    let mut report = Report::new(command);
    report.meta("seed", seed).header(&["check", "instances", "worst_residual", "status"]);
    let mut failed = 0usize;
    for c in &checks {
        report.row(&[
            &c.name,
            &c.instances,
            &f(c.worst),
            &if c.ok { "ok" } else { "FAIL" },
        ]);
        if !c.ok {
            failed += 1;
        }
    }
    report.meta("failed", failed);
    if failed > 0 {
        eprintln!("{}", report.to_csv());
        return Err(CmdFailure::Numerical(anyhow!("{failed} checks failed")));
    }
    Ok(report)
}

pub fn geom_selftest(words: usize, seed: u64) -> CmdResult {
    report_from(geom_checks(words, seed), "geom-selftest", seed)
}

pub fn selftest(seed: u64) -> CmdResult {
    let mut checks = geom_checks(200, seed);
    checks.extend(quick_checks(seed));
    report_from(checks, "selftest", seed)
}
