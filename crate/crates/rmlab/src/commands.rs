//! Subcommand implementations. Each returns a Report; failures are split
//! into configuration errors (exit 1) and numerical failures (exit 2).

use anyhow::anyhow;
use num_complex::Complex64;

use rmlab_core::flag::FlagPoint;
use rmlab_core::lie::structural_constants;
use rmlab_core::renewal::{
    cocycle_deviation_scale, renewal_error_fit, renewal_norm_sum, renewal_sum, ErrorFitOutcome,
};
use rmlab_core::rep::delta_pair;
use rmlab_core::rng::StreamRng;
use rmlab_core::stats::mean_stderr;
use rmlab_core::transfer::{
    build_transfer, iterate_norm_estimate, iterate_values, spectral_radius,
};
use rmlab_core::flag::repelling_flag;
use rmlab_core::walk::{
    deviation_sample, fit_curve_slope, holder_fit_from_deltas, is_good_element, lyapunov_sample,
    sample_product_with, stationary_vector, CurvePoint, DeviationMode, LyapunovEstimate,
    MeasureSpec,
};
use rmlab_core::{fourier, noncon};

use crate::driver::run_indexed;
use crate::report::{f, Report};

pub enum CmdFailure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

pub type CmdResult = Result<Report, CmdFailure>;

fn cfg<E: Into<anyhow::Error>>(e: E) -> CmdFailure {
    CmdFailure::Config(e.into())
}

fn num<E: Into<anyhow::Error>>(e: E) -> CmdFailure {
    CmdFailure::Numerical(e.into())
}

fn require_rank_one(spec: &MeasureSpec) -> Result<(), CmdFailure> {
    if spec.rank() != 1 {
        return Err(cfg(anyhow!(
            "this command needs a rank-1 spec (2x2 matrices), got m = {}",
            spec.rank()
        )));
    }
    Ok(())
}

fn require_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<(), CmdFailure> {
    for v in values {
        if !v.is_finite() {
            return Err(num(anyhow!("non-finite value in {what}")));
        }
    }
    Ok(())
}

/// Seed stream used for internal drift estimation, kept away from the
/// user-facing sample streams.
fn drift_seed(seed: u64) -> u64 {
    seed ^ 0x5851f42d4c957f2d
}

/// Lyapunov vector with per-sample work spread over workers; results are
/// identical to the serial core routine.
pub fn estimate_lyapunov(
    spec: &MeasureSpec,
    n: usize,
    sample_count: usize,
    seed: u64,
    workers: usize,
) -> Result<LyapunovEstimate, CmdFailure> {
    let ext = spec.exterior_atoms();
    let samples: Vec<Vec<f64>> = run_indexed(workers, sample_count, |i| {
        lyapunov_sample(spec, &ext, n, seed, i)
    })
    .map_err(num)?;
    let dim = spec.dim();
    let mut sigma_mu = Vec::with_capacity(dim);
    let mut stderr = Vec::with_capacity(dim);
    for d in 0..dim {
        let column: Vec<f64> = samples.iter().map(|s| s[d]).collect();
        let ms = mean_stderr(&column);
        sigma_mu.push(ms.mean);
        stderr.push(ms.stderr);
    }
    require_finite(sigma_mu.iter().cloned(), "Lyapunov estimate")?;
    Ok(LyapunovEstimate {
        sigma_mu,
        stderr,
        n,
        sample_count,
    })
}

pub fn lyapunov(
    spec: &MeasureSpec,
    hash: &str,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    let est = estimate_lyapunov(spec, n, samples, seed, workers)?;
    let (alpha, alpha_err) = est.min_alpha();
    let mut report = Report::new("lyapunov");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("n", n)
        .meta("samples", samples)
        .header(&["quantity", "value", "stderr"]);
    for (d, (s, e)) in est.sigma_mu.iter().zip(&est.stderr).enumerate() {
        report.row(&[&format!("sigma_{}", d + 1), &f(*s), &f(*e)]);
    }
    report.row(&[&"min_alpha", &f(alpha), &f(alpha_err)]);
    Ok(report)
}

fn parse_mode(mode: &str, d: usize) -> Result<DeviationMode, CmdFailure> {
    match mode {
        "cartan" => Ok(DeviationMode::CartanNorm),
        "point" => Ok(DeviationMode::PointRepelling { d }),
        "flag-rep" => Ok(DeviationMode::FlagRepelling),
        "flag-att" => Ok(DeviationMode::FlagAttracting),
        other => Err(cfg(anyhow!("unknown deviation mode '{other}'"))),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[allow(clippy::too_many_arguments)]
pub fn ldp(
    spec: &MeasureSpec,
    hash: &str,
    mode: &str,
    d: usize,
    eps: f64,
    n_list: &[usize],
    samples: usize,
    drift_samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    if d == 0 || d > spec.rank() {
        return Err(cfg(anyhow!("d must lie in 1..={}", spec.rank())));
    }
    let mode = parse_mode(mode, d)?;
    let est = estimate_lyapunov(spec, 200, drift_samples, drift_seed(seed), workers)?;
    let ext = spec.exterior_atoms();
    let mut point = vec![0.0; binomial(spec.dim(), d)];
    point[0] = 1.0;
    let flag = FlagPoint::base(spec.rank());
    let mut points: Vec<CurvePoint> = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let hits: usize = run_indexed(workers, samples, |i| {
            deviation_sample(
                spec,
                &ext,
                mode,
                &est.sigma_mu,
                eps,
                &point,
                &flag,
                n,
                seed,
                (ni * samples) as u64 + i,
            ) as usize
        })
        .map_err(num)?
        .iter()
        .sum();
        points.push(CurvePoint {
            n,
            probability: hits as f64 / samples as f64,
            hits,
            samples,
        });
    }
    let slope = fit_curve_slope(&points);
    let mut report = Report::new("ldp");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("eps", eps)
        .meta("samples", samples);
    match slope {
        Some((s, ci)) => {
            report.meta("slope", f(s)).meta("slope_ci95", f(ci));
        }
        None => {
            report.meta("slope", "none (fewer than 3 populated points)");
        }
    }
    report.header(&["n", "probability", "hits", "samples"]);
    for p in &points {
        report.row(&[&p.n, &f(p.probability), &p.hits, &p.samples]);
    }
    Ok(report)
}

pub fn stationary(
    spec: &MeasureSpec,
    hash: &str,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    let vectors: Vec<Vec<f64>> =
        run_indexed(workers, samples, |i| stationary_vector(spec, n, seed, i)).map_err(num)?;
    let mut report = Report::new("stationary");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("n", n)
        .meta("samples", samples);
    let dim = spec.dim();
    let mut columns: Vec<String> = vec!["sample".into()];
    columns.extend((0..dim).map(|i| format!("x{i}")));
    if spec.rank() == 1 {
        columns.push("theta".into());
    }
    let refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    report.header(&refs);
    for (i, v) in vectors.iter().enumerate() {
        let mut cells: Vec<String> = vec![i.to_string()];
        cells.extend(v.iter().map(|&x| f(x)));
        if spec.rank() == 1 {
            let theta = v[1].atan2(v[0]).rem_euclid(std::f64::consts::PI);
            cells.push(f(theta));
        }
        let cell_refs: Vec<&dyn ToString> = cells.iter().map(|c| c as &dyn ToString).collect();
        report.row(&cell_refs);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn regularity(
    spec: &MeasureSpec,
    hash: &str,
    target: Option<&str>,
    r_min: f64,
    r_max: f64,
    grid_points: usize,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    if !(r_min > 0.0 && r_max > r_min && grid_points >= 3) {
        return Err(cfg(anyhow!("need 0 < r-min < r-max and at least 3 grid points")));
    }
    let dim = spec.dim();
    let y: Vec<f64> = match target {
        Some(s) => {
            let parsed: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse()).collect();
            let v = parsed.map_err(|e| cfg(anyhow!("bad --target: {e}")))?;
            if v.len() != dim {
                return Err(cfg(anyhow!("--target needs {dim} coordinates")));
            }
            v
        }
        None => {
            let mut v = vec![0.0; dim];
            v[1] = 1.0;
            v
        }
    };
    let r_grid: Vec<f64> = (0..grid_points)
        .map(|i| {
            let t = i as f64 / (grid_points - 1) as f64;
            r_min * (r_max / r_min).powf(t)
        })
        .collect();
    let deltas: Vec<f64> = run_indexed(workers, samples, |i| {
        delta_pair(&stationary_vector(spec, n, seed, i), &y)
    })
    .map_err(num)?;
    let fit = holder_fit_from_deltas(&deltas, &r_grid).map_err(|e| num(anyhow!("{e}")))?;
    let mut report = Report::new("regularity");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("samples", samples)
        .meta("exponent", f(fit.exponent))
        .meta("exponent_ci95", f(fit.ci95))
        .header(&["r", "mass"]);
    for (r, mass) in &fit.points {
        report.row(&[&f(*r), &f(*mass)]);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn goodfreq(
    spec: &MeasureSpec,
    hash: &str,
    n: usize,
    eps: f64,
    samples: usize,
    drift_samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    let est = estimate_lyapunov(spec, 200, drift_samples, drift_seed(seed), workers)?;
    let ext = spec.exterior_atoms();
    let eta = FlagPoint::base(spec.rank());
    // Reference flag: repelling flag of an independent long product.
    let mut ref_rng = StreamRng::new(drift_seed(seed), u64::MAX);
    let g_ref = sample_product_with(spec, &ext, n.max(50), &mut ref_rng).group_element();
    let zeta = repelling_flag(&g_ref);
    let c_a = structural_constants(spec.rank()).c_a;
    let flags: Vec<bool> = run_indexed(workers, samples, |i| {
        let mut rng = StreamRng::new(seed, i);
        let h = sample_product_with(spec, &ext, n, &mut rng);
        is_good_element(&h, n, eps, &eta, &zeta, &est.sigma_mu, c_a).is_good
    })
    .map_err(num)?;
    let good = flags.iter().filter(|&&b| b).count();
    let mut report = Report::new("goodfreq");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("c_a", f(c_a))
        .header(&["n", "eps", "good_fraction", "good", "samples"]);
    report.row(&[&n, &f(eps), &f(good as f64 / samples as f64), &good, &samples]);
    Ok(report)
}

/// Reference element for non-concentration runs: a fixed random word of
/// length n, independent of the sample streams.
fn reference_word(spec: &MeasureSpec, n: usize, seed: u64) -> rmlab_core::lie::GroupElement {
    let ext = spec.exterior_atoms();
    let mut rng = StreamRng::new(drift_seed(seed), 0xA11CE);
    sample_product_with(spec, &ext, n, &mut rng).group_element()
}

#[allow(clippy::too_many_arguments)]
pub fn noncon_cmd(
    spec: &MeasureSpec,
    hash: &str,
    n_list: &[usize],
    eps: f64,
    d: usize,
    directions: usize,
    samples: usize,
    tuples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    if d > spec.rank() {
        return Err(cfg(anyhow!("d must be at most the rank {}", spec.rank())));
    }
    let est = estimate_lyapunov(spec, 200, 2000, drift_seed(seed), workers)?;
    let eta = FlagPoint::base(spec.rank());
    let mut report = Report::new("noncon");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("eps", eps)
        .meta("d", d)
        .header(&["n", "scale", "pnc_sup_mass", "snc_probability", "clamped"]);
    for &n in n_list {
        let g = reference_word(spec, n, seed);
        let scale = (-eps * n as f64).exp();
        let pnc = noncon::pnc_estimate(
            spec,
            &g,
            &eta,
            n,
            &est.sigma_mu,
            scale,
            directions,
            samples,
            seed.wrapping_add(n as u64),
        );
        let snc = noncon::snc_estimate(
            spec,
            &g,
            &eta,
            n,
            d,
            &est.sigma_mu,
            scale,
            tuples,
            seed.wrapping_add(n as u64) ^ 0xBEEF,
        );
        require_finite([pnc.sup_mass, snc.probability], "non-concentration estimates")?;
        report.row(&[
            &n,
            &f(scale),
            &f(pnc.sup_mass),
            &f(snc.probability),
            &(pnc.stats.clamped + snc.stats.clamped),
        ]);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn multiscale(
    spec: &MeasureSpec,
    hash: &str,
    n: usize,
    eps: f64,
    rho_min: f64,
    rho_max: f64,
    grid_points: usize,
    directions: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    if !(rho_min > 0.0 && rho_max > rho_min && grid_points >= 2) {
        return Err(cfg(anyhow!("need 0 < rho-min < rho-max and at least 2 grid points")));
    }
    let est = estimate_lyapunov(spec, 200, 2000, drift_seed(seed), workers)?;
    let g = reference_word(spec, n, seed);
    let eta = FlagPoint::base(spec.rank());
    let rho_grid: Vec<f64> = (0..grid_points)
        .map(|i| {
            let t = i as f64 / (grid_points - 1) as f64;
            rho_min * (rho_max / rho_min).powf(t)
        })
        .collect();
    let result = noncon::multiscale_noncon(
        spec,
        &g,
        &eta,
        n,
        eps,
        &est.sigma_mu,
        &rho_grid,
        directions,
        samples,
        seed,
    );
    let mut report = Report::new("multiscale");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("n", n)
        .meta("eps", eps)
        .meta("kept", result.kept)
        .meta("samples", samples)
        .header(&["rho", "sup_mass"]);
    for p in &result.points {
        report.row(&[&f(p.rho), &f(p.sup_mass)]);
    }
    Ok(report)
}

pub fn fourier_cmd(
    spec: &MeasureSpec,
    hash: &str,
    k_max: i64,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    require_rank_one(spec)?;
    if k_max < 8 {
        return Err(cfg(anyhow!("k-max must be at least 8")));
    }
    let mut k_grid = Vec::new();
    let mut k = 2i64;
    while k <= k_max {
        k_grid.push(k);
        k *= 2;
    }
    let angles: Vec<f64> = run_indexed(workers, samples, |i| {
        rmlab_core::walk::stationary_angle(spec, n, seed, i)
    })
    .map_err(num)?;
    let (points, fit) =
        fourier::decay_exponent_fit(&angles, &k_grid).map_err(|e| cfg(anyhow!("{e}")))?;
    let mut report = Report::new("fourier");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("samples", samples);
    match fit {
        fourier::DecayFit::Slope { slope, ci95, points } => {
            report
                .meta("slope", f(slope))
                .meta("slope_ci95", f(ci95))
                .meta("fit_points", points);
        }
        fourier::DecayFit::NoiseFloor { points } => {
            report.meta(
                "noise_floor",
                format!("only {points} coefficients above 3 stderr; raise samples"),
            );
        }
    }
    report.header(&["k", "re", "im", "modulus", "stderr"]);
    for p in &points {
        report.row(&[
            &p.k,
            &f(p.value.re),
            &f(p.value.im),
            &f(p.value.norm()),
            &f(p.stderr),
        ]);
    }
    Ok(report)
}

pub fn oscillatory(
    spec: &MeasureSpec,
    hash: &str,
    xi: f64,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    require_rank_one(spec)?;
    if xi <= 1.0 {
        return Err(cfg(anyhow!("xi must exceed 1")));
    }
    let values: Vec<Complex64> = run_indexed(workers, samples, |i| {
        let theta = rmlab_core::walk::stationary_angle(spec, n, seed, i);
        Complex64::new(0.0, xi * 2.0 * theta).exp()
    })
    .map_err(num)?;
    let (mean, stderr) = fourier::complex_mean(&values);
    let mut report = Report::new("oscillatory");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("samples", samples)
        .meta("phase", "2*theta")
        .meta("amplitude", "1")
        .header(&["xi", "re", "im", "modulus", "stderr"]);
    report.row(&[&f(xi), &f(mean.re), &f(mean.im), &f(mean.norm()), &f(stderr)]);
    Ok(report)
}

fn line_angle(eta: &FlagPoint) -> f64 {
    eta.k[(1, 0)].atan2(eta.k[(0, 0)]).rem_euclid(std::f64::consts::PI)
}

pub fn goodness(
    phase: &str,
    band: Option<(f64, f64)>,
    c: f64,
    samples: usize,
    seed: u64,
) -> CmdResult {
    if c <= 1.0 {
        return Err(cfg(anyhow!("C must exceed 1")));
    }
    let phi: Box<dyn Fn(&FlagPoint) -> f64> = match phase {
        "cos-angle" => Box::new(|eta: &FlagPoint| (2.0 * line_angle(eta)).cos()),
        "constant" => Box::new(|_: &FlagPoint| 1.0),
        other => return Err(cfg(anyhow!("unknown phase '{other}'"))),
    };
    let (lo, hi) = band.unwrap_or((0.0, std::f64::consts::PI));
    if !(lo < hi) {
        return Err(cfg(anyhow!("band-lo must be below band-hi")));
    }
    let r = move |eta: &FlagPoint| {
        let t = line_angle(eta);
        if (lo..=hi).contains(&t) {
            1.0
        } else {
            0.0
        }
    };
    let rep = fourier::cr_goodness_check(&phi, &r, c, 1, samples, seed)
        .map_err(|e| num(anyhow!("{e}")))?;
    let mut report = Report::new("goodness");
    report
        .meta("seed", seed)
        .meta("C", f(c))
        .meta("phase", phase)
        .meta("band", format!("[{lo}, {hi}]"))
        .meta("v_alpha", f(rep.v_alpha[0]))
        .meta("support_samples", rep.support_samples)
        .meta("all_pass", rep.all_pass())
        .header(&["condition", "pass", "worst_margin", "checked"]);
    for (name, cond) in [
        ("G1", &rep.g1),
        ("G2", &rep.g2),
        ("G3", &rep.g3),
        ("G4", &rep.g4),
    ] {
        report.row(&[&name, &cond.pass, &f(cond.worst_margin), &cond.checked]);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn spectrum(
    spec: &MeasureSpec,
    hash: &str,
    a_list: &[f64],
    b_min: f64,
    b_max: f64,
    b_step: f64,
    n_grid: usize,
    refine: bool,
    workers: usize,
) -> CmdResult {
    require_rank_one(spec)?;
    if !(b_step > 0.0 && b_max >= b_min) {
        return Err(cfg(anyhow!("need b-step > 0 and b-max >= b-min")));
    }
    let mut zs = Vec::new();
    for &a in a_list {
        let mut b = b_min;
        while b <= b_max + 1e-12 {
            zs.push(Complex64::new(a, b));
            b += b_step;
        }
    }
    let radii: Vec<Result<(f64, Option<f64>), String>> = run_indexed(workers, zs.len(), |i| {
        let z = zs[i as usize];
        let run = |n: usize| -> Result<f64, String> {
            let t = build_transfer(spec, z, n).map_err(|e| e.to_string())?;
            spectral_radius(&t).map_err(|e| e.to_string())
        };
        let r = run(n_grid)?;
        let r2 = if refine { Some(run(2 * n_grid)?) } else { None };
        Ok((r, r2))
    })
    .map_err(num)?;
    let mut report = Report::new("spectrum");
    report.meta("spec", hash).meta("n_grid", n_grid);
    if refine {
        report.header(&["a", "b", "radius", "radius_refined", "delta"]);
    } else {
        report.header(&["a", "b", "radius"]);
    }
    for (z, r) in zs.iter().zip(&radii) {
        let (radius, refined) = *r.as_ref().map_err(|e| num(anyhow!("{e}")))?;
        require_finite([radius], "spectral radius")?;
        match refined {
            Some(r2) => {
                report.row(&[&f(z.re), &f(z.im), &f(radius), &f(r2), &f((radius - r2).abs())]);
            }
            None => {
                report.row(&[&f(z.re), &f(z.im), &f(radius)]);
            }
        }
    }
    Ok(report)
}

pub fn iterate(
    spec: &MeasureSpec,
    hash: &str,
    z_re: f64,
    z_im: f64,
    n_iter: usize,
) -> CmdResult {
    require_rank_one(spec)?;
    let z = Complex64::new(z_re, z_im);
    let one = |_: f64| Complex64::from(1.0);
    let values = iterate_values(spec, z, &one, 0.4, n_iter).map_err(|e| cfg(anyhow!("{e}")))?;
    let slope = iterate_norm_estimate(spec, z, &one, 0.4, n_iter).map_err(|e| cfg(anyhow!("{e}")))?;
    let mut report = Report::new("iterate");
    report
        .meta("spec", hash)
        .meta("z", format!("{z_re}+{z_im}i"))
        .meta("log_growth_rate", f(slope))
        .header(&["n", "re", "im", "modulus"]);
    for (n, v) in values.iter().enumerate() {
        report.row(&[&(n + 1), &f(v.re), &f(v.im), &f(v.norm())]);
    }
    Ok(report)
}

/// Smooth bump supported on (-support, support), the built-in renewal
/// test function.
pub fn bump(support: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x: f64| {
        let u = x / support;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    }
}

struct RenewalSetup {
    drift: f64,
    dev: f64,
    x: Vec<f64>,
}

fn renewal_setup(
    spec: &MeasureSpec,
    seed: u64,
    workers: usize,
) -> Result<RenewalSetup, CmdFailure> {
    let est = estimate_lyapunov(spec, 300, 400, drift_seed(seed), workers)?;
    let drift = est.sigma_mu[0];
    if drift <= 0.0 {
        return Err(num(anyhow!("estimated drift {drift} is not positive")));
    }
    let mut x = vec![0.0; spec.dim()];
    x[0] = 1.0;
    let dev = cocycle_deviation_scale(spec, &x, drift, 100, 400, drift_seed(seed) ^ 1);
    Ok(RenewalSetup { drift, dev, x })
}

#[allow(clippy::too_many_arguments)]
pub fn renewal(
    spec: &MeasureSpec,
    hash: &str,
    t: f64,
    support: f64,
    use_norm: bool,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    if support <= 0.0 {
        return Err(cfg(anyhow!("support must be positive")));
    }
    let setup = renewal_setup(spec, seed, workers)?;
    let fbump = bump(support);
    let result = if use_norm {
        renewal_norm_sum(spec, &fbump, support, t, setup.drift, setup.dev, samples, seed)
    } else {
        renewal_sum(
            spec, &fbump, support, &setup.x, t, setup.drift, setup.dev, samples, seed,
        )
    }
    .map_err(|e| num(anyhow!("{e}")))?;
    let mut report = Report::new("renewal");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("drift", f(setup.drift))
        .meta("deviation_scale", f(setup.dev))
        .meta("kind", if use_norm { "norm" } else { "cocycle" })
        .header(&["t", "estimate", "stderr", "limit", "n_max", "samples"]);
    report.row(&[
        &f(result.t),
        &f(result.estimate),
        &f(result.stderr),
        &f(result.limit),
        &result.n_max,
        &result.samples,
    ]);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn renewal_fit(
    spec: &MeasureSpec,
    hash: &str,
    t_list: &[f64],
    support: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CmdResult {
    if support <= 0.0 {
        return Err(cfg(anyhow!("support must be positive")));
    }
    let setup = renewal_setup(spec, seed, workers)?;
    let fbump = bump(support);
    let (results, outcome) = renewal_error_fit(
        spec,
        &fbump,
        support,
        &setup.x,
        t_list,
        setup.drift,
        setup.dev,
        samples,
        seed,
    )
    .map_err(|e| num(anyhow!("{e}")))?;
    let mut report = Report::new("renewal-fit");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("drift", f(setup.drift));
    match outcome {
        ErrorFitOutcome::Slope { slope, ci95, points } => {
            report
                .meta("error_slope", f(slope))
                .meta("error_slope_ci95", f(ci95))
                .meta("fit_points", points);
        }
        ErrorFitOutcome::NoiseFloor { points } => {
            report.meta(
                "noise_floor",
                format!("only {points} points above 3 stderr; raise samples"),
            );
        }
    }
    report.header(&["t", "estimate", "stderr", "limit", "abs_error"]);
    for r in &results {
        report.row(&[
            &f(r.t),
            &f(r.estimate),
            &f(r.stderr),
            &f(r.limit),
            &f((r.estimate - r.limit).abs()),
        ]);
    }
    Ok(report)
}

pub fn resolvent(
    spec: &MeasureSpec,
    hash: &str,
    z_abs: f64,
    n_grid: usize,
    data: &str,
    seed: u64,
    workers: usize,
) -> CmdResult {
    require_rank_one(spec)?;
    let setup = renewal_setup(spec, seed, workers)?;
    let h = std::f64::consts::PI / n_grid as f64;
    let f_grid: Vec<f64> = match data {
        "ones" => vec![1.0; n_grid],
        "centered-cos" => {
            let t0 = build_transfer(spec, Complex64::default(), n_grid)
                .map_err(|e| num(anyhow!("{e}")))?;
            let nu = rmlab_core::transfer::stationary_weights(&t0)
                .map_err(|e| num(anyhow!("{e}")))?;
            let raw: Vec<f64> = (0..n_grid).map(|j| (2.0 * j as f64 * h).cos()).collect();
            let mean: f64 = nu.iter().zip(&raw).map(|(w, v)| w * v).sum();
            raw.iter().map(|v| v - mean).collect()
        }
        other => return Err(cfg(anyhow!("unknown data '{other}'"))),
    };
    let zs = [
        Complex64::from(z_abs),
        Complex64::new(0.0, z_abs),
        Complex64::from_polar(z_abs, std::f64::consts::FRAC_PI_4),
        Complex64::new(0.0, -z_abs),
    ];
    let rows = rmlab_core::renewal::resolvent_pole_check(spec, &zs, n_grid, &f_grid, setup.drift)
        .map_err(|e| match e {
            rmlab_core::renewal::RenewalError::ZTooSmall { .. } => cfg(anyhow!("{e}")),
            other => num(anyhow!("{other}")),
        })?;
    let mut report = Report::new("resolvent");
    report
        .meta("spec", hash)
        .meta("seed", seed)
        .meta("sigma", f(setup.drift))
        .meta("pole_coefficient", f(1.0 / setup.drift))
        .meta("n_grid", n_grid)
        .meta("data", data)
        .header(&["z_re", "z_im", "max_deviation", "max_zu"]);
    for row in &rows {
        report.row(&[&f(row.z.re), &f(row.z.im), &f(row.max_deviation), &f(row.max_zu)]);
    }
    Ok(report)
}
