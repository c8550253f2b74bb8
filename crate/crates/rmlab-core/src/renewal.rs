//! Renewal sums R f(x, t) = sum_n E[f(S_n - t)] for the projective
//! cocycle and the matrix log-norm, with truncation from the drift
//! envelope, exponential-error fitting, and the resolvent pole check.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::mat::{vec_norm, Mat};
use crate::rng::StreamRng;
// Inherent f64 methods shadow this on hosted targets; pure no_std builds need it.
#[allow(unused_imports)]
use crate::scalar::Real;
use crate::stats::{line_fit, mean_stderr};
use crate::transfer::{
    build_transfer, solve_dense_complex, stationary_weights, TransferDiscretization,
    TransferError,
};
use crate::walk::MeasureSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum RenewalError {
    NonPositiveDrift { drift: f64 },
    DegenerateSpec,
    ZTooSmall { z_norm: f64 },
    Transfer(TransferError),
}

impl core::fmt::Display for RenewalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RenewalError::NonPositiveDrift { drift } => {
                write!(f, "drift {drift} is not positive; estimate the Lyapunov vector first")
            }
            RenewalError::DegenerateSpec => {
                write!(f, "spec fails the density heuristic; renewal sum may diverge")
            }
            RenewalError::ZTooSmall { z_norm } => {
                write!(f, "|z| = {z_norm:e} is too close to the pole at 0")
            }
            RenewalError::Transfer(e) => write!(f, "{e}"),
        }
    }
}

/// Simpson quadrature of f over [lo, hi] with an even panel count.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0);
    let h = (hi - lo) / panels as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// Smallest n with n drift - 5 sqrt(n) dev > threshold, doubled for
/// safety.
pub fn truncation_horizon(drift: f64, dev: f64, threshold: f64) -> Result<usize, RenewalError> {
    if drift <= 0.0 {
        return Err(RenewalError::NonPositiveDrift { drift });
    }
    let mut n = 1usize;
    while (n as f64) * drift - 5.0 * (n as f64).sqrt() * dev <= threshold {
        n += 1;
        if n > 100_000_000 {
            return Err(RenewalError::NonPositiveDrift { drift });
        }
    }
    Ok(2 * n)
}

/// Standard deviation scale of (S_n - n drift) / sqrt(n) for the
/// projective cocycle started at x.
pub fn cocycle_deviation_scale(
    spec: &MeasureSpec,
    x: &[f64],
    drift: f64,
    n: usize,
    sample_count: usize,
    seed: u64,
) -> f64 {
    let samples: Vec<f64> = (0..sample_count)
        .map(|i| {
            let mut rng = StreamRng::new(seed, i as u64);
            let mut v: Vec<f64> = x.into();
            let mut s = -vec_norm(&v).ln();
            for _ in 0..n {
                let g = spec.sample_atom(&mut rng);
                v = g.mat().matvec(&v);
                let norm = vec_norm(&v);
                s += norm.ln();
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
            }
            (s - n as f64 * drift) / (n as f64).sqrt()
        })
        .collect();
    let ms = mean_stderr(&samples);
    (ms.stderr * (sample_count as f64).sqrt()).max(1e-12)
}

#[derive(Clone, Debug)]
pub struct RenewalResult {
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// (1 / sigma_{V,mu}) int_{-t}^{infty} f.
    pub limit: f64,
    pub samples: usize,
    pub n_max: usize,
}

/// Per-trajectory renewal sum sum_{n=0}^{n_max} f(S_n - t) with
/// S_n = sigma(X_n ... X_1, x) accumulated on the moving point.
fn trajectory_sum<F: Fn(f64) -> f64>(
    spec: &MeasureSpec,
    f: &F,
    x: &[f64],
    t: f64,
    n_max: usize,
    rng: &mut StreamRng,
) -> f64 {
    let mut v: Vec<f64> = x.into();
    let norm = vec_norm(&v);
    for vi in v.iter_mut() {
        *vi /= norm;
    }
    let mut s = 0.0;
    let mut acc = f(-t);
    for _ in 0..n_max {
        let g = spec.sample_atom(rng);
        v = g.mat().matvec(&v);
        let norm = vec_norm(&v);
        s += norm.ln();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        acc += f(s - t);
    }
    acc
}

pub fn renewal_sum<F: Fn(f64) -> f64 + Sync>(
    spec: &MeasureSpec,
    f: &F,
    support: f64,
    x: &[f64],
    t: f64,
    drift: f64,
    dev: f64,
    sample_count: usize,
    seed: u64,
) -> Result<RenewalResult, RenewalError> {
    let n_max = truncation_horizon(drift, dev, t + support)?;
    let sums: Vec<f64> = (0..sample_count)
        .map(|i| {
            let mut rng = StreamRng::new(seed, i as u64);
            trajectory_sum(spec, f, x, t, n_max, &mut rng)
        })
        .collect();
    let ms = mean_stderr(&sums);
    let lo = (-t).max(-support);
    let limit = if lo >= support {
        0.0
    } else {
        integrate(f, lo, support, 2000) / drift
    };
    Ok(RenewalResult {
        t,
        estimate: ms.mean,
        stderr: ms.stderr,
        limit,
        samples: sample_count,
        n_max,
    })
}

/// Operator norm of a small matrix, with the closed form for 2 x 2.
fn op_norm(a: &Mat) -> f64 {
    if a.rows() == 2 {
        let f2 = a.data().iter().map(|x| x * x).sum::<f64>();
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        return ((f2 + (f2 * f2 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    }
    a.norm_op()
}

/// Renewal sum of f(log |X_n ... X_1| - t); the running product is
/// renormalized by its largest entry each step.
pub fn renewal_norm_sum<F: Fn(f64) -> f64>(
    spec: &MeasureSpec,
    f: &F,
    support: f64,
    t: f64,
    drift: f64,
    dev: f64,
    sample_count: usize,
    seed: u64,
) -> Result<RenewalResult, RenewalError> {
    if !crate::walk::zariski_density_check(spec, 3).has_interior_kappa {
        return Err(RenewalError::DegenerateSpec);
    }
    let n_max = truncation_horizon(drift, dev, t + support)?;
    let dim = spec.dim();
    let sums: Vec<f64> = (0..sample_count)
        .map(|i| {
            let mut rng = StreamRng::new(seed, i as u64);
            let mut p = Mat::identity(dim);
            let mut log_scale = 0.0;
            let mut acc = f(-t);
            for _ in 0..n_max {
                let g = spec.sample_atom(&mut rng);
                p = g.mat().mul(&p);
                let scale = p.max_abs();
                p = p.scale(1.0 / scale);
                log_scale += scale.ln();
                acc += f(op_norm(&p).ln() + log_scale - t);
            }
            acc
        })
        .collect();
    let ms = mean_stderr(&sums);
    let lo = (-t).max(-support);
    let limit = if lo >= support {
        0.0
    } else {
        integrate(f, lo, support, 2000) / drift
    };
    Ok(RenewalResult {
        t,
        estimate: ms.mean,
        stderr: ms.stderr,
        limit,
        samples: sample_count,
        n_max,
    })
}

#[derive(Clone, Debug)]
pub enum ErrorFitOutcome {
    /// Fitted slope of log |error| vs t with its 95% half-width.
    Slope { slope: f64, ci95: f64, points: usize },
    /// Every error is below 3 stderr: the Monte Carlo floor hides the
    /// exponential term. A success mode, not a failure.
    NoiseFloor { points: usize },
}

pub fn renewal_error_fit<F: Fn(f64) -> f64 + Sync>(
    spec: &MeasureSpec,
    f: &F,
    support: f64,
    x: &[f64],
    t_grid: &[f64],
    drift: f64,
    dev: f64,
    sample_count: usize,
    seed: u64,
) -> Result<(Vec<RenewalResult>, ErrorFitOutcome), RenewalError> {
    let mut results = Vec::with_capacity(t_grid.len());
    for (ti, &t) in t_grid.iter().enumerate() {
        let r = renewal_sum(
            spec,
            f,
            support,
            x,
            t,
            drift,
            dev,
            sample_count,
            seed.wrapping_add((ti as u64).wrapping_mul(0x2545f4914f6cdd1d)),
        )?;
        results.push(r);
    }
    let significant: Vec<&RenewalResult> = results
        .iter()
        .filter(|r| (r.estimate - r.limit).abs() > 3.0 * r.stderr)
        .collect();
    let outcome = if significant.len() < 3 {
        ErrorFitOutcome::NoiseFloor {
            points: significant.len(),
        }
    } else {
        let xs: Vec<f64> = significant.iter().map(|r| r.t).collect();
        let ys: Vec<f64> = significant
            .iter()
            .map(|r| (r.estimate - r.limit).abs().ln())
            .collect();
        let fit = line_fit(&xs, &ys);
        ErrorFitOutcome::Slope {
            slope: fit.slope,
            ci95: fit.slope_ci95,
            points: significant.len(),
        }
    };
    Ok((results, outcome))
}

#[derive(Clone, Debug)]
pub struct ResolventRow {
    pub z: Complex64,
    /// sup_j |z u(theta_j) - (1/sigma) int f dnu|.
    pub max_deviation: f64,
    /// sup_j |z u(theta_j)|, for zero-mean pole cancellation checks.
    pub max_zu: f64,
}

/// Solve (I - P_z) u = f on the grid and compare z u against the pole
/// coefficient (1 / sigma_v_mu) int f dnu.
pub fn resolvent_pole_check(
    spec: &MeasureSpec,
    z_list: &[Complex64],
    n_grid: usize,
    f_grid: &[f64],
    sigma_v_mu: f64,
) -> Result<Vec<ResolventRow>, RenewalError> {
    let t0 = build_transfer(spec, Complex64::default(), n_grid).map_err(RenewalError::Transfer)?;
    let nu = stationary_weights(&t0).map_err(RenewalError::Transfer)?;
    let f_mean: f64 = nu.iter().zip(f_grid).map(|(w, f)| w * f).sum();
    let pole = Complex64::from(f_mean / sigma_v_mu);
    let rhs: Vec<Complex64> = f_grid.iter().map(|&v| Complex64::from(v)).collect();
    let mut out = Vec::with_capacity(z_list.len());
    for &z in z_list {
        if z.norm() < 1e-3 {
            return Err(RenewalError::ZTooSmall { z_norm: z.norm() });
        }
        // The renewal resolvent is sum_n P^(n) e^{-z S_n} = (I - P_{-z})^{-1}
        // in the e^{+z c} weight convention of build_transfer, so evaluate
        // the operator at -z to land on the +1/sigma pole coefficient.
        let t = build_transfer(spec, -z, n_grid).map_err(RenewalError::Transfer)?;
        let mut a = dense_identity_minus(&t);
        let u = solve_dense_complex(&mut a, &rhs).map_err(RenewalError::Transfer)?;
        let mut max_deviation = 0.0f64;
        let mut max_zu = 0.0f64;
        for ui in &u {
            let zu = z * ui;
            max_deviation = max_deviation.max((zu - pole).norm());
            max_zu = max_zu.max(zu.norm());
        }
        out.push(ResolventRow {
            z,
            max_deviation,
            max_zu,
        });
    }
    Ok(out)
}

fn dense_identity_minus(t: &TransferDiscretization) -> Vec<Vec<Complex64>> {
    let mut dense = t.to_dense();
    for (j, row) in dense.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = if c == j { Complex64::from(1.0) - *v } else { -*v };
        }
    }
    dense
}
