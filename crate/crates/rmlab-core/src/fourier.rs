//! Fourier coefficients of the stationary measure on P^1, oscillatory
//! integrals against stationary flag samples, decay-exponent fitting, and
//! the (C, r)-goodness checker for phase functions.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::flag::{alpha_circle_point, dist_flag, random_special_orthogonal, FlagPoint, SignedFlag};
use crate::rng::StreamRng;
use crate::scalar::Real;
use crate::stats::line_fit;
use crate::walk::{stationary_angle, MeasureSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum FourierError {
    DegenerateGrid,
    EmptySupport,
}

impl core::fmt::Display for FourierError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FourierError::DegenerateGrid => write!(f, "need at least 3 usable frequencies"),
            FourierError::EmptySupport => write!(f, "amplitude vanishes on every sample"),
        }
    }
}

/// Complex mean with a scalar standard error (quadrature of the real and
/// imaginary component errors).
pub fn complex_mean(values: &[Complex64]) -> (Complex64, f64) {
    let n = values.len();
    assert!(n >= 2);
    let mean = values.iter().sum::<Complex64>() / n as f64;
    let var: f64 = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// nu_hat(k) = E[e^{2 i k theta}] from a fixed set of stationary angles.
pub fn fourier_from_angles(angles: &[f64], k: i64) -> (Complex64, f64) {
    let values: Vec<Complex64> = angles
        .iter()
        .map(|&theta| Complex64::new(0.0, 2.0 * k as f64 * theta).exp())
        .collect();
    complex_mean(&values)
}

pub fn stationary_angles(spec: &MeasureSpec, n: usize, count: usize, seed: u64) -> Vec<f64> {
    (0..count)
        .map(|i| stationary_angle(spec, n, seed, i as u64))
        .collect()
}

pub fn fourier_coefficient(
    spec: &MeasureSpec,
    k: i64,
    n: usize,
    sample_count: usize,
    seed: u64,
) -> (Complex64, f64) {
    if k == 0 {
        return (Complex64::from(1.0), 0.0);
    }
    let angles = stationary_angles(spec, n, sample_count, seed);
    fourier_from_angles(&angles, k)
}

#[derive(Clone, Debug)]
pub struct DecayPoint {
    pub k: i64,
    pub value: Complex64,
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub enum DecayFit {
    /// Slope of log |nu_hat(k)| vs log k with 95% half-width, over the
    /// points above the noise floor.
    Slope { slope: f64, ci95: f64, points: usize },
    NoiseFloor { points: usize },
}

/// Coefficients on the frequency grid from one shared sample of angles,
/// fitted in log-log coordinates over points with |nu_hat| > 3 stderr.
pub fn decay_exponent_fit(
    angles: &[f64],
    k_grid: &[i64],
) -> Result<(Vec<DecayPoint>, DecayFit), FourierError> {
    if k_grid.iter().filter(|&&k| k != 0).count() < 3 {
        return Err(FourierError::DegenerateGrid);
    }
    let points: Vec<DecayPoint> = k_grid
        .iter()
        .filter(|&&k| k != 0)
        .map(|&k| {
            let (value, stderr) = fourier_from_angles(angles, k);
            DecayPoint { k, value, stderr }
        })
        .collect();
    let usable: Vec<&DecayPoint> = points
        .iter()
        .filter(|p| p.value.norm() > 3.0 * p.stderr)
        .collect();
    let fit = if usable.len() < 3 {
        DecayFit::NoiseFloor {
            points: usable.len(),
        }
    } else {
        let x: Vec<f64> = usable.iter().map(|p| (p.k.unsigned_abs() as f64).ln()).collect();
        let y: Vec<f64> = usable.iter().map(|p| p.value.norm().ln()).collect();
        let f = line_fit(&x, &y);
        DecayFit::Slope {
            slope: f.slope,
            ci95: f.slope_ci95,
            points: usable.len(),
        }
    };
    Ok((points, fit))
}

/// Monte Carlo of int e^{i xi phi} r dnu over stationary flag samples.
pub fn oscillatory_integral<P, R>(
    samples: &[FlagPoint],
    phi: P,
    r: R,
    xi: f64,
) -> (Complex64, f64)
where
    P: Fn(&FlagPoint) -> f64,
    R: Fn(&FlagPoint) -> Complex64,
{
    let values: Vec<Complex64> = samples
        .iter()
        .map(|eta| Complex64::new(0.0, xi * phi(eta)).exp() * r(eta))
        .collect();
    complex_mean(&values)
}

/// Central finite difference of phi along the alpha_d-circle at z.
pub fn alpha_derivative<P: Fn(&FlagPoint) -> f64>(phi: &P, z: &SignedFlag, d: usize) -> f64 {
    let h = 1e-5;
    let plus = alpha_circle_point(z, d, h).project();
    let minus = alpha_circle_point(z, d, -h).project();
    (phi(&plus) - phi(&minus)) / (2.0 * h)
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub pass: bool,
    /// Worst slack: negative means a violation of that size.
    pub worst_margin: f64,
    pub checked: usize,
}

#[derive(Clone, Debug)]
pub struct GoodnessReport {
    pub g1: ConditionReport,
    pub g2: ConditionReport,
    pub g3: ConditionReport,
    pub g4: ConditionReport,
    pub v_alpha: Vec<f64>,
    pub support_samples: usize,
}

impl GoodnessReport {
    pub fn all_pass(&self) -> bool {
        self.g1.pass && self.g2.pass && self.g3.pass && self.g4.pass
    }
}

/// Check (C, r) goodness of phi on Haar-random flag samples: v_alpha from
/// the sampled support of r, G1/G3 on nearby pairs generated by small
/// alpha-circle moves inside the 1/C-neighbourhood J, G2 on the support,
/// G4 on the v_alpha themselves.
pub fn cr_goodness_check<P, R>(
    phi: &P,
    r: &R,
    c: f64,
    m: usize,
    sample_count: usize,
    seed: u64,
) -> Result<GoodnessReport, FourierError>
where
    P: Fn(&FlagPoint) -> f64,
    R: Fn(&FlagPoint) -> f64,
{
    assert!(c > 1.0);
    let mut rng = StreamRng::new(seed, 0);
    let samples: Vec<SignedFlag> = (0..sample_count)
        .map(|_| SignedFlag {
            k: random_special_orthogonal(m + 1, &mut rng),
        })
        .collect();
    let support: Vec<&SignedFlag> = samples
        .iter()
        .filter(|z| r(&z.project()).abs() > 1e-12)
        .collect();
    if support.is_empty() {
        return Err(FourierError::EmptySupport);
    }
    let mut v_alpha = alloc::vec![0.0f64; m];
    for z in &support {
        for d in 1..=m {
            v_alpha[d - 1] = v_alpha[d - 1].max_f(alpha_derivative(phi, z, d).abs());
        }
    }

    // J: samples within 1/C (flag distance) of a sampled support point.
    let in_j = |z: &SignedFlag| {
        let p = z.project();
        support
            .iter()
            .any(|s| dist_flag(&p, &s.project()) <= 1.0 / c)
    };
    let j_samples: Vec<&SignedFlag> = samples.iter().filter(|z| in_j(z)).collect();

    let mut g1_margin = f64::INFINITY;
    let mut g3_margin = f64::INFINITY;
    let mut pairs = 0usize;
    for z in &j_samples {
        // A nearby partner via small alpha-circle moves keeps the pair
        // inside J and below the 1/C distance threshold.
        let mut z2 = (*z).clone();
        for d in 1..=m {
            let t = rng.uniform_range(-0.5 / c, 0.5 / c) / m as f64;
            z2 = alpha_circle_point(&z2, d, t);
        }
        if !in_j(&z2) {
            continue;
        }
        let p1 = z.project();
        let p2 = z2.project();
        let dist = dist_flag(&p1, &p2);
        if dist > 1.0 / c || dist < 1e-12 {
            continue;
        }
        pairs += 1;
        let mut rhs = 0.0;
        for d in 1..=m {
            rhs += crate::flag::dist_alpha(&p1, &p2, d) * v_alpha[d - 1];
        }
        g1_margin = g1_margin.min_f(c * rhs - (phi(&p1) - phi(&p2)).abs());
        for d in 1..=m {
            let diff = (alpha_derivative(phi, z, d) - alpha_derivative(phi, &z2, d)).abs();
            g3_margin = g3_margin.min_f(c * dist * v_alpha[d - 1] - diff);
        }
    }

    let mut g2_margin = f64::INFINITY;
    for z in &support {
        for d in 1..=m {
            g2_margin =
                g2_margin.min_f(alpha_derivative(phi, z, d).abs() - v_alpha[d - 1] / c);
        }
    }

    let v_sup = v_alpha.iter().cloned().fold(0.0f64, f64::max);
    let g4_margin = (v_sup - 1.0 / c).min_f(c - v_sup);

    Ok(GoodnessReport {
        g1: ConditionReport {
            pass: g1_margin >= -1e-12,
            worst_margin: g1_margin,
            checked: pairs,
        },
        g2: ConditionReport {
            pass: g2_margin >= -1e-12,
            worst_margin: g2_margin,
            checked: support.len(),
        },
        g3: ConditionReport {
            pass: g3_margin >= -1e-12,
            worst_margin: g3_margin,
            checked: pairs,
        },
        g4: ConditionReport {
            pass: g4_margin >= 0.0,
            worst_margin: g4_margin,
            checked: 1,
        },
        v_alpha,
        support_samples: support.len(),
    })
}
