//! Small statistics helpers for the Monte Carlo drivers: sample moments
//! and least-squares line fits with normal-approximation confidence bands.

use alloc::vec::Vec;

// Inherent f64 methods shadow this on hosted targets; pure no_std builds need it.
#[allow(unused_imports)]
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn mean_stderr(samples: &[f64]) -> MeanStderr {
    let n = samples.len();
    assert!(n >= 2);
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    MeanStderr {
        mean,
        stderr: (var / n as f64).sqrt(),
        n,
    }
}

/// Componentwise mean and standard error of vector samples.
pub fn mean_stderr_vec(samples: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let dim = samples[0].len();
    let mut means = Vec::with_capacity(dim);
    let mut errs = Vec::with_capacity(dim);
    for i in 0..dim {
        let comp: Vec<f64> = samples.iter().map(|s| s[i]).collect();
        let ms = mean_stderr(&comp);
        means.push(ms.mean);
        errs.push(ms.stderr);
    }
    (means, errs)
}

#[derive(Clone, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
    /// Half-width of the 95% confidence interval for the slope.
    pub slope_ci95: f64,
}

/// Ordinary least squares fit y ~ intercept + slope * x.
pub fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len();
    assert!(n >= 3 && y.len() == n);
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let sigma2 = ss_res / (nf - 2.0);
    let slope_stderr = (sigma2 / sxx).sqrt();
    LineFit {
        slope,
        intercept,
        slope_stderr,
        slope_ci95: 1.96 * slope_stderr,
    }
}
