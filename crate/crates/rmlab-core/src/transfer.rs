//! Discretized transfer operators P_z on P^1 for SL(2, R) walks, their
//! spectral radii, and the exhaustive word-tree iterates used as a
//! discretization-free cross-check.
//!
//! The grid is theta_j = j pi / N on [0, pi). Each atom contributes four
//! entries per row through periodic cubic interpolation, so the operator
//! is stored sparsely; a dense materialization exists only for resolvent
//! solves.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::mat::vec_norm;
// Inherent f64 methods shadow this on hosted targets; pure no_std builds need it.
#[allow(unused_imports)]
use crate::scalar::Real;
use crate::walk::MeasureSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum TransferError {
    RankNotOne { rank: usize },
    NoConvergence { iterations: usize },
    WordTreeTooLarge { size: usize },
    SingularSystem,
}

impl core::fmt::Display for TransferError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TransferError::RankNotOne { rank } => {
                write!(f, "transfer grid needs an SL(2) spec, got rank {rank}")
            }
            TransferError::NoConvergence { iterations } => {
                write!(f, "power iteration did not settle after {iterations} iterations")
            }
            TransferError::WordTreeTooLarge { size } => {
                write!(f, "word tree of size {size} exceeds the cap")
            }
            TransferError::SingularSystem => write!(f, "linear system is singular"),
        }
    }
}

/// sigma(g, theta) = log |g (cos theta, sin theta)|.
pub fn p1_cocycle(g: &crate::lie::GroupElement, theta: f64) -> f64 {
    let (s, c) = (theta.sin(), theta.cos());
    let m = g.mat();
    let x = m[(0, 0)] * c + m[(0, 1)] * s;
    let y = m[(1, 0)] * c + m[(1, 1)] * s;
    x.hypot(y).ln()
}

/// The image angle of theta under g, in [0, pi).
pub fn p1_action(g: &crate::lie::GroupElement, theta: f64) -> f64 {
    let (s, c) = (theta.sin(), theta.cos());
    let m = g.mat();
    let x = m[(0, 0)] * c + m[(0, 1)] * s;
    let y = m[(1, 0)] * c + m[(1, 1)] * s;
    let t = y.atan2(x);
    let pi = core::f64::consts::PI;
    let r = t - pi * (t / pi).floor();
    if r >= pi {
        r - pi
    } else {
        r
    }
}

#[derive(Clone, Debug)]
pub struct TransferDiscretization {
    pub n_grid: usize,
    pub z: Complex64,
    /// rows[j]: (column, coefficient) pairs of (P_z f)(theta_j).
    pub rows: Vec<Vec<(usize, Complex64)>>,
}

pub fn build_transfer(
    spec: &MeasureSpec,
    z: Complex64,
    n_grid: usize,
) -> Result<TransferDiscretization, TransferError> {
    if spec.rank() != 1 {
        return Err(TransferError::RankNotOne { rank: spec.rank() });
    }
    let pi = core::f64::consts::PI;
    let h = pi / n_grid as f64;
    let mut rows = Vec::with_capacity(n_grid);
    for j in 0..n_grid {
        let theta = j as f64 * h;
        let mut row: Vec<(usize, Complex64)> = Vec::with_capacity(4 * spec.atoms().len());
        for (g, &p) in spec.atoms().iter().zip(spec.weights()) {
            let weight = Complex64::from(p) * (z * p1_cocycle(g, theta)).exp();
            let image = p1_action(g, theta) / h;
            let i0 = image.floor();
            let s = image - i0;
            // Cubic Lagrange stencil at i0 - 1 .. i0 + 2; the weights sum
            // to 1 exactly, so row sums (and the z = 0 radius) are
            // preserved. The eigenfunction at z = a + ib oscillates at
            // frequency ~ b, and the quartic error (b h)^4 keeps the scan
            // grid-converged where linear interpolation was not.
            let stencil = [
                -s * (s - 1.0) * (s - 2.0) / 6.0,
                (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
                -(s + 1.0) * s * (s - 2.0) / 2.0,
                (s + 1.0) * s * (s - 1.0) / 6.0,
            ];
            let base = i0 as isize - 1 + n_grid as isize;
            for (k, &w) in stencil.iter().enumerate() {
                let col = (base + k as isize) as usize % n_grid;
                push_entry(&mut row, col, weight * w);
            }
        }
        rows.push(row);
    }
    Ok(TransferDiscretization { n_grid, z, rows })
}

fn push_entry(row: &mut Vec<(usize, Complex64)>, col: usize, value: Complex64) {
    if let Some(entry) = row.iter_mut().find(|(c, _)| *c == col) {
        entry.1 += value;
    } else {
        row.push((col, value));
    }
}

impl TransferDiscretization {
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, w)| w * v[c]).sum())
            .collect()
    }

    pub fn apply_transpose(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = alloc::vec![Complex64::default(); self.n_grid];
        for (j, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                out[c] += w * v[j];
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = alloc::vec![alloc::vec![Complex64::default(); self.n_grid]; self.n_grid];
        for (j, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                out[j][c] += w;
            }
        }
        out
    }

    pub fn row_sum_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| {
                let s: Complex64 = row.iter().map(|&(_, w)| w).sum();
                (s - Complex64::from(1.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn cnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral radius by power iteration; growth is averaged over a window
/// to damp the oscillation from complex conjugate eigenvalue pairs.
pub fn spectral_radius(t: &TransferDiscretization) -> Result<f64, TransferError> {
    let n = t.n_grid;
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.25 * ((i * 7) % 13) as f64 / 13.0))
        .collect();
    let norm = cnorm(&x);
    for xi in x.iter_mut() {
        *xi /= norm;
    }
    let max_iter = 300_000;
    let mut log_growth = Vec::with_capacity(max_iter);
    let mut checkpoint = 512;
    for k in 1..=max_iter {
        let y = t.apply(&x);
        let r = cnorm(&y);
        if r == 0.0 {
            return Ok(0.0);
        }
        log_growth.push(r.ln());
        x = y;
        for xi in x.iter_mut() {
            *xi /= r;
        }
        // Compare means over the last two quarter-blocks at doubling
        // checkpoints: near-equal-modulus eigenvalue pairs make the
        // per-step growth oscillate forever, but block means of growing
        // length both damp the oscillation and expose residual drift.
        if k == checkpoint {
            let quarter = k / 4;
            let recent: f64 = log_growth[k - quarter..].iter().sum::<f64>() / quarter as f64;
            let previous: f64 =
                log_growth[k - 2 * quarter..k - quarter].iter().sum::<f64>() / quarter as f64;
            if (recent - previous).abs() < 1e-10 {
                return Ok(recent.exp());
            }
            checkpoint *= 2;
        }
    }
    Err(TransferError::NoConvergence {
        iterations: max_iter,
    })
}

/// Left fixed vector of P_0 (grid stationary weights), normalized to
/// sum 1.
pub fn stationary_weights(t0: &TransferDiscretization) -> Result<Vec<f64>, TransferError> {
    let n = t0.n_grid;
    let mut v = alloc::vec![Complex64::from(1.0 / n as f64); n];
    for _ in 0..100_000 {
        let w = t0.apply_transpose(&v);
        let sum: f64 = w.iter().map(|x| x.re).sum();
        let next: Vec<Complex64> = w.iter().map(|x| x / sum).collect();
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        v = next;
        if delta < 1e-14 {
            return Ok(v.iter().map(|x| x.re).collect());
        }
    }
    Err(TransferError::NoConvergence {
        iterations: 100_000,
    })
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub a: f64,
    pub b: f64,
    pub n_grid: usize,
    pub radius: f64,
}

pub fn spectral_gap_scan(
    spec: &MeasureSpec,
    a_grid: &[f64],
    b_grid: &[f64],
    n_grid: usize,
) -> Result<Vec<ScanRow>, TransferError> {
    let mut out = Vec::with_capacity(a_grid.len() * b_grid.len());
    for &a in a_grid {
        for &b in b_grid {
            let t = build_transfer(spec, Complex64::new(a, b), n_grid)?;
            out.push(ScanRow {
                a,
                b,
                n_grid,
                radius: spectral_radius(&t)?,
            });
        }
    }
    Ok(out)
}

/// Exact (P_z^n f)(theta0) for n = 0..=n_iter via the |atoms|^n word
/// tree; no discretization.
pub fn iterate_values<F: Fn(f64) -> Complex64>(
    spec: &MeasureSpec,
    z: Complex64,
    f: &F,
    theta0: f64,
    n_iter: usize,
) -> Result<Vec<Complex64>, TransferError> {
    if spec.rank() != 1 {
        return Err(TransferError::RankNotOne { rank: spec.rank() });
    }
    let size = spec.atoms().len().checked_pow(n_iter as u32).unwrap_or(usize::MAX);
    if size > 8_000_000 {
        return Err(TransferError::WordTreeTooLarge { size });
    }
    let mut out = Vec::with_capacity(n_iter + 1);
    for n in 0..=n_iter {
        out.push(word_tree_eval(spec, z, f, theta0, n));
    }
    Ok(out)
}

fn word_tree_eval<F: Fn(f64) -> Complex64>(
    spec: &MeasureSpec,
    z: Complex64,
    f: &F,
    theta: f64,
    n: usize,
) -> Complex64 {
    if n == 0 {
        return f(theta);
    }
    let mut acc = Complex64::default();
    for (g, &p) in spec.atoms().iter().zip(spec.weights()) {
        let w = Complex64::from(p) * (z * p1_cocycle(g, theta)).exp();
        acc += w * word_tree_eval(spec, z, f, p1_action(g, theta), n - 1);
    }
    acc
}

/// Slope of log |P_z^n f(theta0)| against n over the tail of the iterate
/// sequence.
pub fn iterate_norm_estimate<F: Fn(f64) -> Complex64>(
    spec: &MeasureSpec,
    z: Complex64,
    f: &F,
    theta0: f64,
    n_iter: usize,
) -> Result<f64, TransferError> {
    let values = iterate_values(spec, z, f, theta0, n_iter)?;
    let start = n_iter / 2;
    let x: Vec<f64> = (start..=n_iter).map(|n| n as f64).collect();
    let y: Vec<f64> = values[start..].iter().map(|v| v.norm().max(1e-300).ln()).collect();
    Ok(crate::stats::line_fit(&x, &y).slope)
}

/// The abelian contrast: for a scalar walk with a single step length c,
/// the characteristic function lambda(ib) = e^{ibc} returns to 1 along
/// b = 2 pi k / c. Returns the best (b, |1 - lambda|) with b in
/// [b_min, b_max].
pub fn abelian_contrast(c: f64, b_min: f64, b_max: f64) -> Option<(f64, f64)> {
    assert!(c > 0.0);
    let period = 2.0 * core::f64::consts::PI / c;
    let k_min = (b_min / period).ceil() as i64;
    let mut best: Option<(f64, f64)> = None;
    for k in k_min.max(1).. {
        let b = k as f64 * period;
        if b > b_max {
            break;
        }
        let gap = (Complex64::from(1.0) - Complex64::new(0.0, b * c).exp()).norm();
        if best.map_or(true, |(_, g)| gap < g) {
            best = Some((b, gap));
        }
    }
    best
}

/// Dense complex LU solve with partial pivoting: a x = b, destroying a.
pub fn solve_dense_complex(
    a: &mut [Vec<Complex64>],
    b: &[Complex64],
) -> Result<Vec<Complex64>, TransferError> {
    let n = a.len();
    let mut x: Vec<Complex64> = b.into();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col][col].norm();
        for r in col + 1..n {
            let v = a[r][col].norm();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best < 1e-300 {
            return Err(TransferError::SingularSystem);
        }
        a.swap(col, pivot);
        x.swap(col, pivot);
        let inv = Complex64::from(1.0) / a[col][col];
        for r in col + 1..n {
            let factor = a[r][col] * inv;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            let (head, tail) = a.split_at_mut(r);
            let src = &head[col];
            let dst = &mut tail[0];
            for c in col..n {
                dst[c] -= factor * src[c];
            }
            let xc = x[col];
            x[r] -= factor * xc;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for c in col + 1..n {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// Re-exported for test oracles that compare against dense norms.
pub fn dense_apply(dense: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    dense
        .iter()
        .map(|row| row.iter().zip(v).map(|(w, x)| w * x).sum())
        .collect()
}

/// Euclidean norm helper shared with real-vector call sites.
pub fn real_norm(v: &[f64]) -> f64 {
    vec_norm(v)
}
