//! Non-concentration statistics for the cocycle fluctuation vectors: the
//! Y and X vectors, the monomial change of basis E_d, affine determinants,
//! and the empirical PNC/SNC and multiscale estimators.

use alloc::vec::Vec;

use crate::flag::{iwasawa_cocycle, repelling_flag, FlagPoint};
use crate::lie::{cartan_decompose, GroupElement, RootData};
use crate::mat::{vec_dot, vec_norm, Mat};
use crate::rng::StreamRng;
// Inherent f64 methods shadow this on hosted targets; pure no_std builds need it.
#[allow(unused_imports)]
use crate::scalar::Real;
use crate::walk::{is_good_element, sample_product_with, MeasureSpec};

/// exp clamped to e^{+-700}; increments the counter when clamping fires so
/// overflowing samples are reported rather than silently dropped.
pub fn clamped_exp(t: f64, clamped: &mut usize) -> f64 {
    if t > 700.0 {
        *clamped += 1;
        700f64.exp()
    } else if t < -700.0 {
        *clamped += 1;
        (-700f64).exp()
    } else {
        t.exp()
    }
}

/// The deviation vector sigma(gh, eta) - kappa(g) - n sigma_mu, with the
/// cocycle split sigma(gh, eta) = sigma(g, h eta) + sigma(h, eta).
pub fn deviation_vector(
    g: &GroupElement,
    kappa_g: &[f64],
    h: &crate::walk::WalkState,
    eta: &FlagPoint,
    n: usize,
    sigma_mu: &[f64],
) -> Vec<f64> {
    let sigma_h = h.sigma(eta);
    let h_eta = h.act_flag(eta);
    let sigma_g = iwasawa_cocycle(g, &h_eta);
    let nf = n as f64;
    (0..sigma_h.len())
        .map(|i| sigma_g[i] + sigma_h[i] - kappa_g[i] - nf * sigma_mu[i])
        .collect()
}

/// Y components e^{-alpha_i(w)}, i = 1..m.
pub fn y_from_deviation(w: &[f64], clamped: &mut usize) -> Vec<f64> {
    (0..w.len() - 1)
        .map(|i| clamped_exp(-(w[i] - w[i + 1]), clamped))
        .collect()
}

/// X components e^{omega_i(w)} = e^{chi_i(w)}, i = 1..m.
pub fn x_from_deviation(w: &[f64], clamped: &mut usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len() - 1);
    let mut acc = 0.0;
    for &wi in &w[..w.len() - 1] {
        acc += wi;
        out.push(clamped_exp(acc, clamped));
    }
    out
}

/// The monomial map E_d: y_i = prod_j x_j^{L_ij} with L the negative
/// Cartan matrix, restricted to the first d coordinates.
pub fn e_d_map(roots: &RootData, x: &[f64], d: usize) -> Vec<f64> {
    assert!(x.iter().all(|&v| v > 0.0), "E_d requires positive input");
    (0..d)
        .map(|i| {
            let mut acc = 1.0;
            for (j, &xj) in x.iter().enumerate() {
                acc *= xj.powi(roots.l[i][j] as i32);
            }
            acc
        })
        .collect()
}

/// Signed affine volume of d+1 points in R^d: the (d+1) x (d+1)
/// determinant with a bottom row of ones. A_0 is 1 by convention.
pub fn affine_det(points: &[Vec<f64>]) -> f64 {
    let d = points.len() - 1;
    if d == 0 {
        return 1.0;
    }
    assert!(points.iter().all(|p| p.len() == d));
    let mut a = Mat::zeros(d + 1, d + 1);
    for (j, p) in points.iter().enumerate() {
        for (i, &v) in p.iter().enumerate() {
            a[(i, j)] = v;
        }
        a[(d, j)] = 1.0;
    }
    a.det()
}

/// Distance from u to the affine span of `base` (empty base: distance
/// to the empty set is infinite by convention, here the norm from u to
/// the single point when base has one element, etc.).
pub fn point_to_affine_span(u: &[f64], base: &[Vec<f64>]) -> f64 {
    assert!(!base.is_empty());
    let origin = &base[0];
    let w: Vec<f64> = u.iter().zip(origin).map(|(a, b)| a - b).collect();
    let dirs: Vec<Vec<f64>> = base[1..]
        .iter()
        .map(|p| p.iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();
    let mut residual = w;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in dirs {
        let mut q = v;
        for b in &basis {
            let c = vec_dot(&q, b);
            for (qi, bi) in q.iter_mut().zip(b) {
                *qi -= c * bi;
            }
        }
        let norm = vec_norm(&q);
        if norm > 1e-13 {
            for qi in q.iter_mut() {
                *qi /= norm;
            }
            basis.push(q);
        }
    }
    for b in &basis {
        let c = vec_dot(&residual, b);
        for (ri, bi) in residual.iter_mut().zip(b) {
            *ri -= c * bi;
        }
    }
    vec_norm(&residual)
}

/// Condition i of the hyperplane-equivalence lemma: the smallest c such
/// that some affine hyperplane is within c of every point, estimated over
/// a deterministic direction grid (exact for d = 1).
pub fn min_hyperplane_distance(points: &[Vec<f64>], directions: usize, seed: u64) -> f64 {
    let d = points[0].len();
    if d == 1 {
        let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return (hi - lo) / 2.0;
    }
    let mut rng = StreamRng::new(seed, u64::MAX);
    let mut best = f64::INFINITY;
    for _ in 0..directions {
        let mut v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let norm = vec_norm(&v);
        for x in v.iter_mut() {
            *x /= norm;
        }
        let projections: Vec<f64> = points.iter().map(|p| vec_dot(p, &v)).collect();
        let lo = projections.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = projections.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        best = best.min((hi - lo) / 2.0);
    }
    best
}

/// Condition ii: norm of the alternating wedge sum, equal to |A_d|.
pub fn wedge_sum_norm(points: &[Vec<f64>]) -> f64 {
    affine_det(points).abs()
}

/// Condition iii: min over i of the distance from u_i to the affine span
/// of u_{d+1}, u_1, ..., u_{i-1}.
pub fn min_chain_distance(points: &[Vec<f64>]) -> f64 {
    let d = points.len() - 1;
    let mut best = f64::INFINITY;
    for i in 0..d {
        let mut base = alloc::vec![points[d].clone()];
        base.extend(points[..i].iter().cloned());
        best = best.min(point_to_affine_span(&points[i], &base));
    }
    best
}

/// Largest fraction of projections falling in a window of width 2 x
/// `half_width`, maximized over `directions` random unit directions plus
/// the coordinate axes. An under-estimate of the sup over all slabs.
pub fn sup_slab_mass(
    points: &[Vec<f64>],
    half_width: f64,
    directions: usize,
    seed: u64,
) -> f64 {
    let dim = points[0].len();
    let mut dirs: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = alloc::vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rng = StreamRng::new(seed, u64::MAX);
    for _ in 0..directions {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let norm = vec_norm(&v);
        for x in v.iter_mut() {
            *x /= norm;
        }
        dirs.push(v);
    }
    let n = points.len();
    let mut best = 0usize;
    let mut projections: Vec<f64> = Vec::with_capacity(n);
    for v in &dirs {
        projections.clear();
        projections.extend(points.iter().map(|p| vec_dot(p, v)));
        projections.sort_by(|a, b| a.partial_cmp(b).expect("finite projection"));
        let mut lo = 0;
        for hi in 0..n {
            while projections[hi] - projections[lo] > 2.0 * half_width {
                lo += 1;
            }
            best = best.max(hi - lo + 1);
        }
    }
    best as f64 / n as f64
}

#[derive(Clone, Debug)]
pub struct CloudStats {
    pub clamped: usize,
    pub sample_count: usize,
}

/// Cloud of Y vectors of mu^{*n} samples at (g, eta).
pub fn y_cloud(
    spec: &MeasureSpec,
    g: &GroupElement,
    eta: &FlagPoint,
    n: usize,
    sigma_mu: &[f64],
    sample_count: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, CloudStats) {
    let ext = spec.exterior_atoms();
    let kappa_g = cartan_decompose(g).expect("cartan decomposition").kappa;
    let mut clamped = 0usize;
    let cloud = (0..sample_count)
        .map(|i| {
            let mut rng = StreamRng::new(seed, i as u64);
            let h = sample_product_with(spec, &ext, n, &mut rng);
            let w = deviation_vector(g, &kappa_g, &h, eta, n, sigma_mu);
            y_from_deviation(&w, &mut clamped)
        })
        .collect();
    (
        cloud,
        CloudStats {
            clamped,
            sample_count,
        },
    )
}

#[derive(Clone, Debug)]
pub struct PncEstimate {
    pub sup_mass: f64,
    pub slab_half_width: f64,
    pub stats: CloudStats,
}

/// Empirical sup over slabs of mu^{*n}{h : |<v, Y^n(h, eta)> - a| <=
/// half_width}; the direction/offset search is an under-estimate of the
/// true sup by construction.
pub fn pnc_estimate(
    spec: &MeasureSpec,
    g: &GroupElement,
    eta: &FlagPoint,
    n: usize,
    sigma_mu: &[f64],
    slab_half_width: f64,
    directions: usize,
    sample_count: usize,
    seed: u64,
) -> PncEstimate {
    let (cloud, stats) = y_cloud(spec, g, eta, n, sigma_mu, sample_count, seed);
    PncEstimate {
        sup_mass: sup_slab_mass(&cloud, slab_half_width, directions, seed),
        slab_half_width,
        stats,
    }
}

#[derive(Clone, Debug)]
pub struct SncEstimate {
    pub probability: f64,
    pub threshold: f64,
    pub tuples: usize,
    pub stats: CloudStats,
}

/// Empirical probability that |A^n_d| over d+1 independent mu^{*n}
/// samples falls below the threshold.
pub fn snc_estimate(
    spec: &MeasureSpec,
    g: &GroupElement,
    eta: &FlagPoint,
    n: usize,
    d: usize,
    sigma_mu: &[f64],
    threshold: f64,
    tuples: usize,
    seed: u64,
) -> SncEstimate {
    assert!(d <= spec.rank());
    if d == 0 {
        // A_0 = 1 by convention: never below a threshold < 1.
        return SncEstimate {
            probability: if threshold >= 1.0 { 1.0 } else { 0.0 },
            threshold,
            tuples,
            stats: CloudStats {
                clamped: 0,
                sample_count: 0,
            },
        };
    }
    let ext = spec.exterior_atoms();
    let roots = crate::lie::structural_constants(spec.rank());
    let kappa_g = cartan_decompose(g).expect("cartan decomposition").kappa;
    let mut clamped = 0usize;
    let mut hits = 0usize;
    for t in 0..tuples {
        let xs: Vec<Vec<f64>> = (0..=d)
            .map(|j| {
                let mut rng = StreamRng::new(seed, (t * (d + 1) + j) as u64);
                let h = sample_product_with(spec, &ext, n, &mut rng);
                let w = deviation_vector(g, &kappa_g, &h, eta, n, sigma_mu);
                let x = x_from_deviation(&w, &mut clamped);
                e_d_map(&roots, &x, d)
            })
            .collect();
        if affine_det(&xs).abs() <= threshold {
            hits += 1;
        }
    }
    SncEstimate {
        probability: hits as f64 / tuples as f64,
        threshold,
        tuples,
        stats: CloudStats {
            clamped,
            sample_count: tuples * (d + 1),
        },
    }
}

#[derive(Clone, Debug)]
pub struct MultiscalePoint {
    pub rho: f64,
    pub sup_mass: f64,
}

#[derive(Clone, Debug)]
pub struct MultiscaleResult {
    pub points: Vec<MultiscalePoint>,
    /// Samples passing the good-element restriction.
    pub kept: usize,
    pub stats: CloudStats,
}

/// Multiscale non-concentration: the Y cloud restricted to h that are
/// (n, eps, eta, zeta^m_g) good, scanned over slab widths rho.
pub fn multiscale_noncon(
    spec: &MeasureSpec,
    g: &GroupElement,
    eta: &FlagPoint,
    n: usize,
    eps: f64,
    sigma_mu: &[f64],
    rho_grid: &[f64],
    directions: usize,
    sample_count: usize,
    seed: u64,
) -> MultiscaleResult {
    let ext = spec.exterior_atoms();
    let roots = crate::lie::structural_constants(spec.rank());
    let kappa_g = cartan_decompose(g).expect("cartan decomposition").kappa;
    let zeta_g = repelling_flag(g);
    let mut clamped = 0usize;
    let mut cloud = Vec::new();
    for i in 0..sample_count {
        let mut rng = StreamRng::new(seed, i as u64);
        let h = sample_product_with(spec, &ext, n, &mut rng);
        let report = is_good_element(&h, n, eps, eta, &zeta_g, sigma_mu, roots.c_a);
        if !report.is_good {
            continue;
        }
        let w = deviation_vector(g, &kappa_g, &h, eta, n, sigma_mu);
        cloud.push(y_from_deviation(&w, &mut clamped));
    }
    let kept = cloud.len();
    let points = rho_grid
        .iter()
        .map(|&rho| MultiscalePoint {
            rho,
            sup_mass: if kept == 0 {
                1.0
            } else {
                sup_slab_mass(&cloud, rho, directions, seed)
            },
        })
        .collect();
    MultiscaleResult {
        points,
        kept,
        stats: CloudStats {
            clamped,
            sample_count,
        },
    }
}
