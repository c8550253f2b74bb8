//! The full flag variety P of SL(m+1, R) and its sign cover P_0 = SO(m+1).
//!
//! A flag is stored as a special orthogonal matrix k: the d-dimensional
//! member of the flag is the span of the first d columns, with image in
//! wedge^d R^{m+1} the wedge of those columns. Points of P are the same
//! data modulo right multiplication by the sign group M (diagonal +-1,
//! det 1); every exported quantity on P (d_alpha, delta, sigma, |d_alpha
//! phi|) is M-invariant, so no canonicalization is performed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::lie::{cartan_decompose, rotation, GroupElement};
use crate::mat::{vec_dot, vec_norm, Mat};
use crate::rep::{delta_pair, exterior_matrix_of, lex_subsets, proj_dist, wedge_columns};
use crate::rng::StreamRng;
// Inherent f64 methods shadow this on hosted targets; pure no_std builds need it.
#[allow(unused_imports)]
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct SignedFlag {
    pub k: Mat,
}

#[derive(Clone, Debug)]
pub struct FlagPoint {
    pub k: Mat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlagError {
    NotOrthogonal { residual: f64 },
    AmbiguousSign { degree: usize, inner: f64 },
    NotOnCircle { residual: f64 },
    PreconditionViolated { failures: Vec<String> },
    UnsupportedRank { rank: usize },
}

impl core::fmt::Display for FlagError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FlagError::NotOrthogonal { residual } => {
                write!(f, "matrix is not special orthogonal (residual {residual:e})")
            }
            FlagError::AmbiguousSign { degree, inner } => write!(
                f,
                "sign of degree-{degree} pairing is ambiguous (inner product {inner:e}); perturb"
            ),
            FlagError::NotOnCircle { residual } => {
                write!(f, "points are not on a common alpha-circle (residual {residual:e})")
            }
            FlagError::PreconditionViolated { failures } => {
                write!(f, "changing-flags separation failed: {failures:?}")
            }
            FlagError::UnsupportedRank { rank } => {
                write!(f, "operation not implemented for rank {rank}")
            }
        }
    }
}

fn check_special_orthogonal(k: &Mat) -> Result<(), FlagError> {
    let n = k.rows();
    let residual = k.transpose().mul(k).sub(&Mat::identity(n)).max_abs();
    if residual > 1e-10 || (k.det() - 1.0).abs() > 1e-8 {
        return Err(FlagError::NotOrthogonal { residual });
    }
    Ok(())
}

impl SignedFlag {
    pub fn new(k: Mat) -> Result<SignedFlag, FlagError> {
        check_special_orthogonal(&k)?;
        Ok(SignedFlag { k })
    }

    /// The base point z_o (the identity coset).
    pub fn base(m: usize) -> SignedFlag {
        SignedFlag {
            k: Mat::identity(m + 1),
        }
    }

    pub fn rank(&self) -> usize {
        self.k.rows() - 1
    }

    pub fn project(&self) -> FlagPoint {
        FlagPoint { k: self.k.clone() }
    }
}

impl FlagPoint {
    pub fn new(k: Mat) -> Result<FlagPoint, FlagError> {
        check_special_orthogonal(&k)?;
        Ok(FlagPoint { k })
    }

    /// The base flag eta_o (standard coordinate flag).
    pub fn base(m: usize) -> FlagPoint {
        FlagPoint {
            k: Mat::identity(m + 1),
        }
    }

    pub fn rank(&self) -> usize {
        self.k.rows() - 1
    }

    /// Unit wedge representing the degree-d member in wedge^d R^{m+1}.
    pub fn wedge(&self, d: usize) -> Vec<f64> {
        let base: Vec<usize> = (0..d).collect();
        wedge_columns(&self.k, &base)
    }
}

/// g acting on a flag, via the Iwasawa decomposition of g k.
pub fn act(g: &GroupElement, eta: &FlagPoint) -> FlagPoint {
    let (q, _) = g.mat().mul(&eta.k).qr_pos();
    FlagPoint { k: q }
}

pub fn act_signed(g: &GroupElement, z: &SignedFlag) -> SignedFlag {
    let (q, _) = g.mat().mul(&z.k).qr_pos();
    SignedFlag { k: q }
}

/// The Iwasawa cocycle sigma(g, eta): log diagonal of the triangular
/// factor of g k_eta.
pub fn iwasawa_cocycle(g: &GroupElement, eta: &FlagPoint) -> Vec<f64> {
    let (_, r) = g.mat().mul(&eta.k).qr_pos();
    (0..g.dim()).map(|i| r[(i, i)].ln()).collect()
}

pub fn act_with_cocycle(g: &GroupElement, eta: &FlagPoint) -> (FlagPoint, Vec<f64>) {
    let (q, r) = g.mat().mul(&eta.k).qr_pos();
    let sigma = (0..g.dim()).map(|i| r[(i, i)].ln()).collect();
    (FlagPoint { k: q }, sigma)
}

/// The attracting flag eta^M_g = k_g eta_o.
pub fn attracting_flag(g: &GroupElement) -> FlagPoint {
    let cartan = cartan_decompose(g).expect("cartan decomposition");
    FlagPoint { k: cartan.k }
}

/// The repelling point zeta^m_g = l_g^{-1} zeta_o, stored through the
/// representative l_g^T so that delta(eta, zeta^m_g) is the dual pairing
/// of unit wedges.
pub fn repelling_flag(g: &GroupElement) -> FlagPoint {
    let cartan = cartan_decompose(g).expect("cartan decomposition");
    FlagPoint {
        k: cartan.l.transpose(),
    }
}

/// d_alpha(eta, eta') in P V_{alpha_d}.
pub fn dist_alpha(eta: &FlagPoint, eta2: &FlagPoint, d: usize) -> f64 {
    proj_dist(&eta.wedge(d), &eta2.wedge(d))
}

/// The flag distance max_alpha d_alpha.
pub fn dist_flag(eta: &FlagPoint, eta2: &FlagPoint) -> f64 {
    let m = eta.rank();
    (1..=m).fold(0.0, |acc, d| acc.max(dist_alpha(eta, eta2, d)))
}

/// delta(eta, zeta) = min_alpha |<wedge_d(k_eta), wedge_d(k_zeta)>|.
pub fn delta_flag(eta: &FlagPoint, zeta: &FlagPoint) -> f64 {
    let m = eta.rank();
    (1..=m).fold(f64::INFINITY, |acc, d| {
        acc.min(delta_pair(&eta.wedge(d), &zeta.wedge(d)))
    })
}

/// Element of the sign group M: diagonal of +-1 with product 1.
pub type MElement = Vec<i8>;

pub fn m_mul(a: &MElement, b: &MElement) -> MElement {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignM {
    Element(MElement),
    /// On the boundary of the open Bruhat cell.
    Zero,
}

/// The sign function m(g, g'), computed from the signs of the pairings
/// s_d = sg <wedge^d g e_{1..d}, wedge^d g' e_{1..d}>: the M element has
/// diagonal eps_1 = s_1, eps_d = s_d / s_{d-1}, eps_{m+1} = s_m.
pub fn sign_m_mats(a: &Mat, b: &Mat) -> Result<SignM, FlagError> {
    let n = a.rows();
    let m = n - 1;
    let mut s = Vec::with_capacity(m);
    for d in 1..=m {
        let base: Vec<usize> = (0..d).collect();
        let wa = wedge_columns(a, &base);
        let wb = wedge_columns(b, &base);
        let inner = vec_dot(&wa, &wb) / (vec_norm(&wa) * vec_norm(&wb));
        if inner.abs() <= 1e-12 {
            return Ok(SignM::Zero);
        }
        if inner.abs() < 1e-9 {
            return Err(FlagError::AmbiguousSign { degree: d, inner });
        }
        s.push(if inner > 0.0 { 1i8 } else { -1i8 });
    }
    let mut eps = Vec::with_capacity(n);
    eps.push(s[0]);
    for d in 2..=m {
        eps.push(s[d - 1] * s[d - 2]);
    }
    eps.push(s[m - 1]);
    Ok(SignM::Element(eps))
}

pub fn sign_m(g: &GroupElement, g2: &GroupElement) -> Result<SignM, FlagError> {
    sign_m_mats(g.mat(), g2.mat())
}

pub fn sign_m_signed(z: &SignedFlag, z2: &SignedFlag) -> Result<SignM, FlagError> {
    sign_m_mats(&z.k, &z2.k)
}

/// The point z exp(t K_{alpha_d}) of the alpha_d-circle through z.
pub fn alpha_circle_point(z: &SignedFlag, d: usize, t: f64) -> SignedFlag {
    let n = z.k.rows();
    SignedFlag {
        k: z.k.mul(&rotation(n, d - 1, d, t)),
    }
}

/// Arc-length distance d_A(z1, z2) = arcsin d(pi z1, pi z2) for two points
/// of a common alpha_d-circle.
pub fn arc_distance(z1: &SignedFlag, z2: &SignedFlag, d: usize) -> Result<f64, FlagError> {
    let n = z1.k.rows();
    // z2 must be z1 exp(t K_alpha): the relative rotation is planar in
    // coordinates (d-1, d).
    let rel = z1.k.transpose().mul(&z2.k);
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j && (i == d - 1 || i == d) {
                continue;
            } else if (i, j) == (d - 1, d) || (i, j) == (d, d - 1) {
                continue;
            } else if i == j {
                1.0
            } else {
                0.0
            };
            residual = residual.max((rel[(i, j)] - expected).abs());
        }
    }
    let block = (rel[(d - 1, d - 1)] - rel[(d, d)]).abs().max((rel[(d, d - 1)] + rel[(d - 1, d)]).abs());
    residual = residual.max(block);
    if residual > 1e-8 {
        return Err(FlagError::NotOnCircle { residual });
    }
    let p1 = z1.project();
    let p2 = z2.project();
    Ok(dist_alpha(&p1, &p2, d).min(1.0).asin())
}

/// Analytic derivative of t -> chi_d sigma(g, gamma_d(t)) at t = 0, where
/// gamma_d is the alpha_d-circle through z: <rho g v, rho g u> / |rho g v|^2
/// with v the wedge of columns 1..d and u the wedge of columns
/// 1..d-1, d+1 of k.
pub fn cocycle_derivative(g: &GroupElement, z: &SignedFlag, d: usize) -> f64 {
    let rho = exterior_matrix_of(g.mat(), d);
    let base: Vec<usize> = (0..d).collect();
    let mut shifted = base.clone();
    shifted[d - 1] = d;
    let v = wedge_columns(&z.k, &base);
    let u = wedge_columns(&z.k, &shifted);
    let gv = rho.matvec(&v);
    let gu = rho.matvec(&u);
    vec_dot(&gv, &gu) / vec_dot(&gv, &gv)
}

/// The lift distance d_0(z, z') = sup_alpha |k v_alpha - k' v_alpha| / sqrt(2).
pub fn d0(z1: &SignedFlag, z2: &SignedFlag) -> f64 {
    let m = z1.rank();
    let mut best = 0.0f64;
    for d in 1..=m {
        let base: Vec<usize> = (0..d).collect();
        let w1 = wedge_columns(&z1.k, &base);
        let w2 = wedge_columns(&z2.k, &base);
        let diff: f64 = w1
            .iter()
            .zip(&w2)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        best = best.max(diff);
    }
    best / 2f64.sqrt()
}

/// The bi-invariant Riemannian distance on K = SO(m+1): the Frobenius norm
/// of the principal logarithm of k1^T k2. Closed forms for SO(2)/SO(3).
pub fn d1(z1: &SignedFlag, z2: &SignedFlag) -> Result<f64, FlagError> {
    let n = z1.k.rows();
    let rel = z1.k.transpose().mul(&z2.k);
    let theta = match n {
        2 => rel[(1, 0)].atan2(rel[(0, 0)]).abs(),
        3 => {
            let c = (rel[(0, 0)] + rel[(1, 1)] + rel[(2, 2)] - 1.0) / 2.0;
            c.max(-1.0).min(1.0).acos()
        }
        _ => return Err(FlagError::UnsupportedRank { rank: n - 1 }),
    };
    Ok(2f64.sqrt() * theta)
}

/// Haar-random special orthogonal matrix (QR of a Gaussian matrix with the
/// positive-diagonal convention, det fixed to +1 by flipping a column).
pub fn random_special_orthogonal(n: usize, rng: &mut StreamRng) -> Mat {
    let gauss = Mat::from_fn(n, n, |_, _| rng.normal());
    let (mut q, _) = gauss.qr_pos();
    if q.det() < 0.0 {
        for i in 0..n {
            q[(i, n - 1)] = -q[(i, n - 1)];
        }
    }
    q
}

/// Projective line through the images of eta's alpha_d-circle in
/// wedge^d R^{m+1}, as a unit 2-vector in wedge^2(wedge^d R^{m+1}).
pub fn circle_line_wedge(eta: &FlagPoint, d: usize) -> Vec<f64> {
    let base: Vec<usize> = (0..d).collect();
    let mut shifted = base.clone();
    shifted[d - 1] = d;
    let v = wedge_columns(&eta.k, &base);
    let u = wedge_columns(&eta.k, &shifted);
    wedge2(&v, &u)
}

/// v ^ u in the lexicographic pair basis of wedge^2 R^n.
pub fn wedge2(v: &[f64], u: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(v[i] * u[j] - v[j] * u[i]);
        }
    }
    out
}

/// Repelling functional (last right singular vector direction) of an
/// arbitrary invertible matrix.
pub fn repelling_functional(a: &Mat) -> Vec<f64> {
    let svd = a.svd().expect("svd convergence");
    svd.vt.row(0).into()
}

#[derive(Clone, Debug)]
pub struct ChainMove {
    /// Simple root index (1-based degree d).
    pub d: usize,
    /// d_alpha(g eta_j, g eta_{j+1}).
    pub moved: f64,
    /// d_alpha(g eta, g eta').
    pub reference: f64,
    /// delta^{-2} beta e^{-alpha kappa(g)}.
    pub error_scale: f64,
}

#[derive(Clone, Debug)]
pub struct ChainEndpoint {
    pub d: usize,
    /// d_alpha(g eta_{l1}, g eta'_{l2}).
    pub dist: f64,
    /// beta e^{-alpha kappa(g)} delta^{-2}.
    pub bound_scale: f64,
}

#[derive(Clone, Debug)]
pub struct ChangedFlags {
    pub chain_a: Vec<FlagPoint>,
    pub chain_b: Vec<FlagPoint>,
    pub moves: Vec<ChainMove>,
    pub endpoints: Vec<ChainEndpoint>,
}

/// The changing-flags chain construction: walk from eta using the odd
/// simple roots and from eta' using the even ones, one alpha-circle move
/// per root, choosing each move to bring the g-images together in P V_alpha.
pub fn change_flags(
    eta: &FlagPoint,
    eta2: &FlagPoint,
    g: &GroupElement,
    delta: f64,
) -> Result<ChangedFlags, FlagError> {
    let m = eta.rank();
    let pi1: Vec<usize> = (1..=m).step_by(2).collect();
    let pi2: Vec<usize> = (2..=m).step_by(2).collect();

    // Separation preconditions: for alpha in Pi_1 the target point is
    // V_{alpha,eta'} and the moving line is l_{alpha,eta}; swapped for Pi_2.
    let mut failures = Vec::new();
    for (roots, point_flag, line_flag, tag) in
        [(&pi1, eta2, eta, "Pi1"), (&pi2, eta, eta2, "Pi2")]
    {
        for &d in roots.iter() {
            let rho = exterior_matrix_of(g.mat(), d);
            let ym = repelling_functional(&rho);
            let sep_point = delta_pair(&point_flag.wedge(d), &ym);
            if sep_point <= delta {
                failures.push(format!(
                    "{tag} alpha_{d}: delta(point, y^m) = {sep_point:.3e} <= {delta:.3e}"
                ));
            }
            let rho2 = exterior_matrix_of(&rho, 2);
            let ym2 = repelling_functional(&rho2);
            let sep_line = delta_pair(&circle_line_wedge(line_flag, d), &ym2);
            if sep_line <= delta {
                failures.push(format!(
                    "{tag} alpha_{d}: delta(line, y^m of wedge^2) = {sep_line:.3e} <= {delta:.3e}"
                ));
            }
        }
    }
    if !failures.is_empty() {
        return Err(FlagError::PreconditionViolated { failures });
    }

    let kappa = cartan_decompose(g).expect("cartan decomposition").kappa;
    let beta = crate::lie::gap_from_kappa(&kappa);
    let g_eta = act(g, eta);
    let g_eta2 = act(g, eta2);

    let mut moves = Vec::new();
    let mut chain_a = alloc::vec![eta.clone()];
    for &d in &pi1 {
        let target = &g_eta2;
        let cur = chain_a.last().expect("nonempty chain").clone();
        let best_t = minimize_circle(&cur, d, g, target);
        let next = alpha_circle_point(&SignedFlag { k: cur.k.clone() }, d, best_t).project();
        let alpha_kappa = kappa[d - 1] - kappa[d];
        moves.push(ChainMove {
            d,
            moved: dist_alpha(&act(g, &cur), &act(g, &next), d),
            reference: dist_alpha(&g_eta, &g_eta2, d),
            error_scale: beta * (-alpha_kappa).exp() / (delta * delta),
        });
        chain_a.push(next);
    }
    let mut chain_b = alloc::vec![eta2.clone()];
    for &d in &pi2 {
        let target = &g_eta;
        let cur = chain_b.last().expect("nonempty chain").clone();
        let best_t = minimize_circle(&cur, d, g, target);
        let next = alpha_circle_point(&SignedFlag { k: cur.k.clone() }, d, best_t).project();
        let alpha_kappa = kappa[d - 1] - kappa[d];
        moves.push(ChainMove {
            d,
            moved: dist_alpha(&act(g, &cur), &act(g, &next), d),
            reference: dist_alpha(&g_eta, &g_eta2, d),
            error_scale: beta * (-alpha_kappa).exp() / (delta * delta),
        });
        chain_b.push(next);
    }

    let end_a = act(g, chain_a.last().expect("nonempty chain"));
    let end_b = act(g, chain_b.last().expect("nonempty chain"));
    let endpoints = (1..=m)
        .map(|d| {
            let alpha_kappa = kappa[d - 1] - kappa[d];
            ChainEndpoint {
                d,
                dist: dist_alpha(&end_a, &end_b, d),
                bound_scale: beta * (-alpha_kappa).exp() / (delta * delta),
            }
        })
        .collect();
    Ok(ChangedFlags {
        chain_a,
        chain_b,
        moves,
        endpoints,
    })
}

/// Minimize t -> d_alpha(g (eta exp(t K_alpha)), target) over the circle:
/// coarse scan then golden-section refinement to 1e-10.
fn minimize_circle(eta: &FlagPoint, d: usize, g: &GroupElement, target: &FlagPoint) -> f64 {
    let rho = exterior_matrix_of(g.mat(), d);
    let base: Vec<usize> = (0..d).collect();
    let mut shifted = base.clone();
    shifted[d - 1] = d;
    let v = rho.matvec(&wedge_columns(&eta.k, &base));
    let u = rho.matvec(&wedge_columns(&eta.k, &shifted));
    let w = target.wedge(d);
    let gw = w; // target is already a g-image flag
    let f = |t: f64| {
        let (s, c) = (t.sin(), t.cos());
        let cand: Vec<f64> = v.iter().zip(&u).map(|(a, b)| c * a + s * b).collect();
        proj_dist(&cand, &gw)
    };
    // The candidate wedge is pi-periodic projectively.
    let n_scan = 64;
    let step = core::f64::consts::PI / n_scan as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..n_scan {
        let fv = f(i as f64 * step);
        if fv < best_v {
            best_v = fv;
            best_i = i;
        }
    }
    let mut a = (best_i as f64 - 1.0) * step;
    let mut b = (best_i as f64 + 1.0) * step;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > 1e-10 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// lex index of the subset, for locating weight vectors in wedge^d.
pub fn subset_index(n: usize, subset: &[usize]) -> usize {
    lex_subsets(n, subset.len())
        .iter()
        .position(|s| s == subset)
        .expect("valid subset")
}
