//! The fundamental representations of SL(m+1, R): the exterior powers
//! V_{alpha_d} = wedge^d R^{m+1} with the lexicographically ordered basis
//! e_I = e_{i_1} ^ ... ^ e_{i_d}. The matrix of wedge^d(g) has entry
//! (I, J) = det of the I x J minor of g; the base wedge e_1 ^ ... ^ e_d is
//! the first basis vector.

use alloc::vec::Vec;

use crate::lie::{cartan_decompose, GroupElement};
use crate::mat::{vec_dot, vec_norm, Mat};
// Inherent f64 methods shadow this on hosted targets; pure no_std builds need it.
#[allow(unused_imports)]
use crate::scalar::Real;

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// All d-element subsets of {0, ..., n-1} in lexicographic order.
pub fn lex_subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binom(n, d));
    let mut cur: Vec<usize> = (0..d).collect();
    if d > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance to the next subset
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - d {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..d {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExteriorMatrix {
    pub d: usize,
    pub dim: usize,
    pub mat: Mat,
    pub basis: Vec<Vec<usize>>,
}

/// Matrix of wedge^d(a) in the lexicographic basis, for any square a.
pub fn exterior_matrix_of(a: &Mat, d: usize) -> Mat {
    let n = a.rows();
    assert!(d >= 1 && d <= n);
    let subsets = lex_subsets(n, d);
    let dim = subsets.len();
    let mut out = Mat::zeros(dim, dim);
    let mut minor = Mat::zeros(d, d);
    for (bi, rows) in subsets.iter().enumerate() {
        for (bj, cols) in subsets.iter().enumerate() {
            for (r, &i) in rows.iter().enumerate() {
                for (c, &j) in cols.iter().enumerate() {
                    minor[(r, c)] = a[(i, j)];
                }
            }
            out[(bi, bj)] = minor.det();
        }
    }
    out
}

pub fn exterior_power(g: &GroupElement, d: usize) -> ExteriorMatrix {
    assert!(d >= 1 && d <= g.rank() + 1);
    let mat = exterior_matrix_of(g.mat(), d);
    let basis = lex_subsets(g.dim(), d);
    ExteriorMatrix {
        d,
        dim: basis.len(),
        mat,
        basis,
    }
}

/// The wedge of the selected columns of k, as a vector in wedge^d R^n.
pub fn wedge_columns(k: &Mat, cols: &[usize]) -> Vec<f64> {
    let n = k.rows();
    let d = cols.len();
    let subsets = lex_subsets(n, d);
    let mut minor = Mat::zeros(d, d);
    let mut out = Vec::with_capacity(subsets.len());
    for rows in &subsets {
        for (r, &i) in rows.iter().enumerate() {
            for (c, &j) in cols.iter().enumerate() {
                minor[(r, c)] = k[(i, j)];
            }
        }
        out.push(minor.det());
    }
    out
}

/// Projective distance d(x, x') = |v ^ v'| / (|v| |v'|), computed from the
/// Gram identity |v ^ v'|^2 = |v|^2 |v'|^2 - <v, v'>^2.
pub fn proj_dist(v: &[f64], w: &[f64]) -> f64 {
    let nv = vec_norm(v);
    let nw = vec_norm(w);
    let c = vec_dot(v, w) / (nv * nw);
    (1.0 - c * c).max(0.0).sqrt()
}

/// delta(x, y) = |<v, f>| / (|v| |f|) for a point x = Rv and a functional
/// direction y = Rf.
pub fn delta_pair(v: &[f64], f: &[f64]) -> f64 {
    (vec_dot(v, f) / (vec_norm(v) * vec_norm(f))).abs()
}

/// gamma_{1,2} of wedge^d(g): |wedge^2 rho(g)| / |rho(g)|^2, which equals
/// exp(-alpha_d kappa(g)).
pub fn gamma12(g: &GroupElement, d: usize) -> f64 {
    let rho = exterior_power(g, d);
    gamma12_of(&rho.mat)
}

pub fn gamma12_of(a: &Mat) -> f64 {
    let sq = exterior_matrix_of(a, 2);
    sq.norm_op() / a.norm_op().powi(2)
}

/// gamma_{1,3}(a) = |wedge^3 a| / (|wedge^2 a| |a|).
pub fn gamma13_of(a: &Mat) -> f64 {
    let w2 = exterior_matrix_of(a, 2);
    let w3 = exterior_matrix_of(a, 3);
    w3.norm_op() / (w2.norm_op() * a.norm_op())
}

#[derive(Clone, Debug)]
pub struct DensityPair {
    /// Unit vector spanning the attracting line x^M_{rho(g)} in wedge^d.
    pub xm: Vec<f64>,
    /// Unit vector representing the repelling functional y^m_{rho(g)}.
    pub ym: Vec<f64>,
    /// False when kappa_d - kappa_{d+1} <= 1e-10 and the density points
    /// are not uniquely determined.
    pub unique: bool,
}

pub fn density_points(g: &GroupElement, d: usize) -> DensityPair {
    assert!(d >= 1 && d <= g.rank());
    let cartan = cartan_decompose(g).expect("cartan decomposition");
    let base: Vec<usize> = (0..d).collect();
    let xm = wedge_columns(&cartan.k, &base);
    let ym = wedge_columns(&cartan.l.transpose(), &base);
    let unique = cartan.kappa[d - 1] - cartan.kappa[d] > 1e-10;
    DensityPair { xm, ym, unique }
}

/// |log |wedge^d g| - chi_d(kappa(g))|, the residual of the norm identity.
pub fn operator_norm_identity_check(g: &GroupElement, d: usize) -> f64 {
    let kappa = cartan_decompose(g).expect("cartan decomposition").kappa;
    let chi: f64 = kappa[..d].iter().sum();
    let rho = exterior_power(g, d);
    (rho.mat.norm_op().ln() - chi).abs()
}
