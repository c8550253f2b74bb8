//! Structure theory of SL(m+1, R), type A_m.
//!
//! Conventions: the maximal torus is the diagonal subgroup, the Weyl
//! chamber is descending diagonals, simple roots alpha_i(X) = x_i - x_{i+1}
//! and fundamental weights chi_d(X) = x_1 + ... + x_d. The Cartan
//! projection kappa(g) is the sorted vector of log singular values and the
//! Iwasawa cocycle comes from the QR factorization with positive diagonal.

use alloc::vec::Vec;

use crate::mat::{Mat, MatError};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct GroupElement {
    m: usize,
    mat: Mat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LieError {
    NotUnimodular { det: f64 },
    NonFinite,
    DecompositionFailed,
}

impl core::fmt::Display for LieError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LieError::NotUnimodular { det } => write!(f, "determinant {det} is not 1"),
            LieError::NonFinite => write!(f, "matrix has non-finite entries"),
            LieError::DecompositionFailed => write!(f, "decomposition failed"),
        }
    }
}

impl GroupElement {
    /// Wrap a matrix that is already unimodular to 1e-9.
    pub fn new(mat: Mat) -> Result<GroupElement, LieError> {
        assert!(mat.is_square());
        if mat.data().iter().any(|x| !x.is_finite()) {
            return Err(LieError::NonFinite);
        }
        let det = mat.det();
        if (det - 1.0).abs() > 1e-9 {
            return Err(LieError::NotUnimodular { det });
        }
        Ok(GroupElement {
            m: mat.rows() - 1,
            mat,
        })
    }

    /// Wrap a matrix with det within `tol` of 1, rescaling it to exact
    /// unimodularity (used when loading user-provided specs).
    pub fn new_renormalized(mat: Mat, tol: f64) -> Result<GroupElement, LieError> {
        if mat.data().iter().any(|x| !x.is_finite()) {
            return Err(LieError::NonFinite);
        }
        let det = mat.det();
        if (det - 1.0).abs() > tol {
            return Err(LieError::NotUnimodular { det });
        }
        let n = mat.rows();
        let scale = det.powf(-1.0 / n as f64);
        GroupElement::new(mat.scale(scale))
    }

    pub fn identity(m: usize) -> GroupElement {
        GroupElement {
            m,
            mat: Mat::identity(m + 1),
        }
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m + 1
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn mul(&self, rhs: &GroupElement) -> GroupElement {
        assert_eq!(self.m, rhs.m);
        GroupElement {
            m: self.m,
            mat: self.mat.mul(&rhs.mat),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self.mat.inverse().expect("group element is invertible");
        GroupElement {
            m: self.m,
            mat: inv,
        }
    }

    pub fn transpose(&self) -> GroupElement {
        GroupElement {
            m: self.m,
            mat: self.mat.transpose(),
        }
    }
}

/// Planar rotation by t in coordinates (i, j) of an n x n identity:
/// column i maps to cos(t) e_i + sin(t) e_j.
pub fn rotation(n: usize, i: usize, j: usize, t: f64) -> Mat {
    let mut r = Mat::identity(n);
    let (s, c) = (t.sin(), t.cos());
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(j, i)] = s;
    r[(i, j)] = -s;
    r
}

#[derive(Clone, Debug)]
pub struct CartanTriple {
    pub k: Mat,
    pub kappa: Vec<f64>,
    pub l: Mat,
}

#[derive(Clone, Debug)]
pub struct IwasawaTriple {
    pub k: Mat,
    pub sigma: Vec<f64>,
    pub n: Mat,
}

/// g = k exp(diag kappa) l with kappa descending and det k = det l = 1.
pub fn cartan_decompose(g: &GroupElement) -> Result<CartanTriple, LieError> {
    let svd = g.mat().svd().map_err(|e| match e {
        MatError::SvdNoConvergence => LieError::DecompositionFailed,
        MatError::Singular => LieError::DecompositionFailed,
    })?;
    let mut k = svd.u;
    let mut l = svd.vt;
    let n = g.dim();
    // det g = 1 > 0 forces det k = det l; flip both to +1 if needed. The
    // sign flip on the last column/row commutes with the diagonal factor.
    if k.det() < 0.0 {
        for i in 0..n {
            k[(i, n - 1)] = -k[(i, n - 1)];
            l[(n - 1, i)] = -l[(n - 1, i)];
        }
    }
    let kappa: Vec<f64> = svd.s.iter().map(|s| s.ln()).collect();
    if kappa.iter().any(|x| !x.is_finite()) {
        return Err(LieError::DecompositionFailed);
    }
    Ok(CartanTriple { k, kappa, l })
}

/// g = k exp(diag sigma) n with k special orthogonal and n unipotent
/// upper triangular.
pub fn iwasawa_decompose(g: &GroupElement) -> IwasawaTriple {
    let (k, r) = g.mat().qr_pos();
    let dim = g.dim();
    let sigma: Vec<f64> = (0..dim).map(|i| r[(i, i)].ln()).collect();
    let n = Mat::from_fn(dim, dim, |i, j| r[(i, j)] / r[(i, i)]);
    IwasawaTriple { k, sigma, n }
}

/// gap(g) = max_alpha exp(-alpha kappa(g)).
pub fn gap(g: &GroupElement) -> f64 {
    let kappa = cartan_decompose(g).expect("cartan decomposition").kappa;
    gap_from_kappa(&kappa)
}

pub fn gap_from_kappa(kappa: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..kappa.len() - 1 {
        best = best.max_f(-(kappa[i] - kappa[i + 1]));
    }
    best.exp()
}

/// The opposition involution iota = -w_0: (x_1, ..., x_{m+1}) maps to
/// (-x_{m+1}, ..., -x_1).
pub fn opposition_involution(kappa: &[f64]) -> Vec<f64> {
    kappa.iter().rev().map(|x| -x).collect()
}

#[derive(Clone, Debug)]
pub struct RootData {
    pub m: usize,
    /// L_{ij} = -alpha_i(H_j), the negative Cartan matrix of A_m.
    pub l: Vec<Vec<i64>>,
    pub c1: f64,
    pub c1_prime: f64,
    pub c_a: f64,
}

impl RootData {
    /// alpha_i(X) = x_i - x_{i+1}, i in 0..m.
    pub fn alpha(&self, x: &[f64], i: usize) -> f64 {
        x[i] - x[i + 1]
    }

    /// chi_d(X) = x_1 + ... + x_d, d in 1..=m.
    pub fn chi(&self, x: &[f64], d: usize) -> f64 {
        x[..d].iter().sum()
    }

    /// omega_d coincides with chi_d on the semisimple part.
    pub fn omega(&self, x: &[f64], d: usize) -> f64 {
        self.chi(x, d)
    }

    pub fn min_alpha(&self, x: &[f64]) -> f64 {
        (0..self.m).fold(f64::INFINITY, |acc, i| acc.min_f(self.alpha(x, i)))
    }
}

/// The explicit constants of the norm comparison
/// (1/C1) sup |chi_alpha(X)| <= |X| <= C1 sup |chi_alpha(X)| on the
/// trace-zero subspace, plus C1' with |alpha(X)| <= C1' |X| and
/// C_A = 3 C1 + C1'.
pub fn structural_constants(m: usize) -> RootData {
    assert!(m >= 1);
    let mut l = Vec::new();
    for i in 0..m {
        let mut row = Vec::new();
        for j in 0..m {
            let a = if i == j {
                -2
            } else if i.abs_diff(j) == 1 {
                1
            } else {
                0
            };
            row.push(a);
        }
        l.push(row);
    }
    // sup_{|X|=1} max_d |chi_d(X)|: the norm of chi_d restricted to the
    // trace-zero subspace is sqrt(d (m+1-d) / (m+1)).
    let n = (m + 1) as f64;
    let mut c1a: f64 = 0.0;
    for d in 1..=m {
        let df = d as f64;
        c1a = c1a.max_f((df * (n - df) / n).sqrt());
    }
    // sup { |X| : max_d |chi_d(X)| <= 1 }: the polytope is cut out by the
    // partial sums, its vertices are the sign patterns of those sums.
    let mut c1b: f64 = 0.0;
    for pattern in 0..(1u32 << m) {
        let mut prev = 0.0;
        let mut norm2 = 0.0;
        for d in 1..=m + 1 {
            let s_d = if d == m + 1 {
                0.0
            } else if pattern >> (d - 1) & 1 == 1 {
                1.0
            } else {
                -1.0
            };
            let x_d: f64 = s_d - prev;
            norm2 += x_d * x_d;
            prev = s_d;
        }
        c1b = c1b.max_f(norm2.sqrt());
    }
    let c1 = c1a.max_f(c1b);
    let c1_prime = 2f64.sqrt();
    RootData {
        m,
        l,
        c1,
        c1_prime,
        c_a: 3.0 * c1 + c1_prime,
    }
}
