#![allow(dead_code)]

use rmlab_core::lie::GroupElement;
use rmlab_core::mat::Mat;
use rmlab_core::rng::StreamRng;
use rmlab_core::walk::MeasureSpec;

/// Random matrix with standard normal entries.
pub fn random_matrix(n: usize, rng: &mut StreamRng) -> Mat {
    Mat::from_fn(n, n, |_, _| rng.normal())
}

/// Random element of SL(n, R): Gaussian matrix scaled to determinant 1.
pub fn random_sl(n: usize, rng: &mut StreamRng) -> GroupElement {
    loop {
        let mut a = random_matrix(n, rng);
        let det = a.det();
        if det.abs() < 1e-3 {
            continue;
        }
        if det < 0.0 {
            for j in 0..n {
                a[(0, j)] = -a[(0, j)];
            }
        }
        let scale = det.abs().powf(-1.0 / n as f64);
        return GroupElement::new_renormalized(a.scale(scale), 1e-6).unwrap();
    }
}

pub fn rotation2(t: f64) -> Mat {
    rmlab_core::lie::rotation(2, 0, 1, t)
}

pub fn diag(entries: &[f64]) -> Mat {
    Mat::diag(entries)
}

/// Two-atom SL(2) spec with moderate contraction, matching the shipped
/// sl2 spec file.
pub fn sl2_spec() -> MeasureSpec {
    let d = diag(&[0.25f64.exp(), (-0.25f64).exp()]);
    let a1 = GroupElement::new(rotation2(0.3).mul(&d)).unwrap();
    let a2 = GroupElement::new(rotation2(1.9).mul(&d)).unwrap();
    MeasureSpec::new(1, vec![a1, a2], vec![0.5, 0.5], "sl2-test".into()).unwrap()
}

/// Stronger contraction, for tests that need fast alignment of density
/// points at short word lengths.
pub fn sl2_strong_spec() -> MeasureSpec {
    let d = diag(&[1.25f64.exp(), (-1.25f64).exp()]);
    let a1 = GroupElement::new(rotation2(0.3).mul(&d)).unwrap();
    let a2 = GroupElement::new(rotation2(1.9).mul(&d)).unwrap();
    MeasureSpec::new(1, vec![a1, a2], vec![0.5, 0.5], "sl2-strong".into()).unwrap()
}

/// Two-atom SL(3) spec: rotations in different planes times a diagonal.
pub fn sl3_spec() -> MeasureSpec {
    let d = diag(&[0.3f64.exp(), 1.0, (-0.3f64).exp()]);
    let r1 = rmlab_core::lie::rotation(3, 0, 1, 0.7);
    let r2 = rmlab_core::lie::rotation(3, 1, 2, 1.1);
    let a1 = GroupElement::new(r1.mul(&d)).unwrap();
    let a2 = GroupElement::new(r2.mul(&d)).unwrap();
    MeasureSpec::new(2, vec![a1, a2], vec![0.5, 0.5], "sl3-test".into()).unwrap()
}

/// Product of a random word of the given length from the spec's atoms.
pub fn random_word(spec: &MeasureSpec, len: usize, rng: &mut StreamRng) -> GroupElement {
    let mut g = GroupElement::identity(spec.rank());
    for _ in 0..len {
        g = g.mul(spec.sample_atom(rng));
    }
    g
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a} vs {b} (diff {:e}, tol {tol:e})",
        (a - b).abs()
    );
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.sub(b).max_abs()
}
