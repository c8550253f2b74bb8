//! MeasureSpec JSON files: loading, validation, and the builtin test
//! specs shipped with the binary.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use rmlab_core::lie::{rotation, GroupElement};
use rmlab_core::mat::Mat;
use rmlab_core::walk::MeasureSpec;

/// Determinant tolerance for user-provided matrices; inputs within this
/// band are rescaled to exact unimodularity.
pub const DET_TOL: f64 = 1e-6;

#[derive(Deserialize)]
struct SpecFile {
    m: usize,
    atoms: Vec<AtomFile>,
}

#[derive(Deserialize)]
struct AtomFile {
    matrix: Vec<Vec<f64>>,
    weight: f64,
}

pub struct LoadedSpec {
    pub spec: MeasureSpec,
    /// Hex digest of the file bytes, echoed in output metadata.
    pub hash: String,
}

pub fn parse_spec(bytes: &[u8], label: &str) -> Result<MeasureSpec> {
    let file: SpecFile = serde_json::from_slice(bytes).context("parsing spec JSON")?;
    let dim = file.m + 1;
    if file.atoms.is_empty() {
        bail!("spec has no atoms");
    }
    let mut atoms = Vec::with_capacity(file.atoms.len());
    let mut weights = Vec::with_capacity(file.atoms.len());
    for (i, atom) in file.atoms.iter().enumerate() {
        if atom.matrix.len() != dim || atom.matrix.iter().any(|row| row.len() != dim) {
            bail!("atom {i}: matrix must be {dim}x{dim} for m = {}", file.m);
        }
        if !(atom.weight > 0.0) {
            bail!("atom {i}: weight {} is not positive", atom.weight);
        }
        let g = GroupElement::new_renormalized(Mat::from_rows(&atom.matrix), DET_TOL)
            .map_err(|e| anyhow::anyhow!("atom {i}: {e}"))?;
        atoms.push(g);
        weights.push(atom.weight);
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    MeasureSpec::new(file.m, atoms, weights, label.to_string())
        .map_err(|e| anyhow::anyhow!("invalid spec: {e}"))
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading spec file {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let hash = format!("{:x}", hasher.finalize());
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "spec".to_string());
    let spec = parse_spec(&bytes, &label)?;
    Ok(LoadedSpec {
        spec,
        hash: hash[..16].to_string(),
    })
}

/// Two-atom SL(2) spec with moderate contraction; the shipped sl2.json
/// mirrors these matrices.
pub fn builtin_sl2() -> MeasureSpec {
    let d = Mat::diag(&[0.25f64.exp(), (-0.25f64).exp()]);
    let a1 = GroupElement::new(rotation(2, 0, 1, 0.3).mul(&d)).unwrap();
    let a2 = GroupElement::new(rotation(2, 0, 1, 1.9).mul(&d)).unwrap();
    MeasureSpec::new(1, vec![a1, a2], vec![0.5, 0.5], "sl2".into()).unwrap()
}

/// Stronger contraction, for fast alignment at short word lengths.
pub fn builtin_sl2_strong() -> MeasureSpec {
    let d = Mat::diag(&[1.25f64.exp(), (-1.25f64).exp()]);
    let a1 = GroupElement::new(rotation(2, 0, 1, 0.3).mul(&d)).unwrap();
    let a2 = GroupElement::new(rotation(2, 0, 1, 1.9).mul(&d)).unwrap();
    MeasureSpec::new(1, vec![a1, a2], vec![0.5, 0.5], "sl2-strong".into()).unwrap()
}

/// Two-atom SL(3) spec: rotations in different planes times a diagonal.
pub fn builtin_sl3() -> MeasureSpec {
    let d = Mat::diag(&[0.3f64.exp(), 1.0, (-0.3f64).exp()]);
    let a1 = GroupElement::new(rotation(3, 0, 1, 0.7).mul(&d)).unwrap();
    let a2 = GroupElement::new(rotation(3, 1, 2, 1.1).mul(&d)).unwrap();
    MeasureSpec::new(2, vec![a1, a2], vec![0.5, 0.5], "sl3".into()).unwrap()
}
