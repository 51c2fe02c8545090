//! Random-matrix and random-unitary samplers.
//!
//! All samplers are pure functions of their parameters and seed; each
//! derives its own RNG stream via [`crate::seed::stream`].

mod syk;

pub use syk::{sample_syk, syk_annihilators, SykSpec, VarianceRule, MAX_SYK_MODES};

use crate::error::{Error, Result};
use crate::linalg::{
    self, complex_gaussian, hermiticity_deviation, hermitize, identity, unitarity_residual,
    CMatrix,
};
use crate::seed;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Per-entry Hermiticity tolerance for accepting a Hamiltonian.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleTag {
    Gue,
    Syk,
    PseudoChaotic,
    Explicit,
}

impl std::fmt::Display for EnsembleTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EnsembleTag::Gue => "gue",
            EnsembleTag::Syk => "syk",
            EnsembleTag::PseudoChaotic => "pseudo_chaotic",
            EnsembleTag::Explicit => "explicit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Haar,
    DesignCircuit,
    Evolution,
    Explicit,
}

/// A `D x D` Hermitian Hamiltonian with ensemble provenance.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    dim: usize,
    entries: CMatrix,
    ensemble: EnsembleTag,
    seed: u64,
    /// Exact spectrum planted by the pseudo-chaotic construction, kept
    /// so tests can compare recomputed eigenvalues against it.
    planted_spectrum: Option<Vec<f64>>,
}

impl HermitianOperator {
    pub fn new(entries: CMatrix, ensemble: EnsembleTag, seed: u64) -> Result<Self> {
        let dim = entries.nrows();
        if dim < 2 || entries.ncols() != dim {
            return Err(Error::InvalidDimension(dim));
        }
        let deviation = hermiticity_deviation(&entries);
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { dim, entries, ensemble, seed, planted_spectrum: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn ensemble(&self) -> EnsembleTag {
        self.ensemble
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn planted_spectrum(&self) -> Option<&[f64]> {
        self.planted_spectrum.as_deref()
    }

    pub fn trace_squared(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MatrixJson::from_hermitian(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MatrixJson = serde_json::from_str(text)?;
        raw.into_hermitian()
    }
}

/// A `D x D` unitary with provenance metadata.
#[derive(Debug, Clone)]
pub struct UnitaryOperator {
    dim: usize,
    entries: CMatrix,
    provenance: Provenance,
}

impl UnitaryOperator {
    /// Unitarity tolerance is `1e-10 * D` in Frobenius norm.
    pub fn new(entries: CMatrix, provenance: Provenance) -> Result<Self> {
        let dim = entries.nrows();
        if dim < 1 || entries.ncols() != dim {
            return Err(Error::InvalidDimension(dim));
        }
        let residual = unitarity_residual(&entries);
        if residual > 1e-10 * dim as f64 {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { dim, entries, provenance })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// JSON wire format shared by Hamiltonians and unitaries:
/// `{dim, ensemble, seed, entries: [[re, im], ...]}` row-major.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub ensemble: String,
    pub seed: u64,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_hermitian(h: &HermitianOperator) -> Self {
        Self {
            dim: h.dim,
            ensemble: h.ensemble.to_string(),
            seed: h.seed,
            entries: matrix_rows(&h.entries),
        }
    }

    pub fn into_hermitian(self) -> Result<HermitianOperator> {
        let tag = match self.ensemble.as_str() {
            "gue" => EnsembleTag::Gue,
            "syk" => EnsembleTag::Syk,
            "pseudo_chaotic" => EnsembleTag::PseudoChaotic,
            "explicit" => EnsembleTag::Explicit,
            other => {
                return Err(Error::InvalidParameter(format!("unknown ensemble tag {other:?}")))
            }
        };
        let entries = rows_to_matrix(self.dim, &self.entries)?;
        HermitianOperator::new(entries, tag, self.seed)
    }
}

fn matrix_rows(m: &CMatrix) -> Vec<[f64; 2]> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn rows_to_matrix(dim: usize, rows: &[[f64; 2]]) -> Result<CMatrix> {
    if rows.len() != dim * dim {
        return Err(Error::InvalidParameter(format!(
            "expected {} entries for dim {dim}, got {}",
            dim * dim,
            rows.len()
        )));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = rows[i * dim + j];
        Complex64::new(re, im)
    }))
}

/// Draw a GUE Hamiltonian under `P(H) ∝ exp(-(D/2) Tr H^2)`.
///
/// Diagonal entries are real Gaussians of variance `1/D`; off-diagonal
/// entries are complex Gaussians with real and imaginary parts of
/// variance `1/(2D)` each. With this normalization the bulk spectrum
/// converges to the radius-2 semicircle and `E[Tr H^2] = D`.
pub fn sample_gue(dim: usize, root_seed: u64) -> Result<HermitianOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut rng = seed::stream(root_seed, "gue", 0);
    let d = dim as f64;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let diag = complex_gaussian(&mut rng, 2.0 / d).re;
        m[(i, i)] = Complex64::new(diag, 0.0);
        for j in (i + 1)..dim {
            let z = complex_gaussian(&mut rng, 1.0 / d);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m, EnsembleTag::Gue, root_seed)
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the
/// diagonal phase correction that makes the distribution exactly Haar.
pub fn sample_haar_unitary(dim: usize, root_seed: u64) -> Result<UnitaryOperator> {
    if dim < 1 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut rng = seed::stream(root_seed, "haar", 0);
    Ok(haar_from_rng(dim, &mut rng))
}

/// Same construction, drawing from a caller-owned stream.
pub fn haar_from_rng<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryOperator {
    let u = haar_matrix(dim, rng);
    UnitaryOperator::new(u, Provenance::Haar).expect("QR output is unitary")
}

pub(crate) fn haar_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let ginibre = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng, 1.0));
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Fix the gauge: multiply column j by the phase of r_jj.
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { linalg::C_ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Brickwork random circuit on `n = log2(dim)` qubits: `depth` layers of
/// independent Haar two-qubit gates on alternating adjacent pairs.
pub fn sample_design_unitary(dim: usize, depth: usize, root_seed: u64) -> Result<UnitaryOperator> {
    let mut rng = seed::stream(root_seed, "design", 0);
    design_from_rng(dim, depth, &mut rng)
}

pub fn design_from_rng<R: Rng + ?Sized>(
    dim: usize,
    depth: usize,
    rng: &mut R,
) -> Result<UnitaryOperator> {
    let qubits = linalg::log2_exact(dim).ok_or(Error::NotPowerOfTwo(dim))? as usize;
    if qubits < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("design depth must be >= 1".into()));
    }
    let mut total = identity(dim);
    for layer in 0..depth {
        let mut layer_matrix = identity(dim);
        let mut q = layer % 2;
        while q + 1 < qubits {
            let gate = haar_matrix(4, rng);
            let embedded = linalg::embed_gate(&gate, 1 << q, 1 << (qubits - q - 2));
            layer_matrix = embedded * layer_matrix;
            q += 2;
        }
        total = layer_matrix * total;
    }
    UnitaryOperator::new(total, Provenance::DesignCircuit)
}

/// Default brickwork depth for an `n`-qubit design unitary.
pub fn default_design_depth(qubits: usize) -> usize {
    4 * qubits
}

/// Pseudo-chaotic ensemble spec: design-circuit eigenvectors with a
/// highly degenerate semicircle spectrum (`distinct_eigenvalues` values,
/// each of multiplicity `dim / distinct_eigenvalues`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudoChaoticSpec {
    pub dim: usize,
    pub distinct_eigenvalues: usize,
    pub design_depth: usize,
    pub seed: u64,
}

impl PseudoChaoticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if !self.dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.dim));
        }
        if self.distinct_eigenvalues == 0 || self.dim % self.distinct_eigenvalues != 0 {
            return Err(Error::Divisibility {
                distinct: self.distinct_eigenvalues,
                dim: self.dim,
            });
        }
        if self.design_depth == 0 {
            return Err(Error::InvalidParameter("design depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Build a pseudo-chaotic Hamiltonian `H = U diag(spectrum) U^dag`.
pub fn build_pseudo_chaotic(spec: &PseudoChaoticSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    let mut rng = seed::stream(spec.seed, "pseudo-chaotic", 0);
    let distinct = semicircle_from_rng(spec.distinct_eigenvalues, &mut rng);
    let multiplicity = spec.dim / spec.distinct_eigenvalues;
    let mut spectrum = Vec::with_capacity(spec.dim);
    for &e in &distinct {
        spectrum.extend(std::iter::repeat(e).take(multiplicity));
    }
    let u = design_from_rng(spec.dim, spec.design_depth, &mut rng)?;
    let lambda = CMatrix::from_fn(spec.dim, spec.dim, |i, j| {
        if i == j {
            Complex64::new(spectrum[i], 0.0)
        } else {
            linalg::C_ZERO
        }
    });
    let h = hermitize(&(u.entries() * lambda * u.entries().adjoint()));
    let mut op = HermitianOperator::new(h, EnsembleTag::PseudoChaotic, spec.seed)?;
    spectrum.sort_by(f64::total_cmp);
    op.planted_spectrum = Some(spectrum);
    Ok(op)
}

/// Independent draws from the radius-2 Wigner semicircle density
/// `ρ(E) = (1/2π) sqrt(4 - E^2)` by rejection against a uniform box.
pub fn semicircle_sample(count: usize, root_seed: u64) -> Vec<f64> {
    let mut rng = seed::stream(root_seed, "semicircle", 0);
    semicircle_from_rng(count, &mut rng)
}

pub fn semicircle_from_rng<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    let peak = 1.0 / std::f64::consts::PI;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let e: f64 = rng.random_range(-2.0..2.0);
        let u: f64 = rng.random_range(0.0..peak);
        if u <= crate::spectral::semicircle_pdf(e) {
            out.push(e);
        }
    }
    out
}

/// Configuration for an ensemble of Hamiltonians, used by the Monte
/// Carlo drivers (SFF, forging estimates, probe curves).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleConfig {
    Gue { dim: usize },
    Syk(SykSpec),
    PseudoChaotic(PseudoChaoticSpec),
}

impl EnsembleConfig {
    pub fn dim(&self) -> usize {
        match self {
            EnsembleConfig::Gue { dim } => *dim,
            EnsembleConfig::Syk(spec) => 1 << spec.modes,
            EnsembleConfig::PseudoChaotic(spec) => spec.dim,
        }
    }

    pub fn tag(&self) -> EnsembleTag {
        match self {
            EnsembleConfig::Gue { .. } => EnsembleTag::Gue,
            EnsembleConfig::Syk(_) => EnsembleTag::Syk,
            EnsembleConfig::PseudoChaotic(_) => EnsembleTag::PseudoChaotic,
        }
    }

    /// Sample one member, overriding any seed stored in the config.
    pub fn sample_with(&self, seed: u64) -> Result<HermitianOperator> {
        match self {
            EnsembleConfig::Gue { dim } => sample_gue(*dim, seed),
            EnsembleConfig::Syk(spec) => {
                let mut spec = spec.clone();
                spec.seed = seed;
                sample_syk(&spec)
            }
            EnsembleConfig::PseudoChaotic(spec) => {
                let mut spec = spec.clone();
                spec.seed = seed;
                build_pseudo_chaotic(&spec)
            }
        }
    }
}
