//! Chaos probes: regularized OTOC, subsystem Renyi-2 entropy, operator
//! entanglement of the evolution, and stabilizer entropy.

use crate::ensembles::EnsembleConfig;
use crate::error::{Error, Result};
use crate::linalg::{log2_exact, CMatrix, CVector};
use crate::report::ProbeCurve;
use crate::seed;
use crate::spectral::{diagonalize, EigenSystem};
use crate::state::partial_trace_r;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Phase of the Pauli string with bitmasks `(x, z)` acting on basis
/// state `b`: `P(x,z)|b> = i^{|x & z|} (-1)^{|b & z|} |b ^ x>`.
/// Qubit 0 is the most significant bit.
fn pauli_phase(x: u32, z: u32, b: u32) -> Complex64 {
    let y_count = (x & z).count_ones();
    let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    match y_count % 4 {
        0 => Complex64::new(sign, 0.0),
        1 => Complex64::new(0.0, sign),
        2 => Complex64::new(-sign, 0.0),
        _ => Complex64::new(0.0, -sign),
    }
}

/// Dense Pauli string from bitmasks over `n` qubits.
pub fn pauli_dense(qubits: usize, x: u32, z: u32) -> Result<CMatrix> {
    if qubits == 0 || qubits > 20 {
        return Err(Error::InvalidParameter(format!("unsupported qubit count {qubits}")));
    }
    let dim = 1usize << qubits;
    let mask = (dim - 1) as u32;
    if x & !mask != 0 || z & !mask != 0 {
        return Err(Error::InvalidParameter("Pauli mask exceeds register".into()));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim as u32 {
        m[((b ^ x) as usize, b as usize)] = pauli_phase(x, z, b);
    }
    Ok(m)
}

fn qubit_mask(qubits: usize, qubit: usize) -> Result<u32> {
    if qubit >= qubits {
        return Err(Error::InvalidParameter(format!("qubit {qubit} >= register {qubits}")));
    }
    Ok(1 << (qubits - 1 - qubit))
}

pub fn pauli_x(qubits: usize, qubit: usize) -> Result<CMatrix> {
    pauli_dense(qubits, qubit_mask(qubits, qubit)?, 0)
}

pub fn pauli_z(qubits: usize, qubit: usize) -> Result<CMatrix> {
    pauli_dense(qubits, 0, qubit_mask(qubits, qubit)?)
}

/// Pauli expectation `<psi|P(x,z)|psi>` without materializing the matrix.
pub fn pauli_expectation(psi: &CVector, x: u32, z: u32) -> f64 {
    let dim = psi.len();
    let mut sum = Complex64::new(0.0, 0.0);
    for b in 0..dim as u32 {
        sum += psi[(b ^ x) as usize].conj() * pauli_phase(x, z, b) * psi[b as usize];
    }
    sum.re
}

/// Regularized four-point OTOC `(1/D) Tr[O1(t) O2 O1(t) O2]` with
/// `O1(t) = U^dag O1 U`.
pub fn otoc_value(u: &CMatrix, o1: &CMatrix, o2: &CMatrix) -> Result<f64> {
    let dim = u.nrows();
    if o1.nrows() != dim || o2.nrows() != dim {
        return Err(Error::DimensionMismatch { left: o1.nrows(), right: dim });
    }
    let o1_t = u.adjoint() * o1 * u;
    let m = &o1_t * o2;
    Ok((&m * &m).trace().re / dim as f64)
}

/// Renyi-2 entropy `-ln Tr(rho^2)` of a density operator.
pub fn renyi2_entropy(rho: &CMatrix) -> Result<f64> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::InvalidDimension(rho.nrows()));
    }
    let purity = (rho * rho).trace().re;
    if purity <= 0.0 {
        return Err(Error::InvalidState(format!("purity {purity} is not positive")));
    }
    Ok(-purity.min(1.0).ln())
}

/// Operator entanglement of a unitary across the split `dim_a x dim_b`:
/// Renyi-2 entropy of the vectorized operator regrouped so that the
/// first factor holds the A-side row and column indices.
pub fn operator_entanglement(u: &CMatrix, dim_a: usize) -> Result<f64> {
    let dim = u.nrows();
    if u.ncols() != dim {
        return Err(Error::InvalidDimension(dim));
    }
    if dim_a < 2 || dim % dim_a != 0 {
        return Err(Error::DimensionMismatch { left: dim_a, right: dim });
    }
    let dim_b = dim / dim_a;
    let scale = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut psi = CVector::zeros(dim * dim);
    for ra in 0..dim_a {
        for rb in 0..dim_b {
            for ca in 0..dim_a {
                for cb in 0..dim_b {
                    let a = ra * dim_a + ca;
                    let b = rb * dim_b + cb;
                    psi[a * dim_b * dim_b + b] = u[(ra * dim_b + rb, ca * dim_b + cb)] * scale;
                }
            }
        }
    }
    let rho = &psi * psi.adjoint();
    let reduced = partial_trace_r(&rho, dim_a * dim_a, dim_b * dim_b);
    renyi2_entropy(&reduced)
}

/// Stabilizer entropy of a pure state:
/// `M_alpha = (1/(1-alpha)) ln[(1/D) sum_P <P>^(2 alpha)]` over all
/// `4^n` Pauli strings.
pub fn stabilizer_entropy(psi: &CVector, alpha: f64) -> Result<f64> {
    let dim = psi.len();
    let qubits = log2_exact(dim).ok_or(Error::NotPowerOfTwo(dim))?;
    if qubits == 0 || qubits > 8 {
        return Err(Error::ResourceLimit(format!(
            "stabilizer entropy sums 4^{qubits} Pauli strings"
        )));
    }
    if alpha == 1.0 {
        return Err(Error::InvalidParameter("alpha = 1 is a removable singularity".into()));
    }
    if (psi.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState("stabilizer entropy needs a unit vector".into()));
    }
    let masks = 1u32 << qubits;
    let mut sum = 0.0_f64;
    for x in 0..masks {
        for z in 0..masks {
            let e = pauli_expectation(psi, x, z);
            sum += (e * e).powf(alpha);
        }
    }
    Ok((sum / dim as f64).ln() / (1.0 - alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Otoc,
    Renyi2,
    OperatorEntanglement,
    StabilizerEntropy,
}

impl std::fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProbeKind::Otoc => "otoc",
            ProbeKind::Renyi2 => "renyi2",
            ProbeKind::OperatorEntanglement => "operator_entanglement",
            ProbeKind::StabilizerEntropy => "stabilizer_entropy",
        })
    }
}

impl FromStr for ProbeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "otoc" => Ok(ProbeKind::Otoc),
            "renyi2" => Ok(ProbeKind::Renyi2),
            "operator_entanglement" | "operator-entanglement" | "loe" => {
                Ok(ProbeKind::OperatorEntanglement)
            }
            "stabilizer_entropy" | "stabilizer-entropy" | "magic" => {
                Ok(ProbeKind::StabilizerEntropy)
            }
            other => Err(Error::InvalidParameter(format!("unknown probe {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeSpec {
    pub kind: ProbeKind,
    pub ensemble: EnsembleConfig,
    pub times: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

fn evolve_vector(es: &EigenSystem, t: f64, v: &CVector) -> CVector {
    let basis = es.eigenvectors().entries();
    let mut coeffs = basis.adjoint() * v;
    for (c, &e) in coeffs.iter_mut().zip(es.eigenvalues()) {
        *c *= Complex64::from_polar(1.0, -e * t);
    }
    basis * coeffs
}

fn probe_at_time(kind: ProbeKind, es: &EigenSystem, t: f64, qubits: usize) -> Result<f64> {
    let dim = es.dim();
    let dim_a = 1usize << (qubits / 2);
    match kind {
        ProbeKind::Otoc => {
            let u = crate::dynamics::evolution_unitary(es, t);
            let o1 = pauli_z(qubits, 0)?;
            let o2 = pauli_z(qubits, qubits - 1)?;
            otoc_value(&u, &o1, &o2)
        }
        ProbeKind::Renyi2 => {
            let mut v = CVector::zeros(dim);
            v[0] = Complex64::new(1.0, 0.0);
            let psi = evolve_vector(es, t, &v);
            let rho = &psi * psi.adjoint();
            renyi2_entropy(&partial_trace_r(&rho, dim_a, dim / dim_a))
        }
        ProbeKind::OperatorEntanglement => {
            let u = crate::dynamics::evolution_unitary(es, t);
            operator_entanglement(&u, dim_a)
        }
        ProbeKind::StabilizerEntropy => {
            let mut v = CVector::zeros(dim);
            v[0] = Complex64::new(1.0, 0.0);
            let psi = evolve_vector(es, t, &v);
            stabilizer_entropy(&psi, 2.0)
        }
    }
}

/// Ensemble-averaged probe curve with per-time standard errors.
pub fn probe_curve(spec: &ProbeSpec) -> Result<ProbeCurve> {
    let dim = spec.ensemble.dim();
    let qubits = log2_exact(dim).ok_or(Error::NotPowerOfTwo(dim))? as usize;
    if qubits < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if spec.samples == 0 || spec.times.is_empty() {
        return Err(Error::InsufficientData("need samples and times".into()));
    }
    let per_sample: Result<Vec<Vec<f64>>> = (0..spec.samples)
        .into_par_iter()
        .map(|s| {
            let member_seed: u64 = seed::stream(spec.seed, "probe-member", s as u64).random();
            let h = spec.ensemble.sample_with(member_seed)?;
            let es = diagonalize(&h)?;
            spec.times.iter().map(|&t| probe_at_time(spec.kind, &es, t, qubits)).collect()
        })
        .collect();
    let per_sample = per_sample?;
    let mut values = Vec::with_capacity(spec.times.len());
    let mut stderr = Vec::with_capacity(spec.times.len());
    for ti in 0..spec.times.len() {
        let column: Vec<f64> = per_sample.iter().map(|row| row[ti]).collect();
        let (m, s) = crate::stats::mean_stderr(&column);
        values.push(m);
        stderr.push(s);
    }
    Ok(ProbeCurve {
        probe: spec.kind.to_string(),
        ensemble: spec.ensemble.tag().to_string(),
        dim,
        times: spec.times.clone(),
        values,
        stderr,
    })
}

/// Same probe on two ensembles, with the mean absolute gap between the
/// curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeContrast {
    pub first: ProbeCurve,
    pub second: ProbeCurve,
    pub mean_abs_gap: f64,
}

pub fn probe_contrast(
    kind: ProbeKind,
    first: EnsembleConfig,
    second: EnsembleConfig,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ProbeContrast> {
    let a = probe_curve(&ProbeSpec {
        kind,
        ensemble: first,
        times: times.to_vec(),
        samples,
        seed,
    })?;
    let b = probe_curve(&ProbeSpec {
        kind,
        ensemble: second,
        times: times.to_vec(),
        samples,
        seed,
    })?;
    let gap = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / times.len() as f64;
    Ok(ProbeContrast { first: a, second: b, mean_abs_gap: gap })
}
