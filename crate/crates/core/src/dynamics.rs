//! The QPUF unitary `U(t) = exp(-iHt)` built from a cached
//! eigendecomposition, and state application.

use crate::ensembles::{HermitianOperator, Provenance, UnitaryOperator};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::spectral::{diagonalize, EigenSystem};
use crate::state::{QuantumState, StateForm};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Time evolution under a fixed Hamiltonian. The eigensystem is computed
/// once; the dense unitary is materialized lazily on first use.
#[derive(Debug)]
pub struct EvolutionOperator {
    eigensystem: EigenSystem,
    time: f64,
    cached_unitary: OnceLock<CMatrix>,
}

impl EvolutionOperator {
    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eigensystem
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.eigensystem.dim()
    }

    /// `V diag(exp(-i E_p t)) V^dag`; idempotent under concurrent first
    /// access through the `OnceLock`.
    pub fn unitary(&self) -> &CMatrix {
        self.cached_unitary.get_or_init(|| evolution_unitary(&self.eigensystem, self.time))
    }

    pub fn unitary_operator(&self) -> Result<UnitaryOperator> {
        UnitaryOperator::new(self.unitary().clone(), Provenance::Evolution)
    }

    /// `U(t)|m>`, the response to a computational-basis challenge.
    pub fn evolve_basis_state(&self, m: usize) -> Result<QuantumState> {
        let dim = self.dim();
        if m >= dim {
            return Err(Error::InvalidParameter(format!("basis index {m} >= dim {dim}")));
        }
        let u = self.unitary();
        let column = CVector::from_fn(dim, |i, _| u[(i, m)]);
        QuantumState::pure_normalized(column)
    }

    /// Re-derive the evolution at a different time from the same
    /// eigensystem.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("time {t} must be >= 0")));
        }
        Ok(Self {
            eigensystem: self.eigensystem.clone(),
            time: t,
            cached_unitary: OnceLock::new(),
        })
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        apply_unitary(self.unitary(), state)
    }
}

/// Dense unitary `exp(-iHt)` from an eigensystem.
pub fn evolution_unitary(es: &EigenSystem, t: f64) -> CMatrix {
    let dim = es.dim();
    let v = es.eigenvectors().entries();
    let phases: Vec<Complex64> =
        es.eigenvalues().iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
    // V Λ(t) V^dag without forming the diagonal matrix.
    let mut scaled = v.clone();
    for j in 0..dim {
        for i in 0..dim {
            scaled[(i, j)] *= phases[j];
        }
    }
    scaled * v.adjoint()
}

pub fn make_evolution(h: &HermitianOperator, t: f64) -> Result<EvolutionOperator> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("time {t} must be >= 0")));
    }
    Ok(EvolutionOperator {
        eigensystem: diagonalize(h)?,
        time: t,
        cached_unitary: OnceLock::new(),
    })
}

/// Default processing time: late enough to sit on the SFF plateau for
/// the radius-2 GUE bandwidth.
pub fn default_time(dim: usize) -> f64 {
    10.0 * dim as f64
}

/// Apply a unitary matrix to a state: matrix-vector product for pure
/// states, conjugation for density operators.
pub fn apply_unitary(u: &CMatrix, state: &QuantumState) -> Result<QuantumState> {
    if u.nrows() != state.dim() {
        return Err(Error::DimensionMismatch { left: u.nrows(), right: state.dim() });
    }
    match state.form() {
        StateForm::Pure(v) => QuantumState::pure_normalized(u * v),
        StateForm::Density(m) => QuantumState::density(u * m * u.adjoint()),
    }
}

/// `(I ⊗ U)` on a bipartite pure state: the enrollment step that turns
/// `|Φ+>` into the Choi state of `U`.
pub fn apply_to_r_factor(u: &CMatrix, state: &QuantumState) -> Result<QuantumState> {
    let (dc, dr) = state
        .factorization()
        .ok_or_else(|| Error::InvalidState("need a factorized state".into()))?;
    if u.nrows() != dr {
        return Err(Error::DimensionMismatch { left: u.nrows(), right: dr });
    }
    let psi = state
        .as_pure()
        .ok_or_else(|| Error::InvalidState("local application implemented for pure states".into()))?;
    let mut out = CVector::zeros(dc * dr);
    for c in 0..dc {
        for r_out in 0..dr {
            let mut sum = Complex64::new(0.0, 0.0);
            for r_in in 0..dr {
                sum += u[(r_out, r_in)] * psi[c * dr + r_in];
            }
            out[c * dr + r_out] = sum;
        }
    }
    QuantumState::pure_normalized(out)?.with_factorization(dc, dr)
}
