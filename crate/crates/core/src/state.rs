//! State representations, entangled-pair preparation, subsystem
//! measurement, overlap computation, and the SWAP test.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

const NORM_TOL: f64 = 1e-10;
const NEGATIVITY_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone)]
pub enum StateForm {
    Pure(CVector),
    Density(CMatrix),
}

/// A pure state vector or density operator, optionally carrying a
/// bipartite factorization `(dim_C, dim_R)` with `dim_C * dim_R = D`.
/// Basis convention for bipartite states: index `c * dim_R + r`.
#[derive(Debug, Clone)]
pub struct QuantumState {
    form: StateForm,
    factorization: Option<(usize, usize)>,
}

impl QuantumState {
    pub fn pure(vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("pure state norm {norm} is not 1")));
        }
        Ok(Self { form: StateForm::Pure(vector), factorization: None })
    }

    /// Normalize and wrap; for states produced by long conjugation chains.
    pub fn pure_normalized(mut vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        vector /= Complex64::new(norm, 0.0);
        Self::pure(vector)
    }

    pub fn density(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::InvalidDimension(dim));
        }
        let dev = crate::linalg::hermiticity_deviation(&matrix);
        if dev > NORM_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("density trace {trace} is not 1")));
        }
        let eigen = nalgebra::SymmetricEigen::new(matrix.clone());
        let min = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < NEGATIVITY_FLOOR {
            return Err(Error::InvalidState(format!("density minimum eigenvalue {min}")));
        }
        Ok(Self { form: StateForm::Density(matrix), factorization: None })
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= dim {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Self::pure(v)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension(dim));
        }
        let rho = CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0);
        Self::density(rho)
    }

    pub fn with_factorization(mut self, dim_c: usize, dim_r: usize) -> Result<Self> {
        if dim_c * dim_r != self.dim() {
            return Err(Error::DimensionMismatch { left: dim_c * dim_r, right: self.dim() });
        }
        self.factorization = Some((dim_c, dim_r));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match &self.form {
            StateForm::Pure(v) => v.len(),
            StateForm::Density(m) => m.nrows(),
        }
    }

    pub fn form(&self) -> &StateForm {
        &self.form
    }

    pub fn factorization(&self) -> Option<(usize, usize)> {
        self.factorization
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.form, StateForm::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&CVector> {
        match &self.form {
            StateForm::Pure(v) => Some(v),
            StateForm::Density(_) => None,
        }
    }

    /// Density-operator view (outer product for pure states).
    pub fn density_matrix(&self) -> CMatrix {
        match &self.form {
            StateForm::Pure(v) => v * v.adjoint(),
            StateForm::Density(m) => m.clone(),
        }
    }

    /// Reduced state on the C factor (traces out R).
    pub fn reduce_to_c(&self) -> Result<CMatrix> {
        let (dc, dr) = self
            .factorization
            .ok_or_else(|| Error::InvalidState("state has no factorization".into()))?;
        Ok(partial_trace_r(&self.density_matrix(), dc, dr))
    }

    /// Reduced state on the R factor (traces out C).
    pub fn reduce_to_r(&self) -> Result<CMatrix> {
        let (dc, dr) = self
            .factorization
            .ok_or_else(|| Error::InvalidState("state has no factorization".into()))?;
        Ok(partial_trace_c(&self.density_matrix(), dc, dr))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateJson::from_state(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: StateJson = serde_json::from_str(text)?;
        raw.into_state()
    }
}

/// Trace out the second (R) factor of a density matrix on `C ⊗ R`.
pub fn partial_trace_r(rho: &CMatrix, dim_c: usize, dim_r: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim_c, dim_c);
    for c1 in 0..dim_c {
        for c2 in 0..dim_c {
            let mut sum = Complex64::new(0.0, 0.0);
            for r in 0..dim_r {
                sum += rho[(c1 * dim_r + r, c2 * dim_r + r)];
            }
            out[(c1, c2)] = sum;
        }
    }
    out
}

/// Trace out the first (C) factor of a density matrix on `C ⊗ R`.
pub fn partial_trace_c(rho: &CMatrix, dim_c: usize, dim_r: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim_r, dim_r);
    for r1 in 0..dim_r {
        for r2 in 0..dim_r {
            let mut sum = Complex64::new(0.0, 0.0);
            for c in 0..dim_c {
                sum += rho[(c * dim_r + r1, c * dim_r + r2)];
            }
            out[(r1, r2)] = sum;
        }
    }
    out
}

/// Maximally entangled pair `(1/sqrt(D)) sum_i |i>_C |i>_R` on `D^2`
/// dimensions, with factorization `(D, D)`.
pub fn max_entangled(dim: usize) -> Result<QuantumState> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(dim * dim);
    for i in 0..dim {
        v[i * dim + i] = amp;
    }
    QuantumState::pure(v)?.with_factorization(dim, dim)
}

/// Result of a computational-basis measurement of the C factor.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub outcome: usize,
    pub post_state: QuantumState,
    pub probability: f64,
}

/// Measure the C factor of a bipartite pure state in the computational
/// basis; returns the sampled outcome and the collapsed R-factor state.
pub fn measure_subsystem_c<R: Rng + ?Sized>(
    state: &QuantumState,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    let (dc, dr) = state
        .factorization
        .ok_or_else(|| Error::InvalidState("measurement needs a factorized state".into()))?;
    let psi = state
        .as_pure()
        .ok_or_else(|| Error::InvalidState("subsystem measurement implemented for pure states".into()))?;
    let mut probabilities = vec![0.0_f64; dc];
    for c in 0..dc {
        for r in 0..dr {
            probabilities[c] += psi[c * dr + r].norm_sqr();
        }
    }
    let draw: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut outcome = dc - 1;
    for (c, &p) in probabilities.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            outcome = c;
            break;
        }
    }
    let p = probabilities[outcome];
    if p <= 0.0 {
        return Err(Error::InvalidState(format!("outcome {outcome} has zero probability")));
    }
    let scale = Complex64::new(1.0 / p.sqrt(), 0.0);
    let residual = CVector::from_fn(dr, |r, _| psi[outcome * dr + r] * scale);
    Ok(MeasurementOutcome {
        outcome,
        post_state: QuantumState::pure_normalized(residual)?,
        probability: p,
    })
}

/// `Tr(ρ_a ρ_b)`, specialized to `|<a|b>|^2` when both states are pure.
pub fn overlap(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let value = match (&a.form, &b.form) {
        // Identical vectors overlap exactly; the honest prover recomputes
        // the verifier's reference state bit for bit.
        (StateForm::Pure(va), StateForm::Pure(vb)) if va == vb => 1.0,
        (StateForm::Pure(va), StateForm::Pure(vb)) => va.dotc(vb).norm_sqr(),
        (StateForm::Pure(v), StateForm::Density(m)) | (StateForm::Density(m), StateForm::Pure(v)) => {
            (v.adjoint() * m * v)[(0, 0)].re
        }
        (StateForm::Density(ma), StateForm::Density(mb)) => (ma * mb).trace().re,
    };
    Ok(value.clamp(0.0, 1.0 + NORM_TOL).min(1.0))
}

/// Which acceptance rule the SWAP test uses for mixed adversary guesses.
/// `Physical` is the circuit rule `1/2 + Tr(ρσ)/2`; `SquaredTrace`
/// squares the trace term instead.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapRule {
    #[default]
    Physical,
    SquaredTrace,
}

/// Exact SWAP-test acceptance probability.
pub fn swap_acceptance(a: &QuantumState, b: &QuantumState, rule: SwapRule) -> Result<f64> {
    let t = overlap(a, b)?;
    let term = match rule {
        SwapRule::Physical => t,
        SwapRule::SquaredTrace => t * t,
    };
    Ok(0.5 + 0.5 * term)
}

/// One Bernoulli draw of the SWAP test.
pub fn swap_test_sampled<R: Rng + ?Sized>(
    a: &QuantumState,
    b: &QuantumState,
    rule: SwapRule,
    rng: &mut R,
) -> Result<bool> {
    let p = swap_acceptance(a, b, rule)?;
    Ok(rng.random::<f64>() < p)
}

/// Serialized form: `{dim, form, factorization?, data}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub form: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization: Option<(usize, usize)>,
    pub data: Vec<[f64; 2]>,
}

impl StateJson {
    pub fn from_state(state: &QuantumState) -> Self {
        let (form, data) = match &state.form {
            StateForm::Pure(v) => {
                ("pure".to_string(), v.iter().map(|z| [z.re, z.im]).collect())
            }
            StateForm::Density(m) => {
                let d = m.nrows();
                let mut data = Vec::with_capacity(d * d);
                for i in 0..d {
                    for j in 0..d {
                        data.push([m[(i, j)].re, m[(i, j)].im]);
                    }
                }
                ("density".to_string(), data)
            }
        };
        Self { dim: state.dim(), form, factorization: state.factorization, data }
    }

    pub fn into_state(self) -> Result<QuantumState> {
        let mut state = match self.form.as_str() {
            "pure" => {
                if self.data.len() != self.dim {
                    return Err(Error::InvalidState("pure data length mismatch".into()));
                }
                let v = CVector::from_fn(self.dim, |i, _| {
                    Complex64::new(self.data[i][0], self.data[i][1])
                });
                QuantumState::pure(v)?
            }
            "density" => {
                if self.data.len() != self.dim * self.dim {
                    return Err(Error::InvalidState("density data length mismatch".into()));
                }
                let m = CMatrix::from_fn(self.dim, self.dim, |i, j| {
                    let [re, im] = self.data[i * self.dim + j];
                    Complex64::new(re, im)
                });
                QuantumState::density(m)?
            }
            other => return Err(Error::InvalidState(format!("unknown state form {other:?}"))),
        };
        if let Some((dc, dr)) = self.factorization {
            state = state.with_factorization(dc, dr)?;
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_haar_unitary;
    use crate::seed;

    #[test]
    fn max_entangled_qubit_pair() {
        let phi = max_entangled(2).unwrap();
        let v = phi.as_pure().unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((v[0].re - s).abs() < 1e-12);
        assert!(v[1].norm() < 1e-12);
        assert!(v[2].norm() < 1e-12);
        assert!((v[3].re - s).abs() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_entangled_reduced_states_are_mixed() {
        let phi = max_entangled(4).unwrap();
        let target = CMatrix::identity(4, 4) / Complex64::new(4.0, 0.0);
        assert!((phi.reduce_to_c().unwrap() - &target).norm() < 1e-12);
        assert!((phi.reduce_to_r().unwrap() - &target).norm() < 1e-12);
    }

    #[test]
    fn product_state_measurement_is_deterministic() {
        let dim = 8;
        let mut v = CVector::zeros(dim * dim);
        // |3>_C ⊗ |5>_R
        v[3 * dim + 5] = Complex64::new(1.0, 0.0);
        let state = QuantumState::pure(v).unwrap().with_factorization(dim, dim).unwrap();
        let mut rng = seed::stream(0, "measure", 0);
        let outcome = measure_subsystem_c(&state, &mut rng).unwrap();
        assert_eq!(outcome.outcome, 3);
        assert!((outcome.probability - 1.0).abs() < 1e-12);
        let expected = QuantumState::basis_state(dim, 5).unwrap();
        assert!((overlap(&outcome.post_state, &expected).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn choi_measurement_collapses_to_u_column() {
        let dim = 4;
        let u = sample_haar_unitary(dim, 77).unwrap();
        let choi = apply_local_r(&max_entangled(dim).unwrap(), u.entries());
        let mut rng = seed::stream(1, "measure", 0);
        let outcome = measure_subsystem_c(&choi, &mut rng).unwrap();
        let column = CVector::from_fn(dim, |i, _| u.entries()[(i, outcome.outcome)]);
        let reference = QuantumState::pure_normalized(column).unwrap();
        assert!((overlap(&outcome.post_state, &reference).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn choi_outcomes_are_uniform() {
        let dim = 8;
        let u = sample_haar_unitary(dim, 5).unwrap();
        let choi = apply_local_r(&max_entangled(dim).unwrap(), u.entries());
        let mut rng = seed::stream(2, "measure-hist", 0);
        let mut counts = vec![0u64; dim];
        for _ in 0..10_000 {
            counts[measure_subsystem_c(&choi, &mut rng).unwrap().outcome] += 1;
        }
        let test = crate::stats::chi_squared_uniformity(&counts, 0.01).unwrap();
        assert!(test.pass, "chi2 {} critical {}", test.statistic, test.critical);
    }

    // (I ⊗ U) applied to a bipartite pure state.
    fn apply_local_r(state: &QuantumState, u: &CMatrix) -> QuantumState {
        let (dc, dr) = state.factorization().unwrap();
        let psi = state.as_pure().unwrap();
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
        QuantumState::pure_normalized(out).unwrap().with_factorization(dc, dr).unwrap()
    }

    #[test]
    fn overlap_special_cases() {
        let a = QuantumState::basis_state(16, 0).unwrap();
        let b = QuantumState::basis_state(16, 1).unwrap();
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
        assert_eq!(overlap(&a, &b).unwrap(), 0.0);
        let mixed = QuantumState::maximally_mixed(16).unwrap();
        assert!((overlap(&mixed, &a).unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn swap_acceptance_values() {
        let a = QuantumState::basis_state(16, 0).unwrap();
        let b = QuantumState::basis_state(16, 1).unwrap();
        let mixed = QuantumState::maximally_mixed(16).unwrap();
        assert_eq!(swap_acceptance(&a, &a, SwapRule::Physical).unwrap(), 1.0);
        assert_eq!(swap_acceptance(&a, &b, SwapRule::Physical).unwrap(), 0.5);
        let p = swap_acceptance(&mixed, &a, SwapRule::Physical).unwrap();
        assert!((p - 0.53125).abs() < 1e-12);
    }

    #[test]
    fn swap_sampled_matches_exact_rate() {
        let a = QuantumState::basis_state(16, 0).unwrap();
        let mixed = QuantumState::maximally_mixed(16).unwrap();
        let p = swap_acceptance(&mixed, &a, SwapRule::Physical).unwrap();
        let mut rng = seed::stream(3, "swap", 0);
        let n = 100_000;
        let accepted = (0..n)
            .filter(|_| swap_test_sampled(&mixed, &a, SwapRule::Physical, &mut rng).unwrap())
            .count();
        let rate = accepted as f64 / n as f64;
        let stderr = (p * (1.0 - p) / n as f64).sqrt();
        assert!((rate - p).abs() < 3.0 * stderr, "rate {rate} vs {p}");
    }

    #[test]
    fn state_json_round_trip() {
        let phi = max_entangled(4).unwrap();
        let back = QuantumState::from_json(&phi.to_json()).unwrap();
        assert_eq!(back.factorization(), Some((4, 4)));
        assert!((overlap(&phi, &back).unwrap() - 1.0).abs() < 1e-12);
    }
}
