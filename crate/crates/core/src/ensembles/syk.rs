//! Sachdev-Ye-Kitaev Hamiltonian with complex fermions.
//!
//! `H = -mu * sum_i c_i^dag c_i + Q + Q^dag` with
//! `Q = sum_{i>j, k>l} J_{ijkl} c_i^dag c_j^dag c_k c_l` and independent
//! complex Gaussian couplings. The fermion operators come from the
//! standard chain mapping `c_i = (prod_{j<i} Z_j) (X_i + i Y_i)/2`.

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CMatrix, C_ZERO};
use crate::seed;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EnsembleTag, HermitianOperator};

/// Largest supported mode count (Hilbert dimension `2^10`).
pub const MAX_SYK_MODES: usize = 10;

/// Which denominator goes into the coupling variance `J^2 / (2 d^3)`.
///
/// The printed formula uses the qudit dimension (2 for fermionic modes);
/// the per-mode reading keeps the spectral bandwidth independent of the
/// mode count and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceRule {
    QuditCubed,
    ModesCubed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SykSpec {
    pub modes: usize,
    pub chemical_potential: f64,
    pub coupling_scale: f64,
    pub variance_rule: VarianceRule,
    pub seed: u64,
}

impl SykSpec {
    pub fn new(modes: usize, chemical_potential: f64, coupling_scale: f64, seed: u64) -> Self {
        Self {
            modes,
            chemical_potential,
            coupling_scale,
            variance_rule: VarianceRule::ModesCubed,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 4 {
            return Err(Error::InvalidParameter(format!(
                "SYK needs at least 4 modes for a nonzero quartic term, got {}",
                self.modes
            )));
        }
        if self.modes > MAX_SYK_MODES {
            return Err(Error::ResourceLimit(format!(
                "{} modes exceeds the maximum of {MAX_SYK_MODES}",
                self.modes
            )));
        }
        if self.coupling_scale < 0.0 {
            return Err(Error::InvalidParameter("coupling scale must be >= 0".into()));
        }
        Ok(())
    }

    pub fn coupling_variance(&self) -> f64 {
        let j2 = self.coupling_scale * self.coupling_scale;
        match self.variance_rule {
            VarianceRule::QuditCubed => j2 / (2.0 * 8.0),
            VarianceRule::ModesCubed => j2 / (2.0 * (self.modes as f64).powi(3)),
        }
    }
}

/// Annihilation operators `c_0 .. c_{n-1}` as dense `2^n` matrices.
pub fn syk_annihilators(modes: usize) -> Vec<CMatrix> {
    let dim = 1usize << modes;
    let mut ops = Vec::with_capacity(modes);
    for i in 0..modes {
        let mut c = CMatrix::zeros(dim, dim);
        // c_i maps |b> with bit i set to (-1)^{parity of bits < i} |b without bit i>.
        // Bit j of the basis index corresponds to mode j, with mode 0 as
        // the most significant bit of the index.
        let bit = |b: usize, j: usize| (b >> (modes - 1 - j)) & 1;
        for b in 0..dim {
            if bit(b, i) == 1 {
                let parity: usize = (0..i).map(|j| bit(b, j)).sum();
                let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
                let target = b & !(1 << (modes - 1 - i));
                c[(target, b)] = Complex64::new(sign, 0.0);
            }
        }
        ops.push(c);
    }
    ops
}

pub fn sample_syk(spec: &SykSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    let n = spec.modes;
    let dim = spec.dim();
    let c = syk_annihilators(n);
    let cdag: Vec<CMatrix> = c.iter().map(CMatrix::adjoint).collect();

    let mut h = CMatrix::zeros(dim, dim);
    if spec.chemical_potential != 0.0 {
        let mu = Complex64::new(spec.chemical_potential, 0.0);
        for i in 0..n {
            h -= (&cdag[i] * &c[i]) * mu;
        }
    }

    let variance = spec.coupling_variance();
    if spec.coupling_scale > 0.0 {
        let mut rng = seed::stream(spec.seed, "syk", 0);
        let mut quartic = CMatrix::zeros(dim, dim);
        for i in 1..n {
            for j in 0..i {
                for k in 1..n {
                    for l in 0..k {
                        let coupling = complex_gaussian(&mut rng, variance);
                        if coupling == C_ZERO {
                            continue;
                        }
                        quartic += (&cdag[i] * &cdag[j] * &c[k] * &c[l]) * coupling;
                    }
                }
            }
        }
        // Hermitize by adding the conjugate transpose of the quartic sum.
        h += &quartic + quartic.adjoint();
    }

    HermitianOperator::new(h, EnsembleTag::Syk, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermiticity_deviation;
    use crate::spectral::diagonalize;

    fn number_operator(modes: usize) -> CMatrix {
        let c = syk_annihilators(modes);
        let dim = 1usize << modes;
        let mut n_op = CMatrix::zeros(dim, dim);
        for ci in &c {
            n_op += ci.adjoint() * ci;
        }
        n_op
    }

    #[test]
    fn anticommutation_relations_hold() {
        let modes = 4;
        let c = syk_annihilators(modes);
        let dim = 1usize << modes;
        let id = crate::linalg::identity(dim);
        for i in 0..modes {
            for j in 0..modes {
                let anti = &c[i] * c[j].adjoint() + c[j].adjoint() * &c[i];
                let expected = if i == j { id.clone() } else { CMatrix::zeros(dim, dim) };
                assert!((anti - expected).norm() < 1e-12, "{{c_{i}, c_{j}^dag}}");
                let anti_cc = &c[i] * &c[j] + &c[j] * &c[i];
                assert!(anti_cc.norm() < 1e-12, "{{c_{i}, c_{j}}}");
            }
        }
    }

    #[test]
    fn syk_is_hermitian() {
        let spec = SykSpec::new(4, 0.0, 1.0, 7);
        let h = sample_syk(&spec).unwrap();
        assert!(hermiticity_deviation(h.entries()) < 1e-12);
    }

    #[test]
    fn zero_coupling_gives_number_operator_spectrum() {
        let spec = SykSpec::new(4, 1.0, 0.0, 0);
        let h = sample_syk(&spec).unwrap();
        let es = diagonalize(&h).unwrap();
        // H = -N: eigenvalues {0,-1,-2,-3,-4} with multiplicities {1,4,6,4,1}.
        let mut counts = [0usize; 5];
        for &e in es.eigenvalues() {
            let level = (-e).round() as usize;
            assert!((e + level as f64).abs() < 1e-10, "eigenvalue {e}");
            counts[level] += 1;
        }
        assert_eq!(counts, [1, 4, 6, 4, 1]);
    }

    #[test]
    fn quartic_term_conserves_particle_number() {
        let spec = SykSpec::new(5, 0.0, 1.0, 3);
        let h = sample_syk(&spec).unwrap();
        let n_op = number_operator(5);
        let commutator = h.entries() * &n_op - &n_op * h.entries();
        assert!(commutator.norm() < 1e-10, "commutator norm {}", commutator.norm());
    }

    #[test]
    fn mode_bounds_are_enforced() {
        assert!(sample_syk(&SykSpec::new(3, 0.0, 1.0, 0)).is_err());
        assert!(matches!(
            sample_syk(&SykSpec::new(11, 0.0, 1.0, 0)),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn variance_rules_differ() {
        let mut spec = SykSpec::new(4, 0.0, 1.0, 0);
        assert!((spec.coupling_variance() - 1.0 / 128.0).abs() < 1e-15);
        spec.variance_rule = VarianceRule::QuditCubed;
        assert!((spec.coupling_variance() - 1.0 / 16.0).abs() < 1e-15);
    }
}
