//! Adversary models, the analytic forging bound, and Monte Carlo
//! forging-probability estimates.

use crate::dynamics::{make_evolution, EvolutionOperator};
use crate::ensembles::{haar_from_rng, EnsembleConfig};
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CMatrix, CVector};
use crate::protocol::{run_protocol, HonestProver, ProtocolConfig, Responder, Scheme, SwapMode};
use crate::report::ExperimentReport;
use crate::seed;
use crate::state::{QuantumState, StateForm, SwapRule};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Which forging strategy the verifier faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarySpec {
    /// The honest prover; a control, not an attack.
    None,
    /// Fresh Haar-random pure guess per trial.
    RandomPure,
    /// Always answers with `I/D`.
    MaxMixed,
    /// Learned the QPUF action on a `q`-dimensional subspace.
    Subspace { queries: usize },
    /// Full oracle access; forges perfectly.
    Oracle,
}

impl std::fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdversarySpec::None => f.write_str("none"),
            AdversarySpec::RandomPure => f.write_str("random_pure"),
            AdversarySpec::MaxMixed => f.write_str("max_mixed"),
            AdversarySpec::Subspace { queries } => write!(f, "subspace:{queries}"),
            AdversarySpec::Oracle => f.write_str("oracle"),
        }
    }
}

impl FromStr for AdversarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AdversarySpec::None),
            "random_pure" | "random-pure" => Ok(AdversarySpec::RandomPure),
            "max_mixed" | "max-mixed" => Ok(AdversarySpec::MaxMixed),
            "oracle" => Ok(AdversarySpec::Oracle),
            other => {
                if let Some(q) = other.strip_prefix("subspace:") {
                    let queries = q.parse::<usize>().map_err(|_| {
                        Error::InvalidParameter(format!("bad subspace query count {q:?}"))
                    })?;
                    Ok(AdversarySpec::Subspace { queries })
                } else {
                    Err(Error::InvalidParameter(format!("unknown adversary {other:?}")))
                }
            }
        }
    }
}

impl AdversarySpec {
    pub fn queries(&self) -> Option<usize> {
        match self {
            AdversarySpec::Subspace { queries } => Some(*queries),
            _ => None,
        }
    }
}

/// Challenge/response pairs collected during the adversary's learning
/// phase, plus orthonormal bases for their spans.
#[derive(Debug, Clone)]
pub struct QueryDatabase {
    pub dim: usize,
    pub inputs: Vec<QuantumState>,
    pub outputs: Vec<QuantumState>,
    /// Orthonormal basis of the queried input span.
    pub basis_in: Vec<CVector>,
    /// Images of `basis_in` under the QPUF; orthonormal by unitarity.
    pub basis_out: Vec<CVector>,
}

/// Query the QPUF on `queries` Haar-random pure states and orthonormalize.
pub fn build_query_db(
    qpuf: &EvolutionOperator,
    queries: usize,
    root_seed: u64,
) -> Result<QueryDatabase> {
    let dim = qpuf.dim();
    if queries >= dim {
        return Err(Error::QueryBudget { queries, dim });
    }
    let mut inputs = Vec::with_capacity(queries);
    let mut outputs = Vec::with_capacity(queries);
    let mut basis_in: Vec<CVector> = Vec::with_capacity(queries);
    for k in 0..queries {
        let mut rng = seed::stream(root_seed, "query", k as u64);
        let u = haar_from_rng(dim, &mut rng);
        let psi = CVector::from_fn(dim, |i, _| u.entries()[(i, 0)]);
        let state = QuantumState::pure_normalized(psi.clone())?;
        outputs.push(qpuf.apply(&state)?);
        inputs.push(state);
        // Gram-Schmidt; Haar queries are independent almost surely.
        let mut residual = psi;
        for b in &basis_in {
            let c = b.dotc(&residual);
            residual -= b * c;
        }
        let norm = residual.norm();
        if norm < 1e-8 {
            return Err(Error::InvalidState("query states are linearly dependent".into()));
        }
        basis_in.push(residual / Complex64::new(norm, 0.0));
    }
    let u = qpuf.unitary();
    let basis_out = basis_in.iter().map(|b| u * b).collect();
    Ok(QueryDatabase { dim, inputs, outputs, basis_in, basis_out })
}

/// Haar-random unit vector in the orthogonal complement of `basis`.
pub fn complement_state<R: Rng + ?Sized>(
    basis: &[CVector],
    dim: usize,
    rng: &mut R,
) -> Result<CVector> {
    if basis.len() >= dim {
        return Err(Error::InvalidParameter("complement is empty".into()));
    }
    // Projected Gaussian; rotation invariance makes the result Haar on
    // the complement sphere.
    for _ in 0..16 {
        let mut v = CVector::from_fn(dim, |_, _| complex_gaussian(rng, 1.0));
        for b in basis {
            let c = b.dotc(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            return Ok(v / Complex64::new(norm, 0.0));
        }
    }
    Err(Error::InvalidState("failed to draw a complement state".into()))
}

/// Forges by mapping the known component through the learned action and
/// padding the rest with a random complement state.
pub struct SubspaceAdversary {
    dim: usize,
    basis_in: Vec<CVector>,
    basis_out: Vec<CVector>,
    rng: ChaCha12Rng,
}

impl SubspaceAdversary {
    pub fn new(db: QueryDatabase, root_seed: u64) -> Self {
        Self {
            dim: db.dim,
            basis_in: db.basis_in,
            basis_out: db.basis_out,
            rng: seed::stream(root_seed, "subspace-adversary", 0),
        }
    }

    pub fn queries(&self) -> usize {
        self.basis_in.len()
    }

    fn respond_to_vector(&mut self, psi: &CVector) -> Result<QuantumState> {
        let mut out = CVector::zeros(self.dim);
        let mut known_mass = 0.0_f64;
        for (b_in, b_out) in self.basis_in.iter().zip(&self.basis_out) {
            let c = b_in.dotc(psi);
            known_mass += c.norm_sqr();
            out += b_out * c;
        }
        let residual = (1.0 - known_mass).max(0.0).sqrt();
        if residual > 1e-8 {
            let pad = complement_state(&self.basis_out, self.dim, &mut self.rng)?;
            out += pad * Complex64::new(residual, 0.0);
        }
        QuantumState::pure_normalized(out)
    }
}

impl Responder for SubspaceAdversary {
    fn dim(&self) -> usize {
        self.dim
    }

    fn respond_selective(&mut self, challenge: &QuantumState) -> Result<QuantumState> {
        match challenge.form() {
            StateForm::Pure(v) => self.respond_to_vector(&v.clone()),
            StateForm::Density(_) => {
                Err(Error::InvalidState("subspace forging implemented for pure challenges".into()))
            }
        }
    }

    fn respond_mb(&mut self, outcome: usize) -> Result<QuantumState> {
        let mut e = CVector::zeros(self.dim);
        e[outcome] = Complex64::new(1.0, 0.0);
        self.respond_to_vector(&e)
    }
}

/// Ignores the challenge and answers with a fresh Haar pure state.
pub struct RandomPureResponder {
    dim: usize,
    rng: ChaCha12Rng,
}

impl RandomPureResponder {
    pub fn new(dim: usize, root_seed: u64) -> Self {
        Self { dim, rng: seed::stream(root_seed, "random-pure-adversary", 0) }
    }

    fn guess(&mut self) -> Result<QuantumState> {
        let u = haar_from_rng(self.dim, &mut self.rng);
        QuantumState::pure_normalized(CVector::from_fn(self.dim, |i, _| u.entries()[(i, 0)]))
    }
}

impl Responder for RandomPureResponder {
    fn dim(&self) -> usize {
        self.dim
    }
    fn respond_selective(&mut self, _challenge: &QuantumState) -> Result<QuantumState> {
        self.guess()
    }
    fn respond_mb(&mut self, _outcome: usize) -> Result<QuantumState> {
        self.guess()
    }
}

/// Always answers `I/D`.
pub struct MaxMixedResponder {
    dim: usize,
}

impl MaxMixedResponder {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Responder for MaxMixedResponder {
    fn dim(&self) -> usize {
        self.dim
    }
    fn respond_selective(&mut self, _challenge: &QuantumState) -> Result<QuantumState> {
        QuantumState::maximally_mixed(self.dim)
    }
    fn respond_mb(&mut self, _outcome: usize) -> Result<QuantumState> {
        QuantumState::maximally_mixed(self.dim)
    }
}

/// Build the responder for a spec; `None` and `Oracle` both get the real
/// device (an oracle adversary is indistinguishable from the prover).
pub fn make_responder<'a>(
    spec: AdversarySpec,
    qpuf: &'a EvolutionOperator,
    root_seed: u64,
) -> Result<Box<dyn Responder + 'a>> {
    Ok(match spec {
        AdversarySpec::None | AdversarySpec::Oracle => Box::new(HonestProver::new(qpuf)),
        AdversarySpec::RandomPure => Box::new(RandomPureResponder::new(qpuf.dim(), root_seed)),
        AdversarySpec::MaxMixed => Box::new(MaxMixedResponder::new(qpuf.dim())),
        AdversarySpec::Subspace { queries } => {
            let db = build_query_db(qpuf, queries, root_seed)?;
            Box::new(SubspaceAdversary::new(db, root_seed))
        }
    })
}

/// Analytic bound on the mean forging probability for a `q`-query
/// adversary facing `M` trials: per-trial Haar overlap at most
/// `2 D~ / (D~^2 - 1)` on the unlearned subspace of dimension
/// `D~ = D - q`, plus the `2^-M` guessing floor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForgingBound {
    pub effective_dim: usize,
    pub per_trial_overlap: f64,
    pub total: f64,
}

pub fn forging_bound(dim: usize, queries: usize, trials: usize) -> Result<ForgingBound> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if queries + 2 > dim {
        return Err(Error::QueryBudget { queries, dim });
    }
    let eff = dim - queries;
    let d = eff as f64;
    let per_trial_overlap = 2.0 * d / (d * d - 1.0);
    Ok(ForgingBound {
        effective_dim: eff,
        per_trial_overlap,
        total: 0.5_f64.powi(trials as i32) + per_trial_overlap,
    })
}

/// A Monte Carlo forging experiment: fresh QPUF instance and adversary
/// per run, exact acceptance probabilities, mean against the bound.
#[derive(Debug, Clone)]
pub struct ForgingExperiment {
    pub scheme: Scheme,
    pub ensemble: EnsembleConfig,
    pub adversary: AdversarySpec,
    pub trials: usize,
    pub rounds: usize,
    pub time: f64,
    pub swap_rule: SwapRule,
    pub mc_samples: usize,
    pub seed: u64,
}

impl ForgingExperiment {
    pub fn run(&self) -> Result<ExperimentReport> {
        if self.mc_samples == 0 {
            return Err(Error::InsufficientData("mc_samples must be >= 1".into()));
        }
        let dim = self.ensemble.dim();
        let samples: Result<Vec<f64>> = (0..self.mc_samples)
            .into_par_iter()
            .map(|run| {
                let mut run_rng = seed::stream(self.seed, "forge-run", run as u64);
                let member_seed: u64 = run_rng.random();
                let h = self.ensemble.sample_with(member_seed)?;
                let qpuf = make_evolution(&h, self.time)?;
                let mut responder =
                    make_responder(self.adversary, &qpuf, run_rng.random())?;
                let mut cfg =
                    ProtocolConfig::new(dim, self.trials, self.rounds, self.time, run_rng.random());
                cfg.swap_mode = SwapMode::Exact;
                cfg.swap_rule = self.swap_rule;
                let transcript = run_protocol(self.scheme, &qpuf, responder.as_mut(), &cfg)?;
                Ok(transcript.overall)
            })
            .collect();
        let samples = samples?;
        let (mean, stderr) = crate::stats::mean_stderr(&samples);
        let queries = self.adversary.queries();
        let bound = forging_bound(dim, queries.unwrap_or(0), self.trials * self.rounds)?;
        Ok(ExperimentReport {
            scheme: self.scheme.to_string(),
            ensemble: self.ensemble.tag().to_string(),
            adversary: self.adversary.to_string(),
            dim,
            q: queries,
            trials: self.trials * self.rounds,
            mc_samples: self.mc_samples,
            mean,
            stderr,
            bound: bound.total,
            pass: mean <= bound.total + 3.0 * stderr,
            seed: self.seed,
        })
    }
}

/// Haar average of `Tr[V Λ V† |k><k| V Λ† V† ρ]` in closed form, from
/// the fourth-moment pairings of the unitary group.
pub fn haar_fourth_moment_overlap(lambda: &CMatrix, rho: &CMatrix, k: usize) -> Result<f64> {
    let dim = lambda.nrows();
    if lambda.ncols() != dim || rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch { left: lambda.nrows(), right: rho.nrows() });
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if k >= dim {
        return Err(Error::InvalidParameter(format!("index {k} >= dim {dim}")));
    }
    let d = dim as f64;
    let trace_sq = lambda.trace().norm_sqr();
    let gram = (lambda * lambda.adjoint()).trace().re;
    let rho_kk = rho[(k, k)].re;
    let rho_trace = rho.trace().re;
    let value = (trace_sq * rho_kk + gram * rho_trace) / (d * d - 1.0)
        - (gram * rho_kk + trace_sq * rho_trace) / (d * (d * d - 1.0));
    Ok(value)
}

/// Monte Carlo estimate of the same average over Haar conjugations.
pub fn haar_fourth_moment_mc(
    lambda: &CMatrix,
    rho: &CMatrix,
    k: usize,
    samples: usize,
    root_seed: u64,
) -> Result<(f64, f64)> {
    let dim = lambda.nrows();
    if k >= dim {
        return Err(Error::InvalidParameter(format!("index {k} >= dim {dim}")));
    }
    if samples == 0 {
        return Err(Error::InsufficientData("samples must be >= 1".into()));
    }
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::stream(root_seed, "haar-moment", i as u64);
            let v = haar_from_rng(dim, &mut rng);
            let v = v.entries();
            // Tr[VΛV† |k><k| VΛ†V† ρ] = w† ρ w with w = VΛV†|k>.
            let mut e = CVector::zeros(dim);
            e[k] = Complex64::new(1.0, 0.0);
            let w = v * (lambda * (v.adjoint() * e));
            (w.adjoint() * rho * &w)[(0, 0)].re
        })
        .collect();
    Ok(crate::stats::mean_stderr(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_gue;
    use crate::linalg::identity;
    use crate::state::overlap;

    fn qpuf(dim: usize, seed: u64) -> EvolutionOperator {
        let h = sample_gue(dim, seed).unwrap();
        make_evolution(&h, 4.0).unwrap()
    }

    #[test]
    fn spec_round_trips_through_strings() {
        for spec in [
            AdversarySpec::None,
            AdversarySpec::RandomPure,
            AdversarySpec::MaxMixed,
            AdversarySpec::Subspace { queries: 5 },
            AdversarySpec::Oracle,
        ] {
            assert_eq!(spec.to_string().parse::<AdversarySpec>().unwrap(), spec);
        }
        assert!("subspace:x".parse::<AdversarySpec>().is_err());
        assert!("bogus".parse::<AdversarySpec>().is_err());
    }

    #[test]
    fn query_db_bases_are_orthonormal() {
        let u = qpuf(16, 1);
        let db = build_query_db(&u, 5, 42).unwrap();
        for (i, a) in db.basis_in.iter().enumerate() {
            for (j, b) in db.basis_in.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.dotc(b).norm() - expected).abs() < 1e-10);
            }
        }
        for (i, a) in db.basis_out.iter().enumerate() {
            for (j, b) in db.basis_out.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.dotc(b).norm() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn query_budget_enforced() {
        let u = qpuf(8, 2);
        assert!(build_query_db(&u, 8, 0).is_err());
        assert!(build_query_db(&u, 7, 0).is_ok());
    }

    #[test]
    fn subspace_adversary_is_perfect_on_learned_span() {
        let u = qpuf(16, 3);
        let db = build_query_db(&u, 6, 7).unwrap();
        let inputs = db.inputs.clone();
        let outputs = db.outputs.clone();
        let mut adv = SubspaceAdversary::new(db, 8);
        for (input, output) in inputs.iter().zip(&outputs) {
            let response = adv.respond_selective(input).unwrap();
            assert!((overlap(&response, output).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn complement_state_is_orthogonal_and_uniform() {
        let dim = 16;
        let u = qpuf(dim, 4);
        let db = build_query_db(&u, 4, 11).unwrap();
        let basis = db.basis_out.clone();
        let mut rng = seed::stream(5, "complement", 0);
        let phi = complement_state(&basis, dim, &mut rng).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-10);
        for b in &basis {
            assert!(b.dotc(&phi).norm() < 1e-10);
        }
        // Mean overlap with a fixed complement direction is 1/(D - q).
        let reference = complement_state(&basis, dim, &mut rng).unwrap();
        let overlaps: Vec<f64> = (0..4000)
            .map(|_| {
                let phi = complement_state(&basis, dim, &mut rng).unwrap();
                reference.dotc(&phi).norm_sqr()
            })
            .collect();
        let (mean, stderr) = crate::stats::mean_stderr(&overlaps);
        let target = 1.0 / (dim - 4) as f64;
        assert!((mean - target).abs() < 3.0 * stderr, "mean {mean} target {target}");
    }

    #[test]
    fn forging_bound_values() {
        let b = forging_bound(16, 0, 4).unwrap();
        assert_eq!(b.effective_dim, 16);
        assert!((b.per_trial_overlap - 32.0 / 255.0).abs() < 1e-12);
        assert!((b.total - (1.0 / 16.0 + 32.0 / 255.0)).abs() < 1e-12);
        let tight = forging_bound(8, 5, 2).unwrap();
        assert_eq!(tight.effective_dim, 3);
        assert!(forging_bound(8, 7, 2).is_err());
        assert!(forging_bound(8, 2, 0).is_err());
    }

    #[test]
    fn max_mixed_forging_sits_at_closed_form() {
        let exp = ForgingExperiment {
            scheme: Scheme::Selective,
            ensemble: EnsembleConfig::Gue { dim: 16 },
            adversary: AdversarySpec::MaxMixed,
            trials: 4,
            rounds: 1,
            time: 4.0,
            swap_rule: SwapRule::Physical,
            mc_samples: 20,
            seed: 99,
        };
        let report = exp.run().unwrap();
        let expected = 0.53125_f64.powi(4);
        assert!((report.mean - expected).abs() < 1e-10, "mean {}", report.mean);
        assert!(report.stderr < 1e-10);
        assert!(report.pass);
    }

    #[test]
    fn honest_control_saturates_acceptance() {
        let exp = ForgingExperiment {
            scheme: Scheme::Mb,
            ensemble: EnsembleConfig::Gue { dim: 8 },
            adversary: AdversarySpec::None,
            trials: 3,
            rounds: 1,
            time: 4.0,
            swap_rule: SwapRule::Physical,
            mc_samples: 10,
            seed: 5,
        };
        let report = exp.run().unwrap();
        assert!((report.mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn subspace_forging_respects_bound() {
        let exp = ForgingExperiment {
            scheme: Scheme::Mb,
            ensemble: EnsembleConfig::Gue { dim: 16 },
            adversary: AdversarySpec::Subspace { queries: 4 },
            trials: 4,
            rounds: 1,
            time: 4.0,
            swap_rule: SwapRule::Physical,
            mc_samples: 60,
            seed: 17,
        };
        let report = exp.run().unwrap();
        assert!(report.pass, "mean {} bound {}", report.mean, report.bound);
        assert!(report.mean < 1.0);
    }

    #[test]
    fn experiment_is_deterministic() {
        let exp = ForgingExperiment {
            scheme: Scheme::Selective,
            ensemble: EnsembleConfig::Gue { dim: 8 },
            adversary: AdversarySpec::RandomPure,
            trials: 2,
            rounds: 1,
            time: 4.0,
            swap_rule: SwapRule::Physical,
            mc_samples: 8,
            seed: 33,
        };
        let a = exp.run().unwrap();
        let b = exp.run().unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn fourth_moment_trivial_cases() {
        let dim = 6;
        let mut rho = CMatrix::zeros(dim, dim);
        // An arbitrary valid diagonal density.
        let weights = [0.3, 0.25, 0.2, 0.15, 0.07, 0.03];
        for (i, &w) in weights.iter().enumerate() {
            rho[(i, i)] = Complex64::new(w, 0.0);
        }
        let id = identity(dim);
        let exact = haar_fourth_moment_overlap(&id, &rho, 2).unwrap();
        assert!((exact - 0.2).abs() < 1e-12);

        let mut lambda = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            lambda[(i, i)] = Complex64::from_polar(1.0, 0.7 * i as f64);
        }
        let mixed = identity(dim) / Complex64::new(dim as f64, 0.0);
        let value = haar_fourth_moment_overlap(&lambda, &mixed, 0).unwrap();
        assert!((value - 1.0 / dim as f64).abs() < 1e-12);
    }

    #[test]
    fn fourth_moment_mc_agrees_with_closed_form() {
        let dim = 4;
        let mut lambda = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            lambda[(i, i)] = Complex64::from_polar(1.0, 1.3 * i as f64);
        }
        let e0 = QuantumState::basis_state(dim, 0).unwrap().density_matrix();
        let exact = haar_fourth_moment_overlap(&lambda, &e0, 1).unwrap();
        let (mean, stderr) = haar_fourth_moment_mc(&lambda, &e0, 1, 20_000, 7).unwrap();
        assert!((mean - exact).abs() < 3.0 * stderr, "mc {mean} exact {exact}");
    }
}
