//! The two authentication protocols as verifier state machines over a
//! pluggable responder (honest QPUF holder or adversary).

use crate::dynamics::{apply_to_r_factor, EvolutionOperator};
use crate::ensembles::haar_from_rng;
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::seed;
use crate::state::{
    max_entangled, measure_subsystem_c, swap_acceptance, swap_test_sampled, QuantumState,
    SwapRule,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Selective,
    Mb,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Selective => "selective",
            Scheme::Mb => "mb",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapMode {
    /// Report the analytic acceptance probability per trial.
    #[default]
    Exact,
    /// Draw one Bernoulli bit per trial.
    Sampled,
}

/// How MB challenges are generated: by measuring the stored entangled
/// pair, or by the statistically identical uniform shortcut.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChallengeMode {
    FullSimulation,
    #[default]
    Shortcut,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub dim: usize,
    /// Trials per round (M).
    pub trials: usize,
    /// Rounds (N).
    pub rounds: usize,
    /// Processing time of the QPUF device.
    pub time: f64,
    pub swap_mode: SwapMode,
    pub swap_rule: SwapRule,
    pub challenge_mode: ChallengeMode,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(dim: usize, trials: usize, rounds: usize, time: f64, seed: u64) -> Self {
        Self {
            dim,
            trials,
            rounds,
            time,
            swap_mode: SwapMode::Exact,
            swap_rule: SwapRule::Physical,
            challenge_mode: ChallengeMode::Shortcut,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if self.trials == 0 || self.rounds == 0 {
            return Err(Error::InvalidParameter("trials and rounds must be >= 1".into()));
        }
        if self.time < 0.0 {
            return Err(Error::InvalidParameter("time must be >= 0".into()));
        }
        Ok(())
    }

    pub fn total_trials(&self) -> usize {
        self.trials * self.rounds
    }
}

/// One enrollment record of the selective scheme: the verifier keeps two
/// challenge copies and the QPUF response.
#[derive(Debug, Clone)]
pub struct SelectiveRecord {
    pub challenge: QuantumState,
    pub stored_response: QuantumState,
    pub spare_challenge: QuantumState,
}

#[derive(Debug, Clone)]
pub enum CrpRecords {
    Selective(Vec<SelectiveRecord>),
    /// Choi states `(I ⊗ U)|Φ+>`.
    Mb(Vec<QuantumState>),
}

#[derive(Debug, Clone)]
pub struct CrpDatabase {
    pub scheme: Scheme,
    pub records: CrpRecords,
}

impl CrpDatabase {
    pub fn len(&self) -> usize {
        match &self.records {
            CrpRecords::Selective(r) => r.len(),
            CrpRecords::Mb(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Anything that can answer challenges: the honest prover or an
/// adversary model.
pub trait Responder {
    fn dim(&self) -> usize;

    /// Answer a selective-scheme challenge state.
    fn respond_selective(&mut self, challenge: &QuantumState) -> Result<QuantumState>;

    /// Answer an MB-scheme measurement outcome.
    fn respond_mb(&mut self, outcome: usize) -> Result<QuantumState>;
}

/// The honest prover holds the QPUF device and applies it.
pub struct HonestProver<'a> {
    qpuf: &'a EvolutionOperator,
}

impl<'a> HonestProver<'a> {
    pub fn new(qpuf: &'a EvolutionOperator) -> Self {
        Self { qpuf }
    }
}

impl Responder for HonestProver<'_> {
    fn dim(&self) -> usize {
        self.qpuf.dim()
    }

    fn respond_selective(&mut self, challenge: &QuantumState) -> Result<QuantumState> {
        self.qpuf.apply(challenge)
    }

    fn respond_mb(&mut self, outcome: usize) -> Result<QuantumState> {
        self.qpuf.evolve_basis_state(outcome)
    }
}

/// Enroll the selective scheme: `M * N` Haar challenges with their QPUF
/// responses and a spare challenge copy each.
pub fn enroll_selective(qpuf: &EvolutionOperator, cfg: &ProtocolConfig) -> Result<CrpDatabase> {
    cfg.validate()?;
    if qpuf.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { left: qpuf.dim(), right: cfg.dim });
    }
    let mut records = Vec::with_capacity(cfg.total_trials());
    for k in 0..cfg.total_trials() {
        let mut rng = seed::stream(cfg.seed, "enroll-selective", k as u64);
        let u_k = haar_from_rng(cfg.dim, &mut rng);
        let column = CVector::from_fn(cfg.dim, |i, _| u_k.entries()[(i, 0)]);
        let challenge = QuantumState::pure_normalized(column)?;
        let stored_response = qpuf.apply(&challenge)?;
        records.push(SelectiveRecord {
            spare_challenge: challenge.clone(),
            challenge,
            stored_response,
        });
    }
    Ok(CrpDatabase { scheme: Scheme::Selective, records: CrpRecords::Selective(records) })
}

/// Enroll the MB scheme: `M * N` stored Choi states `(I ⊗ U)|Φ+>`.
pub fn enroll_mb(qpuf: &EvolutionOperator, cfg: &ProtocolConfig) -> Result<CrpDatabase> {
    cfg.validate()?;
    if qpuf.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { left: qpuf.dim(), right: cfg.dim });
    }
    let budget = cfg.dim * cfg.dim;
    if budget > 1 << 20 {
        return Err(Error::ResourceLimit(format!(
            "Choi state dimension {budget} exceeds the memory budget"
        )));
    }
    let pair = max_entangled(cfg.dim)?;
    let choi = apply_to_r_factor(qpuf.unitary(), &pair)?;
    let records = vec![choi; cfg.total_trials()];
    Ok(CrpDatabase { scheme: Scheme::Mb, records: CrpRecords::Mb(records) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub challenge_id: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accepted: Option<bool>,
}

/// Fully reproducible protocol run record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub scheme: Scheme,
    pub dim: usize,
    #[serde(rename = "M")]
    pub trials_per_round: usize,
    #[serde(rename = "N")]
    pub rounds: usize,
    pub t: f64,
    pub swap_mode: SwapMode,
    pub trials: Vec<TrialRecord>,
    /// Product of per-trial acceptance probabilities (exact mode) or of
    /// the sampled bits.
    pub overall: f64,
    /// Accept iff all SWAP tests passed; only meaningful in sampled mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    pub seed: u64,
}

impl Transcript {
    fn new(scheme: Scheme, cfg: &ProtocolConfig) -> Self {
        Self {
            scheme,
            dim: cfg.dim,
            trials_per_round: cfg.trials,
            rounds: cfg.rounds,
            t: cfg.time,
            swap_mode: cfg.swap_mode,
            trials: Vec::with_capacity(cfg.total_trials()),
            overall: 1.0,
            verdict: None,
            seed: cfg.seed,
        }
    }

    fn record_trial(
        &mut self,
        cfg: &ProtocolConfig,
        index: usize,
        challenge_id: Option<usize>,
        outcome: Option<usize>,
        reference: &QuantumState,
        response: &QuantumState,
    ) -> Result<()> {
        match cfg.swap_mode {
            SwapMode::Exact => {
                let p = swap_acceptance(response, reference, cfg.swap_rule)?;
                self.overall *= p;
                self.trials.push(TrialRecord {
                    trial: index,
                    challenge_id,
                    outcome,
                    acceptance_prob: Some(p),
                    accepted: None,
                });
            }
            SwapMode::Sampled => {
                let mut rng = seed::stream(cfg.seed, "verify-swap", index as u64);
                let bit = swap_test_sampled(response, reference, cfg.swap_rule, &mut rng)?;
                self.overall *= if bit { 1.0 } else { 0.0 };
                self.verdict = Some(self.verdict.unwrap_or(true) && bit);
                self.trials.push(TrialRecord {
                    trial: index,
                    challenge_id,
                    outcome,
                    acceptance_prob: None,
                    accepted: Some(bit),
                });
            }
        }
        Ok(())
    }
}

/// Selective verification: send each spare challenge copy, SWAP the
/// response against the stored response.
pub fn verify_selective(
    db: &CrpDatabase,
    responder: &mut dyn Responder,
    cfg: &ProtocolConfig,
) -> Result<Transcript> {
    cfg.validate()?;
    let records = match &db.records {
        CrpRecords::Selective(r) => r,
        CrpRecords::Mb(_) => {
            return Err(Error::InvalidParameter("database is not a selective CRP database".into()))
        }
    };
    if responder.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { left: responder.dim(), right: cfg.dim });
    }
    let mut transcript = Transcript::new(Scheme::Selective, cfg);
    for (i, record) in records.iter().enumerate() {
        let response = responder.respond_selective(&record.spare_challenge)?;
        transcript.record_trial(cfg, i, Some(i), None, &record.stored_response, &response)?;
    }
    Ok(transcript)
}

/// MB verification: generate each challenge outcome `m_i` (by measuring
/// the stored pair, or by the uniform shortcut), send it to the
/// responder, and SWAP the response against `U|m_i>`.
pub fn verify_mb(
    db: &CrpDatabase,
    qpuf: &EvolutionOperator,
    responder: &mut dyn Responder,
    cfg: &ProtocolConfig,
) -> Result<Transcript> {
    cfg.validate()?;
    let records = match &db.records {
        CrpRecords::Mb(r) => r,
        CrpRecords::Selective(_) => {
            return Err(Error::InvalidParameter("database is not an MB CRP database".into()))
        }
    };
    if responder.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { left: responder.dim(), right: cfg.dim });
    }
    if records.len() != cfg.total_trials() {
        return Err(Error::InvalidParameter(format!(
            "database holds {} records, config wants {}",
            records.len(),
            cfg.total_trials()
        )));
    }
    let mut transcript = Transcript::new(Scheme::Mb, cfg);
    for (i, choi) in records.iter().enumerate() {
        let mut rng = seed::stream(cfg.seed, "mb-challenge", i as u64);
        let (m, reference) = match cfg.challenge_mode {
            ChallengeMode::FullSimulation => {
                let measurement = measure_subsystem_c(choi, &mut rng)?;
                (measurement.outcome, measurement.post_state)
            }
            ChallengeMode::Shortcut => {
                let m = rng.random_range(0..cfg.dim);
                (m, qpuf.evolve_basis_state(m)?)
            }
        };
        let response = responder.respond_mb(m)?;
        transcript.record_trial(cfg, i, None, Some(m), &reference, &response)?;
    }
    Ok(transcript)
}

/// Enrollment plus verification in one call.
pub fn run_protocol(
    scheme: Scheme,
    qpuf: &EvolutionOperator,
    responder: &mut dyn Responder,
    cfg: &ProtocolConfig,
) -> Result<Transcript> {
    match scheme {
        Scheme::Selective => {
            let db = enroll_selective(qpuf, cfg)?;
            verify_selective(&db, responder, cfg)
        }
        Scheme::Mb => {
            let db = enroll_mb(qpuf, cfg)?;
            verify_mb(&db, qpuf, responder, cfg)
        }
    }
}

/// Security parameter implied by a target forging probability:
/// `λ = -log2(p)`.
pub fn resource_estimate(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("probability {p} must lie in (0, 1)")));
    }
    Ok(-p.log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::make_evolution;
    use crate::ensembles::sample_gue;
    use crate::state::overlap;
    use num_complex::Complex64;

    fn qpuf(dim: usize, seed: u64) -> EvolutionOperator {
        let h = sample_gue(dim, seed).unwrap();
        make_evolution(&h, 4.0).unwrap()
    }

    struct MixedResponder {
        dim: usize,
    }

    impl Responder for MixedResponder {
        fn dim(&self) -> usize {
            self.dim
        }
        fn respond_selective(&mut self, _c: &QuantumState) -> Result<QuantumState> {
            QuantumState::maximally_mixed(self.dim)
        }
        fn respond_mb(&mut self, _m: usize) -> Result<QuantumState> {
            QuantumState::maximally_mixed(self.dim)
        }
    }

    #[test]
    fn enrollment_records_match_qpuf() {
        let u = qpuf(8, 1);
        let cfg = ProtocolConfig::new(8, 3, 1, 4.0, 10);
        let db = enroll_selective(&u, &cfg).unwrap();
        let CrpRecords::Selective(records) = &db.records else { unreachable!() };
        assert_eq!(records.len(), 3);
        for record in records {
            let expected = u.apply(&record.challenge).unwrap();
            assert!((overlap(&record.stored_response, &expected).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_challenges_have_mean_overlap_one_over_d() {
        // Pairwise overlaps of independent Haar challenge states average 1/D.
        let dim = 16;
        let u = qpuf(dim, 2);
        let mut overlaps = Vec::new();
        for run in 0..400 {
            let cfg = ProtocolConfig::new(dim, 2, 1, 4.0, 1000 + run);
            let db = enroll_selective(&u, &cfg).unwrap();
            let CrpRecords::Selective(records) = &db.records else { unreachable!() };
            overlaps.push(overlap(&records[0].challenge, &records[1].challenge).unwrap());
        }
        let (mean, stderr) = crate::stats::mean_stderr(&overlaps);
        assert!((mean - 1.0 / dim as f64).abs() < 3.0 * stderr, "mean {mean} stderr {stderr}");
    }

    #[test]
    fn mb_choi_marginals_are_maximally_mixed() {
        let u = qpuf(4, 3);
        let cfg = ProtocolConfig::new(4, 2, 1, 4.0, 5);
        let db = enroll_mb(&u, &cfg).unwrap();
        let CrpRecords::Mb(records) = &db.records else { unreachable!() };
        let target = crate::linalg::identity(4) / Complex64::new(4.0, 0.0);
        assert!((records[0].reduce_to_c().unwrap() - &target).norm() < 1e-10);
        assert!((records[0].reduce_to_r().unwrap() - &target).norm() < 1e-12 * 16.0);
    }

    #[test]
    fn mb_identity_qpuf_stores_phi_plus() {
        let h = crate::ensembles::HermitianOperator::new(
            crate::linalg::CMatrix::zeros(4, 4),
            crate::ensembles::EnsembleTag::Explicit,
            0,
        )
        .unwrap();
        let u = make_evolution(&h, 1.0).unwrap();
        let cfg = ProtocolConfig::new(4, 1, 1, 1.0, 0);
        let db = enroll_mb(&u, &cfg).unwrap();
        let CrpRecords::Mb(records) = &db.records else { unreachable!() };
        let phi = max_entangled(4).unwrap();
        assert!((overlap(&records[0], &phi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn honest_prover_always_authenticates() {
        for &dim in &[4, 16] {
            let u = qpuf(dim, 7);
            for scheme in [Scheme::Selective, Scheme::Mb] {
                let cfg = ProtocolConfig::new(dim, 4, 1, 4.0, 9);
                let mut prover = HonestProver::new(&u);
                let transcript = run_protocol(scheme, &u, &mut prover, &cfg).unwrap();
                assert!(
                    (transcript.overall - 1.0).abs() < 1e-9,
                    "{scheme} overall {}",
                    transcript.overall
                );
            }
        }
    }

    #[test]
    fn mixed_responder_closed_form() {
        let dim = 16;
        let u = qpuf(dim, 8);
        let cfg = ProtocolConfig::new(dim, 4, 1, 4.0, 11);
        let mut adversary = MixedResponder { dim };
        for scheme in [Scheme::Selective, Scheme::Mb] {
            let transcript = run_protocol(scheme, &u, &mut adversary, &cfg).unwrap();
            let expected = 0.53125_f64.powi(4);
            assert!(
                (transcript.overall - expected).abs() < 1e-10,
                "{scheme} overall {} vs {expected}",
                transcript.overall
            );
        }
    }

    #[test]
    fn orthogonal_mb_response_rejects_at_half() {
        let dim = 8;
        let u = qpuf(dim, 12);

        struct ShiftResponder<'a> {
            qpuf: &'a EvolutionOperator,
        }
        impl Responder for ShiftResponder<'_> {
            fn dim(&self) -> usize {
                self.qpuf.dim()
            }
            fn respond_selective(&mut self, c: &QuantumState) -> Result<QuantumState> {
                self.qpuf.apply(c)
            }
            fn respond_mb(&mut self, m: usize) -> Result<QuantumState> {
                self.qpuf.evolve_basis_state((m + 1) % self.dim())
            }
        }

        let cfg = ProtocolConfig::new(dim, 1, 1, 4.0, 13);
        let mut adversary = ShiftResponder { qpuf: &u };
        let transcript = run_protocol(Scheme::Mb, &u, &mut adversary, &cfg).unwrap();
        assert!((transcript.overall - 0.5).abs() < 1e-10);
    }

    #[test]
    fn exact_overall_is_product_of_trials() {
        let dim = 8;
        let u = qpuf(dim, 14);
        let cfg = ProtocolConfig::new(dim, 5, 2, 4.0, 15);
        let mut adversary = MixedResponder { dim };
        let transcript = run_protocol(Scheme::Mb, &u, &mut adversary, &cfg).unwrap();
        assert_eq!(transcript.trials.len(), 10);
        let product: f64 = transcript.trials.iter().map(|t| t.acceptance_prob.unwrap()).product();
        assert!((transcript.overall - product).abs() < 1e-12);
    }

    #[test]
    fn transcripts_are_reproducible() {
        let dim = 8;
        let u = qpuf(dim, 16);
        let mut cfg = ProtocolConfig::new(dim, 3, 1, 4.0, 17);
        cfg.swap_mode = SwapMode::Sampled;
        let mut a1 = MixedResponder { dim };
        let mut a2 = MixedResponder { dim };
        let t1 = run_protocol(Scheme::Mb, &u, &mut a1, &cfg).unwrap();
        let t2 = run_protocol(Scheme::Mb, &u, &mut a2, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&t1).unwrap(),
            serde_json::to_string(&t2).unwrap()
        );
    }

    #[test]
    fn resource_estimate_values() {
        assert_eq!(resource_estimate(1.0 / 1024.0).unwrap(), 10.0);
        assert_eq!(resource_estimate(0.5).unwrap(), 1.0);
        assert!((resource_estimate(0.001).unwrap() - 9.965784).abs() < 1e-6);
        assert!(resource_estimate(0.0).is_err());
        assert!(resource_estimate(1.0).is_err());
    }
}
