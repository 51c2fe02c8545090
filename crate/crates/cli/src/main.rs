//! Command-line driver. Every artifact embeds the generating
//! configuration and root seed, and reruns are byte-identical for any
//! thread count.

use clap::{Args, Parser, Subcommand};
use qpuf_core::adversary::{
    haar_fourth_moment_mc, haar_fourth_moment_overlap, make_responder, AdversarySpec,
    ForgingExperiment,
};
use qpuf_core::dynamics::{default_time, make_evolution};
use qpuf_core::ensembles::{
    default_design_depth, EnsembleConfig, MatrixJson, PseudoChaoticSpec, SykSpec, VarianceRule,
};
use qpuf_core::probes::{probe_contrast, probe_curve, ProbeKind, ProbeSpec};
use qpuf_core::protocol::{
    resource_estimate, run_protocol, ChallengeMode, ProtocolConfig, Scheme, SwapMode,
};
use qpuf_core::report::StatisticReport;
use qpuf_core::spectral::{
    density_distance, diagonalize, pooled_unfolded_spacings, repulsion_fraction,
    spacing_ks_distance_values, spectral_form_factor, two_point_correlation_check, TwoPointCell,
};
use qpuf_core::state::SwapRule;
use qpuf_core::{seed, Error, Result};
use rand::Rng;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "qpuf", version, about = "Chaotic-Hamiltonian authentication simulator")]
struct Cli {
    /// Worker thread count; output bytes do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Exit 1 when the run's pass criteria are not met.
    #[arg(long, global = true)]
    gate: bool,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one Hamiltonian and emit it as JSON.
    Gen(GenArgs),
    /// Eigenvalue density, level-spacing, and pair-correlation checks.
    Spectral(SpectralArgs),
    /// Ensemble-averaged spectral form factor as CSV.
    Sff(SffArgs),
    /// Run an authentication protocol or a forging experiment.
    Protocol(ProtocolArgs),
    /// Forging probability vs security parameter, one CSV row per lambda.
    AdversarySweep(SweepArgs),
    /// Chaos probe curve as CSV.
    Probes(ProbesArgs),
    /// Same probe on two ensembles, with the gap between the curves.
    Contrast(ContrastArgs),
    /// Monte Carlo check of the Haar fourth-moment closed form.
    WeingartenCheck(WeingartenArgs),
    /// Security parameter implied by a forging probability.
    Resource(ResourceArgs),
}

#[derive(Args, Clone)]
struct EnsembleArgs {
    /// gue | syk | pseudo_chaotic
    #[arg(long, default_value = "gue")]
    ensemble: String,

    /// Hilbert dimension (gue, pseudo_chaotic).
    #[arg(long)]
    dim: Option<usize>,

    /// Qubit count; dim = 2^qubits.
    #[arg(long)]
    qubits: Option<usize>,

    /// Fermionic mode count (syk); dim = 2^modes.
    #[arg(long)]
    modes: Option<usize>,

    /// SYK coupling scale J.
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,

    /// SYK chemical potential.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,

    /// SYK coupling variance rule: modes_cubed | qudit_cubed.
    #[arg(long, default_value = "modes_cubed")]
    variance_rule: String,

    /// Distinct eigenvalue count (pseudo_chaotic).
    #[arg(long)]
    distinct: Option<usize>,

    /// Brickwork circuit depth (pseudo_chaotic); default 4 qubits.
    #[arg(long)]
    depth: Option<usize>,
}

impl EnsembleArgs {
    fn dim(&self) -> Result<usize> {
        match (self.dim, self.qubits) {
            (Some(d), None) => Ok(d),
            (None, Some(n)) => Ok(1usize << n),
            (None, None) => Err(Error::InvalidParameter("pass --dim or --qubits".into())),
            (Some(_), Some(_)) => {
                Err(Error::InvalidParameter("--dim and --qubits are exclusive".into()))
            }
        }
    }

    fn config(&self) -> Result<EnsembleConfig> {
        match self.ensemble.as_str() {
            "gue" => Ok(EnsembleConfig::Gue { dim: self.dim()? }),
            "syk" => {
                let modes = self
                    .modes
                    .ok_or_else(|| Error::InvalidParameter("syk needs --modes".into()))?;
                let mut spec = SykSpec::new(modes, self.mu, self.coupling, 0);
                spec.variance_rule = match self.variance_rule.as_str() {
                    "modes_cubed" => VarianceRule::ModesCubed,
                    "qudit_cubed" => VarianceRule::QuditCubed,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown variance rule {other:?}"
                        )))
                    }
                };
                Ok(EnsembleConfig::Syk(spec))
            }
            "pseudo_chaotic" | "pseudo-chaotic" => {
                let dim = self.dim()?;
                let qubits = dim.trailing_zeros() as usize;
                let distinct = self.distinct.ok_or_else(|| {
                    Error::InvalidParameter("pseudo_chaotic needs --distinct".into())
                })?;
                Ok(EnsembleConfig::PseudoChaotic(PseudoChaoticSpec {
                    dim,
                    distinct_eigenvalues: distinct,
                    design_depth: self.depth.unwrap_or_else(|| default_design_depth(qubits)),
                    seed: 0,
                }))
            }
            other => Err(Error::InvalidParameter(format!("unknown ensemble {other:?}"))),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SpectralArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Central spectrum fraction kept for spacing statistics.
    #[arg(long, default_value_t = 0.8)]
    bulk: f64,
    #[arg(long, default_value_t = 0.05)]
    tv_tol: f64,
    #[arg(long, default_value_t = 0.08)]
    ks_tol: f64,
    /// Maximum admissible fraction of unfolded spacings below 0.1.
    #[arg(long, default_value_t = 0.02)]
    repulsion_tol: f64,
    /// Also estimate the near-coincident pair-correlation cells.
    #[arg(long)]
    two_point: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SffArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 60.0)]
    t_max: f64,
    #[arg(long, default_value_t = 121)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ProtocolArgs {
    /// selective | mb
    scheme: String,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// SWAP trials per round (M).
    #[arg(long, default_value_t = 4)]
    trials: usize,
    /// Rounds (N).
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    /// QPUF processing time; default 10 * dim.
    #[arg(long)]
    time: Option<f64>,
    #[arg(long, default_value = "none")]
    adversary: String,
    /// Monte Carlo repetitions; 1 emits a single transcript.
    #[arg(long, default_value_t = 1)]
    mc_samples: usize,
    /// Sample Bernoulli SWAP outcomes instead of exact probabilities.
    #[arg(long)]
    sampled: bool,
    /// physical | squared_trace
    #[arg(long, default_value = "physical")]
    swap_rule: String,
    /// MB challenge generation: shortcut | full_simulation
    #[arg(long, default_value = "shortcut")]
    challenge_mode: String,
    /// Exact-mode gate threshold on the overall acceptance.
    #[arg(long, default_value_t = 0.99)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// Inclusive range "a:b"; dim = 2^lambda per point.
    #[arg(long)]
    lambda_range: String,
    /// Fixed spec, or "subspace" for q = lambda.
    #[arg(long, default_value = "subspace")]
    adversary: String,
    /// selective | mb
    #[arg(long, default_value = "mb")]
    scheme: String,
    #[arg(long, default_value_t = 4)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    #[arg(long)]
    time: Option<f64>,
    #[arg(long, default_value_t = 300)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ProbesArgs {
    /// otoc | renyi2 | operator_entanglement | stabilizer_entropy
    #[arg(long)]
    probe: String,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 40.0)]
    t_max: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ContrastArgs {
    #[arg(long)]
    probe: String,
    /// Shared Hilbert dimension (power of two).
    #[arg(long)]
    dim: usize,
    /// Distinct eigenvalues of the pseudo-chaotic comparator.
    #[arg(long, default_value_t = 2)]
    distinct: usize,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 40.0)]
    t_max: f64,
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Minimum mean absolute gap required to pass the gate.
    #[arg(long, default_value_t = 0.0)]
    min_gap: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct WeingartenArgs {
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Processing time defining the eigenphase diagonal.
    #[arg(long, default_value_t = 1.0)]
    time: f64,
    /// Challenge basis index.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ResourceArgs {
    /// Target forging probability in (0, 1).
    #[arg(long)]
    probability: Option<f64>,
    /// Inclusive range "a:b" of security parameters to tabulate.
    #[arg(long)]
    lambda_range: Option<String>,
    /// Probability grid "lo:hi:points" tabulated on a log scale.
    #[arg(long)]
    grid: Option<String>,
}

fn parse_range(text: &str) -> Result<(u32, u32)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| Error::InvalidParameter(format!("range {text:?} is not \"a:b\"")))?;
    let lo: u32 = a
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad range start {a:?}")))?;
    let hi: u32 = b
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad range end {b:?}")))?;
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty range {text:?}")));
    }
    Ok((lo, hi))
}

fn parse_scheme(text: &str) -> Result<Scheme> {
    match text {
        "selective" => Ok(Scheme::Selective),
        "mb" => Ok(Scheme::Mb),
        other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
    }
}

fn parse_swap_rule(text: &str) -> Result<SwapRule> {
    match text {
        "physical" => Ok(SwapRule::Physical),
        "squared_trace" | "squared-trace" => Ok(SwapRule::SquaredTrace),
        other => Err(Error::InvalidParameter(format!("unknown swap rule {other:?}"))),
    }
}

fn parse_challenge_mode(text: &str) -> Result<ChallengeMode> {
    match text {
        "shortcut" => Ok(ChallengeMode::Shortcut),
        "full_simulation" | "full-simulation" | "full" => Ok(ChallengeMode::FullSimulation),
        other => Err(Error::InvalidParameter(format!("unknown challenge mode {other:?}"))),
    }
}

fn time_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || t_max <= 0.0 {
        return Err(Error::InvalidParameter("need points >= 2 and t_max > 0".into()));
    }
    Ok((0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn json_artifact(config: serde_json::Value, seed: u64, result: serde_json::Value) -> String {
    let doc = json!({ "config": config, "seed": seed, "result": result });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}

fn csv_artifact(config: serde_json::Value, body: &str) -> String {
    format!("# {}\n{body}", serde_json::to_string(&config).expect("serializable"))
}

fn run_gen(args: &GenArgs, out: &Option<PathBuf>) -> Result<bool> {
    let config = args.ensemble.config()?;
    let h = config.sample_with(args.seed)?;
    let artifact = json_artifact(
        serde_json::to_value(&config)?,
        args.seed,
        serde_json::to_value(MatrixJson::from_hermitian(&h))?,
    );
    emit(out, &artifact)?;
    Ok(true)
}

fn run_spectral(args: &SpectralArgs, out: &Option<PathBuf>) -> Result<bool> {
    let config = args.ensemble.config()?;
    use rayon::prelude::*;
    let systems: Result<Vec<_>> = (0..args.samples)
        .into_par_iter()
        .map(|i| {
            let member: u64 = seed::stream(args.seed, "spectral-member", i as u64).random();
            diagonalize(&config.sample_with(member)?)
        })
        .collect();
    let systems = systems?;
    let tv = density_distance(&systems, args.bins)?;
    let spacings = pooled_unfolded_spacings(&systems, args.bulk)?;
    let ks = spacing_ks_distance_values(&spacings)?;
    let repulsion = repulsion_fraction(&spacings, 0.1);

    let reports = vec![
        StatisticReport::upper("density_tv_distance", tv, args.tv_tol),
        StatisticReport::upper("spacing_ks_distance", ks, args.ks_tol),
        StatisticReport::upper("repulsion_fraction_below_0.1", repulsion, args.repulsion_tol),
    ];
    let two_point = if args.two_point {
        let dim = config.dim() as f64;
        // One near-coincident cell (width about a mean spacing) and one
        // wide-separation control cell.
        let near = std::f64::consts::PI / dim;
        let cells = [
            TwoPointCell { e_p: 0.0, e_q: 0.0, width: near },
            TwoPointCell { e_p: 0.5, e_q: -0.5, width: 0.2 },
        ];
        Some(two_point_correlation_check(&systems, &cells)?)
    } else {
        None
    };
    let pass = reports.iter().all(|r| r.pass);
    let artifact = json_artifact(
        json!({
            "ensemble": serde_json::to_value(&config)?,
            "samples": args.samples,
            "bins": args.bins,
            "bulk": args.bulk,
        }),
        args.seed,
        json!({
            "checks": reports,
            "two_point": two_point,
            "pass": pass,
        }),
    );
    emit(out, &artifact)?;
    Ok(pass)
}

fn run_sff(args: &SffArgs, out: &Option<PathBuf>) -> Result<bool> {
    let config = args.ensemble.config()?;
    let times = time_grid(args.t_max, args.points)?;
    let curve = spectral_form_factor(&config, &times, args.samples, args.seed)?;
    let artifact = csv_artifact(
        json!({
            "ensemble": serde_json::to_value(&config)?,
            "samples": args.samples,
            "t_max": args.t_max,
            "points": args.points,
            "seed": args.seed,
        }),
        &curve.to_csv(),
    );
    emit(out, &artifact)?;
    Ok(true)
}

fn run_protocol_cmd(args: &ProtocolArgs, out: &Option<PathBuf>) -> Result<bool> {
    let scheme = parse_scheme(&args.scheme)?;
    let config = args.ensemble.config()?;
    let dim = config.dim();
    let time = args.time.unwrap_or_else(|| default_time(dim));
    let adversary = AdversarySpec::from_str(&args.adversary)?;
    let swap_rule = parse_swap_rule(&args.swap_rule)?;

    if args.mc_samples > 1 {
        let experiment = ForgingExperiment {
            scheme,
            ensemble: config.clone(),
            adversary,
            trials: args.trials,
            rounds: args.rounds,
            time,
            swap_rule,
            mc_samples: args.mc_samples,
            seed: args.seed,
        };
        let report = experiment.run()?;
        let pass = report.pass;
        let artifact = json_artifact(
            json!({
                "ensemble": serde_json::to_value(&config)?,
                "scheme": scheme,
                "adversary": adversary,
                "trials": args.trials,
                "rounds": args.rounds,
                "time": time,
                "mc_samples": args.mc_samples,
            }),
            args.seed,
            serde_json::to_value(&report)?,
        );
        emit(out, &artifact)?;
        return Ok(pass);
    }

    let h = config.sample_with(args.seed)?;
    let qpuf = make_evolution(&h, time)?;
    let mut responder = make_responder(adversary, &qpuf, args.seed)?;
    let mut cfg = ProtocolConfig::new(dim, args.trials, args.rounds, time, args.seed);
    cfg.swap_mode = if args.sampled { SwapMode::Sampled } else { SwapMode::Exact };
    cfg.swap_rule = swap_rule;
    cfg.challenge_mode = parse_challenge_mode(&args.challenge_mode)?;
    let transcript = run_protocol(scheme, &qpuf, responder.as_mut(), &cfg)?;
    let pass = match cfg.swap_mode {
        SwapMode::Sampled => transcript.verdict.unwrap_or(false),
        SwapMode::Exact => transcript.overall >= args.threshold,
    };
    let artifact = json_artifact(
        json!({
            "ensemble": serde_json::to_value(&config)?,
            "scheme": scheme,
            "adversary": adversary,
            "protocol": serde_json::to_value(&cfg)?,
        }),
        args.seed,
        serde_json::to_value(&transcript)?,
    );
    emit(out, &artifact)?;
    Ok(pass)
}

fn run_sweep(args: &SweepArgs, out: &Option<PathBuf>) -> Result<bool> {
    let (lo, hi) = parse_range(&args.lambda_range)?;
    let scheme = parse_scheme(&args.scheme)?;
    let mut body = String::from("lambda,dim,q,mean,stderr,bound,pass\n");
    let mut all_pass = true;
    for lambda in lo..=hi {
        let dim = 1usize << lambda;
        let adversary = if args.adversary == "subspace" {
            AdversarySpec::Subspace { queries: lambda as usize }
        } else {
            AdversarySpec::from_str(&args.adversary)?
        };
        let experiment = ForgingExperiment {
            scheme,
            ensemble: EnsembleConfig::Gue { dim },
            adversary,
            trials: args.trials,
            rounds: args.rounds,
            time: args.time.unwrap_or_else(|| default_time(dim)),
            swap_rule: SwapRule::Physical,
            mc_samples: args.mc_samples,
            seed: seed::stream(args.seed, "sweep-lambda", lambda as u64).random(),
        };
        let report = experiment.run()?;
        all_pass &= report.pass;
        body.push_str(&format!(
            "{lambda},{dim},{},{},{},{},{}\n",
            adversary.queries().map_or(String::from(""), |q| q.to_string()),
            report.mean,
            report.stderr,
            report.bound,
            report.pass,
        ));
    }
    let artifact = csv_artifact(
        json!({
            "lambda_range": args.lambda_range,
            "adversary": args.adversary,
            "scheme": args.scheme,
            "trials": args.trials,
            "rounds": args.rounds,
            "mc_samples": args.mc_samples,
            "seed": args.seed,
        }),
        &body,
    );
    emit(out, &artifact)?;
    Ok(all_pass)
}

fn run_probes(args: &ProbesArgs, out: &Option<PathBuf>) -> Result<bool> {
    let kind = ProbeKind::from_str(&args.probe)?;
    let config = args.ensemble.config()?;
    let spec = ProbeSpec {
        kind,
        ensemble: config.clone(),
        times: time_grid(args.t_max, args.points)?,
        samples: args.samples,
        seed: args.seed,
    };
    let curve = probe_curve(&spec)?;
    let artifact = csv_artifact(
        json!({
            "probe": kind,
            "ensemble": serde_json::to_value(&config)?,
            "samples": args.samples,
            "t_max": args.t_max,
            "points": args.points,
            "seed": args.seed,
        }),
        &curve.to_csv(),
    );
    emit(out, &artifact)?;
    Ok(true)
}

fn run_contrast(args: &ContrastArgs, out: &Option<PathBuf>) -> Result<bool> {
    let kind = ProbeKind::from_str(&args.probe)?;
    if !args.dim.is_power_of_two() || args.dim < 4 {
        return Err(Error::InvalidParameter(format!(
            "contrast needs a power-of-two dim >= 4, got {}",
            args.dim
        )));
    }
    let qubits = args.dim.trailing_zeros() as usize;
    let first = EnsembleConfig::Gue { dim: args.dim };
    let second = EnsembleConfig::PseudoChaotic(PseudoChaoticSpec {
        dim: args.dim,
        distinct_eigenvalues: args.distinct,
        design_depth: args.depth.unwrap_or_else(|| default_design_depth(qubits)),
        seed: 0,
    });
    let times = time_grid(args.t_max, args.points)?;
    let contrast = probe_contrast(kind, first.clone(), second.clone(), &times, args.samples, args.seed)?;
    let pass = contrast.mean_abs_gap >= args.min_gap;
    let artifact = json_artifact(
        json!({
            "probe": kind,
            "first": serde_json::to_value(&first)?,
            "second": serde_json::to_value(&second)?,
            "samples": args.samples,
            "t_max": args.t_max,
            "points": args.points,
            "min_gap": args.min_gap,
        }),
        args.seed,
        serde_json::to_value(&contrast)?,
    );
    emit(out, &artifact)?;
    Ok(pass)
}

fn run_weingarten(args: &WeingartenArgs, out: &Option<PathBuf>) -> Result<bool> {
    use num_complex::Complex64;
    use qpuf_core::linalg::{identity, CMatrix};

    let dim = args.dim;
    if args.index >= dim {
        return Err(Error::InvalidParameter(format!("index {} >= dim {dim}", args.index)));
    }
    // Eigenphase diagonal of a GUE evolution at the requested time.
    let h = EnsembleConfig::Gue { dim }.sample_with(args.seed)?;
    let es = diagonalize(&h)?;
    let lambda = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -es.eigenvalues()[i] * args.time)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let rho = qpuf_core::state::QuantumState::basis_state(dim, args.index)?.density_matrix();

    let exact = haar_fourth_moment_overlap(&lambda, &rho, args.index)?;
    let (mc_mean, mc_stderr) = haar_fourth_moment_mc(&lambda, &rho, args.index, args.samples, args.seed)?;
    let deviation = (mc_mean - exact).abs();
    let within = deviation <= 3.0 * mc_stderr;

    // Degenerate inputs where the average is forced exactly.
    let identity_residual =
        (haar_fourth_moment_overlap(&identity(dim), &rho, args.index)? - rho[(args.index, args.index)].re).abs();
    let mixed = identity(dim) / Complex64::new(dim as f64, 0.0);
    let mixed_residual =
        (haar_fourth_moment_overlap(&lambda, &mixed, args.index)? - 1.0 / dim as f64).abs();
    let trivial_ok = identity_residual < 1e-12 && mixed_residual < 1e-12;

    let pass = within && trivial_ok;
    let artifact = json_artifact(
        json!({
            "dim": dim,
            "samples": args.samples,
            "time": args.time,
            "index": args.index,
        }),
        args.seed,
        json!({
            "closed_form": exact,
            "mc_mean": mc_mean,
            "mc_stderr": mc_stderr,
            "deviation": deviation,
            "within_three_stderr": within,
            "identity_residual": identity_residual,
            "mixed_residual": mixed_residual,
            "pass": pass,
        }),
    );
    emit(out, &artifact)?;
    Ok(pass)
}

fn run_resource(args: &ResourceArgs, out: &Option<PathBuf>) -> Result<bool> {
    match (&args.probability, &args.lambda_range, &args.grid) {
        (Some(p), None, None) => {
            let lambda = resource_estimate(*p)?;
            let artifact = json_artifact(
                json!({ "probability": p }),
                0,
                json!({ "lambda": lambda }),
            );
            emit(out, &artifact)?;
            Ok(true)
        }
        (None, Some(range), None) => {
            let (lo, hi) = parse_range(range)?;
            let mut body = String::from("lambda,probability,recovered_lambda\n");
            for lambda in lo..=hi {
                let p = 0.5f64.powi(lambda as i32);
                body.push_str(&format!("{lambda},{p},{}\n", resource_estimate(p)?));
            }
            let artifact = csv_artifact(json!({ "lambda_range": range }), &body);
            emit(out, &artifact)?;
            Ok(true)
        }
        (None, None, Some(grid)) => {
            let parts: Vec<&str> = grid.split(':').collect();
            let [lo, hi, points] = parts.as_slice() else {
                return Err(Error::InvalidParameter(format!(
                    "grid {grid:?} is not \"lo:hi:points\""
                )));
            };
            let lo: f64 = lo
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad grid start {lo:?}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad grid end {hi:?}")))?;
            let points: usize = points
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad grid size {points:?}")))?;
            if !(0.0 < lo && lo < hi && hi < 1.0) || points < 2 {
                return Err(Error::InvalidParameter(format!("unusable grid {grid:?}")));
            }
            let mut body = String::from("probability,lambda\n");
            for i in 0..points {
                let f = i as f64 / (points - 1) as f64;
                let p = (lo.ln() + f * (hi.ln() - lo.ln())).exp();
                body.push_str(&format!("{p},{}\n", resource_estimate(p)?));
            }
            let artifact = csv_artifact(json!({ "grid": grid }), &body);
            emit(out, &artifact)?;
            Ok(true)
        }
        _ => Err(Error::InvalidParameter(
            "pass exactly one of --probability, --lambda-range, or --grid".into(),
        )),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Gen(args) => run_gen(args, &cli.out),
        Command::Spectral(args) => run_spectral(args, &cli.out),
        Command::Sff(args) => run_sff(args, &cli.out),
        Command::Protocol(args) => run_protocol_cmd(args, &cli.out),
        Command::AdversarySweep(args) => run_sweep(args, &cli.out),
        Command::Probes(args) => run_probes(args, &cli.out),
        Command::Contrast(args) => run_contrast(args, &cli.out),
        Command::WeingartenCheck(args) => run_weingarten(args, &cli.out),
        Command::Resource(args) => run_resource(args, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            if cli.gate {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
