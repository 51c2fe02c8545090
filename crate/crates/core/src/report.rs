//! Serializable result records shared by the library and the CLI.

use serde::{Deserialize, Serialize};

/// Outcome of a Monte Carlo forging experiment against an analytic
/// bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scheme: String,
    pub ensemble: String,
    pub adversary: String,
    pub dim: usize,
    /// Query budget of the adversary, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(rename = "M")]
    pub trials: usize,
    pub mc_samples: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Analytic upper bound on the mean forging probability.
    pub bound: f64,
    pub pass: bool,
    pub seed: u64,
}

/// A single named check: value against tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatisticReport {
    pub statistic: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl StatisticReport {
    /// Pass when the value is at most the tolerance.
    pub fn upper(statistic: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { statistic: statistic.into(), value, tolerance, pass: value <= tolerance }
    }

    /// Pass when the value is within tolerance of a target.
    pub fn near(statistic: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            statistic: statistic.into(),
            value,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }
}

/// CSV rows for a probe curve: `t,value_mean,value_stderr,probe,ensemble,dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeCurve {
    pub probe: String,
    pub ensemble: String,
    pub dim: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl ProbeCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value_mean,value_stderr,probe,ensemble,dim\n");
        for ((&t, &v), &s) in self.times.iter().zip(&self.values).zip(&self.stderr) {
            out.push_str(&format!(
                "{t},{v},{s},{},{},{}\n",
                self.probe, self.ensemble, self.dim
            ));
        }
        out
    }
}
