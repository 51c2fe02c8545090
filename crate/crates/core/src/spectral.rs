//! Spectral diagnostics: eigendecomposition, semicircle density,
//! level-spacing statistics, the spectral form factor, and the
//! two-point correlation check.

use crate::ensembles::{EnsembleConfig, HermitianOperator, Provenance, UnitaryOperator};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_deviation, CMatrix};
use crate::seed;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Eigenvalues sorted ascending plus the aligned eigenvector unitary.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    dim: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: UnitaryOperator,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &UnitaryOperator {
        &self.eigenvectors
    }

    /// `V diag(E) V^dag`.
    pub fn recompose(&self) -> CMatrix {
        let v = self.eigenvectors.entries();
        let lambda = CMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j {
                Complex64::new(self.eigenvalues[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        v * lambda * v.adjoint()
    }
}

/// Full Hermitian eigendecomposition with ascending eigenvalue order.
pub fn diagonalize(h: &HermitianOperator) -> Result<EigenSystem> {
    let deviation = hermiticity_deviation(h.entries());
    if deviation > crate::ensembles::HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let dim = h.dim();
    let decomp = nalgebra::SymmetricEigen::new(h.entries().clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(dim, dim, |i, j| decomp.eigenvectors[(i, order[j])]);
    let eigenvectors = UnitaryOperator::new(vectors, Provenance::Explicit)?;
    Ok(EigenSystem { dim, eigenvalues, eigenvectors })
}

/// Radius-2 Wigner semicircle density, zero outside `[-2, 2]`.
pub fn semicircle_pdf(e: f64) -> f64 {
    if e.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - e * e).sqrt() / (2.0 * PI)
    }
}

/// Integrated semicircle density `F(E) = ∫_{-2}^{E} ρ`.
pub fn semicircle_cdf(e: f64) -> f64 {
    if e <= -2.0 {
        0.0
    } else if e >= 2.0 {
        1.0
    } else {
        0.5 + e * (4.0 - e * e).sqrt() / (4.0 * PI) + (e / 2.0).asin() / PI
    }
}

/// Composite Simpson quadrature, used as the independent oracle for the
/// analytic CDFs in this module.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, subintervals: usize) -> f64 {
    let n = subintervals.max(2) & !1; // even
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        sum += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Total-variation distance between the pooled empirical eigenvalue
/// histogram and the binned semicircle density over `[-2.2, 2.2]`.
/// Mass outside the range counts fully against the distance.
pub fn density_distance_values(values: &[f64], bins: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData("no eigenvalues for density distance".into()));
    }
    if bins < 10 {
        return Err(Error::InvalidParameter("need at least 10 bins".into()));
    }
    let (lo, hi) = (-2.2, 2.2);
    let width = (hi - lo) / bins as f64;
    let total = values.len() as f64;
    let mut counts = vec![0u64; bins];
    let mut outside = 0u64;
    for &v in values {
        if v < lo || v >= hi {
            outside += 1;
        } else {
            let bin = (((v - lo) / width) as usize).min(bins - 1);
            counts[bin] += 1;
        }
    }
    let mut distance = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let a = lo + i as f64 * width;
        let mass = simpson(semicircle_pdf, a, a + width, 64);
        distance += ((c as f64 / total) - mass).abs();
    }
    distance += outside as f64 / total;
    Ok(distance / 2.0)
}

pub fn density_distance(eigensystems: &[EigenSystem], bins: usize) -> Result<f64> {
    if eigensystems.is_empty() {
        return Err(Error::InsufficientData("no eigensystems".into()));
    }
    let pooled: Vec<f64> =
        eigensystems.iter().flat_map(|es| es.eigenvalues().iter().copied()).collect();
    density_distance_values(&pooled, bins)
}

/// Raw and unfolded consecutive level spacings.
#[derive(Debug, Clone)]
pub struct SpacingRecord {
    pub raw_spacings: Vec<f64>,
    pub unfolded_spacings: Vec<f64>,
    pub bulk_fraction: f64,
}

/// Unfold a spectrum through the analytic integrated semicircle density
/// `N(E) = D * F(E)`, keep the central `bulk_fraction` of levels, and
/// rescale the consecutive differences to unit mean.
pub fn unfold_spacings(es: &EigenSystem, bulk_fraction: f64) -> Result<SpacingRecord> {
    if es.dim() < 16 {
        return Err(Error::InvalidDimension(es.dim()));
    }
    if !(bulk_fraction > 0.0 && bulk_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("bulk fraction {bulk_fraction} not in (0, 1]")));
    }
    let raw_spacings: Vec<f64> =
        es.eigenvalues().windows(2).map(|w| w[1] - w[0]).collect();
    let unfolded = unfold_bulk(es, bulk_fraction);
    if unfolded.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "only {} spacings left after bulk truncation",
            unfolded.len()
        )));
    }
    let mean = unfolded.iter().sum::<f64>() / unfolded.len() as f64;
    let unfolded_spacings = unfolded.iter().map(|s| s / mean).collect();
    Ok(SpacingRecord { raw_spacings, unfolded_spacings, bulk_fraction })
}

fn unfold_bulk(es: &EigenSystem, bulk_fraction: f64) -> Vec<f64> {
    let d = es.dim();
    let drop = ((1.0 - bulk_fraction) / 2.0 * d as f64).round() as usize;
    let kept = &es.eigenvalues()[drop..d - drop];
    let mapped: Vec<f64> = kept.iter().map(|&e| d as f64 * semicircle_cdf(e)).collect();
    mapped.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Pool unfolded spacings from several eigensystems, normalized to unit
/// mean over the pooled collection.
pub fn pooled_unfolded_spacings(
    eigensystems: &[EigenSystem],
    bulk_fraction: f64,
) -> Result<Vec<f64>> {
    let mut pooled = Vec::new();
    for es in eigensystems {
        pooled.extend(unfold_bulk(es, bulk_fraction));
    }
    if pooled.len() < 8 {
        return Err(Error::InsufficientData("too few pooled spacings".into()));
    }
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    Ok(pooled.into_iter().map(|s| s / mean).collect())
}

/// Fraction of unfolded spacings below `threshold` (level repulsion
/// diagnostic; default threshold 0.1).
pub fn repulsion_fraction(unfolded: &[f64], threshold: f64) -> f64 {
    if unfolded.is_empty() {
        return f64::NAN;
    }
    unfolded.iter().filter(|&&s| s < threshold).count() as f64 / unfolded.len() as f64
}

/// Wigner surmise density `P(s) = (π/2) s exp(-π s^2 / 4)`.
pub fn wigner_surmise_pdf(s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::InvalidParameter(format!("spacing {s} must be >= 0")));
    }
    Ok(PI / 2.0 * s * (-PI * s * s / 4.0).exp())
}

/// Wigner surmise CDF `F(s) = 1 - exp(-π s^2 / 4)`.
pub fn wigner_surmise_cdf(s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::InvalidParameter(format!("spacing {s} must be >= 0")));
    }
    Ok(1.0 - (-PI * s * s / 4.0).exp())
}

/// Inverse of the surmise CDF, used to draw reference spacings.
pub fn wigner_surmise_inverse_cdf(u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidParameter(format!("quantile {u} not in [0, 1)")));
    }
    Ok((-(4.0 / PI) * (1.0 - u).ln()).sqrt())
}

/// KS distance between the unfolded spacings and the Wigner surmise.
pub fn spacing_ks_distance(record: &SpacingRecord) -> Result<f64> {
    spacing_ks_distance_values(&record.unfolded_spacings)
}

pub fn spacing_ks_distance_values(unfolded: &[f64]) -> Result<f64> {
    if unfolded.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "need at least 8 spacings, got {}",
            unfolded.len()
        )));
    }
    crate::stats::ks_distance(unfolded, |s| wigner_surmise_cdf(s.max(0.0)).unwrap())
}

/// Ensemble-averaged spectral form factor `E |Tr exp(-iHt)|^2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SffCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
    pub dim: usize,
    pub ensemble: String,
}

impl SffCurve {
    /// CSV with header `t,sff_mean,sff_stderr,samples,dim,ensemble`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,sff_mean,sff_stderr,samples,dim,ensemble\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.times[i], self.values[i], self.stderr[i], self.samples, self.dim,
                self.ensemble
            ));
        }
        out
    }

    /// Mean of the curve over `t` in `[lo, hi]`.
    pub fn window_mean(&self, lo: f64, hi: f64) -> Option<f64> {
        let picked: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(_, v)| *v)
            .collect();
        if picked.is_empty() {
            None
        } else {
            Some(picked.iter().sum::<f64>() / picked.len() as f64)
        }
    }
}

/// `|sum_p exp(-i E_p t)|^2` from eigenvalues only.
pub fn sff_from_spectrum(eigenvalues: &[f64], t: f64) -> f64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for &e in eigenvalues {
        sum += Complex64::from_polar(1.0, -e * t);
    }
    sum.norm_sqr()
}

/// Monte Carlo SFF curve over freshly sampled ensemble members.
/// Member `i` draws its RNG stream from `(seed, "sff-member", i)`, so
/// the result is independent of evaluation order.
pub fn spectral_form_factor(
    config: &EnsembleConfig,
    times: &[f64],
    samples: usize,
    root_seed: u64,
) -> Result<SffCurve> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 ensemble samples".into()));
    }
    if times.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("times must be >= 0".into()));
    }
    let per_member: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let member_seed = member_seed(root_seed, i as u64);
            let h = config.sample_with(member_seed)?;
            let es = diagonalize(&h)?;
            Ok(times.iter().map(|&t| sff_from_spectrum(es.eigenvalues(), t)).collect())
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    for ti in 0..times.len() {
        let column: Vec<f64> = per_member.iter().map(|row| row[ti]).collect();
        let (m, s) = crate::stats::mean_stderr(&column);
        values.push(m);
        stderr.push(s);
    }
    Ok(SffCurve {
        times: times.to_vec(),
        values,
        stderr,
        samples,
        dim: config.dim(),
        ensemble: config.tag().to_string(),
    })
}

fn member_seed(root: u64, index: u64) -> u64 {
    use rand::Rng;
    seed::stream(root, "sff-member", index).random()
}

/// A requested cell of the two-point correlation check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TwoPointCell {
    pub e_p: f64,
    pub e_q: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoPointCellReport {
    pub cell: TwoPointCell,
    pub pair_count: u64,
    pub empirical_density: f64,
    pub factorized_density: f64,
    /// Empirical / factorized; NaN when insufficient.
    pub ratio: f64,
    /// Sine-kernel ratio prediction `1 - sin^2(D ΔE) / (D π ΔE)^2 / (ρρ)`
    /// at the cell separation.
    pub predicted_ratio: f64,
    pub sufficient: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoPointReport {
    pub dim: usize,
    pub systems: usize,
    pub cells: Vec<TwoPointCellReport>,
}

const MIN_PAIRS_PER_CELL: u64 = 10;

/// Estimate the empirical eigenvalue pair density at the requested cells
/// and compare with the factorized product `ρ(E_p) ρ(E_q)`.
pub fn two_point_correlation_check(
    eigensystems: &[EigenSystem],
    cells: &[TwoPointCell],
) -> Result<TwoPointReport> {
    if eigensystems.is_empty() {
        return Err(Error::InsufficientData("no eigensystems".into()));
    }
    let dim = eigensystems[0].dim();
    if eigensystems.iter().any(|es| es.dim() != dim) {
        return Err(Error::DimensionMismatch { left: dim, right: 0 });
    }
    let systems = eigensystems.len();
    let pairs_per_system = (dim * (dim - 1)) as f64;
    let mut reports = Vec::with_capacity(cells.len());
    for &cell in cells {
        let (half, area) = (cell.width / 2.0, cell.width * cell.width);
        let mut count = 0u64;
        for es in eigensystems {
            let evs = es.eigenvalues();
            let in_p: Vec<usize> = (0..dim)
                .filter(|&i| (evs[i] - cell.e_p).abs() <= half)
                .collect();
            let in_q: Vec<usize> = (0..dim)
                .filter(|&i| (evs[i] - cell.e_q).abs() <= half)
                .collect();
            for &p in &in_p {
                for &q in &in_q {
                    if p != q {
                        count += 1;
                    }
                }
            }
        }
        let empirical = count as f64 / (systems as f64 * pairs_per_system * area);
        let factorized = semicircle_pdf(cell.e_p) * semicircle_pdf(cell.e_q);
        let sufficient = count >= MIN_PAIRS_PER_CELL && factorized > 0.0;
        let ratio = if sufficient { empirical / factorized } else { f64::NAN };
        let delta = cell.e_p - cell.e_q;
        let d = dim as f64;
        let kernel = if delta.abs() < 1e-12 {
            1.0 / (PI * PI)
        } else {
            (d * delta).sin().powi(2) / (d * PI * delta).powi(2)
        };
        let predicted_ratio =
            if factorized > 0.0 { 1.0 - kernel / factorized } else { f64::NAN };
        reports.push(TwoPointCellReport {
            cell,
            pair_count: count,
            empirical_density: empirical,
            factorized_density: factorized,
            ratio,
            predicted_ratio,
            sufficient,
        });
    }
    Ok(TwoPointReport { dim, systems, cells: reports })
}
