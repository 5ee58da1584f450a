//! Scoring of candidate architectures against a dataset.
//!
//! Each candidate gets three terms: data energy outside its spectrum (R_Ω),
//! the Mahalanobis implausibility of the data coefficients under the
//! candidate's coefficient distribution (R_corr), and its relative spectrum
//! size (R_punish). R_Ω and R_corr are normalized across the candidate set
//! before summing; lower scores rank first.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_spectrum::{
    build_grid, damping_factors_with, inverse_nfft, DataSpectrum, Dataset, FrequencyGrid, InversionOptions,
    DEFAULT_DAMPING_IN, DEFAULT_DAMPING_OUT, DEFAULT_TIKHONOV,
};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::{coefficient_moments, Frequency, SpectrumReport};

pub const DEFAULT_SUBSET_SIZE: usize = 100;
pub const DEFAULT_EIGEN_CUTOFF: f64 = 1e-10;
pub const DEFAULT_NULL_PENALTY: f64 = 1e6;

/// `Σ_{ω ∈ grid \ Ω} |f_ω|²`
pub fn r_omega<F: Real>(spec: &DataSpectrum<F>, omega: &[Frequency]) -> Result<F> {
    if let Some(f) = omega.iter().find(|f| f.dim() != spec.grid.d()) {
        return Err(Error::DimensionMismatch {
            what: "spectrum frequency",
            expected: spec.grid.d(),
            got: f.dim(),
        });
    }
    let mut inside = vec![false; spec.grid.len()];
    for f in omega {
        if let Some(i) = spec.grid.index_of(f) {
            inside[i] = true;
        }
    }
    Ok(spec
        .coefficients
        .iter()
        .zip(&inside)
        .filter(|(_, &keep)| !keep)
        .map(|(c, _)| c.norm_sqr())
        .sum())
}

/// `|Ω| / |grid|`, counting only frequencies that lie on the grid.
pub fn r_punish(omega: &[Frequency], grid: &FrequencyGrid) -> f64 {
    let on_grid: BTreeSet<&Frequency> = omega.iter().filter(|f| grid.contains(f)).collect();
    on_grid.len() as f64 / grid.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrOptions {
    /// Eigenvalues below `cutoff · λ_max` count as null space.
    pub eigen_cutoff: f64,
    /// Cost per unit squared magnitude of deviation in the null space.
    pub null_penalty: f64,
}

impl Default for CorrOptions {
    fn default() -> Self {
        CorrOptions {
            eigen_cutoff: DEFAULT_EIGEN_CUTOFF,
            null_penalty: DEFAULT_NULL_PENALTY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrBreakdown {
    pub value: f64,
    /// `(f-μ)ᴴ Σ⁺ (f-μ)`
    pub mahalanobis_sq: f64,
    /// Squared norm of `f-μ` in the null space of `Σ`.
    pub null_norm_sq: f64,
}

/// `sqrt((f-μ)ᴴ Σ⁺ (f-μ) + penalty · ‖P_null (f-μ)‖²)` with a Hermitian
/// pseudo-inverse; `cov` is row-major `n × n`.
pub fn r_corr_breakdown(
    f: &[Complex<f64>],
    mu: &[Complex<f64>],
    cov: &[Complex<f64>],
    options: &CorrOptions,
) -> Result<CorrBreakdown> {
    let n = f.len();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            what: "coefficient means",
            expected: n,
            got: mu.len(),
        });
    }
    if cov.len() != n * n {
        return Err(Error::DimensionMismatch {
            what: "covariance entries",
            expected: n * n,
            got: cov.len(),
        });
    }
    if n == 0 {
        return Ok(CorrBreakdown {
            value: 0.0,
            mahalanobis_sq: 0.0,
            null_norm_sq: 0.0,
        });
    }
    // symmetrize against rounding before the Hermitian eigensolver
    let sigma = DMatrix::from_fn(n, n, |i, j| (cov[i * n + j] + cov[j * n + i].conj()) * 0.5);
    let eig = SymmetricEigen::new(sigma);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let threshold = options.eigen_cutoff * lmax;
    let diff = nalgebra::DVector::from_iterator(n, f.iter().zip(mu).map(|(a, b)| a - b));
    let z = eig.eigenvectors.adjoint() * diff;
    let (mut q, mut null) = (0.0, 0.0);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let m = z[k].norm_sqr();
        if lmax > 0.0 && lambda > threshold {
            q += m / lambda;
        } else {
            null += m;
        }
    }
    Ok(CorrBreakdown {
        value: (q + options.null_penalty * null).sqrt(),
        mahalanobis_sq: q,
        null_norm_sq: null,
    })
}

pub fn r_corr(f: &[Complex<f64>], mu: &[Complex<f64>], cov: &[Complex<f64>], options: &CorrOptions) -> Result<f64> {
    Ok(r_corr_breakdown(f, mu, cov, options)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Divide by the largest value across candidates.
    #[default]
    Max,
    /// `(v - min) / (max - min)`.
    MinMax,
}

impl std::str::FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Normalization::Max),
            "min-max" | "minmax" => Ok(Normalization::MinMax),
            _ => Err(Error::InvalidInput(format!("unknown normalization '{s}'"))),
        }
    }
}

fn normalize(values: &[f64], mode: Normalization) -> Vec<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    match mode {
        Normalization::Max if max > 0.0 => values.iter().map(|v| v / max).collect(),
        Normalization::MinMax if max > min => values.iter().map(|v| (v - min) / (max - min)).collect(),
        _ => vec![0.0; values.len()],
    }
}

/// Raw terms of one candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawTerms {
    pub id: String,
    pub r_omega: f64,
    pub r_corr: f64,
    pub r_punish: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureScore {
    pub rank: usize,
    pub id: String,
    pub spectrum_size: usize,
    pub r_omega: f64,
    pub r_omega_normalized: f64,
    pub r_corr: f64,
    pub r_corr_normalized: f64,
    pub r_punish: f64,
    pub score: f64,
    pub r_nfft: f64,
    pub mahalanobis_sq: f64,
    pub null_norm_sq: f64,
    pub corr_subset: Vec<Frequency>,
}

/// Normalizes the terms and sorts ascending by score, ties in input order.
/// Returns `(input index, normalized R_Ω, normalized R_corr, score)` in rank order.
pub fn score_and_rank(terms: &[RawTerms], normalization: Normalization) -> Result<Vec<(usize, f64, f64, f64)>> {
    if terms.is_empty() {
        return Err(Error::InvalidInput("no candidate architectures".into()));
    }
    let ro = normalize(&terms.iter().map(|t| t.r_omega).collect::<Vec<_>>(), normalization);
    let rc = normalize(&terms.iter().map(|t| t.r_corr).collect::<Vec<_>>(), normalization);
    let mut rows: Vec<(usize, f64, f64, f64)> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (i, ro[i], rc[i], ro[i] + rc[i] + t.r_punish))
        .collect();
    rows.sort_by(|a, b| a.3.total_cmp(&b.3));
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOptions {
    pub subset_size: usize,
    pub seed: u64,
    pub damping_in: f64,
    pub damping_out: f64,
    pub tikhonov: f64,
    pub normalization: Normalization,
    pub corr: CorrOptions,
    /// Per-dimension lattice sizes; derived from encoding counts when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            subset_size: DEFAULT_SUBSET_SIZE,
            seed: 0,
            damping_in: DEFAULT_DAMPING_IN,
            damping_out: DEFAULT_DAMPING_OUT,
            tikhonov: DEFAULT_TIKHONOV,
            normalization: Normalization::Max,
            corr: CorrOptions::default(),
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub grid_sizes: Vec<usize>,
    pub options: RankOptions,
    /// In rank order.
    pub architectures: Vec<ArchitectureScore>,
}

impl RankReport {
    /// `rank,id,...` summary table.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("rank,id,spectrum_size,r_omega,r_omega_normalized,r_corr,r_corr_normalized,r_punish,score,r_nfft\n");
        for a in &self.architectures {
            out.push_str(&format!(
                "{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
                a.rank,
                a.id.replace(',', ";"),
                a.spectrum_size,
                a.r_omega,
                a.r_omega_normalized,
                a.r_corr,
                a.r_corr_normalized,
                a.r_punish,
                a.score,
                a.r_nfft
            ));
        }
        out
    }
}

/// Shared lattice: per-dimension maximum encoding count over the candidates.
pub fn shared_grid(reports: &[SpectrumReport]) -> Result<FrequencyGrid> {
    let d = reports
        .first()
        .map(|r| r.d)
        .ok_or_else(|| Error::InvalidInput("no candidate architectures".into()))?;
    let mut counts = vec![1usize; d];
    for r in reports {
        for (c, &n) in counts.iter_mut().zip(&r.encoding_counts) {
            *c = (*c).max(n);
        }
    }
    build_grid(&counts)
}

struct Evaluated {
    terms: RawTerms,
    spectrum_size: usize,
    r_nfft: f64,
    mahalanobis_sq: f64,
    null_norm_sq: f64,
    subset: Vec<Frequency>,
}

fn evaluate_candidate(
    index: usize,
    report: &SpectrumReport,
    data: &Dataset<f64>,
    grid: &FrequencyGrid,
    options: &RankOptions,
) -> Result<Evaluated> {
    let omega: Vec<Frequency> = report.spectrum();
    let damping = damping_factors_with(grid, &omega, options.damping_in, options.damping_out);
    let spec = inverse_nfft(data, grid, &damping, &InversionOptions { tikhonov: options.tikhonov })?;
    let ro = r_omega(&spec, &omega)?;
    let rp = r_punish(&omega, grid);

    let on_grid: Vec<usize> = (0..report.coefficients.len())
        .filter(|&i| grid.contains(&report.coefficients[i].frequency))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rng.set_stream(index as u64);
    let mut chosen: Vec<usize> = if on_grid.len() <= options.subset_size {
        on_grid
    } else {
        let mut picks: Vec<usize> = sample(&mut rng, on_grid.len(), options.subset_size)
            .into_iter()
            .map(|k| on_grid[k])
            .collect();
        picks.sort_unstable();
        picks
    };
    chosen.dedup();
    let polys: Vec<_> = chosen.iter().map(|&i| &report.coefficients[i]).collect();
    let (mu, cov) = coefficient_moments(&polys);
    let f: Vec<Complex<f64>> = polys
        .iter()
        .map(|p| spec.coefficient(&p.frequency).expect("frequency on grid"))
        .collect();
    let corr = r_corr_breakdown(&f, &mu, &cov, &options.corr)?;
    Ok(Evaluated {
        terms: RawTerms {
            id: report.circuit_id.clone(),
            r_omega: ro,
            r_corr: corr.value,
            r_punish: rp,
        },
        spectrum_size: omega.len(),
        r_nfft: spec.residual,
        mahalanobis_sq: corr.mahalanobis_sq,
        null_norm_sq: corr.null_norm_sq,
        subset: polys.iter().map(|p| p.frequency.clone()).collect(),
    })
}

/// Full pipeline: shared grid, per-candidate damped inversion, the three
/// terms, normalization and ranking.
pub fn rank_architectures(
    reports: &[SpectrumReport],
    data: &Dataset<f64>,
    options: &RankOptions,
) -> Result<RankReport> {
    if reports.is_empty() {
        return Err(Error::InvalidInput("no candidate architectures".into()));
    }
    if let Some(r) = reports.iter().find(|r| r.d != data.d()) {
        return Err(Error::InvalidInput(format!(
            "architecture '{}' expects {} features but the data has {}",
            r.circuit_id,
            r.d,
            data.d()
        )));
    }
    if !(options.damping_in > 0.0 && options.damping_out > 0.0) {
        return Err(Error::InvalidInput("damping factors must be positive".into()));
    }
    let grid = match &options.grid {
        Some(sizes) => {
            let g = FrequencyGrid::new(sizes.clone())?;
            if g.d() != data.d() {
                return Err(Error::DimensionMismatch {
                    what: "grid dimension",
                    expected: data.d(),
                    got: g.d(),
                });
            }
            g
        }
        None => shared_grid(reports)?,
    };
    let evaluated: Vec<Evaluated> = reports
        .par_iter()
        .enumerate()
        .map(|(i, r)| evaluate_candidate(i, r, data, &grid, options))
        .collect::<Result<_>>()?;
    let terms: Vec<RawTerms> = evaluated.iter().map(|e| e.terms.clone()).collect();
    let order = score_and_rank(&terms, options.normalization)?;
    let architectures = order
        .into_iter()
        .enumerate()
        .map(|(pos, (i, ro, rc, score))| {
            let e = &evaluated[i];
            ArchitectureScore {
                rank: pos + 1,
                id: e.terms.id.clone(),
                spectrum_size: e.spectrum_size,
                r_omega: e.terms.r_omega,
                r_omega_normalized: ro,
                r_corr: e.terms.r_corr,
                r_corr_normalized: rc,
                r_punish: e.terms.r_punish,
                score,
                r_nfft: e.r_nfft,
                mahalanobis_sq: e.mahalanobis_sq,
                null_norm_sq: e.null_norm_sq,
                corr_subset: e.subset.clone(),
            }
        })
        .collect();
    Ok(RankReport {
        grid_sizes: grid.sizes().to_vec(),
        options: options.clone(),
        architectures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_spectrum::Regime;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn spec_with(grid: FrequencyGrid, entries: &[(&[i64], f64)]) -> DataSpectrum<f64> {
        let mut coefficients = vec![c(0.0); grid.len()];
        for (w, v) in entries {
            coefficients[grid.index_of(&Frequency(w.to_vec())).unwrap()] = c(*v);
        }
        DataSpectrum {
            damping: vec![1.0; grid.len()],
            grid,
            coefficients,
            residual: 0.0,
            regime: Regime::Overdetermined,
            regularization: 0.0,
        }
    }

    #[test]
    fn r_omega_examples() {
        let g = build_grid(&[2, 1]).unwrap();
        let s = spec_with(g.clone(), &[(&[2, 0], 1.0)]);
        assert_eq!(r_omega(&s, &[Frequency(vec![2, 0])]).unwrap(), 0.0);
        let s = spec_with(FrequencyGrid::new(vec![8, 4]).unwrap(), &[(&[3, 0], 1.0)]);
        assert_eq!(r_omega(&s, &[Frequency(vec![2, 0])]).unwrap(), 1.0);
        let s = spec_with(g, &[(&[1, 0], 1.0), (&[2, 0], 1.0)]);
        let doubled = [Frequency(vec![-2, 0]), Frequency(vec![2, 0])];
        assert_eq!(r_omega(&s, &doubled).unwrap(), 1.0);
        assert!(r_omega(&s, &[Frequency(vec![1])]).is_err());
    }

    #[test]
    fn r_punish_examples() {
        let g = build_grid(&[2, 1]).unwrap();
        assert_eq!(r_punish(&g.frequencies(), &g), 1.0);
        assert_eq!(r_punish(&[], &g), 0.0);
        let doubled = [Frequency(vec![-2, 0]), Frequency(vec![2, 0])];
        assert_eq!(r_punish(&doubled, &g), 1.0 / 12.0);
    }

    #[test]
    fn r_corr_examples() {
        let opts = CorrOptions::default();
        assert_eq!(r_corr(&[c(1.0)], &[c(1.0)], &[c(0.5)], &opts).unwrap(), 0.0);
        let v = r_corr(&[c(0.5f64.sqrt())], &[c(0.0)], &[c(0.5)], &opts).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // rank-one covariance of two identical cos θ coefficients
        let cov = [c(0.5), c(0.5), c(0.5), c(0.5)];
        let b = r_corr_breakdown(&[c(1.0), c(-1.0)], &[c(0.0), c(0.0)], &cov, &opts).unwrap();
        assert!((b.null_norm_sq - 2.0).abs() < 1e-12);
        assert!(b.value > 1e3);
        assert!(r_corr(&[c(1.0)], &[c(1.0), c(0.0)], &[c(1.0)], &opts).is_err());
    }

    #[test]
    fn ranking_rules() {
        let t = |id: &str, ro, rc, rp| RawTerms {
            id: id.into(),
            r_omega: ro,
            r_corr: rc,
            r_punish: rp,
        };
        let one = score_and_rank(&[t("a", 5.0, 3.0, 0.9)], Normalization::Max).unwrap();
        assert_eq!(one[0].0, 0);
        assert!((one[0].3 - 2.9).abs() < 1e-15);
        let tied = score_and_rank(&[t("a", 1.0, 1.0, 0.1), t("b", 1.0, 1.0, 0.1)], Normalization::Max).unwrap();
        assert_eq!((tied[0].0, tied[1].0), (0, 1));
        assert_eq!(tied[0].3, tied[1].3);
        let ab = score_and_rank(&[t("b", 2.0, 0.0, 0.1), t("a", 0.0, 0.0, 0.1)], Normalization::Max).unwrap();
        assert_eq!(ab[0].0, 1);
        let zero = score_and_rank(&[t("a", 0.0, 0.0, 0.2), t("b", 0.0, 0.0, 0.1)], Normalization::MinMax).unwrap();
        assert_eq!(zero[0].0, 1);
        assert!(score_and_rank(&[], Normalization::Max).is_err());
    }

    #[test]
    fn normalization_modes() {
        assert_eq!(normalize(&[1.0, 2.0, 4.0], Normalization::Max), vec![0.25, 0.5, 1.0]);
        assert_eq!(normalize(&[1.0, 2.0, 3.0], Normalization::MinMax), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize(&[0.0, 0.0], Normalization::Max), vec![0.0, 0.0]);
        assert_eq!("min-max".parse::<Normalization>().unwrap(), Normalization::MinMax);
    }
}
