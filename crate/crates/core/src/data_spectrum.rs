//! Gridded Fourier representation of scattered data.
//!
//! Samples `(x_j, y_j)` with `x_j ∈ [-1/2, 1/2)^d` are matched against the
//! non-uniform Fourier system `A f ≈ y`, `A_{jω} = e^{2πi ω·x_j}`, on an
//! asymmetric lattice. Weighted minimum-norm solutions steer energy toward
//! frequencies with large damping weight.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use log::warn;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_hpd, CMatrix};
use crate::scalar::Real;
use crate::spectrum::{cartesian, Frequency};

pub const DEFAULT_DAMPING_IN: f64 = 1e3;
pub const DEFAULT_DAMPING_OUT: f64 = 1e-3;
pub const DEFAULT_TIKHONOV: f64 = 1e-12;

/// Samples on the torus `[-1/2, 1/2)^d` with real labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<F> {
    d: usize,
    x: Vec<Vec<F>>,
    y: Vec<F>,
}

impl<F: Real> Dataset<F> {
    pub fn new(x: Vec<Vec<F>>, y: Vec<F>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("dataset has no samples".into()));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                what: "labels",
                expected: x.len(),
                got: y.len(),
            });
        }
        let d = x[0].len();
        let half = F::lit(0.5);
        for (j, row) in x.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    what: "sample features",
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite() || *v < -half || *v >= half) {
                return Err(Error::InvalidInput(format!("sample {j} lies outside [-1/2, 1/2)^d")));
            }
            if !y[j].is_finite() {
                return Err(Error::InvalidInput(format!("label {j} is not finite")));
            }
        }
        Ok(Dataset { d, x, y })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self) -> &[Vec<F>] {
        &self.x
    }

    pub fn y(&self) -> &[F] {
        &self.y
    }

    /// Circuit angles `2π u` for every sample.
    pub fn angles(&self) -> Vec<Vec<F>> {
        let tau = F::TAU();
        self.x.iter().map(|r| r.iter().map(|&u| tau * u).collect()).collect()
    }
}

/// Lattice `Π_i {-N_i/2, …, N_i/2 - 1}`, enumerated lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyGrid {
    sizes: Vec<usize>,
}

impl FrequencyGrid {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if let Some(n) = sizes.iter().find(|&&n| n < 2 || n % 2 == 1) {
            return Err(Error::InvalidInput(format!("grid size {n} must be even and at least 2")));
        }
        Ok(FrequencyGrid { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn d(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, i: usize) -> std::ops::Range<i64> {
        let h = (self.sizes[i] / 2) as i64;
        -h..h
    }

    pub fn frequencies(&self) -> Vec<Frequency> {
        let ranges: Vec<Vec<i64>> = (0..self.d()).map(|i| self.range(i).collect()).collect();
        cartesian(&ranges).into_iter().map(Frequency).collect()
    }

    pub fn index_of(&self, omega: &Frequency) -> Option<usize> {
        if omega.dim() != self.d() {
            return None;
        }
        let mut idx = 0;
        for (i, &w) in omega.0.iter().enumerate() {
            let h = (self.sizes[i] / 2) as i64;
            if w < -h || w >= h {
                return None;
            }
            idx = idx * self.sizes[i] + (w + h) as usize;
        }
        Some(idx)
    }

    pub fn contains(&self, omega: &Frequency) -> bool {
        self.index_of(omega).is_some()
    }
}

/// `N_i = 2 N(x_i) + 2`, so the lattice covers the symmetric naive range.
pub fn build_grid(encoding_counts: &[usize]) -> Result<FrequencyGrid> {
    if encoding_counts.contains(&0) {
        return Err(Error::InvalidInput("every feature needs at least one encoding gate".into()));
    }
    FrequencyGrid::new(encoding_counts.iter().map(|n| 2 * n + 2).collect())
}

/// Piecewise-constant weights: `inside` on Ω, `outside` elsewhere.
pub fn damping_factors_with<F: Real>(grid: &FrequencyGrid, omega: &[Frequency], inside: F, outside: F) -> Vec<F> {
    let mut w = vec![outside; grid.len()];
    let mut dropped = 0usize;
    for f in omega {
        match grid.index_of(f) {
            Some(i) => w[i] = inside,
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        warn!("{dropped} spectrum frequencies lie outside the grid and were ignored");
    }
    w
}

pub fn damping_factors<F: Real>(grid: &FrequencyGrid, omega: &[Frequency]) -> Vec<F> {
    damping_factors_with(grid, omega, F::lit(DEFAULT_DAMPING_IN), F::lit(DEFAULT_DAMPING_OUT))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdetermined,
    Overdetermined,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionOptions {
    /// Relative Tikhonov floor.
    pub tikhonov: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            tikhonov: DEFAULT_TIKHONOV,
        }
    }
}

/// Fourier coefficients of a dataset on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSpectrum<F> {
    pub grid: FrequencyGrid,
    pub coefficients: Vec<Complex<F>>,
    pub residual: F,
    pub damping: Vec<F>,
    pub regime: Regime,
    /// Absolute regularization added to the system diagonal.
    pub regularization: F,
}

impl<F: Real> DataSpectrum<F> {
    pub fn coefficient(&self, omega: &Frequency) -> Option<Complex<F>> {
        self.grid.index_of(omega).map(|i| self.coefficients[i])
    }

    pub fn energy(&self) -> F {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `e^{2πi ω x}` for each sample, dimension and lattice value.
struct ExpTable<F> {
    offsets: Vec<usize>,
    stride: usize,
    data: Vec<Complex<F>>,
}

impl<F: Real> ExpTable<F> {
    fn new(data: &Dataset<F>, grid: &FrequencyGrid) -> Self {
        let mut offsets = Vec::with_capacity(grid.d());
        let mut stride = 0;
        for &n in grid.sizes() {
            offsets.push(stride);
            stride += n;
        }
        let tau = F::TAU();
        let rows: Vec<Vec<Complex<F>>> = data
            .x
            .par_iter()
            .map(|x| {
                let mut row = Vec::with_capacity(stride);
                for (i, &xi) in x.iter().enumerate() {
                    for w in grid.range(i) {
                        row.push(Complex::from_polar(F::one(), tau * F::lit(w as f64) * xi));
                    }
                }
                row
            })
            .collect();
        ExpTable {
            offsets,
            stride,
            data: rows.concat(),
        }
    }

    /// `a_ω[j]` for every grid point (lexicographic), sample `j`.
    fn column_values(&self, j: usize, grid: &FrequencyGrid, out: &mut Vec<Complex<F>>) {
        out.clear();
        out.push(Complex::new(F::one(), F::zero()));
        let row = &self.data[j * self.stride..(j + 1) * self.stride];
        for (i, &n) in grid.sizes().iter().enumerate() {
            let vals = &row[self.offsets[i]..self.offsets[i] + n];
            let prev = std::mem::take(out);
            out.reserve(prev.len() * n);
            for p in &prev {
                for v in vals {
                    out.push(*p * *v);
                }
            }
        }
    }

    fn entry(&self, j: usize, omega_index: &[usize]) -> Complex<F> {
        let row = &self.data[j * self.stride..];
        omega_index
            .iter()
            .enumerate()
            .fold(Complex::new(F::one(), F::zero()), |acc, (i, &k)| acc * row[self.offsets[i] + k])
    }
}

/// `Σ_{ω=-N/2}^{N/2-1} e^{2πiωδ}`.
fn dirichlet<F: Real>(n: usize, delta: F) -> Complex<F> {
    let pi = F::PI();
    let s = (pi * delta).sin();
    if s.abs() < F::lit(1e-6) {
        let h = (n / 2) as i64;
        return (-h..h).fold(Complex::zero(), |acc, w| {
            acc + Complex::from_polar(F::one(), F::TAU() * F::lit(w as f64) * delta)
        });
    }
    let mag = (pi * F::lit(n as f64) * delta).sin() / s;
    Complex::from_polar(F::one(), -pi * delta) * mag
}

fn grid_multi_index(grid: &FrequencyGrid, mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; grid.d()];
    for i in (0..grid.d()).rev() {
        idx[i] = flat % grid.sizes()[i];
        flat /= grid.sizes()[i];
    }
    idx
}

/// Damped minimum-norm inversion of the non-uniform Fourier system.
pub fn inverse_nfft<F: Real>(
    data: &Dataset<F>,
    grid: &FrequencyGrid,
    damping: &[F],
    options: &InversionOptions,
) -> Result<DataSpectrum<F>> {
    if data.d() != grid.d() {
        return Err(Error::DimensionMismatch {
            what: "grid dimension",
            expected: data.d(),
            got: grid.d(),
        });
    }
    if damping.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            what: "damping factors",
            expected: grid.len(),
            got: damping.len(),
        });
    }
    if damping.iter().any(|w| !(*w > F::zero()) || !w.is_finite()) {
        return Err(Error::InvalidInput("damping factors must be positive and finite".into()));
    }
    let table = ExpTable::new(data, grid);
    let (coefficients, regime, regularization) = if grid.len() > data.len() {
        solve_underdetermined(data, grid, damping, options, &table)?
    } else {
        solve_overdetermined(data, grid, damping, options, &table)?
    };
    let mut out = DataSpectrum {
        grid: grid.clone(),
        coefficients,
        residual: F::zero(),
        damping: damping.to_vec(),
        regime,
        regularization,
    };
    out.residual = r_nfft_with(&out, data, &table);
    Ok(out)
}

fn solve_underdetermined<F: Real>(
    data: &Dataset<F>,
    grid: &FrequencyGrid,
    damping: &[F],
    options: &InversionOptions,
    table: &ExpTable<F>,
) -> Result<(Vec<Complex<F>>, Regime, F)> {
    let m = data.len();
    // most common weight goes into the closed-form kernel, the rest as rank-one updates
    let mut counts: HashMap<u64, (usize, F)> = HashMap::new();
    for &w in damping {
        counts.entry(w.to_f64().unwrap_or(0.0).to_bits()).or_insert((0, w)).0 += 1;
    }
    let base = counts
        .values()
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal)))
        .map(|v| v.1)
        .unwrap_or_else(F::one);
    let exceptions: Vec<(Vec<usize>, F)> = damping
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != base)
        .map(|(i, &w)| (grid_multi_index(grid, i), w - base))
        .collect();

    let sizes = grid.sizes();
    let rows: Vec<Vec<Complex<F>>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let xj = &data.x[j];
            let mut row = vec![Complex::zero(); m];
            let aj: Vec<Complex<F>> = exceptions.iter().map(|(idx, _)| table.entry(j, idx)).collect();
            for (k, slot) in row.iter_mut().enumerate().skip(j) {
                let xk = &data.x[k];
                let mut v = Complex::new(base, F::zero());
                for i in 0..sizes.len() {
                    v = v * dirichlet(sizes[i], xj[i] - xk[i]);
                }
                for (e, (idx, dw)) in exceptions.iter().enumerate() {
                    v += aj[e] * table.entry(k, idx).conj() * *dw;
                }
                *slot = v;
            }
            row
        })
        .collect();
    let mut kmat = CMatrix::zeros(m);
    for j in 0..m {
        for k in j..m {
            let v = rows[j][k];
            *kmat.at(j, k) = v;
            *kmat.at(k, j) = v.conj();
        }
    }
    let lambda = F::lit(options.tikhonov) * kmat.trace_re() / F::lit(m as f64);
    kmat.add_diagonal(lambda);
    let y: Vec<Complex<F>> = data.y.iter().map(|&v| Complex::new(v, F::zero())).collect();
    let alpha = solve_hpd(&kmat, &y)?;

    // f = W Aᴴ α
    let mut f = vec![Complex::zero(); grid.len()];
    let mut col = Vec::new();
    for (j, a) in alpha.iter().enumerate() {
        table.column_values(j, grid, &mut col);
        for (fw, c) in f.iter_mut().zip(&col) {
            *fw += c.conj() * *a;
        }
    }
    for (fw, &w) in f.iter_mut().zip(damping) {
        *fw = *fw * w;
    }
    Ok((f, Regime::Underdetermined, lambda))
}

fn solve_overdetermined<F: Real>(
    data: &Dataset<F>,
    grid: &FrequencyGrid,
    damping: &[F],
    options: &InversionOptions,
    table: &ExpTable<F>,
) -> Result<(Vec<Complex<F>>, Regime, F)> {
    let g = grid.len();
    let d = grid.d();
    let sizes = grid.sizes();
    // S(δ) = Σ_j e^{2πiδ·x_j} for δ_i ∈ (-N_i, N_i)
    let diff_sizes: Vec<usize> = sizes.iter().map(|n| 2 * n - 1).collect();
    let diff_total: usize = diff_sizes.iter().product();
    let tau = F::TAU();
    let offsets: Vec<usize> = diff_sizes
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let stride: usize = diff_sizes.iter().sum();
    let powers: Vec<Complex<F>> = data
        .x
        .iter()
        .flat_map(|x| {
            (0..d).flat_map(move |i| {
                let h = sizes[i] as i64 - 1;
                (-h..=h).map(move |dl| Complex::from_polar(F::one(), tau * F::lit(dl as f64) * x[i]))
            })
        })
        .collect();
    let sums: Vec<Complex<F>> = (0..diff_total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut idx = vec![0usize; d];
            for i in (0..d).rev() {
                idx[i] = offsets[i] + rem % diff_sizes[i];
                rem /= diff_sizes[i];
            }
            powers.chunks_exact(stride).fold(Complex::zero(), |acc, row| {
                acc + idx.iter().fold(Complex::new(F::one(), F::zero()), |p, &k| p * row[k])
            })
        })
        .collect();
    let multi: Vec<Vec<usize>> = (0..g).map(|i| grid_multi_index(grid, i)).collect();
    let mut gram = CMatrix::zeros(g);
    for a in 0..g {
        for b in a..g {
            // (AᴴA)_{ab} = S(ω_b - ω_a)
            let mut flat = 0;
            for i in 0..d {
                let dl = multi[b][i] as i64 - multi[a][i] as i64 + (sizes[i] as i64 - 1);
                flat = flat * diff_sizes[i] + dl as usize;
            }
            let v = sums[flat];
            *gram.at(a, b) = v;
            *gram.at(b, a) = v.conj();
        }
    }
    let inv_w_trace: F = damping.iter().map(|&w| F::one() / w).sum();
    let mu = F::lit(options.tikhonov) * gram.trace_re() / inv_w_trace;
    for (i, &w) in damping.iter().enumerate() {
        gram.at(i, i).re += mu / w;
    }
    // Aᴴ y
    let mut rhs = vec![Complex::zero(); g];
    let mut col = Vec::new();
    for (j, &y) in data.y.iter().enumerate() {
        table.column_values(j, grid, &mut col);
        for (r, c) in rhs.iter_mut().zip(&col) {
            *r += c.conj() * y;
        }
    }
    let f = solve_hpd(&gram, &rhs)?;
    Ok((f, Regime::Overdetermined, mu))
}

fn r_nfft_with<F: Real>(spec: &DataSpectrum<F>, data: &Dataset<F>, table: &ExpTable<F>) -> F {
    let mut col = Vec::new();
    let mut total = F::zero();
    for (j, &y) in data.y.iter().enumerate() {
        table.column_values(j, &spec.grid, &mut col);
        let fit = col
            .iter()
            .zip(&spec.coefficients)
            .fold(Complex::zero(), |acc: Complex<F>, (a, f)| acc + *a * *f);
        total += (Complex::new(y, F::zero()) - fit).norm_sqr();
    }
    total
}

/// `Σ_j |y_j - Σ_ω f_ω e^{2πiω·x_j}|²`.
pub fn r_nfft<F: Real>(spec: &DataSpectrum<F>, data: &Dataset<F>) -> Result<F> {
    if data.d() != spec.grid.d() {
        return Err(Error::DimensionMismatch {
            what: "grid dimension",
            expected: data.d(),
            got: spec.grid.d(),
        });
    }
    let table = ExpTable::new(data, &spec.grid);
    Ok(r_nfft_with(spec, data, &table))
}

// ---------------------------------------------------------------------------
// Raw data and feature normalization

/// Raw table: feature columns followed by one label column.
#[derive(Clone, Debug, PartialEq)]
pub struct RawData {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

impl RawData {
    pub fn d(&self) -> usize {
        self.features.first().map_or(0, |r| r.len())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn read_raw_data<R: Read>(reader: R, has_header: bool) -> Result<RawData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Parse(format!(
                "record {}: need at least one feature column and a label",
                line + 1
            )));
        }
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(Error::Parse(format!("record {}: inconsistent column count", line + 1)));
        }
        let mut vals = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("record {}: invalid number '{field}'", line + 1)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("record {}: non-finite value", line + 1)));
            }
            vals.push(v);
        }
        labels.push(vals.pop().expect("nonempty"));
        features.push(vals);
    }
    if labels.is_empty() {
        return Err(Error::InvalidInput("dataset has no samples".into()));
    }
    Ok(RawData { features, labels })
}

pub fn read_raw_data_path(path: &Path, has_header: bool) -> Result<RawData> {
    let file = std::fs::File::open(path)?;
    read_raw_data(file, has_header)
}

pub fn write_raw_data<W: std::io::Write>(writer: W, data: &RawData) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let d = data.d();
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    wtr.write_record(&header)?;
    for (x, y) in data.features.iter().zip(&data.labels) {
        let mut rec: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        rec.push(format!("{y:?}"));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Affine map of each raw feature from `[lower, upper]` onto the torus
/// coordinate `u ∈ [-1/2, 1/2)`; the upper bound wraps to `-1/2`. Circuit
/// angles are `2π u`, so `e^{2πiωu} = e^{iωx}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FeatureMap {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                what: "feature bounds",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidInput("feature bounds need lower < upper".into()));
        }
        Ok(FeatureMap { lower, upper })
    }

    /// Bounds taken from the data; constant columns get a unit-width window.
    pub fn fit(raw: &RawData) -> Self {
        let d = raw.d();
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for x in &raw.features {
            for i in 0..d {
                lower[i] = lower[i].min(x[i]);
                upper[i] = upper[i].max(x[i]);
            }
        }
        for i in 0..d {
            if !(upper[i] > lower[i]) {
                lower[i] -= 0.5;
                upper[i] += 0.5;
            }
        }
        FeatureMap { lower, upper }
    }

    pub fn d(&self) -> usize {
        self.lower.len()
    }

    pub fn to_torus(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let u = (v - self.lower[i]) / (self.upper[i] - self.lower[i]) - 0.5;
                let u = u - (u + 0.5).floor();
                if u >= 0.5 {
                    u - 1.0
                } else {
                    u
                }
            })
            .collect()
    }

    pub fn to_angles(&self, x: &[f64]) -> Vec<f64> {
        self.to_torus(x).into_iter().map(|u| std::f64::consts::TAU * u).collect()
    }

    pub fn apply<F: Real>(&self, raw: &RawData) -> Result<Dataset<F>> {
        if raw.d() != self.d() {
            return Err(Error::DimensionMismatch {
                what: "feature columns",
                expected: self.d(),
                got: raw.d(),
            });
        }
        let x = raw
            .features
            .iter()
            .map(|r| self.to_torus(r).into_iter().map(F::lit).collect())
            .collect();
        Dataset::new(x, raw.labels.iter().map(|&v| F::lit(v)).collect())
    }
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCoefficient {
    pub frequency: Frequency,
    pub re: f64,
    pub im: f64,
    pub damping: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSpectrumRecord {
    pub grid_sizes: Vec<usize>,
    pub regime: Regime,
    pub regularization: f64,
    pub residual: f64,
    pub coefficients: Vec<GridCoefficient>,
}

impl<F: Real> From<&DataSpectrum<F>> for DataSpectrumRecord {
    fn from(s: &DataSpectrum<F>) -> Self {
        let to = |v: F| v.to_f64().unwrap_or(f64::NAN);
        DataSpectrumRecord {
            grid_sizes: s.grid.sizes().to_vec(),
            regime: s.regime,
            regularization: to(s.regularization),
            residual: to(s.residual),
            coefficients: s
                .grid
                .frequencies()
                .into_iter()
                .zip(&s.coefficients)
                .zip(&s.damping)
                .map(|((frequency, c), &w)| GridCoefficient {
                    frequency,
                    re: to(c.re),
                    im: to(c.im),
                    damping: to(w),
                })
                .collect(),
        }
    }
}
