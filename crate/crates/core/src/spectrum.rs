//! Exact Fourier spectrum and coefficient polynomials of a circuit.
//!
//! Every leaf `k · Π sin(x_j)^{s_j} cos(x_j)^{c_j} · (θ-part)` expands into
//! exponentials `e^{iωx}` with weight `k · 2^{-Σ(s_j+c_j)} · (-i)^{Σ s_j} ·
//! p(s, c, ω)`. Contributions of leaves sharing the same θ-signature can cancel,
//! so all accumulation is done in exact Gaussian-rational arithmetic and a
//! frequency belongs to the spectrum iff some θ-signature keeps a nonzero
//! amplitude.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::circuit::{to_normal_forms, Model};
use crate::error::{Error, Result};
use crate::scalar::{
    gaussian_to_complex, i_power, inverse_power_of_two, is_gaussian_zero, rational_to_f64, GaussianRational,
    Rational, Real,
};
use crate::tree::{expand_weighted, Expansion, LeafTerm, TreeOptions};

/// An integer frequency vector `ω ∈ Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(pub Vec<i64>);

impl Frequency {
    pub fn zero(d: usize) -> Self {
        Frequency(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Frequency {
        Frequency(self.0.iter().map(|v| -v).collect())
    }

    /// `ω · x`
    pub fn dot<F: Real>(&self, x: &[F]) -> F {
        self.0
            .iter()
            .zip(x)
            .map(|(&w, &v)| F::lit(w as f64) * v)
            .fold(F::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl From<Vec<i64>> for Frequency {
    fn from(v: Vec<i64>) -> Self {
        Frequency(v)
    }
}

/// Cartesian product of per-dimension value lists, in lexicographic order.
pub(crate) fn cartesian(ranges: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::with_capacity(ranges.len())];
    for r in ranges {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for prefix in &out {
            for &v in r {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// The symmetric hypergrid `{ω : |ω_j| ≤ N(x_j)}` in lexicographic order.
pub fn naive_spectrum(encoding_counts: &[usize]) -> Vec<Frequency> {
    let ranges: Vec<Vec<i64>> = encoding_counts
        .iter()
        .map(|&n| (-(n as i64)..=n as i64).collect())
        .collect();
    cartesian(&ranges).into_iter().map(Frequency).collect()
}

pub fn binomial(n: u32, k: i64) -> BigInt {
    if k < 0 || k > n as i64 {
        return BigInt::zero();
    }
    let k = (k as u32).min(n - k as u32);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// One-dimensional factor of `p(s, c, ω)`: the double binomial sum
/// `Σ_{a,b} C(s,a) C(c,b) (-1)^{s-a} [2a + 2b - s - c = ω]`.
pub fn combinatorial_weight_1d(s: u32, c: u32, omega: i64) -> BigInt {
    let total = (s + c) as i64;
    if omega.abs() > total || (total + omega) % 2 != 0 {
        return BigInt::zero();
    }
    let m = (total + omega) / 2; // a + b
    let mut acc = BigInt::zero();
    for a in 0..=s as i64 {
        let b = m - a;
        if b < 0 || b > c as i64 {
            continue;
        }
        let term = binomial(s, a) * binomial(c, b);
        if (s as i64 - a) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `p(s, c, ω)` as the product of its one-dimensional double sums.
pub fn combinatorial_weight(s: &[u32], c: &[u32], omega: &[i64]) -> BigInt {
    assert_eq!(s.len(), c.len());
    assert_eq!(s.len(), omega.len());
    let mut acc = BigInt::one();
    for j in 0..s.len() {
        let f = combinatorial_weight_1d(s[j], c[j], omega[j]);
        if f.is_zero() {
            return f;
        }
        acc *= f;
    }
    acc
}

/// Terminating Gauss series `₂F₁(a, b; c; z)`; `a` or `b` must be a
/// non-positive integer and `c` positive so the series is a finite sum.
pub fn hypergeometric_2f1_terminating(a: i64, b: i64, c: i64, z: &Rational) -> Rational {
    assert!(a <= 0 || b <= 0, "series does not terminate");
    assert!(c > 0, "lower parameter must be positive");
    let mut term = Rational::one();
    let mut sum = Rational::one();
    let mut n: i64 = 0;
    loop {
        let (an, bn) = (a + n, b + n);
        if an == 0 || bn == 0 {
            break;
        }
        let ratio = BigRational::new(BigInt::from(an * bn), BigInt::from((c + n) * (n + 1)));
        term = term * ratio * z;
        sum += &term;
        n += 1;
    }
    sum
}

/// One-dimensional `p(s, c, ω)` through its hypergeometric closed form.
pub fn combinatorial_weight_closed_form_1d(s: u32, c: u32, omega: i64) -> GaussianRational {
    let (si, ci) = (s as i64, c as i64);
    let zero = GaussianRational::zero();
    if (si + ci + omega) % 2 != 0 {
        return zero;
    }
    let minus_one = -Rational::one();
    if -ci - si <= omega && omega <= ci - si {
        let m = (si + ci + omega) / 2;
        let f = hypergeometric_2f1_terminating(-si, -m, (2 - omega - si + ci) / 2, &minus_one);
        let sign = if s % 2 == 0 { Rational::one() } else { -Rational::one() };
        let v = sign * Rational::from_integer(binomial(c, m)) * f;
        Complex::new(v, Rational::zero())
    } else if ci - si < omega && omega <= ci + si {
        let f = hypergeometric_2f1_terminating((omega - si - ci) / 2, -ci, (2 + omega + si - ci) / 2, &minus_one);
        let v = Rational::from_integer(binomial(s, (omega + si - ci) / 2)) * f;
        let phase = i_power(((si + ci - omega).rem_euclid(4)) as u8);
        Complex::new(v, Rational::zero()) * phase
    } else {
        zero
    }
}

pub fn combinatorial_weight_closed_form(s: &[u32], c: &[u32], omega: &[i64]) -> GaussianRational {
    let mut acc = GaussianRational::one();
    for j in 0..s.len() {
        let f = combinatorial_weight_closed_form_1d(s[j], c[j], omega[j]);
        if is_gaussian_zero(&f) {
            return f;
        }
        acc = acc * f;
    }
    acc
}

/// Nonzero `(ω_j, p_j)` pairs of one dimension.
fn support_1d(s: u32, c: u32) -> Vec<(i64, BigInt)> {
    let t = (s + c) as i64;
    (-t..=t)
        .step_by(2)
        .filter_map(|w| {
            let p = combinatorial_weight_1d(s, c, w);
            (!p.is_zero()).then_some((w, p))
        })
        .collect()
}

/// Frequencies a single `(s, c)` signature contributes to.
pub fn node_spectrum(s: &[u32], c: &[u32]) -> Vec<Frequency> {
    let ranges: Vec<Vec<i64>> = s
        .iter()
        .zip(c)
        .map(|(&sj, &cj)| support_1d(sj, cj).into_iter().map(|(w, _)| w).collect())
        .collect();
    cartesian(&ranges).into_iter().map(Frequency).collect()
}

/// θ-signature of one coefficient term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThetaSignature {
    pub s_prime: Vec<u32>,
    pub c_prime: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTerm {
    pub s_prime: Vec<u32>,
    pub c_prime: Vec<u32>,
    pub amplitude: GaussianRational,
}

/// `c_ω(θ) = Σ amplitude · Π_k sin(θ_k)^{s'_k} cos(θ_k)^{c'_k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientPolynomial {
    pub frequency: Frequency,
    pub w: usize,
    pub terms: Vec<CoefficientTerm>,
}

impl CoefficientPolynomial {
    pub fn constant(frequency: Frequency, w: usize, value: GaussianRational) -> Self {
        CoefficientPolynomial {
            frequency,
            w,
            terms: vec![CoefficientTerm {
                s_prime: vec![0; w],
                c_prime: vec![0; w],
                amplitude: value,
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| is_gaussian_zero(&t.amplitude))
    }
}

/// Groups leaves by θ-signature and accumulates the exact amplitude of every
/// reachable frequency. Returns nonzero coefficient polynomials sorted by
/// frequency; their frequencies form the spectrum.
pub fn exact_spectrum(leaves: &[LeafTerm], d: usize, w: usize) -> Result<Vec<CoefficientPolynomial>> {
    let mut support_cache: HashMap<(u32, u32), Vec<(i64, BigInt)>> = HashMap::new();
    let mut acc: BTreeMap<Frequency, BTreeMap<ThetaSignature, GaussianRational>> = BTreeMap::new();
    for leaf in leaves {
        if leaf.d() != d || leaf.w() != w {
            return Err(Error::DimensionMismatch {
                what: "leaf signature",
                expected: d + w,
                got: leaf.d() + leaf.w(),
            });
        }
        let sin_total: u32 = leaf.s.iter().sum();
        let total: u32 = sin_total + leaf.c.iter().sum::<u32>();
        // k · 2^{-Σ(s+c)} · (-i)^{Σs}
        let scale = Complex::new(inverse_power_of_two(total), Rational::zero());
        let prefactor = leaf.k.clone() * scale * i_power(((4 - sin_total % 4) % 4) as u8);
        let per_dim: Vec<Vec<(i64, BigInt)>> = (0..d)
            .map(|j| {
                support_cache
                    .entry((leaf.s[j], leaf.c[j]))
                    .or_insert_with(|| support_1d(leaf.s[j], leaf.c[j]))
                    .clone()
            })
            .collect();
        let sig = ThetaSignature {
            s_prime: leaf.s_prime.clone(),
            c_prime: leaf.c_prime.clone(),
        };
        // walk the cartesian product of per-dimension supports
        let mut idx = vec![0usize; d];
        loop {
            let mut omega = Vec::with_capacity(d);
            let mut p = BigInt::one();
            for j in 0..d {
                let (wj, pj) = &per_dim[j][idx[j]];
                omega.push(*wj);
                p *= pj;
            }
            let contribution = Complex::new(
                &prefactor.re * Rational::from_integer(p.clone()),
                &prefactor.im * Rational::from_integer(p),
            );
            let slot = acc
                .entry(Frequency(omega))
                .or_default()
                .entry(sig.clone())
                .or_insert_with(GaussianRational::zero);
            *slot = &*slot + contribution;

            let mut j = d;
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < per_dim[j].len() {
                    break;
                }
                idx[j] = 0;
                if j == 0 {
                    j = usize::MAX;
                    break;
                }
            }
            if j == usize::MAX || d == 0 {
                break;
            }
        }
    }
    Ok(acc
        .into_iter()
        .filter_map(|(frequency, groups)| {
            let terms: Vec<CoefficientTerm> = groups
                .into_iter()
                .filter(|(_, a)| !is_gaussian_zero(a))
                .map(|(sig, amplitude)| CoefficientTerm {
                    s_prime: sig.s_prime,
                    c_prime: sig.c_prime,
                    amplitude,
                })
                .collect();
            (!terms.is_empty()).then_some(CoefficientPolynomial { frequency, w, terms })
        })
        .collect())
}

/// Numeric value of `c_ω(θ)`.
pub fn evaluate_coefficient<F: Real>(poly: &CoefficientPolynomial, theta: &[F]) -> Result<Complex<F>> {
    if theta.len() != poly.w {
        return Err(Error::DimensionMismatch {
            what: "theta",
            expected: poly.w,
            got: theta.len(),
        });
    }
    let mut total = Complex::new(F::zero(), F::zero());
    for t in &poly.terms {
        let mut prod = F::one();
        for k in 0..poly.w {
            prod *= theta[k].sin().powi(t.s_prime[k] as i32) * theta[k].cos().powi(t.c_prime[k] as i32);
        }
        total += gaussian_to_complex::<F>(&t.amplitude) * prod;
    }
    Ok(total)
}

/// `Σ_ω c_ω(θ) e^{iω·x}`.
pub fn evaluate_fourier_sum<F: Real>(polys: &[CoefficientPolynomial], x: &[F], theta: &[F]) -> Result<Complex<F>> {
    let mut total = Complex::new(F::zero(), F::zero());
    for poly in polys {
        if poly.frequency.dim() != x.len() {
            return Err(Error::DimensionMismatch {
                what: "x",
                expected: poly.frequency.dim(),
                got: x.len(),
            });
        }
        total += evaluate_coefficient(poly, theta)? * Complex::from_polar(F::one(), poly.frequency.dot(x));
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Moments under θ uniform on [-π, π]^w

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, b| a * BigInt::from(b))
}

/// `E[sin^s θ · cos^c θ]` for θ uniform on `[-π, π]`, exactly:
/// `2^{-s-c} s! c! / ((s/2)! (c/2)! ((s+c)/2)!)` for even `s, c`, else 0.
pub fn trig_moment_normalized(s: u32, c: u32) -> Rational {
    if s % 2 == 1 || c % 2 == 1 {
        return Rational::zero();
    }
    let num = factorial(s) * factorial(c);
    let den = factorial(s / 2) * factorial(c / 2) * factorial((s + c) / 2) * (BigInt::one() << (s + c));
    BigRational::new(num, den)
}

/// `∫_{-π}^{π} sin^s θ cos^c θ dθ`.
pub fn trig_moment(s: u32, c: u32) -> f64 {
    2.0 * std::f64::consts::PI * rational_to_f64(&trig_moment_normalized(s, c))
}

fn monomial_moment(s_prime: &[u32], c_prime: &[u32]) -> Rational {
    s_prime
        .iter()
        .zip(c_prime)
        .fold(Rational::one(), |acc, (&s, &c)| acc * trig_moment_normalized(s, c))
}

/// Exact `E_θ[c(θ)]`.
pub fn coefficient_mean_exact(poly: &CoefficientPolynomial) -> GaussianRational {
    poly.terms.iter().fold(GaussianRational::zero(), |acc, t| {
        let m = monomial_moment(&t.s_prime, &t.c_prime);
        acc + Complex::new(&t.amplitude.re * &m, &t.amplitude.im * &m)
    })
}

/// Exact `E[a b*] - E[a] E[b]*`.
pub fn coefficient_covariance_exact(a: &CoefficientPolynomial, b: &CoefficientPolynomial) -> Result<GaussianRational> {
    if a.w != b.w {
        return Err(Error::DimensionMismatch {
            what: "coefficient parameters",
            expected: a.w,
            got: b.w,
        });
    }
    let mut second = GaussianRational::zero();
    for ta in &a.terms {
        for tb in &b.terms {
            let s: Vec<u32> = ta.s_prime.iter().zip(&tb.s_prime).map(|(x, y)| x + y).collect();
            let c: Vec<u32> = ta.c_prime.iter().zip(&tb.c_prime).map(|(x, y)| x + y).collect();
            let m = monomial_moment(&s, &c);
            if m.is_zero() {
                continue;
            }
            let prod = ta.amplitude.clone() * tb.amplitude.conj();
            second = second + Complex::new(prod.re * &m, prod.im * &m);
        }
    }
    let ma = coefficient_mean_exact(a);
    let mb = coefficient_mean_exact(b);
    Ok(second - ma * mb.conj())
}

pub fn coefficient_mean(poly: &CoefficientPolynomial) -> Complex<f64> {
    gaussian_to_complex(&coefficient_mean_exact(poly))
}

pub fn coefficient_covariance(a: &CoefficientPolynomial, b: &CoefficientPolynomial) -> Result<Complex<f64>> {
    Ok(gaussian_to_complex(&coefficient_covariance_exact(a, b)?))
}

/// Means and covariance matrix (row-major, `n × n`) of several coefficients,
/// computed in floating point through a shared monomial basis:
/// `Σ = V G Vᴴ - μ μᴴ` with `G_ab = E[m_a m_b]` over the basis monomials.
pub fn coefficient_moments(polys: &[&CoefficientPolynomial]) -> (Vec<Complex<f64>>, Vec<Complex<f64>>) {
    let n = polys.len();
    let mut basis: BTreeMap<(Vec<u32>, Vec<u32>), usize> = BTreeMap::new();
    for p in polys {
        for t in &p.terms {
            let len = basis.len();
            basis.entry((t.s_prime.clone(), t.c_prime.clone())).or_insert(len);
        }
    }
    let m = basis.len();
    let keys: Vec<(Vec<u32>, Vec<u32>)> = {
        let mut v = vec![(Vec::new(), Vec::new()); m];
        for (k, &i) in &basis {
            v[i] = k.clone();
        }
        v
    };
    let mut moment_cache: HashMap<(u32, u32), f64> = HashMap::new();
    let mut moment = |s: &[u32], c: &[u32]| -> f64 {
        s.iter()
            .zip(c)
            .map(|(&si, &ci)| {
                *moment_cache
                    .entry((si, ci))
                    .or_insert_with(|| rational_to_f64(&trig_moment_normalized(si, ci)))
            })
            .product()
    };
    let first: Vec<f64> = keys.iter().map(|(s, c)| moment(s, c)).collect();
    let mut gram = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let s: Vec<u32> = keys[a].0.iter().zip(&keys[b].0).map(|(x, y)| x + y).collect();
            let c: Vec<u32> = keys[a].1.iter().zip(&keys[b].1).map(|(x, y)| x + y).collect();
            let g = moment(&s, &c);
            gram[a * m + b] = g;
            gram[b * m + a] = g;
        }
    }
    let mut v = vec![Complex::new(0.0, 0.0); n * m];
    for (i, p) in polys.iter().enumerate() {
        for t in &p.terms {
            let a = basis[&(t.s_prime.clone(), t.c_prime.clone())];
            v[i * m + a] += gaussian_to_complex::<f64>(&t.amplitude);
        }
    }
    let means: Vec<Complex<f64>> = (0..n)
        .map(|i| (0..m).map(|a| v[i * m + a] * first[a]).sum())
        .collect();
    // VG (n × m)
    let mut vg = vec![Complex::new(0.0, 0.0); n * m];
    for i in 0..n {
        for a in 0..m {
            let via = v[i * m + a];
            if via == Complex::new(0.0, 0.0) {
                continue;
            }
            for b in 0..m {
                vg[i * m + b] += via * gram[a * m + b];
            }
        }
    }
    let mut cov = vec![Complex::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex::new(0.0, 0.0);
            for b in 0..m {
                acc += vg[i * m + b] * v[j * m + b].conj();
            }
            acc -= means[i] * means[j].conj();
            cov[i * n + j] = acc;
            cov[j * n + i] = acc.conj();
        }
    }
    (means, cov)
}

// ---------------------------------------------------------------------------
// Reports

/// Full spectral characterization of one circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub circuit_id: String,
    pub n_qubits: usize,
    pub d: usize,
    pub w: usize,
    pub encoding_counts: Vec<usize>,
    pub leaf_count: usize,
    pub raw_leaf_count: usize,
    /// Sorted by frequency; the spectrum is the set of their frequencies.
    pub coefficients: Vec<CoefficientPolynomial>,
    pub elapsed_ms: Option<f64>,
}

impl SpectrumReport {
    pub fn spectrum(&self) -> Vec<Frequency> {
        self.coefficients.iter().map(|c| c.frequency.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn naive_grid(&self) -> Vec<Frequency> {
        naive_spectrum(&self.encoding_counts)
    }

    pub fn coefficient(&self, omega: &Frequency) -> Option<&CoefficientPolynomial> {
        self.coefficients
            .binary_search_by(|c| c.frequency.cmp(omega))
            .ok()
            .map(|i| &self.coefficients[i])
    }

    pub fn contains(&self, omega: &Frequency) -> bool {
        self.coefficient(omega).is_some()
    }
}

/// Computes the exact spectrum of a circuit: normal form, tree expansion,
/// exact coefficient accumulation.
pub fn analyze(model: &Model, options: &TreeOptions) -> Result<SpectrumReport> {
    let start = Instant::now();
    let nfs = to_normal_forms(&model.circuit, &model.observable)?;
    let Expansion {
        d,
        w,
        leaves,
        raw_leaf_count,
    } = expand_weighted(&nfs, options)?;
    let coefficients = exact_spectrum(&leaves, d, w)?;
    Ok(SpectrumReport {
        circuit_id: model.id(),
        n_qubits: model.circuit.n_qubits,
        d,
        w,
        encoding_counts: model.circuit.encoding_counts(),
        leaf_count: leaves.len(),
        raw_leaf_count,
        coefficients,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub s_prime: Vec<u32>,
    pub c_prime: Vec<u32>,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub frequency: Frequency,
    pub terms: Vec<TermRecord>,
}

/// Serialized form of a [`SpectrumReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRecord {
    pub circuit_id: String,
    pub n_qubits: usize,
    pub d: usize,
    pub w: usize,
    pub encoding_counts: Vec<usize>,
    pub naive_grid_size: usize,
    pub leaf_count: usize,
    pub raw_leaf_count: usize,
    pub spectrum_size: usize,
    pub spectrum: Vec<Frequency>,
    pub coefficients: Vec<CoefficientRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl From<&SpectrumReport> for SpectrumRecord {
    fn from(r: &SpectrumReport) -> Self {
        SpectrumRecord {
            circuit_id: r.circuit_id.clone(),
            n_qubits: r.n_qubits,
            d: r.d,
            w: r.w,
            encoding_counts: r.encoding_counts.clone(),
            naive_grid_size: r.encoding_counts.iter().map(|n| 2 * n + 1).product(),
            leaf_count: r.leaf_count,
            raw_leaf_count: r.raw_leaf_count,
            spectrum_size: r.coefficients.len(),
            spectrum: r.spectrum(),
            coefficients: r
                .coefficients
                .iter()
                .map(|c| CoefficientRecord {
                    frequency: c.frequency.clone(),
                    terms: c
                        .terms
                        .iter()
                        .map(|t| TermRecord {
                            s_prime: t.s_prime.clone(),
                            c_prime: t.c_prime.clone(),
                            re: t.amplitude.re.to_string(),
                            im: t.amplitude.im.to_string(),
                        })
                        .collect(),
                })
                .collect(),
            elapsed_ms: r.elapsed_ms,
        }
    }
}

impl TryFrom<&SpectrumRecord> for SpectrumReport {
    type Error = Error;
    fn try_from(r: &SpectrumRecord) -> Result<Self> {
        let parse = |s: &str| -> Result<Rational> {
            s.parse()
                .map_err(|_| Error::Parse(format!("invalid rational '{s}'")))
        };
        let mut coefficients = Vec::with_capacity(r.coefficients.len());
        for c in &r.coefficients {
            let mut terms = Vec::with_capacity(c.terms.len());
            for t in &c.terms {
                if t.s_prime.len() != r.w || t.c_prime.len() != r.w {
                    return Err(Error::Parse("term signature length differs from w".into()));
                }
                terms.push(CoefficientTerm {
                    s_prime: t.s_prime.clone(),
                    c_prime: t.c_prime.clone(),
                    amplitude: Complex::new(parse(&t.re)?, parse(&t.im)?),
                });
            }
            coefficients.push(CoefficientPolynomial {
                frequency: c.frequency.clone(),
                w: r.w,
                terms,
            });
        }
        coefficients.sort_by(|a, b| a.frequency.cmp(&b.frequency));
        Ok(SpectrumReport {
            circuit_id: r.circuit_id.clone(),
            n_qubits: r.n_qubits,
            d: r.d,
            w: r.w,
            encoding_counts: r.encoding_counts.clone(),
            leaf_count: r.leaf_count,
            raw_leaf_count: r.raw_leaf_count,
            coefficients,
            elapsed_ms: r.elapsed_ms,
        })
    }
}

/// Largest absolute value of the rational parts, handy for diagnostics.
pub fn max_abs_amplitude(poly: &CoefficientPolynomial) -> f64 {
    poly.terms
        .iter()
        .map(|t| rational_to_f64(&t.amplitude.re.abs()).max(rational_to_f64(&t.amplitude.im.abs())))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate, Observable, ParamRef};
    use crate::scalar::gaussian_from_i;

    fn half() -> Rational {
        BigRational::new(1.into(), 2.into())
    }

    fn freqs(v: &[&[i64]]) -> Vec<Frequency> {
        v.iter().map(|f| Frequency(f.to_vec())).collect()
    }

    #[test]
    fn naive_grids() {
        assert_eq!(naive_spectrum(&[1]), freqs(&[&[-1], &[0], &[1]]));
        let g = naive_spectrum(&[2, 1]);
        assert_eq!(g.len(), 15);
        assert_eq!(g.first().unwrap().0, vec![-2, -1]);
        assert_eq!(g.last().unwrap().0, vec![2, 1]);
        assert_eq!(naive_spectrum(&[0, 0]), freqs(&[&[0, 0]]));
    }

    #[test]
    fn combinatorial_weight_examples() {
        assert_eq!(combinatorial_weight(&[], &[], &[]), BigInt::one());
        assert_eq!(combinatorial_weight(&[0], &[0], &[0]), BigInt::one());
        assert_eq!(combinatorial_weight(&[1], &[1], &[0]), BigInt::zero());
        assert_eq!(combinatorial_weight(&[2], &[0], &[2]), BigInt::one());
        assert_eq!(combinatorial_weight(&[0], &[2], &[0]), BigInt::from(2));
        assert_eq!(combinatorial_weight(&[2], &[0], &[0]), BigInt::from(-2));
        // parity and range zeros
        assert!(combinatorial_weight(&[1], &[1], &[1]).is_zero());
        assert!(combinatorial_weight(&[1], &[1], &[4]).is_zero());
    }

    #[test]
    fn closed_form_out_of_range_is_zero() {
        assert!(is_gaussian_zero(&combinatorial_weight_closed_form_1d(2, 1, 5)));
        assert!(is_gaussian_zero(&combinatorial_weight_closed_form_1d(2, 1, -5)));
        assert!(is_gaussian_zero(&combinatorial_weight_closed_form_1d(2, 1, 0)));
    }

    #[test]
    fn terminating_series() {
        // ₂F₁(-2, b; c; z) = 1 + 2bz/c·(-1)... check a known value: ₂F₁(-1, 1; 1; z) = 1 - z
        let z = half();
        assert_eq!(hypergeometric_2f1_terminating(-1, 1, 1, &z), half());
    }

    #[test]
    fn node_spectra() {
        assert_eq!(node_spectrum(&[1], &[1]), freqs(&[&[-2], &[2]]));
        assert_eq!(node_spectrum(&[0], &[1]), freqs(&[&[-1], &[1]]));
        assert_eq!(node_spectrum(&[0], &[0]), freqs(&[&[0]]));
    }

    fn doubled() -> Model {
        let c = Circuit::new(2, 2, 0)
            .with(Gate::rx(0, ParamRef::feature(0)))
            .with(Gate::rx(0, ParamRef::feature(0)))
            .with(Gate::rx(1, ParamRef::feature(1)));
        Model::new(c, Observable::parse_single("ZI").unwrap())
    }

    #[test]
    fn doubled_encoding_spectrum() {
        let r = analyze(&doubled(), &TreeOptions::default()).unwrap();
        assert_eq!(r.spectrum(), freqs(&[&[-2, 0], &[2, 0]]));
        let c = r.coefficient(&Frequency(vec![2, 0])).unwrap();
        assert_eq!(c.terms.len(), 1);
        assert_eq!(c.terms[0].amplitude, Complex::new(half(), Rational::zero()));
        assert!(r.coefficient(&Frequency(vec![0, 0])).is_none());
        assert_eq!(r.naive_grid().len(), 15);
    }

    #[test]
    fn no_rotation_circuit_has_dc_only() {
        let c = Circuit::new(1, 1, 0).with(Gate::h(0));
        let r = analyze(&Model::new(c, Observable::parse_single("X").unwrap()), &TreeOptions::default()).unwrap();
        assert_eq!(r.spectrum(), freqs(&[&[0]]));
        assert_eq!(r.coefficients[0].terms[0].amplitude, gaussian_from_i(1, 0));
    }

    #[test]
    fn variational_rotation_gives_cosine_coefficient() {
        let c = Circuit::new(1, 1, 1).with(Gate::rx(0, ParamRef::theta(0)));
        let r = analyze(&Model::new(c, Observable::parse_single("Z").unwrap()), &TreeOptions::default()).unwrap();
        assert_eq!(r.spectrum(), freqs(&[&[0]]));
        let poly = &r.coefficients[0];
        assert_eq!(poly.terms.len(), 1);
        assert_eq!((poly.terms[0].s_prime[0], poly.terms[0].c_prime[0]), (0, 1));
        let v = evaluate_coefficient(poly, &[0.0f64]).unwrap();
        assert_eq!(v, Complex::new(1.0, 0.0));
    }

    #[test]
    fn evaluate_coefficient_edge_cases() {
        let c = CoefficientPolynomial::constant(Frequency(vec![2, 0]), 1, Complex::new(half(), Rational::zero()));
        assert_eq!(evaluate_coefficient(&c, &[1.234f64]).unwrap(), Complex::new(0.5, 0.0));
        let empty = CoefficientPolynomial {
            frequency: Frequency(vec![0]),
            w: 0,
            terms: vec![],
        };
        assert_eq!(evaluate_coefficient::<f64>(&empty, &[]).unwrap(), Complex::new(0.0, 0.0));
        assert!(evaluate_coefficient(&c, &[0.0f64, 1.0]).is_err());
    }

    #[test]
    fn moments_of_simple_polynomials() {
        let cos = CoefficientPolynomial {
            frequency: Frequency(vec![0]),
            w: 1,
            terms: vec![CoefficientTerm {
                s_prime: vec![0],
                c_prime: vec![1],
                amplitude: gaussian_from_i(1, 0),
            }],
        };
        let sin = CoefficientPolynomial {
            frequency: Frequency(vec![1]),
            w: 1,
            terms: vec![CoefficientTerm {
                s_prime: vec![1],
                c_prime: vec![0],
                amplitude: gaussian_from_i(1, 0),
            }],
        };
        assert!(is_gaussian_zero(&coefficient_mean_exact(&cos)));
        assert_eq!(coefficient_covariance_exact(&cos, &cos).unwrap(), Complex::new(half(), Rational::zero()));
        assert!(is_gaussian_zero(&coefficient_covariance_exact(&sin, &cos).unwrap()));
        let constant = CoefficientPolynomial::constant(Frequency(vec![0]), 1, gaussian_from_i(3, -1));
        assert!(is_gaussian_zero(&coefficient_covariance_exact(&constant, &constant).unwrap()));
        assert_eq!(coefficient_mean(&constant), Complex::new(3.0, -1.0));

        let (means, cov) = coefficient_moments(&[&cos, &sin, &constant]);
        assert_eq!(means[2], Complex::new(3.0, -1.0));
        assert!((cov[0] - Complex::new(0.5, 0.0)).norm() < 1e-15);
        assert!((cov[4] - Complex::new(0.5, 0.0)).norm() < 1e-15);
        assert!(cov[1].norm() < 1e-15 && cov[8].norm() < 1e-15);
    }

    #[test]
    fn moment_constant_is_two_pi() {
        assert_eq!(trig_moment_normalized(0, 0), Rational::one());
        assert_eq!(trig_moment(0, 0), 2.0 * std::f64::consts::PI);
        assert_eq!(trig_moment_normalized(0, 2), half());
        assert_eq!(trig_moment_normalized(1, 2), Rational::zero());
        // E[sin^2 cos^2] = 1/8
        assert_eq!(trig_moment_normalized(2, 2), BigRational::new(1.into(), 8.into()));
    }

    #[test]
    fn report_record_round_trip() {
        let mut r = analyze(&doubled(), &TreeOptions::default()).unwrap();
        r.elapsed_ms = None;
        let rec = SpectrumRecord::from(&r);
        let json = serde_json::to_string(&rec).unwrap();
        let back: SpectrumRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(SpectrumReport::try_from(&back).unwrap(), r);
        assert_eq!(rec.spectrum_size, 2);
        assert_eq!(rec.naive_grid_size, 15);
    }
}
