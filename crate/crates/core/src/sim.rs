//! Dense statevector simulation: ground-truth expectations, grid-sampled
//! Fourier coefficients, parameter-shift gradients, a small Adam trainer and
//! the Friedman regression benchmark.
//!
//! Basis index bit `q` holds qubit `q`.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{validate, validate_observable, Axis, Circuit, Gate, NormalForm, Observable, ParamKind};
use crate::data_spectrum::RawData;
use crate::error::{Error, Result};
use crate::pauli::{CliffordGate, SignedPauli};
use crate::scalar::Real;
use crate::spectrum::{naive_spectrum, Frequency};

pub const DEFAULT_QUBIT_CAP: usize = 12;
pub const MAX_DFT_GRID: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<F> {
    n_qubits: usize,
    amps: Vec<Complex<F>>,
}

impl<F: Real> StateVector<F> {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize, cap: usize) -> Result<Self> {
        if n_qubits > cap {
            return Err(Error::Capacity(format!(
                "{n_qubits} qubits exceed the simulator cap of {cap}"
            )));
        }
        let mut amps = vec![Complex::zero(); 1 << n_qubits];
        amps[0] = Complex::new(F::one(), F::zero());
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<F>] {
        &self.amps
    }

    pub fn norm(&self) -> F {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<F>().sqrt()
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex<F>; 2]; 2]) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn apply_clifford(&mut self, g: &CliffordGate) {
        let zero = Complex::zero();
        let one = Complex::new(F::one(), F::zero());
        match *g {
            CliffordGate::H(q) => {
                let h = Complex::new(F::FRAC_1_SQRT_2(), F::zero());
                self.apply_1q(q, [[h, h], [h, -h]]);
            }
            CliffordGate::S(q) => self.apply_1q(q, [[one, zero], [zero, Complex::new(F::zero(), F::one())]]),
            CliffordGate::Cnot { control, target } => {
                let (c, t) = (1 << control, 1 << target);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            CliffordGate::Cz(a, b) => {
                let m = (1 << a) | (1 << b);
                for (i, v) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *v = -*v;
                    }
                }
            }
        }
    }

    /// `exp(-iφ σ/2)` on one qubit.
    pub fn apply_rotation(&mut self, axis: Axis, q: usize, phi: F) {
        let half = phi / F::lit(2.0);
        let (c, s) = (half.cos(), half.sin());
        let z = F::zero();
        let m = match axis {
            Axis::X => [
                [Complex::new(c, z), Complex::new(z, -s)],
                [Complex::new(z, -s), Complex::new(c, z)],
            ],
            Axis::Y => [
                [Complex::new(c, z), Complex::new(-s, z)],
                [Complex::new(s, z), Complex::new(c, z)],
            ],
            Axis::Z => [
                [Complex::new(c, -s), Complex::zero()],
                [Complex::zero(), Complex::new(c, s)],
            ],
        };
        self.apply_1q(q, m);
    }

    /// `P|ψ⟩` for a Pauli string including its phase.
    pub fn pauli_image(&self, p: &SignedPauli) -> Result<Vec<Complex<F>>> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch {
                left: self.n_qubits,
                right: p.n_qubits(),
            });
        }
        let (xm, zm) = p.masks_u64();
        let (xm, zm) = (xm as usize, zm as usize);
        // Y = i X Z on each qubit
        let n_y = (xm & zm).count_ones() as i64;
        let global: Complex<F> = (p.phase() * crate::pauli::Phase::from_exponent(n_y)).to_complex();
        let mut out = vec![Complex::zero(); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (b & zm).count_ones() % 2 == 1 { -F::one() } else { F::one() };
            out[b ^ xm] = *a * global * sign;
        }
        Ok(out)
    }

    /// `exp(-iφP/2)` for a Hermitian Pauli string `P`.
    pub fn apply_pauli_rotation(&mut self, p: &SignedPauli, phi: F) -> Result<()> {
        let image = self.pauli_image(p)?;
        let half = phi / F::lit(2.0);
        let (c, s) = (half.cos(), half.sin());
        let minus_is = Complex::new(F::zero(), -s);
        for (a, pa) in self.amps.iter_mut().zip(image) {
            *a = *a * c + pa * minus_is;
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩`
    pub fn expectation_pauli(&self, p: &SignedPauli) -> Result<Complex<F>> {
        let image = self.pauli_image(p)?;
        Ok(self
            .amps
            .iter()
            .zip(&image)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * *b))
    }

    pub fn expectation_observable(&self, obs: &Observable) -> Result<Complex<F>> {
        let mut total = Complex::zero();
        for t in &obs.terms {
            total += self.expectation_pauli(&t.pauli)? * F::lit(t.weight);
        }
        Ok(total)
    }
}

/// Runs a circuit with one angle per gate supplied by `angle(gate_index)`.
fn run_with<F: Real>(
    circuit: &Circuit,
    cap: usize,
    mut angle: impl FnMut(usize) -> F,
) -> Result<StateVector<F>> {
    let mut psi = StateVector::zero(circuit.n_qubits, cap)?;
    for (i, g) in circuit.gates.iter().enumerate() {
        match g {
            Gate::Clifford(c) => psi.apply_clifford(c),
            Gate::Rotation { axis, qubit, .. } => psi.apply_rotation(*axis, *qubit, angle(i)),
        }
    }
    Ok(psi)
}

fn check_inputs<F>(circuit: &Circuit, x: &[F], theta: &[F]) -> Result<()> {
    if x.len() != circuit.d {
        return Err(Error::DimensionMismatch {
            what: "x",
            expected: circuit.d,
            got: x.len(),
        });
    }
    if theta.len() != circuit.w {
        return Err(Error::DimensionMismatch {
            what: "theta",
            expected: circuit.w,
            got: theta.len(),
        });
    }
    Ok(())
}

/// Simulator with a configurable qubit cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Simulator {
    pub max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Simulator {
            max_qubits: DEFAULT_QUBIT_CAP,
        }
    }
}

impl Simulator {
    pub fn state<F: Real>(&self, circuit: &Circuit, x: &[F], theta: &[F]) -> Result<StateVector<F>> {
        validate(circuit)?;
        check_inputs(circuit, x, theta)?;
        run_with(circuit, self.max_qubits, |i| match &circuit.gates[i] {
            Gate::Rotation { param, .. } => param.angle(x, theta),
            Gate::Clifford(_) => F::zero(),
        })
    }

    /// Complex `⟨0|U† O U|0⟩`; the imaginary part is rounding noise.
    pub fn expectation_complex<F: Real>(
        &self,
        circuit: &Circuit,
        obs: &Observable,
        x: &[F],
        theta: &[F],
    ) -> Result<Complex<F>> {
        validate_observable(obs, circuit.n_qubits)?;
        self.state(circuit, x, theta)?.expectation_observable(obs)
    }

    pub fn expectation<F: Real>(&self, circuit: &Circuit, obs: &Observable, x: &[F], theta: &[F]) -> Result<F> {
        Ok(self.expectation_complex(circuit, obs, x, theta)?.re)
    }

    /// `⟨0|R_1† … R_L† O R_L … R_1|0⟩` for a normal form.
    pub fn expectation_normal_form<F: Real>(&self, nf: &NormalForm, x: &[F], theta: &[F]) -> Result<Complex<F>> {
        let mut psi = StateVector::zero(nf.n_qubits, self.max_qubits)?;
        for g in &nf.generators {
            psi.apply_pauli_rotation(&g.pauli, g.param.angle(x, theta))?;
        }
        psi.expectation_pauli(&nf.observable)
    }
}

pub fn expectation<F: Real>(circuit: &Circuit, obs: &Observable, x: &[F], theta: &[F]) -> Result<F> {
    Simulator::default().expectation(circuit, obs, x, theta)
}

/// Fourier coefficients of `x ↦ f_θ(x)` by sampling on the uniform grid with
/// `2N_j + 1` points per feature and applying the discrete transform. Exact
/// (to rounding) because the model is band-limited by the encoding counts.
pub fn grid_dft_coefficients(
    circuit: &Circuit,
    obs: &Observable,
    theta: &[f64],
    encoding_counts: &[usize],
) -> Result<BTreeMap<Frequency, Complex<f64>>> {
    if encoding_counts.len() != circuit.d {
        return Err(Error::DimensionMismatch {
            what: "encoding counts",
            expected: circuit.d,
            got: encoding_counts.len(),
        });
    }
    let sizes: Vec<usize> = encoding_counts.iter().map(|n| 2 * n + 1).collect();
    let total = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&t| t <= MAX_DFT_GRID)
        .ok_or_else(|| Error::Capacity(format!("sampling grid exceeds {MAX_DFT_GRID} points")))?;
    let sim = Simulator::default();
    let points: Vec<Vec<usize>> = (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; sizes.len()];
            for j in (0..sizes.len()).rev() {
                idx[j] = flat % sizes[j];
                flat /= sizes[j];
            }
            idx
        })
        .collect();
    let tau = std::f64::consts::TAU;
    let values: Vec<f64> = points
        .par_iter()
        .map(|idx| {
            let x: Vec<f64> = idx.iter().zip(&sizes).map(|(&k, &s)| tau * k as f64 / s as f64).collect();
            sim.expectation(circuit, obs, &x, theta)
        })
        .collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    for omega in naive_spectrum(encoding_counts) {
        let mut acc = Complex::new(0.0, 0.0);
        for (idx, &v) in points.iter().zip(&values) {
            // exact integer phase reduction keeps the transform accurate
            let mut phase = 0.0;
            for j in 0..sizes.len() {
                let k = (omega.0[j] * idx[j] as i64).rem_euclid(sizes[j] as i64);
                phase += k as f64 / sizes[j] as f64;
            }
            acc += Complex::from_polar(v, -tau * phase);
        }
        out.insert(omega, acc / total as f64);
    }
    Ok(out)
}

/// `∂f/∂θ_k = Σ_g [f(θ_g + π/2) - f(θ_g - π/2)] / 2` over every rotation `g`
/// that reads `θ_k`.
pub fn parameter_shift_gradient<F: Real>(circuit: &Circuit, obs: &Observable, x: &[F], theta: &[F]) -> Result<Vec<F>> {
    validate(circuit)?;
    validate_observable(obs, circuit.n_qubits)?;
    check_inputs(circuit, x, theta)?;
    let shift = F::FRAC_PI_2();
    let mut grad = vec![F::zero(); circuit.w];
    for (gi, g) in circuit.gates.iter().enumerate() {
        let Gate::Rotation { param, .. } = g else { continue };
        if param.kind != ParamKind::Variational {
            continue;
        }
        let eval = |delta: F| -> Result<F> {
            let psi = run_with(circuit, DEFAULT_QUBIT_CAP, |i| match &circuit.gates[i] {
                Gate::Rotation { param, .. } => {
                    let a = param.angle(x, theta);
                    if i == gi {
                        a + delta
                    } else {
                        a
                    }
                }
                Gate::Clifford(_) => F::zero(),
            })?;
            Ok(psi.expectation_observable(obs)?.re)
        };
        let plus = eval(shift)?;
        let minus = eval(-shift)?;
        grad[param.index] += (plus - minus) / F::lit(2.0);
    }
    Ok(grad)
}

// ---------------------------------------------------------------------------
// Training

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<Vec<f64>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.005,
            batch: 128,
            epochs: 100,
            seed: 0,
            initial_theta: None,
        }
    }
}

/// Circuit-ready samples: features already mapped to angles.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleData<F> {
    pub x: Vec<Vec<F>>,
    pub y: Vec<F>,
}

impl<F: Real> AngleData<F> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub test_mse: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub initial_theta: Vec<f64>,
    pub theta: Vec<f64>,
    pub history: Vec<EpochRecord>,
    pub min_test_mse: Option<f64>,
}

pub fn mse<F: Real>(circuit: &Circuit, obs: &Observable, data: &AngleData<F>, theta: &[F]) -> Result<F> {
    if data.is_empty() {
        return Ok(F::zero());
    }
    let sim = Simulator::default();
    let mut total = F::zero();
    for (x, &y) in data.x.iter().zip(&data.y) {
        let r = sim.expectation(circuit, obs, x, theta)? - y;
        total += r * r;
    }
    Ok(total / F::lit(data.len() as f64))
}

/// Adam on the MSE loss with parameter-shift gradients. θ starts uniform on
/// `[-π, π)` unless given; batches follow a seeded shuffle per epoch.
pub fn train<F: Real>(
    circuit: &Circuit,
    obs: &Observable,
    train_data: &AngleData<F>,
    test_data: Option<&AngleData<F>>,
    config: &TrainConfig,
) -> Result<TrainResult> {
    validate(circuit)?;
    validate_observable(obs, circuit.n_qubits)?;
    if train_data.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if config.batch == 0 || !(config.lr > 0.0) {
        return Err(Error::InvalidInput("batch size and learning rate must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial: Vec<f64> = match &config.initial_theta {
        Some(t) if t.len() != circuit.w => {
            return Err(Error::DimensionMismatch {
                what: "initial theta",
                expected: circuit.w,
                got: t.len(),
            })
        }
        Some(t) => t.clone(),
        None => (0..circuit.w)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect(),
    };
    let mut theta: Vec<F> = initial.iter().map(|&v| F::lit(v)).collect();
    let (b1, b2, eps) = (F::lit(0.9), F::lit(0.999), F::lit(1e-8));
    let lr = F::lit(config.lr);
    let mut m = vec![F::zero(); circuit.w];
    let mut v = vec![F::zero(); circuit.w];
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let sim = Simulator::default();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch) {
            let mut grad = vec![F::zero(); circuit.w];
            for &j in batch {
                let (x, y) = (&train_data.x[j], train_data.y[j]);
                let r = sim.expectation(circuit, obs, x, &theta)? - y;
                let g = parameter_shift_gradient(circuit, obs, x, &theta)?;
                for k in 0..circuit.w {
                    grad[k] += F::lit(2.0) * r * g[k];
                }
            }
            let scale = F::one() / F::lit(batch.len() as f64);
            step += 1;
            let (c1, c2) = (F::one() - b1.powi(step), F::one() - b2.powi(step));
            for k in 0..circuit.w {
                let g = grad[k] * scale;
                m[k] = b1 * m[k] + (F::one() - b1) * g;
                v[k] = b2 * v[k] + (F::one() - b2) * g * g;
                theta[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
            }
        }
        let to = |v: F| v.to_f64().unwrap_or(f64::NAN);
        history.push(EpochRecord {
            epoch,
            train_mse: to(mse(circuit, obs, train_data, &theta)?),
            test_mse: match test_data {
                Some(t) => Some(to(mse(circuit, obs, t, &theta)?)),
                None => None,
            },
        });
    }
    let min_test_mse = history
        .iter()
        .filter_map(|h| h.test_mse)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    Ok(TrainResult {
        initial_theta: initial,
        theta: theta.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        history,
        min_test_mse,
    })
}

/// `epoch,train_mse,test_mse` rows.
pub fn loss_curve_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_mse,test_mse\n");
    for h in history {
        let test = h.test_mse.map(|v| format!("{v:?}")).unwrap_or_default();
        out.push_str(&format!("{},{:?},{}\n", h.epoch, h.train_mse, test));
    }
    out
}

// ---------------------------------------------------------------------------
// Friedman benchmark

/// `10 sin(π x1 x2) + 20 (x3 - 1/2)² + 10 x4 + 5 x5`
pub fn friedman_value(x: &[f64; 5]) -> f64 {
    10.0 * (std::f64::consts::PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

/// `M` samples uniform on `[0,1]^5`, optional Gaussian label noise.
pub fn friedman_dataset(m: usize, seed: u64, noise: f64) -> Result<RawData> {
    if m == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::InvalidInput("noise level must be a non-negative number".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, if noise > 0.0 { noise } else { 1.0 }).expect("valid deviation");
    let mut features = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let x: [f64; 5] = std::array::from_fn(|_| rng.gen::<f64>());
        let mut y = friedman_value(&x);
        if noise > 0.0 {
            y += normal.sample(&mut rng);
        }
        features.push(x.to_vec());
        labels.push(y);
    }
    Ok(RawData { features, labels })
}

/// Affine label map `y ↦ (y - shift) / scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMap {
    pub shift: f64,
    pub scale: f64,
}

impl LabelMap {
    /// Zero mean, unit population variance; constant labels keep unit scale.
    pub fn standardizing(labels: &[f64]) -> Self {
        let n = labels.len().max(1) as f64;
        let mean = labels.iter().sum::<f64>() / n;
        let var = labels.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        LabelMap {
            shift: mean,
            scale: if var > 0.0 { var.sqrt() } else { 1.0 },
        }
    }

    pub fn apply(&self, y: f64) -> f64 {
        (y - self.shift) / self.scale
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.scale + self.shift
    }
}

// ---------------------------------------------------------------------------
// Dense matrices for small-width checks

/// Row-major `2^n × 2^n` matrix of a Pauli string, phase included.
pub fn dense_pauli_matrix(p: &SignedPauli) -> Vec<Complex<f64>> {
    let n = p.n_qubits();
    let dim = 1usize << n;
    let mut out = vec![Complex::zero(); dim * dim];
    for col in 0..dim {
        let mut basis = StateVector::<f64> {
            n_qubits: n,
            amps: vec![Complex::zero(); dim],
        };
        basis.amps[col] = Complex::new(1.0, 0.0);
        let image = basis.pauli_image(p).expect("matching width");
        for (row, v) in image.into_iter().enumerate() {
            out[row * dim + col] = v;
        }
    }
    out
}

pub fn dense_matmul(a: &[Complex<f64>], b: &[Complex<f64>], dim: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::zero(); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == Complex::zero() {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}
