#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use vqc_spectrum::circuit::{Axis, Circuit, Gate, Observable, ParamKind, ParamRef};
use vqc_spectrum::{CliffordGate, Model, NormalForm, SignedPauli};

pub type C64 = Complex<f64>;

pub fn random_pauli<R: Rng>(rng: &mut R, n: usize, allow_identity: bool) -> SignedPauli {
    loop {
        let s: String = (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)]).collect();
        let p: SignedPauli = s.parse().unwrap();
        if allow_identity || !p.is_identity_letters() {
            return p;
        }
    }
}

pub fn random_phased_pauli<R: Rng>(rng: &mut R, n: usize) -> SignedPauli {
    let p = random_pauli(rng, n, true);
    let prefix = ["", "i", "-", "-i"][rng.gen_range(0..4)];
    format!("{prefix}{p}").parse().unwrap()
}

pub fn random_clifford<R: Rng>(rng: &mut R, n: usize) -> CliffordGate {
    let q = rng.gen_range(0..n);
    if n < 2 {
        return if rng.gen_bool(0.5) { CliffordGate::H(q) } else { CliffordGate::S(q) };
    }
    let mut r = rng.gen_range(0..n - 1);
    if r >= q {
        r += 1;
    }
    match rng.gen_range(0..4) {
        0 => CliffordGate::H(q),
        1 => CliffordGate::S(q),
        2 => CliffordGate::Cnot { control: q, target: r },
        _ => CliffordGate::Cz(q, r),
    }
}

/// Relabels parameter indices by first use so the circuit validates.
fn compact(gates: Vec<Gate>, n: usize) -> Circuit {
    let mut features: Vec<usize> = Vec::new();
    let mut thetas: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        out.push(match g {
            Gate::Rotation { axis, qubit, param } => {
                let list = match param.kind {
                    ParamKind::Feature => &mut features,
                    ParamKind::Variational => &mut thetas,
                };
                let idx = list.iter().position(|&v| v == param.index).unwrap_or_else(|| {
                    list.push(param.index);
                    list.len() - 1
                });
                Gate::Rotation {
                    axis,
                    qubit,
                    param: ParamRef { kind: param.kind, index: idx },
                }
            }
            other => other,
        });
    }
    let mut c = Circuit::new(n, features.len(), thetas.len());
    c.gates = out;
    c
}

/// Random Clifford + Pauli-rotation circuit with a random observable.
pub fn random_model<R: Rng>(rng: &mut R, max_qubits: usize, max_rotations: usize, max_cliffords: usize) -> Model {
    let n = rng.gen_range(1..=max_qubits);
    let n_rot = rng.gen_range(1..=max_rotations);
    let n_cl = rng.gen_range(0..=max_cliffords);
    let mut slots: Vec<bool> = std::iter::repeat(true)
        .take(n_rot)
        .chain(std::iter::repeat(false).take(n_cl))
        .collect();
    for i in (1..slots.len()).rev() {
        slots.swap(i, rng.gen_range(0..=i));
    }
    let gates: Vec<Gate> = slots
        .into_iter()
        .map(|rot| {
            if rot {
                let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
                let param = if rng.gen_bool(0.5) {
                    ParamRef::feature(rng.gen_range(0..3))
                } else {
                    ParamRef::theta(rng.gen_range(0..3))
                };
                Gate::Rotation {
                    axis,
                    qubit: rng.gen_range(0..n),
                    param,
                }
            } else {
                Gate::Clifford(random_clifford(rng, n))
            }
        })
        .collect();
    let circuit = compact(gates, n);
    let mut obs = Observable {
        terms: Vec::new(),
    };
    let n_terms = if rng.gen_bool(0.7) { 1 } else { rng.gen_range(2..=3) };
    for _ in 0..n_terms {
        let weight = if n_terms == 1 && rng.gen_bool(0.5) {
            1.0
        } else {
            // dyadic weights keep exact rational scaling short
            rng.gen_range(-8i32..=8) as f64 / 4.0
        };
        let mut p = random_pauli(rng, n, false);
        if rng.gen_bool(0.3) {
            p = format!("-{p}").parse().unwrap();
        }
        obs = obs.add(weight, p);
    }
    Model::new(circuit, obs)
}

pub fn random_point<R: Rng>(rng: &mut R, d: usize, w: usize) -> (Vec<f64>, Vec<f64>) {
    let pi = std::f64::consts::PI;
    (
        (0..d).map(|_| rng.gen_range(-pi..pi)).collect(),
        (0..w).map(|_| rng.gen_range(-pi..pi)).collect(),
    )
}

// ---------------------------------------------------------------------------
// Dense matrices built by Kronecker products (qubit 0 is the least significant bit)

pub fn mat_1q(letter: char) -> [C64; 4] {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match letter {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => panic!("bad letter"),
    }
}

pub fn kron(a: &[C64], da: usize, b: &[C64], db: usize) -> Vec<C64> {
    let d = da * db;
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k) * d + j * db + l] = a[i * da + j] * b[k * db + l];
                }
            }
        }
    }
    out
}

pub fn dense_pauli(p: &SignedPauli) -> Vec<C64> {
    let text = p.to_string();
    let letters: String = text.chars().filter(|c| "IXYZ".contains(*c)).collect();
    let phase = match text.trim_end_matches(|c| "IXYZ".contains(c)) {
        "" | "+" => C64::new(1.0, 0.0),
        "-" => C64::new(-1.0, 0.0),
        "i" | "+i" => C64::new(0.0, 1.0),
        "-i" => C64::new(0.0, -1.0),
        other => panic!("unexpected prefix {other}"),
    };
    let mut m = vec![C64::new(1.0, 0.0)];
    let mut dim = 1;
    // highest qubit ends up most significant
    for ch in letters.chars() {
        m = kron(&mat_1q(ch), 2, &m, dim);
        dim *= 2;
    }
    m.into_iter().map(|v| v * phase).collect()
}

pub fn dense_clifford(g: &CliffordGate, n: usize) -> Vec<C64> {
    let dim = 1usize << n;
    let mut m = vec![C64::new(0.0, 0.0); dim * dim];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for col in 0..dim {
        match *g {
            CliffordGate::H(q) => {
                let b = (col >> q) & 1;
                m[(col & !(1 << q)) * dim + col] += C64::new(h, 0.0);
                m[(col | (1 << q)) * dim + col] += C64::new(if b == 1 { -h } else { h }, 0.0);
            }
            CliffordGate::S(q) => {
                m[col * dim + col] = if (col >> q) & 1 == 1 { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
            }
            CliffordGate::Cnot { control, target } => {
                let row = if (col >> control) & 1 == 1 { col ^ (1 << target) } else { col };
                m[row * dim + col] = C64::new(1.0, 0.0);
            }
            CliffordGate::Cz(a, b) => {
                let both = (col >> a) & 1 == 1 && (col >> b) & 1 == 1;
                m[col * dim + col] = C64::new(if both { -1.0 } else { 1.0 }, 0.0);
            }
        }
    }
    m
}

pub fn matmul(a: &[C64], b: &[C64], dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            for j in 0..dim {
                out[i * dim + j] += a[i * dim + k] * b[k * dim + j];
            }
        }
    }
    out
}

pub fn adjoint(a: &[C64], dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = a[i * dim + j].conj();
        }
    }
    out
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Integer Laurent polynomials: coefficient of z^ω in (z - 1/z)^s (z + 1/z)^c

pub fn laurent_weight(s: u32, c: u32, omega: i64) -> i128 {
    let deg = (s + c) as usize;
    // coefficients indexed by exponent + deg
    let mut poly = vec![0i128; 2 * deg + 1];
    poly[deg] = 1;
    let mul = |sign: i128, poly: &mut Vec<i128>| {
        let mut next = vec![0i128; poly.len()];
        for (e, &v) in poly.iter().enumerate() {
            if v == 0 {
                continue;
            }
            next[e + 1] += v;
            next[e - 1] += sign * v;
        }
        *poly = next;
    };
    for _ in 0..s {
        mul(-1, &mut poly);
    }
    for _ in 0..c {
        mul(1, &mut poly);
    }
    let idx = omega + deg as i64;
    if idx < 0 || idx as usize >= poly.len() {
        0
    } else {
        poly[idx as usize]
    }
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod (7, 15) quadrature

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<G: Fn(f64) -> C64>(f: &G, a: f64, b: f64) -> (C64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive quadrature of a complex integrand on `[a, b]`.
pub fn integrate<G: Fn(f64) -> C64>(f: &G, a: f64, b: f64, tol: f64) -> C64 {
    fn rec<G: Fn(f64) -> C64>(f: &G, a: f64, b: f64, tol: f64, depth: u32) -> C64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth > 30 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol / 2.0, depth + 1) + rec(f, m, b, tol / 2.0, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// Iterated adaptive quadrature over `[-π, π]^w`.
pub fn integrate_cube<G: Fn(&[f64]) -> C64>(f: &G, w: usize, tol: f64) -> C64 {
    fn rec<G: Fn(&[f64]) -> C64>(f: &G, prefix: &mut Vec<f64>, w: usize, tol: f64) -> C64 {
        let pi = std::f64::consts::PI;
        if prefix.len() == w {
            return f(prefix);
        }
        let inner = |t: f64| {
            let mut p = prefix.clone();
            p.push(t);
            rec(f, &mut p, w, tol)
        };
        integrate(&inner, -pi, pi, tol)
    }
    rec(f, &mut Vec::new(), w, tol)
}

// ---------------------------------------------------------------------------
// Dense reference simulator: every gate as a full matrix, state as a vector

pub fn rotation_matrix(p: &SignedPauli, phi: f64) -> Vec<C64> {
    let pm = dense_pauli(p);
    let dim = 1usize << p.n_qubits();
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let mut out: Vec<C64> = pm.iter().map(|v| v * C64::new(0.0, -s)).collect();
    for i in 0..dim {
        out[i * dim + i] += C64::new(c, 0.0);
    }
    out
}

fn apply(m: &[C64], v: &[C64]) -> Vec<C64> {
    let dim = v.len();
    (0..dim)
        .map(|i| (0..dim).map(|j| m[i * dim + j] * v[j]).sum())
        .collect()
}

fn zero_state(n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << n];
    v[0] = C64::new(1.0, 0.0);
    v
}

fn sandwich(v: &[C64], m: &[C64]) -> C64 {
    let mv = apply(m, v);
    v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
}

pub fn dense_state(circuit: &Circuit, x: &[f64], theta: &[f64]) -> Vec<C64> {
    let n = circuit.n_qubits;
    let mut v = zero_state(n);
    for g in &circuit.gates {
        let m = match g {
            Gate::Clifford(c) => dense_clifford(c, n),
            Gate::Rotation { axis, qubit, param } => {
                rotation_matrix(&SignedPauli::single(n, *qubit, axis.letter()), param.angle(x, theta))
            }
        };
        v = apply(&m, &v);
    }
    v
}

pub fn dense_expectation(circuit: &Circuit, obs: &Observable, x: &[f64], theta: &[f64]) -> f64 {
    let v = dense_state(circuit, x, theta);
    obs.terms
        .iter()
        .map(|t| t.weight * sandwich(&v, &dense_pauli(&t.pauli)).re)
        .sum()
}

pub fn dense_normal_form_expectation(nf: &NormalForm, x: &[f64], theta: &[f64]) -> C64 {
    let mut v = zero_state(nf.n_qubits);
    for g in &nf.generators {
        v = apply(&rotation_matrix(&g.pauli, g.param.angle(x, theta)), &v);
    }
    sandwich(&v, &dense_pauli(&nf.observable))
}

/// Mean of `y · e^{-i ω·x}` over the samples.
pub fn direct_dft(samples: &[(Vec<f64>, C64)], omega: &[i64]) -> C64 {
    let m = samples.len() as f64;
    samples
        .iter()
        .map(|(x, y)| {
            let phase: f64 = omega.iter().zip(x).map(|(&w, &v)| w as f64 * v).sum();
            y * C64::from_polar(1.0, -phase)
        })
        .sum::<C64>()
        / m
}

/// Central finite difference of `f` in every coordinate.
pub fn central_difference<G: Fn(&[f64]) -> f64>(f: G, at: &[f64], h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|k| {
            let mut p = at.to_vec();
            let mut m = at.to_vec();
            p[k] += h;
            m[k] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Ranking candidates on two features

fn f(i: usize) -> ParamRef {
    ParamRef::feature(i)
}

fn t(i: usize) -> ParamRef {
    ParamRef::theta(i)
}

/// Data source: entangled, both features re-uploaded on the measured qubit.
pub fn truth_model() -> Model {
    let c = Circuit::new(2, 2, 3)
        .with(Gate::h(1))
        .with(Gate::rz(1, f(1)))
        .with(Gate::ry(0, t(0)))
        .with(Gate::rx(0, f(0)))
        .with(Gate::cnot(0, 1))
        .with(Gate::ry(1, t(1)))
        .with(Gate::rx(1, f(1)))
        .with(Gate::ry(1, t(2)));
    Model::new(c, Observable::parse_single("IZ").unwrap()).named("truth")
}

/// Three data-reuploading layers; its spectrum contains the truth's.
pub fn superset_model() -> Model {
    let mut c = Circuit::new(2, 2, 8);
    let mut k = 0;
    for layer in 0..3 {
        c.push(Gate::ry(0, t(k)));
        c.push(Gate::ry(1, t(k + 1)));
        k += 2;
        c.push(Gate::rx(0, f(0)));
        if layer < 2 {
            c.push(Gate::rx(1, f(1)));
        }
        c.push(Gate::cnot(0, 1));
    }
    c.push(Gate::ry(0, t(6)));
    c.push(Gate::ry(1, t(7)));
    Model::new(c, Observable::parse_single("ZZ").unwrap()).named("superset")
}

/// Spectrum `{(±2, 0)}` only.
pub fn disjoint_model() -> Model {
    let c = Circuit::new(2, 2, 0)
        .with(Gate::rx(0, f(0)))
        .with(Gate::rx(0, f(0)))
        .with(Gate::rx(1, f(1)));
    Model::new(c, Observable::parse_single("ZI").unwrap()).named("disjoint")
}

/// Single qubit, seven frequencies along the first feature.
pub fn minimal_model() -> Model {
    let c = Circuit::new(1, 2, 4)
        .with(Gate::ry(0, t(0)))
        .with(Gate::rx(0, f(0)))
        .with(Gate::ry(0, t(1)))
        .with(Gate::rx(0, f(0)))
        .with(Gate::ry(0, t(2)))
        .with(Gate::rx(0, f(0)))
        .with(Gate::ry(0, t(3)));
    Model::new(c, Observable::parse_single("Z").unwrap()).named("minimal")
}

/// `m` torus samples of `model` at random θ, with Gaussian noise of
/// `noise` times the clean RMS.
pub fn synthesize(model: &Model, m: usize, noise: f64, seed: u64) -> vqc_spectrum::Dataset64 {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..model.circuit.w).map(|_| rng.gen_range(-3.14..3.14)).collect();
    let xs: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..model.circuit.d).map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect();
    let clean: Vec<f64> = xs
        .iter()
        .map(|u| {
            let a: Vec<f64> = u.iter().map(|v| std::f64::consts::TAU * v).collect();
            dense_expectation(&model.circuit, &model.observable, &a, &theta)
        })
        .collect();
    let rms = (clean.iter().map(|v| v * v).sum::<f64>() / m as f64).sqrt();
    let normal = Normal::new(0.0, noise * rms.max(1e-12)).unwrap();
    let y = clean.iter().map(|v| v + normal.sample(&mut rng)).collect();
    vqc_spectrum::Dataset64::new(xs, y).unwrap()
}
