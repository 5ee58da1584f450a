//! Phased Pauli strings and their Clifford conjugation.
//!
//! A [`SignedPauli`] stores its letters as two bitmasks (`x`, `z`) with the
//! encoding `I = (0,0)`, `X = (1,0)`, `Y = (1,1)`, `Z = (0,1)` and a global
//! phase kept as an exponent of `i` modulo 4. The letter `Y` is the actual
//! Pauli Y, so `Y = i·X·Z` letter-wise.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{i_power, GaussianRational, Real};

/// A fourth root of unity, `i^exponent`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(exponent: i64) -> Phase {
        Phase(exponent.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex<F: Real>(self) -> Complex<F> {
        let (o, z) = (F::one(), F::zero());
        match self.0 {
            0 => Complex::new(o, z),
            1 => Complex::new(z, o),
            2 => Complex::new(-o, z),
            _ => Complex::new(z, -o),
        }
    }

    pub fn to_gaussian(self) -> GaussianRational {
        i_power(self.0)
    }

    /// `(re, im)` as small integers.
    pub fn to_int_pair(self) -> (i64, i64) {
        match self.0 {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl std::ops::MulAssign for Phase {
    fn mul_assign(&mut self, rhs: Phase) {
        *self = *self * rhs;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> PauliLetter {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn from_char(c: char) -> Option<PauliLetter> {
        match c {
            'I' => Some(PauliLetter::I),
            'X' => Some(PauliLetter::X),
            'Y' => Some(PauliLetter::Y),
            'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli string with a phase in `{+1, -1, +i, -i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    n_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Phase,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl SignedPauli {
    pub fn identity(n_qubits: usize) -> Self {
        let w = word_count(n_qubits);
        SignedPauli {
            n_qubits,
            x: vec![0; w],
            z: vec![0; w],
            phase: Phase::ONE,
        }
    }

    /// Single letter on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: PauliLetter) -> Self {
        let mut p = Self::identity(n_qubits);
        p.set_letter(qubit, letter);
        p
    }

    pub fn from_letters(letters: &[PauliLetter], phase: Phase) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p.phase = phase;
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// Multiplies the global phase by `phase`.
    pub fn scaled(mut self, phase: Phase) -> Self {
        self.phase *= phase;
        self
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let (w, b) = (qubit / 64, qubit % 64);
        PauliLetter::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set_letter(&mut self, qubit: usize, letter: PauliLetter) {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let (w, b) = (qubit / 64, qubit % 64);
        let (x, z) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn letters(&self) -> Vec<PauliLetter> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| self.letter(q) != PauliLetter::I)
            .collect()
    }

    pub fn is_identity_letters(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Hermitian iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// X and Z bitmasks of the first 64 qubits (used by the dense simulator).
    pub fn masks_u64(&self) -> (u64, u64) {
        (self.x[0], self.z[0])
    }

    fn check_width(&self, other: &SignedPauli) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::WidthMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }

    /// Operator product `self · other` with exact phase bookkeeping.
    pub fn multiply(&self, other: &SignedPauli) -> Result<SignedPauli> {
        self.check_width(other)?;
        let mut exponent = self.phase.exponent() as i64 + other.phase.exponent() as i64;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (ax, az, bx, bz) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let (a_x, a_y, a_z) = (ax & !az, ax & az, !ax & az);
            let (b_x, b_y, b_z) = (bx & !bz, bx & bz, !bx & bz);
            // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i
            let cyclic = (a_x & b_y) | (a_y & b_z) | (a_z & b_x);
            let anti = (a_y & b_x) | (a_z & b_y) | (a_x & b_z);
            exponent += cyclic.count_ones() as i64 - anti.count_ones() as i64;
            x.push(ax ^ bx);
            z.push(az ^ bz);
        }
        Ok(SignedPauli {
            n_qubits: self.n_qubits,
            x,
            z,
            phase: Phase::from_exponent(exponent),
        })
    }

    /// True iff the two strings commute.
    pub fn commutes(&self, other: &SignedPauli) -> Result<bool> {
        self.check_width(other)?;
        let parity = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((&ax, &az), (&bx, &bz))| ((ax & bz) ^ (az & bx)).count_ones())
            .sum::<u32>();
        Ok(parity % 2 == 0)
    }

    /// `⟨0…0| P |0…0⟩`: the phase when every letter is I or Z, otherwise zero
    /// (returned as `None`).
    pub fn zero_state_expectation(&self) -> Option<Phase> {
        if self.x.iter().all(|&w| w == 0) {
            Some(self.phase)
        } else {
            None
        }
    }

    pub fn zero_state_expectation_complex<F: Real>(&self) -> Complex<F> {
        self.zero_state_expectation()
            .map(Phase::to_complex)
            .unwrap_or_else(|| Complex::new(F::zero(), F::zero()))
    }

    fn restrict(&self, qubits: &[usize]) -> SignedPauli {
        let letters: Vec<_> = qubits.iter().map(|&q| self.letter(q)).collect();
        SignedPauli::from_letters(&letters, Phase::ONE)
    }

    fn splice(&mut self, qubits: &[usize], local: &SignedPauli) {
        for (i, &q) in qubits.iter().enumerate() {
            self.set_letter(q, local.letter(i));
        }
        self.phase *= local.phase;
    }
}

/// Pauli strings are written qubit 0 first, optionally prefixed by a phase:
/// `ZI`, `-XY`, `iZ`, `-iYY`.
impl FromStr for SignedPauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else {
            (Phase::ONE, s)
        };
        if rest.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string '{s}'")));
        }
        let letters = rest
            .chars()
            .map(|c| {
                PauliLetter::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli letter '{c}' in '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SignedPauli::from_letters(&letters, phase))
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.exponent() {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl Serialize for SignedPauli {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedPauli {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The supported constant gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

/// Which side the gate's adjoint sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `g · P · g†`
    PushRight,
    /// `g† · P · g`
    Absorb,
}

impl CliffordGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(q) | CliffordGate::S(q) => vec![q],
            CliffordGate::Cnot { control, target } => vec![control, target],
            CliffordGate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliffordGate::H(_) => "h",
            CliffordGate::S(_) => "s",
            CliffordGate::Cnot { .. } => "cnot",
            CliffordGate::Cz(..) => "cz",
        }
    }

    /// Images of the local generators `(X_i, Z_i)` under the given direction,
    /// expressed on the gate's own qubits.
    fn local_images(&self, direction: Direction) -> Vec<(SignedPauli, SignedPauli)> {
        let p = |s: &str| s.parse::<SignedPauli>().expect("static Pauli literal");
        match (self, direction) {
            (CliffordGate::H(_), _) => vec![(p("Z"), p("X"))],
            (CliffordGate::S(_), Direction::PushRight) => vec![(p("Y"), p("Z"))],
            (CliffordGate::S(_), Direction::Absorb) => vec![(p("-Y"), p("Z"))],
            (CliffordGate::Cnot { .. }, _) => vec![(p("XX"), p("ZI")), (p("IX"), p("ZZ"))],
            (CliffordGate::Cz(..), _) => vec![(p("XZ"), p("ZI")), (p("ZX"), p("IZ"))],
        }
    }
}

/// Conjugates `p` by the Clifford gate `g`.
///
/// The gate's local action is reconstructed from its images of `X_i` and
/// `Z_i`: a local letter string equals `i^{#Y} · Πx X_i · Πz Z_i`, so its image
/// is the same product of images.
pub fn clifford_conjugate(g: &CliffordGate, p: &SignedPauli, direction: Direction) -> Result<SignedPauli> {
    let qubits = g.qubits();
    for &q in &qubits {
        if q >= p.n_qubits() {
            return Err(Error::InvalidInput(format!(
                "gate {} acts on qubit {q} outside width {}",
                g.name(),
                p.n_qubits()
            )));
        }
    }
    if qubits.len() == 2 && qubits[0] == qubits[1] {
        return Err(Error::InvalidInput(format!("gate {} has duplicate qubit", g.name())));
    }
    let local = p.restrict(&qubits);
    let images = g.local_images(direction);
    let k = qubits.len();
    let mut y_count = 0u8;
    let mut xs = SignedPauli::identity(k);
    let mut zs = SignedPauli::identity(k);
    for (i, (img_x, img_z)) in images.iter().enumerate() {
        let (x, z) = local.letter(i).bits();
        if x && z {
            y_count += 1;
        }
        if x {
            xs = xs.multiply(img_x)?;
        }
        if z {
            zs = zs.multiply(img_z)?;
        }
    }
    let image = xs.multiply(&zs)?.scaled(Phase::from_exponent(y_count as i64));
    let mut out = p.clone();
    out.splice(&qubits, &image);
    Ok(out)
}
