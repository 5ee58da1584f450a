//! Circuit representation, validation, the JSON circuit file format and
//! transpilation into the Clifford-free normal form `(P_1, ..., P_L | O)`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{clifford_conjugate, CliffordGate, Direction, PauliLetter, SignedPauli};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Feature,
    #[serde(rename = "theta", alias = "variational")]
    Variational,
}

/// Which angle a rotation reads: input feature `x_index` or variational
/// parameter `theta_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRef {
    pub kind: ParamKind,
    pub index: usize,
}

impl ParamRef {
    pub fn feature(index: usize) -> Self {
        ParamRef {
            kind: ParamKind::Feature,
            index,
        }
    }

    pub fn theta(index: usize) -> Self {
        ParamRef {
            kind: ParamKind::Variational,
            index,
        }
    }

    /// Picks the angle out of `(x, theta)`.
    pub fn angle<T: Copy>(&self, x: &[T], theta: &[T]) -> T {
        match self.kind {
            ParamKind::Feature => x[self.index],
            ParamKind::Variational => theta[self.index],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn letter(self) -> PauliLetter {
        match self {
            Axis::X => PauliLetter::X,
            Axis::Y => PauliLetter::Y,
            Axis::Z => PauliLetter::Z,
        }
    }
}

/// A gate of a Clifford+Pauli circuit. Rotations implement
/// `R_P(φ) = exp(-i φ P / 2)` with the raw referenced angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Clifford(CliffordGate),
    Rotation {
        axis: Axis,
        qubit: usize,
        param: ParamRef,
    },
}

impl Gate {
    pub fn rx(qubit: usize, param: ParamRef) -> Gate {
        Gate::Rotation { axis: Axis::X, qubit, param }
    }
    pub fn ry(qubit: usize, param: ParamRef) -> Gate {
        Gate::Rotation { axis: Axis::Y, qubit, param }
    }
    pub fn rz(qubit: usize, param: ParamRef) -> Gate {
        Gate::Rotation { axis: Axis::Z, qubit, param }
    }
    pub fn h(qubit: usize) -> Gate {
        Gate::Clifford(CliffordGate::H(qubit))
    }
    pub fn s(qubit: usize) -> Gate {
        Gate::Clifford(CliffordGate::S(qubit))
    }
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::Clifford(CliffordGate::Cnot { control, target })
    }
    pub fn cz(a: usize, b: usize) -> Gate {
        Gate::Clifford(CliffordGate::Cz(a, b))
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Clifford(g) => g.qubits(),
            Gate::Rotation { qubit, .. } => vec![*qubit],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    /// Feature dimension.
    pub d: usize,
    /// Number of variational parameters.
    pub w: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, d: usize, w: usize) -> Self {
        Circuit {
            n_qubits,
            d,
            w,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn with(mut self, gate: Gate) -> Self {
        self.gates.push(gate);
        self
    }

    pub fn rotation_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Rotation { .. }))
            .count()
    }

    /// `N(x_j)`: how many rotations read feature `j`.
    pub fn encoding_counts(&self) -> Vec<usize> {
        self.param_counts(ParamKind::Feature, self.d)
    }

    /// How many rotations read each variational parameter.
    pub fn theta_counts(&self) -> Vec<usize> {
        self.param_counts(ParamKind::Variational, self.w)
    }

    fn param_counts(&self, kind: ParamKind, len: usize) -> Vec<usize> {
        let mut counts = vec![0; len];
        for g in &self.gates {
            if let Gate::Rotation { param, .. } = g {
                if param.kind == kind && param.index < len {
                    counts[param.index] += 1;
                }
            }
        }
        counts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableTerm {
    pub weight: f64,
    pub pauli: SignedPauli,
}

/// Real-weighted sum of Pauli strings.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Observable {
    pub terms: Vec<ObservableTerm>,
}

impl Observable {
    pub fn single(pauli: SignedPauli) -> Self {
        Observable {
            terms: vec![ObservableTerm { weight: 1.0, pauli }],
        }
    }

    pub fn parse_single(s: &str) -> Result<Self> {
        Ok(Self::single(s.parse()?))
    }

    pub fn add(mut self, weight: f64, pauli: SignedPauli) -> Self {
        self.terms.push(ObservableTerm { weight, pauli });
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationIssue {
    pub gate_index: Option<usize>,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gate_index {
            Some(i) => write!(f, "gate {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<ValidationIssue>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for ValidationErrors {}

/// Checks every structural invariant of the circuit and reports all
/// violations at once.
pub fn validate(circuit: &Circuit) -> std::result::Result<(), ValidationErrors> {
    let mut issues = Vec::new();
    let mut issue = |gate_index: Option<usize>, message: String| {
        issues.push(ValidationIssue { gate_index, message })
    };
    if circuit.n_qubits == 0 {
        issue(None, "circuit must have at least one qubit".into());
    }
    let mut used_features = BTreeSet::new();
    let mut used_thetas = BTreeSet::new();
    for (i, gate) in circuit.gates.iter().enumerate() {
        let qubits = gate.qubits();
        for &q in &qubits {
            if q >= circuit.n_qubits {
                issue(
                    Some(i),
                    format!("qubit {q} out of range for {} qubits", circuit.n_qubits),
                );
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            issue(Some(i), "duplicate qubit".into());
        }
        if let Gate::Rotation { param, .. } = gate {
            let (limit, name, used) = match param.kind {
                ParamKind::Feature => (circuit.d, "feature", &mut used_features),
                ParamKind::Variational => (circuit.w, "theta", &mut used_thetas),
            };
            if param.index >= limit {
                issue(
                    Some(i),
                    format!("{name} index {} out of range (limit {limit})", param.index),
                );
            } else {
                used.insert(param.index);
            }
        }
    }
    for (used, name) in [(&used_features, "feature"), (&used_thetas, "theta")] {
        if let Some(&max) = used.iter().next_back() {
            let missing: Vec<usize> = (0..max).filter(|i| !used.contains(i)).collect();
            if !missing.is_empty() {
                issue(
                    None,
                    format!("{name} indices not contiguous: {missing:?} unused below {max}"),
                );
            }
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(ValidationErrors(issues))
    }
}

pub fn validate_observable(
    observable: &Observable,
    n_qubits: usize,
) -> std::result::Result<(), ValidationErrors> {
    let mut issues = Vec::new();
    if observable.terms.is_empty() {
        issues.push(ValidationIssue {
            gate_index: None,
            message: "observable has no terms".into(),
        });
    }
    for (i, t) in observable.terms.iter().enumerate() {
        let mut bad = |message: String| {
            issues.push(ValidationIssue {
                gate_index: None,
                message: format!("observable term {i}: {message}"),
            })
        };
        if t.pauli.n_qubits() != n_qubits {
            bad(format!(
                "width {} does not match {n_qubits} qubits",
                t.pauli.n_qubits()
            ));
        }
        if !t.weight.is_finite() {
            bad("weight is not finite".into());
        }
        if !t.pauli.is_hermitian() {
            bad("imaginary phase makes the term non-Hermitian".into());
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(ValidationErrors(issues))
    }
}

/// One rotation generator of a normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub pauli: SignedPauli,
    pub param: ParamRef,
}

/// `(P_1, ..., P_L | O)`: rotations only, with every Clifford absorbed into
/// the observable. `P_1` acts first on `|0…0⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub n_qubits: usize,
    pub d: usize,
    pub w: usize,
    pub generators: Vec<Generator>,
    pub observable: SignedPauli,
}

/// Moves every Clifford gate to the end of the circuit and absorbs it into
/// each observable term.
///
/// A Clifford `g` moved past a later rotation turns its generator `P` into
/// `g† P g`; the accumulated Clifford word `V` turns the observable `O` into
/// `V† O V`. The sweep walks the gates backwards so each conjugation is a
/// single gate step.
pub fn to_normal_forms(circuit: &Circuit, observable: &Observable) -> Result<Vec<(f64, NormalForm)>> {
    validate(circuit)?;
    validate_observable(observable, circuit.n_qubits)?;
    let mut generators: Vec<Generator> = Vec::with_capacity(circuit.rotation_count());
    let mut observables: Vec<SignedPauli> = observable.terms.iter().map(|t| t.pauli.clone()).collect();
    for gate in circuit.gates.iter().rev() {
        match gate {
            Gate::Rotation { axis, qubit, param } => generators.push(Generator {
                pauli: SignedPauli::single(circuit.n_qubits, *qubit, axis.letter()),
                param: *param,
            }),
            Gate::Clifford(g) => {
                for gen in generators.iter_mut() {
                    gen.pauli = clifford_conjugate(g, &gen.pauli, Direction::Absorb)?;
                }
                for o in observables.iter_mut() {
                    *o = clifford_conjugate(g, o, Direction::Absorb)?;
                }
            }
        }
    }
    generators.reverse();
    Ok(observable
        .terms
        .iter()
        .zip(observables)
        .map(|(t, o)| {
            (
                t.weight,
                NormalForm {
                    n_qubits: circuit.n_qubits,
                    d: circuit.d,
                    w: circuit.w,
                    generators: generators.clone(),
                    observable: o,
                },
            )
        })
        .collect())
}

// ---------------------------------------------------------------------------
// File format

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GateSpec {
    Rx { qubit: usize, param: ParamRef },
    Ry { qubit: usize, param: ParamRef },
    Rz { qubit: usize, param: ParamRef },
    H { qubits: Vec<usize> },
    S { qubits: Vec<usize> },
    Cnot { qubits: Vec<usize> },
    Cz { qubits: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    weight: f64,
    pauli: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    n_qubits: usize,
    d: usize,
    w: usize,
    gates: Vec<GateSpec>,
    observable: Vec<TermSpec>,
}

/// A circuit together with its observable, as stored in a circuit file.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub name: Option<String>,
    pub circuit: Circuit,
    pub observable: Observable,
}

impl Model {
    pub fn new(circuit: Circuit, observable: Observable) -> Self {
        Model {
            name: None,
            circuit,
            observable,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Parses and validates a circuit file.
    pub fn from_json_str(text: &str) -> Result<Model> {
        let file: ModelFile = serde_json::from_str(text)?;
        let mut circuit = Circuit::new(file.n_qubits, file.d, file.w);
        for (i, g) in file.gates.into_iter().enumerate() {
            let arity = |qubits: &Vec<usize>, want: usize, name: &str| -> Result<()> {
                if qubits.len() != want {
                    return Err(Error::Parse(format!(
                        "gate {i}: {name} takes {want} qubit(s), got {}",
                        qubits.len()
                    )));
                }
                Ok(())
            };
            let gate = match g {
                GateSpec::Rx { qubit, param } => Gate::rx(qubit, param),
                GateSpec::Ry { qubit, param } => Gate::ry(qubit, param),
                GateSpec::Rz { qubit, param } => Gate::rz(qubit, param),
                GateSpec::H { qubits } => {
                    arity(&qubits, 1, "h")?;
                    Gate::h(qubits[0])
                }
                GateSpec::S { qubits } => {
                    arity(&qubits, 1, "s")?;
                    Gate::s(qubits[0])
                }
                GateSpec::Cnot { qubits } => {
                    arity(&qubits, 2, "cnot")?;
                    Gate::cnot(qubits[0], qubits[1])
                }
                GateSpec::Cz { qubits } => {
                    arity(&qubits, 2, "cz")?;
                    Gate::cz(qubits[0], qubits[1])
                }
            };
            circuit.push(gate);
        }
        let mut observable = Observable::default();
        for t in file.observable {
            let pauli: SignedPauli = t.pauli.parse()?;
            if pauli.phase() != crate::pauli::Phase::ONE {
                return Err(Error::Parse(format!(
                    "observable string '{}' must not carry a phase; use the weight",
                    t.pauli
                )));
            }
            observable.terms.push(ObservableTerm { weight: t.weight, pauli });
        }
        validate(&circuit)?;
        validate_observable(&observable, circuit.n_qubits)?;
        Ok(Model {
            name: file.name,
            circuit,
            observable,
        })
    }

    pub fn from_path(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path)?;
        let mut model = Self::from_json_str(&text)?;
        if model.name.is_none() {
            model.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(model)
    }

    pub fn to_json_string(&self) -> String {
        let gates = self
            .circuit
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Rotation { axis, qubit, param } => match axis {
                    Axis::X => GateSpec::Rx { qubit, param },
                    Axis::Y => GateSpec::Ry { qubit, param },
                    Axis::Z => GateSpec::Rz { qubit, param },
                },
                Gate::Clifford(c) => {
                    let qubits = c.qubits();
                    match c {
                        CliffordGate::H(_) => GateSpec::H { qubits },
                        CliffordGate::S(_) => GateSpec::S { qubits },
                        CliffordGate::Cnot { .. } => GateSpec::Cnot { qubits },
                        CliffordGate::Cz(..) => GateSpec::Cz { qubits },
                    }
                }
            })
            .collect();
        let file = ModelFile {
            name: self.name.clone(),
            n_qubits: self.circuit.n_qubits,
            d: self.circuit.d,
            w: self.circuit.w,
            gates,
            observable: self
                .observable
                .terms
                .iter()
                .map(|t| {
                    let sign = if t.pauli.phase() == crate::pauli::Phase::MINUS_ONE { -1.0 } else { 1.0 };
                    TermSpec {
                        weight: sign * t.weight,
                        pauli: t.pauli.clone().with_phase(crate::pauli::Phase::ONE).to_string(),
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn id(&self) -> String {
        self.name.clone().unwrap_or_else(|| "circuit".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> SignedPauli {
        s.parse().unwrap()
    }

    #[test]
    fn empty_circuit_is_valid() {
        assert!(validate(&Circuit::new(1, 0, 0)).is_ok());
    }

    #[test]
    fn duplicate_qubit_is_reported() {
        let c = Circuit::new(2, 0, 0).with(Gate::cnot(0, 0));
        let err = validate(&c).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].gate_index, Some(0));
        assert!(err.0[0].message.contains("duplicate qubit"));
    }

    #[test]
    fn feature_index_out_of_range() {
        let c = Circuit::new(1, 2, 0).with(Gate::rx(0, ParamRef::feature(3)));
        let err = validate(&c).unwrap_err();
        assert!(err.0[0].message.contains("feature index 3"));
    }

    #[test]
    fn non_contiguous_indices_are_rejected() {
        let c = Circuit::new(1, 0, 3).with(Gate::rx(0, ParamRef::theta(2)));
        let err = validate(&c).unwrap_err();
        assert!(err.to_string().contains("not contiguous"));
    }

    #[test]
    fn all_issues_reported_together() {
        let c = Circuit::new(2, 1, 0)
            .with(Gate::cz(1, 1))
            .with(Gate::ry(5, ParamRef::feature(0)));
        assert_eq!(validate(&c).unwrap_err().0.len(), 2);
    }

    #[test]
    fn clifford_only_circuit_absorbs_into_observable() {
        let c = Circuit::new(2, 0, 0).with(Gate::h(0)).with(Gate::cnot(0, 1));
        let nfs = to_normal_forms(&c, &Observable::single(p("IZ"))).unwrap();
        assert_eq!(nfs.len(), 1);
        assert!(nfs[0].1.generators.is_empty());
        // CNOT† (I⊗Z) CNOT = Z⊗Z, then H† (Z⊗Z) H = X⊗Z
        assert_eq!(nfs[0].1.observable, p("XZ"));
    }

    #[test]
    fn rotation_then_hadamard() {
        let c = Circuit::new(1, 0, 1)
            .with(Gate::rx(0, ParamRef::theta(0)))
            .with(Gate::h(0));
        let (_, nf) = to_normal_forms(&c, &Observable::single(p("Z"))).unwrap().remove(0);
        assert_eq!(nf.generators.len(), 1);
        assert_eq!(nf.generators[0].pauli, p("X"));
        assert_eq!(nf.observable, p("X"));
    }

    #[test]
    fn earlier_cliffords_rotate_later_generators() {
        // S then RX: the generator becomes S† X S = -Y
        let c = Circuit::new(1, 1, 0)
            .with(Gate::s(0))
            .with(Gate::rx(0, ParamRef::feature(0)));
        let (_, nf) = to_normal_forms(&c, &Observable::single(p("Z"))).unwrap().remove(0);
        assert_eq!(nf.generators[0].pauli, p("-Y"));
        assert_eq!(nf.observable, p("Z"));
    }

    #[test]
    fn doubled_encoding_normal_form() {
        let c = Circuit::new(2, 2, 0)
            .with(Gate::rx(0, ParamRef::feature(0)))
            .with(Gate::rx(0, ParamRef::feature(0)))
            .with(Gate::rx(1, ParamRef::feature(1)));
        let (w, nf) = to_normal_forms(&c, &Observable::single(p("ZI"))).unwrap().remove(0);
        assert_eq!(w, 1.0);
        let gens: Vec<String> = nf.generators.iter().map(|g| g.pauli.to_string()).collect();
        assert_eq!(gens, ["XI", "XI", "IX"]);
        assert_eq!(nf.observable, p("ZI"));
    }

    #[test]
    fn one_normal_form_per_term() {
        let c = Circuit::new(2, 0, 1).with(Gate::ry(1, ParamRef::theta(0)));
        let obs = Observable::default().add(0.5, p("ZI")).add(-2.0, p("XX"));
        let nfs = to_normal_forms(&c, &obs).unwrap();
        assert_eq!(nfs.len(), 2);
        assert_eq!(nfs[1].0, -2.0);
        assert_eq!(nfs[1].1.generators.len(), 1);
    }

    #[test]
    fn observable_width_checked() {
        let c = Circuit::new(2, 0, 0);
        assert!(to_normal_forms(&c, &Observable::single(p("Z"))).is_err());
    }

    #[test]
    fn file_round_trip_and_unknown_keys() {
        let text = r#"{
            "name": "doubled",
            "n_qubits": 2, "d": 2, "w": 0,
            "gates": [
                {"type": "rx", "qubit": 0, "param": {"kind": "feature", "index": 0}},
                {"type": "rx", "qubit": 0, "param": {"kind": "feature", "index": 0}},
                {"type": "rx", "qubit": 1, "param": {"kind": "feature", "index": 1}},
                {"type": "cnot", "qubits": [0, 1]}
            ],
            "observable": [{"weight": 1.0, "pauli": "ZI"}]
        }"#;
        let m = Model::from_json_str(text).unwrap();
        assert_eq!(m.circuit.gates.len(), 4);
        assert_eq!(m.circuit.encoding_counts(), vec![2, 1]);
        let again = Model::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(again, m);

        let bad = text.replace("\"w\": 0", "\"w\": 0, \"colour\": 3");
        assert!(matches!(Model::from_json_str(&bad), Err(Error::Parse(_))));
        let bad_gate = text.replace("\"qubit\": 1,", "\"qubit\": 1, \"angle\": 2,");
        assert!(Model::from_json_str(&bad_gate).is_err());
        let bad_arity = text.replace("[0, 1]", "[0]");
        assert!(Model::from_json_str(&bad_arity).is_err());
        let invalid = text.replace("\"qubits\": [0, 1]", "\"qubits\": [0, 0]");
        assert!(matches!(Model::from_json_str(&invalid), Err(Error::InvalidCircuit(_))));
    }
}
