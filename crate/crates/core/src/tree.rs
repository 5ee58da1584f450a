//! Binary-tree expansion of a normal form into trigonometric leaf terms.
//!
//! Generators are peeled off from the last one. A generator commuting with
//! the node's observable passes it through unchanged; an anticommuting one
//! splits the node into a `cos φ` child (observable kept) and a `sin φ` child
//! (observable replaced by `i·P·O`). Each leaf contributes
//! `⟨0|O_leaf|0⟩ · Π sin^s cos^c` and leaves with equal exponent signatures
//! are merged.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::circuit::{NormalForm, ParamKind};
use crate::error::{Error, Result};
use crate::pauli::{Phase, SignedPauli};
use crate::scalar::{
    gaussian_from_i, gaussian_to_complex, is_gaussian_zero, rational_from_f64, GaussianRational, Real,
};

pub const DEFAULT_LEAF_CAP: usize = 1 << 22;

/// One merged term `k · Π_j sin(x_j)^{s_j} cos(x_j)^{c_j} · Π_k sin(θ_k)^{s'_k} cos(θ_k)^{c'_k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafTerm {
    pub s: Vec<u32>,
    pub c: Vec<u32>,
    pub s_prime: Vec<u32>,
    pub c_prime: Vec<u32>,
    pub k: GaussianRational,
}

impl LeafTerm {
    pub fn d(&self) -> usize {
        self.s.len()
    }

    pub fn w(&self) -> usize {
        self.s_prime.len()
    }

    /// Total number of trigonometric factors.
    pub fn degree(&self) -> u32 {
        self.s.iter().chain(&self.c).chain(&self.s_prime).chain(&self.c_prime).sum()
    }
}

#[derive(Clone, Debug)]
pub struct TreeOptions {
    /// Abort once more than this many (un-merged) leaves were reached.
    pub leaf_cap: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            leaf_cap: DEFAULT_LEAF_CAP,
        }
    }
}

/// Merged leaves of one or more expansions.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub d: usize,
    pub w: usize,
    pub leaves: Vec<LeafTerm>,
    /// Leaves reached before merging and before dropping zero expectations.
    pub raw_leaf_count: usize,
}

type Signature = Vec<u32>;

struct Expander<'a> {
    nf: &'a NormalForm,
    cap: usize,
    visited: usize,
    sig: Signature,
    acc: BTreeMap<Signature, (i64, i64)>,
}

impl Expander<'_> {
    fn slot(&self, index: usize, sine: bool) -> usize {
        let (d, w) = (self.nf.d, self.nf.w);
        let param = self.nf.generators[index].param;
        match (param.kind, sine) {
            (ParamKind::Feature, true) => param.index,
            (ParamKind::Feature, false) => d + param.index,
            (ParamKind::Variational, true) => 2 * d + param.index,
            (ParamKind::Variational, false) => 2 * d + w + param.index,
        }
    }

    /// Expands the node holding generators `[0, remaining)` and `observable`.
    fn expand(&mut self, remaining: usize, observable: SignedPauli) -> Result<()> {
        if remaining == 0 {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::LeafCapExceeded { cap: self.cap });
            }
            if let Some(phase) = observable.zero_state_expectation() {
                let (re, im) = phase.to_int_pair();
                let e = self.acc.entry(self.sig.clone()).or_insert((0, 0));
                e.0 += re;
                e.1 += im;
            }
            return Ok(());
        }
        let index = remaining - 1;
        let generator = &self.nf.generators[index].pauli;
        if generator.commutes(&observable)? {
            return self.expand(index, observable);
        }
        let rotated = generator.multiply(&observable)?.scaled(Phase::I);

        let cos_slot = self.slot(index, false);
        self.sig[cos_slot] += 1;
        self.expand(index, observable)?;
        self.sig[cos_slot] -= 1;

        let sin_slot = self.slot(index, true);
        self.sig[sin_slot] += 1;
        self.expand(index, rotated)?;
        self.sig[sin_slot] -= 1;
        Ok(())
    }
}

fn check_normal_form(nf: &NormalForm) -> Result<()> {
    for g in &nf.generators {
        if g.pauli.n_qubits() != nf.n_qubits {
            return Err(Error::WidthMismatch {
                left: nf.n_qubits,
                right: g.pauli.n_qubits(),
            });
        }
        let limit = match g.param.kind {
            ParamKind::Feature => nf.d,
            ParamKind::Variational => nf.w,
        };
        if g.param.index >= limit {
            return Err(Error::InvalidInput(format!(
                "generator parameter {:?} out of range (limit {limit})",
                g.param
            )));
        }
    }
    if nf.observable.n_qubits() != nf.n_qubits {
        return Err(Error::WidthMismatch {
            left: nf.n_qubits,
            right: nf.observable.n_qubits(),
        });
    }
    Ok(())
}

fn expand_one(nf: &NormalForm, cap: usize) -> Result<(BTreeMap<Signature, (i64, i64)>, usize)> {
    check_normal_form(nf)?;
    let mut ex = Expander {
        nf,
        cap,
        visited: 0,
        sig: vec![0; 2 * nf.d + 2 * nf.w],
        acc: BTreeMap::new(),
    };
    ex.expand(nf.generators.len(), nf.observable.clone())?;
    Ok((ex.acc, ex.visited))
}

fn split_signature(sig: &[u32], d: usize, w: usize, k: GaussianRational) -> LeafTerm {
    LeafTerm {
        s: sig[..d].to_vec(),
        c: sig[d..2 * d].to_vec(),
        s_prime: sig[2 * d..2 * d + w].to_vec(),
        c_prime: sig[2 * d + w..].to_vec(),
        k,
    }
}

/// Expands a single normal form with unit weight.
pub fn build_leaves(nf: &NormalForm) -> Result<Vec<LeafTerm>> {
    Ok(expand_weighted(&[(1.0, nf.clone())], &TreeOptions::default())?.leaves)
}

/// Expands every weighted normal form and merges all leaves; each term's
/// constants are scaled by the exact rational value of its weight.
pub fn expand_weighted(terms: &[(f64, NormalForm)], options: &TreeOptions) -> Result<Expansion> {
    let (d, w) = terms
        .first()
        .map(|(_, nf)| (nf.d, nf.w))
        .ok_or_else(|| Error::InvalidInput("no normal forms to expand".into()))?;
    let mut merged: BTreeMap<Signature, GaussianRational> = BTreeMap::new();
    let mut visited = 0usize;
    for (weight, nf) in terms {
        if (nf.d, nf.w) != (d, w) {
            return Err(Error::InvalidInput("normal forms disagree on (d, w)".into()));
        }
        let weight = rational_from_f64(*weight)
            .ok_or_else(|| Error::InvalidInput(format!("non-finite weight {weight}")))?;
        let (acc, n) = expand_one(nf, options.leaf_cap.saturating_sub(visited))
            .map_err(|e| match e {
                Error::LeafCapExceeded { .. } => Error::LeafCapExceeded { cap: options.leaf_cap },
                e => e,
            })?;
        visited += n;
        for (sig, (re, im)) in acc {
            let k = gaussian_from_i(re, im);
            let k = Complex::new(&k.re * &weight, &k.im * &weight);
            let e = merged.entry(sig).or_insert_with(GaussianRational::zero);
            *e = &*e + k;
        }
    }
    let leaves = merged
        .into_iter()
        .filter(|(_, k)| !is_gaussian_zero(k))
        .map(|(sig, k)| split_signature(&sig, d, w, k))
        .collect();
    Ok(Expansion {
        d,
        w,
        leaves,
        raw_leaf_count: visited,
    })
}

/// Complex value of `Σ k · Π sin^s cos^c` at `(x, θ)`.
pub fn evaluate_reconstruction_complex<F: Real>(leaves: &[LeafTerm], x: &[F], theta: &[F]) -> Result<Complex<F>> {
    let (sx, cx): (Vec<F>, Vec<F>) = x.iter().map(|v| (v.sin(), v.cos())).unzip();
    let (st, ct): (Vec<F>, Vec<F>) = theta.iter().map(|v| (v.sin(), v.cos())).unzip();
    let mut total = Complex::new(F::zero(), F::zero());
    for leaf in leaves {
        if leaf.d() != x.len() {
            return Err(Error::DimensionMismatch {
                what: "x",
                expected: leaf.d(),
                got: x.len(),
            });
        }
        if leaf.w() != theta.len() {
            return Err(Error::DimensionMismatch {
                what: "theta",
                expected: leaf.w(),
                got: theta.len(),
            });
        }
        let mut prod = F::one();
        for j in 0..leaf.d() {
            prod *= sx[j].powi(leaf.s[j] as i32) * cx[j].powi(leaf.c[j] as i32);
        }
        for k in 0..leaf.w() {
            prod *= st[k].powi(leaf.s_prime[k] as i32) * ct[k].powi(leaf.c_prime[k] as i32);
        }
        total += gaussian_to_complex::<F>(&leaf.k) * prod;
    }
    Ok(total)
}

/// Real value of the reconstructed expectation.
pub fn evaluate_reconstruction<F: Real>(leaves: &[LeafTerm], x: &[F], theta: &[F]) -> Result<F> {
    Ok(evaluate_reconstruction_complex(leaves, x, theta)?.re)
}

// ---------------------------------------------------------------------------
// Leaf dump format

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafRecord {
    pub s: Vec<u32>,
    pub c: Vec<u32>,
    pub s_prime: Vec<u32>,
    pub c_prime: Vec<u32>,
    /// Exact rational, e.g. `"-1"` or `"3/4"`.
    pub k_re: String,
    pub k_im: String,
}

impl From<&LeafTerm> for LeafRecord {
    fn from(l: &LeafTerm) -> Self {
        LeafRecord {
            s: l.s.clone(),
            c: l.c.clone(),
            s_prime: l.s_prime.clone(),
            c_prime: l.c_prime.clone(),
            k_re: l.k.re.to_string(),
            k_im: l.k.im.to_string(),
        }
    }
}

impl TryFrom<&LeafRecord> for LeafTerm {
    type Error = Error;
    fn try_from(r: &LeafRecord) -> Result<Self> {
        let parse = |s: &str| {
            s.parse()
                .map_err(|_| Error::Parse(format!("invalid rational '{s}'")))
        };
        if r.s.len() != r.c.len() || r.s_prime.len() != r.c_prime.len() {
            return Err(Error::Parse("sine/cosine vectors differ in length".into()));
        }
        Ok(LeafTerm {
            s: r.s.clone(),
            c: r.c.clone(),
            s_prime: r.s_prime.clone(),
            c_prime: r.c_prime.clone(),
            k: Complex::new(parse(&r.k_re)?, parse(&r.k_im)?),
        })
    }
}

pub fn leaves_to_json(leaves: &[LeafTerm]) -> String {
    let records: Vec<LeafRecord> = leaves.iter().map(LeafRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("leaf records serialize")
}

pub fn leaves_from_json(text: &str) -> Result<Vec<LeafTerm>> {
    let records: Vec<LeafRecord> = serde_json::from_str(text)?;
    records.iter().map(LeafTerm::try_from).collect()
}
